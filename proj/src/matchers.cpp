// Matcher implementations. All tree-based variants share one engine,
// parameterized by node store backing, eager/lazy ramification, per-node
// dispatch (inlined loop vs type-erased callback), full-copy commits for
// the baseline, parallel search mode, and message filtering. Their
// observable match sequences are identical; they differ only in the work
// performed. BruteForceMatcher is the reference algorithm and testing
// oracle.

#include "joins/matcher.hpp"

#include "joins/guard_filter.hpp"
#include "joins/matching_tree.hpp"

#include <array>
#include <thread>

namespace joins {

namespace {

struct AlgorithmName {
  AlgorithmId id;
  std::string_view name;
};

constexpr std::array<AlgorithmName, 12> kAlgorithmNames{{
    {AlgorithmId::BruteForce, "brute-force"},
    {AlgorithmId::StatefulTree, "stateful"},
    {AlgorithmId::MutableStateful, "mutable"},
    {AlgorithmId::LazyMutable, "lazy-mutable"},
    {AlgorithmId::WhileLazy, "while-lazy"},
    {AlgorithmId::WhileEager, "while-eager"},
    {AlgorithmId::EagerParallel, "eager-parallel"},
    {AlgorithmId::LazyParallel, "lazy-parallel"},
    {AlgorithmId::FilteringWhile, "filtering-while"},
    {AlgorithmId::FilteringParallel, "filtering-parallel"},
    {AlgorithmId::ArrayWhile, "array-while"},
    {AlgorithmId::ArrayParallel, "array-parallel"},
}};

constexpr std::array<AlgorithmId, 12> kAllAlgorithms{
    AlgorithmId::BruteForce,     AlgorithmId::StatefulTree,
    AlgorithmId::MutableStateful, AlgorithmId::LazyMutable,
    AlgorithmId::WhileLazy,      AlgorithmId::WhileEager,
    AlgorithmId::EagerParallel,  AlgorithmId::LazyParallel,
    AlgorithmId::FilteringWhile, AlgorithmId::FilteringParallel,
    AlgorithmId::ArrayWhile,     AlgorithmId::ArrayParallel,
};

}  // namespace

std::string_view to_string(AlgorithmId id) {
  for (const auto& [aid, name] : kAlgorithmNames)
    if (aid == id) return name;
  return "unknown";
}

std::optional<AlgorithmId> algorithm_from_string(std::string_view name) {
  for (const auto& [aid, n] : kAlgorithmNames)
    if (n == name) return aid;
  return std::nullopt;
}

std::span<const AlgorithmId> all_algorithms() { return kAllAlgorithms; }

unsigned default_worker_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  unsigned p = 1;
  while (p < hw) p <<= 1;
  return p;
}

namespace {

// ---------------------------------------------------------------------------
// Shared take/fire loop

class MatcherCore : public Matcher {
public:
  explicit MatcherCore(JoinDefinition defn) : defn_(std::move(defn)) {
    if (defn_.rules.empty())
      throw ContractViolation("JoinDefinition: at least one rule is required");
    for (const ReactionRule& rule : defn_.rules)
      for (const ConstructorPattern& p : rule.patterns)
        arity_by_tag_.emplace(p.type, p.arity);
  }

  std::optional<Result> apply(Mailbox& mailbox, ActorContext& ctx) final {
    for (;;) {
      std::optional<Message> msg = mailbox.take();
      if (!msg) return std::nullopt;  // source exhausted
      ++messages_taken_;
      check_arity(*msg);
      if (!admit(*msg)) {
        store_.skip_index();
        ++messages_filtered_;
        continue;
      }
      const MsgIndex idx = store_.add(std::move(*msg));
      std::optional<CandidateMatch> best = process_arrival(idx, store_.at(idx));
      if (!best) continue;
      return fire(*best, ctx);
    }
  }

  std::vector<Message> stored_messages() const final {
    return store_.in_arrival_order();
  }

  void reset() override {
    store_.clear();
  }

  const JoinDefinition& definition() const final { return defn_; }

  MatcherStats stats() const override {
    MatcherStats s;
    s.messages_taken = messages_taken_;
    s.messages_filtered = messages_filtered_;
    s.messages_consumed = messages_consumed_;
    s.matches_fired = matches_fired_;
    s.guard_evaluations = guard_evals_.load(std::memory_order_relaxed);
    s.filter_evaluations = filter_evals_.load(std::memory_order_relaxed);
    return s;
  }

  std::span<const FiredMatch> trace() const final { return trace_; }

protected:
  /// Ramify/enumerate for one arrival; returns the rule-spanning fairest
  /// candidate, if any.
  virtual std::optional<CandidateMatch> process_arrival(MsgIndex idx,
                                                        const Message& msg) = 0;

  /// Admission test; false drops the message before it is stored.
  virtual bool admit(const Message&) { return true; }

  /// Post-fire cleanup of derived state (tree pruning).
  virtual void after_fire(const CandidateMatch&) {}

  Result fire(const CandidateMatch& match, ActorContext& ctx) {
    const ReactionRule& rule = defn_.rules[static_cast<std::size_t>(match.rule_index)];
    std::vector<const Payloads*> slots(rule.patterns.size(), nullptr);
    for (std::size_t pos = 0; pos < match.assignment.size(); ++pos)
      slots[pos] = &store_.at(match.assignment[pos]).fields;
    BoundArgs args{slots};
    Result result = rule.body ? rule.body(args, ctx) : Result{Continue{}};

    after_fire(match);
    store_.erase(match.node.indices());
    messages_consumed_ += match.node.size();
    ++matches_fired_;
    trace_.push_back(FiredMatch{match.rule_index, match.assignment, match.node});
    return result;
  }

  void check_arity(const Message& msg) const {
    auto it = arity_by_tag_.find(msg.type);
    if (it != arity_by_tag_.end() &&
        msg.fields.size() != static_cast<std::size_t>(it->second))
      throw ContractViolation("Matcher: message arity does not match its pattern");
  }

  JoinDefinition defn_;
  MessageStore store_;
  std::vector<FiredMatch> trace_;
  std::map<TypeTag, int> arity_by_tag_;
  std::uint64_t messages_taken_ = 0;
  std::uint64_t messages_filtered_ = 0;
  std::uint64_t messages_consumed_ = 0;
  std::uint64_t matches_fired_ = 0;
  std::atomic<std::uint64_t> guard_evals_{0};
  std::atomic<std::uint64_t> filter_evals_{0};
};

// ---------------------------------------------------------------------------
// Guard validation of complete nodes

/// Checks a complete node's assignments in fairness order against the rule
/// guard; yields the fairest satisfying one. One instance per lane: holds
/// reusable scratch.
class RuleValidator {
public:
  RuleValidator(const ReactionRule* rule, const RuleShape* shape, int rule_index,
                const MessageStore* store, std::atomic<std::uint64_t>* guard_evals)
      : rule_(rule), shape_(shape), rule_index_(rule_index), store_(store),
        guard_evals_(guard_evals) {}

  std::optional<CandidateMatch> operator()(const IndexSeq& seq, const NodeBins& bins) {
    std::optional<CandidateMatch> found;
    for_each_assignment(
        *shape_, [&](int o) { return bins.bin(o); }, scratch_,
        [&](std::span<const MsgIndex> tuple) {
          guard_evals_->fetch_add(1, std::memory_order_relaxed);
          if (guard_passes(tuple)) {
            found = CandidateMatch{rule_index_,
                                   std::vector<MsgIndex>(tuple.begin(), tuple.end()),
                                   seq};
            return true;
          }
          return false;
        });
    return found;
  }

private:
  bool guard_passes(std::span<const MsgIndex> tuple) {
    slots_.assign(rule_->patterns.size(), nullptr);
    for (std::size_t pos = 0; pos < tuple.size(); ++pos)
      slots_[pos] = &store_->at(tuple[pos]).fields;
    BoundArgs args{slots_};
    for (const GuardClause& clause : rule_->guard)
      if (!clause.predicate(args)) return false;
    return true;
  }

  const ReactionRule* rule_;
  const RuleShape* shape_;
  int rule_index_;
  const MessageStore* store_;
  std::atomic<std::uint64_t>* guard_evals_;
  AssignScratch scratch_;
  std::vector<const Payloads*> slots_;
};

// ---------------------------------------------------------------------------
// Tree-based engine

enum class ParMode { None, Eager, Lazy };

struct EnginePolicy {
  bool lazy = true;
  bool erased = false;   // route per-node work through std::function
  bool rebuild = false;  // commit via full-copy store update
  ParMode par = ParMode::None;
  bool filtering = false;
};

template <class Store>
class TreeMatcher final : public MatcherCore {
public:
  TreeMatcher(JoinDefinition defn, EnginePolicy policy, unsigned workers)
      : MatcherCore(std::move(defn)), policy_(policy), workers_(workers) {
    for (std::size_t r = 0; r < defn_.rules.size(); ++r) {
      shapes_.push_back(RuleShape::of(defn_.rules[r]));
      trees_.emplace_back(shapes_.back(), static_cast<int>(r));
    }
    // Shape pointers must be stable before validators capture them.
    validators_.reserve(defn_.rules.size());
    for (std::size_t r = 0; r < defn_.rules.size(); ++r)
      validators_.push_back(make_validator(r));
    if (policy_.filtering) filter_ = DefinitionFilter::build(defn_);
  }

  void reset() override {
    MatcherCore::reset();
    for (auto& tree : trees_) tree.reset();
  }

  MatcherStats stats() const override {
    MatcherStats s = MatcherCore::stats();
    for (const auto& tree : trees_) {
      s.nodes_created += tree.nodes_created();
      s.nodes_inserted += tree.nodes_inserted();
    }
    return s;
  }

protected:
  bool admit(const Message& msg) override {
    if (!policy_.filtering) return true;
    return filter_.admit(msg.type, msg.fields, &filter_evals_);
  }

  std::optional<CandidateMatch> process_arrival(MsgIndex idx,
                                                const Message& msg) override {
    std::optional<CandidateMatch> best;
    for (std::size_t r = 0; r < trees_.size(); ++r) {
      std::optional<CandidateMatch> cand = ramify_rule(r, idx, msg.type);
      if (cand && (!best || match_fairness_order(*cand, *best) < 0))
        best = std::move(cand);
    }
    return best;
  }

  void after_fire(const CandidateMatch& match) override {
    for (auto& tree : trees_) tree.prune(match.node.indices());
  }

private:
  RuleValidator make_validator(std::size_t r) {
    return RuleValidator(&defn_.rules[r], &shapes_[r], static_cast<int>(r), &store_,
                         &guard_evals_);
  }

  std::optional<CandidateMatch> ramify_rule(std::size_t r, MsgIndex idx,
                                            TypeTag tag) {
    MatchingTree<Store>& tree = trees_[r];
    switch (policy_.par) {
      case ParMode::Lazy:
        return tree.ramify_lazy_parallel(idx, tag, workers_,
                                         [&] { return make_validator(r); });
      case ParMode::Eager: {
        std::vector<TreeNode> completes = tree.ramify_eager_parallel(idx, tag, workers_);
        return first_valid(r, completes);
      }
      case ParMode::None:
        break;
    }
    if (policy_.lazy)
      return tree.ramify_lazy(idx, tag, validators_[r], policy_.erased);
    std::vector<TreeNode> completes =
        tree.ramify_eager(idx, tag, policy_.erased, policy_.rebuild);
    return first_valid(r, completes);
  }

  std::optional<CandidateMatch> first_valid(std::size_t r,
                                            std::vector<TreeNode>& completes) {
    for (TreeNode& node : completes)
      if (auto match = validators_[r](node.seq, node.bins)) return match;
    return std::nullopt;
  }

  EnginePolicy policy_;
  unsigned workers_;
  std::vector<RuleShape> shapes_;
  std::vector<MatchingTree<Store>> trees_;
  std::vector<RuleValidator> validators_;
  DefinitionFilter filter_;
};

// ---------------------------------------------------------------------------
// Brute force

/// Enumerates every type-respecting combination and permutation over the
/// whole store for every rule, then fires the fairness-minimal candidate
/// that satisfies its guard. Reference semantics for all other matchers.
class BruteForceMatcher final : public MatcherCore {
public:
  explicit BruteForceMatcher(JoinDefinition defn) : MatcherCore(std::move(defn)) {
    for (const ReactionRule& rule : defn_.rules)
      shapes_.push_back(RuleShape::of(rule));
  }

protected:
  std::optional<CandidateMatch> process_arrival(MsgIndex, const Message&) override {
    std::vector<CandidateMatch> candidates;
    for (std::size_t r = 0; r < defn_.rules.size(); ++r)
      gather_rule_candidates(r, candidates);
    std::sort(candidates.begin(), candidates.end(),
              [](const CandidateMatch& a, const CandidateMatch& b) {
                return match_fairness_order(a, b) < 0;
              });
    for (const CandidateMatch& cand : candidates) {
      guard_evals_.fetch_add(1, std::memory_order_relaxed);
      if (guard_passes(cand)) return cand;
    }
    return std::nullopt;
  }

private:
  void gather_rule_candidates(std::size_t r, std::vector<CandidateMatch>& out) {
    const RuleShape& shape = shapes_[r];
    std::vector<MsgIndex> tuple(static_cast<std::size_t>(shape.total_positions));
    gather_from(r, shape, 0, tuple, out);
  }

  void gather_from(std::size_t r, const RuleShape& shape, int position,
                   std::vector<MsgIndex>& tuple, std::vector<CandidateMatch>& out) {
    if (position == shape.total_positions) {
      std::vector<MsgIndex> sorted(tuple);
      std::sort(sorted.begin(), sorted.end());
      out.push_back(CandidateMatch{static_cast<int>(r), tuple,
                                   IndexSeq::of_sorted_unchecked(std::move(sorted))});
      return;
    }
    const int ordinal = shape.ordinal_by_position[static_cast<std::size_t>(position)];
    for (MsgIndex idx : store_.indices_of_type(shape.tags[static_cast<std::size_t>(ordinal)])) {
      bool used = false;
      for (int p = 0; p < position; ++p)
        if (tuple[static_cast<std::size_t>(p)] == idx) {
          used = true;
          break;
        }
      if (used) continue;
      tuple[static_cast<std::size_t>(position)] = idx;
      gather_from(r, shape, position + 1, tuple, out);
    }
  }

  bool guard_passes(const CandidateMatch& cand) {
    const ReactionRule& rule = defn_.rules[static_cast<std::size_t>(cand.rule_index)];
    std::vector<const Payloads*> slots(rule.patterns.size(), nullptr);
    for (std::size_t pos = 0; pos < cand.assignment.size(); ++pos)
      slots[pos] = &store_.at(cand.assignment[pos]).fields;
    BoundArgs args{slots};
    for (const GuardClause& clause : rule.guard)
      if (!clause.predicate(args)) return false;
    return true;
  }

  std::vector<RuleShape> shapes_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Factory

std::shared_ptr<Matcher> make_matcher(AlgorithmId id, JoinDefinition defn,
                                      MatcherOptions options) {
  const unsigned workers =
      options.workers > 0 ? options.workers : default_worker_count();

  auto map_tree = [&](EnginePolicy p) {
    return std::make_shared<TreeMatcher<MapNodeStore>>(std::move(defn), p, workers);
  };
  auto array_tree = [&](EnginePolicy p) {
    return std::make_shared<TreeMatcher<ArrayNodeStore>>(std::move(defn), p, workers);
  };

  switch (id) {
    case AlgorithmId::BruteForce:
      return std::make_shared<BruteForceMatcher>(std::move(defn));
    case AlgorithmId::StatefulTree:
      return map_tree({.lazy = false, .erased = true, .rebuild = true});
    case AlgorithmId::MutableStateful:
      return map_tree({.lazy = false, .erased = true});
    case AlgorithmId::LazyMutable:
      return map_tree({.lazy = true, .erased = true});
    case AlgorithmId::WhileLazy:
      return map_tree({.lazy = true});
    case AlgorithmId::WhileEager:
      return map_tree({.lazy = false});
    case AlgorithmId::EagerParallel:
      return map_tree({.lazy = false, .par = ParMode::Eager});
    case AlgorithmId::LazyParallel:
      return map_tree({.lazy = true, .par = ParMode::Lazy});
    case AlgorithmId::FilteringWhile:
      return map_tree({.lazy = true, .filtering = true});
    case AlgorithmId::FilteringParallel:
      return map_tree({.lazy = true, .par = ParMode::Lazy, .filtering = true});
    case AlgorithmId::ArrayWhile:
      return array_tree({.lazy = true});
    case AlgorithmId::ArrayParallel:
      return array_tree({.lazy = true, .par = ParMode::Lazy});
  }
  throw ContractViolation("make_matcher: unknown algorithm");
}

}  // namespace joins
