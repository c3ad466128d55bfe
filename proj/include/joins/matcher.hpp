// The matcher family: one shared interface, a brute-force reference
// algorithm, and the tree-based variants. A matcher owns the messages it
// has taken from the mailbox but not yet consumed; apply() blocks until
// some rule fires and returns that rule body's Result, or signals source
// exhaustion when the mailbox closes.

#pragma once

#include "joins/core.hpp"
#include "joins/mailbox.hpp"

#include <atomic>
#include <map>

namespace joins {

// ---------------------------------------------------------------------------
// Message store

/// Messages taken but not consumed, keyed by arrival index (dense, starting
/// at 1). Maintains per-type index bins for candidate enumeration.
class MessageStore {
public:
  MsgIndex add(Message m) {
    const MsgIndex idx = next_++;
    bins_[m.type].push_back(idx);
    entries_.emplace(idx, std::move(m));
    return idx;
  }

  /// Burns one arrival index without storing anything. Messages discarded by
  /// admission filters still consume an index so match traces line up across
  /// filtering and non-filtering variants.
  void skip_index() { ++next_; }

  const Message& at(MsgIndex idx) const {
    auto it = entries_.find(idx);
    if (it == entries_.end()) throw ContractViolation("MessageStore: unknown index");
    return it->second;
  }

  void erase(std::span<const MsgIndex> indices) {
    for (MsgIndex idx : indices) {
      auto it = entries_.find(idx);
      if (it == entries_.end()) continue;
      auto& bin = bins_[it->second.type];
      bin.erase(std::lower_bound(bin.begin(), bin.end(), idx));
      entries_.erase(it);
    }
  }

  std::span<const MsgIndex> indices_of_type(TypeTag tag) const {
    auto it = bins_.find(tag);
    if (it == bins_.end()) return {};
    return it->second;
  }

  std::vector<Message> in_arrival_order() const {
    std::vector<Message> out;
    out.reserve(entries_.size());
    for (const auto& [idx, msg] : entries_) out.push_back(msg);
    return out;
  }

  TypeTag type_of(MsgIndex idx) const { return at(idx).type; }
  std::size_t size() const { return entries_.size(); }
  MsgIndex next_index() const { return next_; }

  void clear() {
    entries_.clear();
    bins_.clear();
    next_ = 1;
  }

private:
  std::map<MsgIndex, Message> entries_;
  std::map<TypeTag, std::vector<MsgIndex>> bins_;
  MsgIndex next_ = 1;
};

// ---------------------------------------------------------------------------
// Algorithms

enum class AlgorithmId {
  BruteForce,
  StatefulTree,
  MutableStateful,
  LazyMutable,
  WhileLazy,
  WhileEager,
  EagerParallel,
  LazyParallel,
  FilteringWhile,
  FilteringParallel,
  ArrayWhile,
  ArrayParallel,
};

std::string_view to_string(AlgorithmId id);
std::optional<AlgorithmId> algorithm_from_string(std::string_view name);
std::span<const AlgorithmId> all_algorithms();

// ---------------------------------------------------------------------------
// Instrumentation

struct MatcherStats {
  std::uint64_t messages_taken = 0;
  std::uint64_t messages_filtered = 0;
  std::uint64_t messages_consumed = 0;
  std::uint64_t matches_fired = 0;
  std::uint64_t guard_evaluations = 0;   // full-conjunction evaluations
  std::uint64_t filter_evaluations = 0;  // admission clause evaluations
  std::uint64_t nodes_created = 0;
  std::uint64_t nodes_inserted = 0;
};

/// One fired rule, as observed by tests and the oracle comparison.
struct FiredMatch {
  int rule_index = 0;
  std::vector<MsgIndex> assignment;
  IndexSeq consumed;

  bool operator==(const FiredMatch&) const = default;
};

// ---------------------------------------------------------------------------
// Matcher interface

class Matcher {
public:
  virtual ~Matcher() = default;

  /// Blocks until some rule fires, returning that body's Result; returns
  /// nothing when the mailbox is closed and drained.
  virtual std::optional<Result> apply(Mailbox& mailbox, ActorContext& ctx) = 0;

  /// Messages taken from the mailbox but not consumed, in arrival order.
  virtual std::vector<Message> stored_messages() const = 0;

  /// Drops all matching state (trees, store, index counter); used when an
  /// actor switches away so the matcher can be reused fresh. Cumulative
  /// statistics are kept.
  virtual void reset() = 0;

  virtual const JoinDefinition& definition() const = 0;
  virtual MatcherStats stats() const = 0;
  virtual std::span<const FiredMatch> trace() const = 0;
};

struct MatcherOptions {
  unsigned workers = 0;  // 0 = default_worker_count()
};

/// Smallest power of two >= the hardware's available parallelism.
unsigned default_worker_count();

std::shared_ptr<Matcher> make_matcher(AlgorithmId id, JoinDefinition defn,
                                      MatcherOptions options = {});

}  // namespace joins
