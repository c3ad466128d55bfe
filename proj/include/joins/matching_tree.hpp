// The matching tree of one reaction rule: ordered storage of partial
// matches, ramification (eager, lazy, and parallel), pruning, and
// partitioning.
//
// Nodes are index sequences plus satellite bins grouping each node's
// indices by message type. Iteration order always equals node_order, which
// is the depth-first left-to-right fairness order of the conceptual tree.
// Complete nodes (holding just enough messages of each type) are reported
// to the caller and never stored. Two interchangeable node stores are
// provided: a balanced ordered map and a sorted contiguous array with
// batch merge insertion.
//
// Ramification semantics shared by all strategies: traversing the current
// nodes in order, each node whose bin for the incoming type is below
// capacity produces a child. Complete children are handed to the caller;
// incomplete children are buffered and committed only if no match is
// accepted. When a match is accepted the buffer is dropped: every child of
// this ramification contains the new index, which the accepted match is
// about to consume, so the nodes would be pruned immediately anyway.

#pragma once

#include "joins/core.hpp"

#include <atomic>
#include <future>
#include <map>

namespace joins {

/// Per-node satellite data: the node's indices grouped by rule type
/// ordinal, each group ascending.
class NodeBins {
public:
  NodeBins() = default;
  explicit NodeBins(std::size_t type_count) : per_type_(type_count) {}

  NodeBins child_with(int ordinal, MsgIndex idx) const {
    NodeBins c(*this);
    c.per_type_[static_cast<std::size_t>(ordinal)].push_back(idx);
    return c;
  }

  std::span<const MsgIndex> bin(int ordinal) const {
    return per_type_[static_cast<std::size_t>(ordinal)];
  }

  int count(int ordinal) const {
    return static_cast<int>(per_type_[static_cast<std::size_t>(ordinal)].size());
  }

  std::size_t type_count() const { return per_type_.size(); }

  bool operator==(const NodeBins&) const = default;

private:
  std::vector<std::vector<MsgIndex>> per_type_;
};

struct TreeNode {
  IndexSeq seq;
  NodeBins bins;
};

inline bool tree_node_less(const TreeNode& a, const TreeNode& b) {
  return node_order(a.seq, b.seq) < 0;
}

/// Merge of two node_order-sorted, disjoint node arrays; stable, length
/// preserving.
inline std::vector<TreeNode> sorted_merge(std::vector<TreeNode> existing,
                                          std::vector<TreeNode> additions) {
  std::vector<TreeNode> out;
  out.reserve(existing.size() + additions.size());
  std::merge(std::make_move_iterator(existing.begin()),
             std::make_move_iterator(existing.end()),
             std::make_move_iterator(additions.begin()),
             std::make_move_iterator(additions.end()), std::back_inserter(out),
             tree_node_less);
  return out;
}

// ---------------------------------------------------------------------------
// Node stores

/// Ordered-map node store (red-black tree).
class MapNodeStore {
public:
  using map_type = std::map<IndexSeq, NodeBins>;
  using value_type = map_type::value_type;
  using const_iterator = map_type::const_iterator;
  using Range = std::pair<const_iterator, const_iterator>;

  static const IndexSeq& seq_of(const value_type& v) { return v.first; }
  static const NodeBins& bins_of(const value_type& v) { return v.second; }

  void init_root(NodeBins root) {
    nodes_.clear();
    nodes_.emplace(IndexSeq{}, std::move(root));
  }

  const_iterator begin() const { return nodes_.begin(); }
  const_iterator end() const { return nodes_.end(); }
  std::size_t size() const { return nodes_.size(); }

  void insert_sorted(std::vector<TreeNode>& additions) {
    for (TreeNode& n : additions) nodes_.emplace(std::move(n.seq), std::move(n.bins));
  }

  /// Functional-style update: copies the whole map, then inserts. Used by
  /// the baseline matcher to reproduce immutable-tree update costs.
  void rebuild_with(std::vector<TreeNode>& additions) {
    map_type next(nodes_);
    for (TreeNode& n : additions) next.emplace(std::move(n.seq), std::move(n.bins));
    nodes_.swap(next);
  }

  void prune(std::span<const MsgIndex> consumed) {
    for (auto it = nodes_.begin(); it != nodes_.end();) {
      if (it->first.intersects(consumed))
        it = nodes_.erase(it);
      else
        ++it;
    }
  }

  std::vector<Range> partition(unsigned n) const {
    return partition_iters(nodes_.begin(), nodes_.end(), nodes_.size(), n);
  }

  template <class Iter>
  static std::vector<std::pair<Iter, Iter>> partition_iters(Iter begin, Iter end,
                                                            std::size_t size,
                                                            unsigned n) {
    std::vector<std::pair<Iter, Iter>> out;
    if (size == 0 || n == 0) return out;
    const std::size_t chunk = (size + n - 1) / n;
    Iter it = begin;
    std::size_t remaining = size;
    while (remaining > 0) {
      const std::size_t take = std::min(chunk, remaining);
      Iter first = it;
      std::advance(it, static_cast<std::ptrdiff_t>(take));
      out.emplace_back(first, it);
      remaining -= take;
    }
    (void)end;
    return out;
  }

private:
  map_type nodes_;
};

/// Sorted contiguous array node store with batch merge insertion.
class ArrayNodeStore {
public:
  using value_type = TreeNode;
  using const_iterator = std::vector<TreeNode>::const_iterator;
  using Range = std::pair<const_iterator, const_iterator>;

  static const IndexSeq& seq_of(const value_type& v) { return v.seq; }
  static const NodeBins& bins_of(const value_type& v) { return v.bins; }

  void init_root(NodeBins root) {
    nodes_.clear();
    nodes_.push_back(TreeNode{IndexSeq{}, std::move(root)});
  }

  const_iterator begin() const { return nodes_.begin(); }
  const_iterator end() const { return nodes_.end(); }
  std::size_t size() const { return nodes_.size(); }

  void insert_sorted(std::vector<TreeNode>& additions) {
    std::vector<TreeNode> adds(std::make_move_iterator(additions.begin()),
                               std::make_move_iterator(additions.end()));
    nodes_ = sorted_merge(std::move(nodes_), std::move(adds));
  }

  void rebuild_with(std::vector<TreeNode>& additions) { insert_sorted(additions); }

  void prune(std::span<const MsgIndex> consumed) {
    std::erase_if(nodes_,
                  [&](const TreeNode& n) { return n.seq.intersects(consumed); });
  }

  std::vector<Range> partition(unsigned n) const {
    return MapNodeStore::partition_iters(nodes_.begin(), nodes_.end(), nodes_.size(),
                                         n);
  }

private:
  std::vector<TreeNode> nodes_;
};

// ---------------------------------------------------------------------------
// The tree

template <class Store>
class MatchingTree {
public:
  using Range = typename Store::Range;

  MatchingTree(RuleShape shape, int rule_index)
      : shape_(std::move(shape)), rule_index_(rule_index) {
    store_.init_root(NodeBins(shape_.type_count()));
  }

  /// Lazy ramification. `validate` maps a complete child (seq, bins) to an
  /// optional CandidateMatch; the first success stops the traversal and the
  /// buffered incomplete children are dropped. With no success, incomplete
  /// children are committed. `erased` routes per-node work through a
  /// type-erased callback.
  template <class Validate>
  std::optional<CandidateMatch> ramify_lazy(MsgIndex idx, TypeTag tag,
                                            Validate&& validate,
                                            bool erased = false) {
    const int ordinal = note_index_and_ordinal(idx, tag);
    if (ordinal < 0) return std::nullopt;
    additions_.clear();
    std::optional<CandidateMatch> found;
    auto on_complete = [&](TreeNode&& child) {
      found = validate(child.seq, child.bins);
      return found.has_value();
    };
    run_traversal(Range{store_.begin(), store_.end()}, idx, ordinal, additions_,
                  on_complete, erased, nullptr, nodes_created_);
    if (found) {
      additions_.clear();
      return found;
    }
    commit_additions(false);
    return std::nullopt;
  }

  /// Eager ramification: full traversal; complete children are returned in
  /// node order and never stored; incomplete children are committed.
  /// `rebuild` commits through a full-copy update of the store.
  std::vector<TreeNode> ramify_eager(MsgIndex idx, TypeTag tag, bool erased = false,
                                     bool rebuild = false) {
    const int ordinal = note_index_and_ordinal(idx, tag);
    if (ordinal < 0) return {};
    additions_.clear();
    std::vector<TreeNode> completes;
    auto on_complete = [&](TreeNode&& child) {
      completes.push_back(std::move(child));
      return false;
    };
    run_traversal(Range{store_.begin(), store_.end()}, idx, ordinal, additions_,
                  on_complete, erased, nullptr, nodes_created_);
    commit_additions(rebuild);
    return completes;
  }

  /// Parallel lazy search: the tree is split into even partitions, each
  /// worker lazily ramifies its segment, and the coordinator awaits workers
  /// in segment (fairness) order. The first reported match cancels all
  /// later-segment workers and every buffered addition is dropped; if no
  /// worker reports, all additions are merged into the tree.
  ///
  /// `make_validator` produces one independent validator per worker lane.
  template <class MakeValidator>
  std::optional<CandidateMatch> ramify_lazy_parallel(MsgIndex idx, TypeTag tag,
                                                     unsigned workers,
                                                     MakeValidator&& make_validator) {
    const int ordinal = note_index_and_ordinal(idx, tag);
    if (ordinal < 0) return std::nullopt;
    auto segments = store_.partition(workers);
    if (segments.size() <= 1) {
      auto validate = make_validator();
      return ramify_lazy_prechecked(idx, ordinal, validate);
    }

    struct WorkerOut {
      std::optional<CandidateMatch> match;
      std::vector<TreeNode> additions;
      std::uint64_t created = 0;
    };
    std::atomic<bool> cancel{false};
    auto run_segment = [&](Range seg) {
      WorkerOut out;
      auto validate = make_validator();
      auto on_complete = [&](TreeNode&& child) {
        out.match = validate(child.seq, child.bins);
        return out.match.has_value();
      };
      run_traversal(seg, idx, ordinal, out.additions, on_complete, false, &cancel,
                    out.created);
      return out;
    };

    std::vector<std::future<WorkerOut>> futures;
    futures.reserve(segments.size() - 1);
    for (std::size_t k = 1; k < segments.size(); ++k)
      futures.push_back(std::async(std::launch::async, run_segment, segments[k]));

    std::optional<CandidateMatch> result;
    std::vector<std::vector<TreeNode>> addition_batches;
    auto consider = [&](WorkerOut&& out) {
      nodes_created_ += out.created;
      if (result) return;  // later segment: discard
      if (out.match) {
        result = std::move(out.match);
        cancel.store(true, std::memory_order_relaxed);
      } else {
        addition_batches.push_back(std::move(out.additions));
      }
    };

    consider(run_segment(segments[0]));
    for (auto& f : futures) consider(f.get());

    if (result) return result;

    additions_.clear();
    for (auto& batch : addition_batches)
      for (TreeNode& n : batch) additions_.push_back(std::move(n));
    commit_additions(false);
    return std::nullopt;
  }

  /// Parallel eager ramification: workers fully ramify their segments; the
  /// coordinator merges every addition and returns the complete children in
  /// segment order.
  std::vector<TreeNode> ramify_eager_parallel(MsgIndex idx, TypeTag tag,
                                              unsigned workers) {
    const int ordinal = note_index_and_ordinal(idx, tag);
    if (ordinal < 0) return {};
    auto segments = store_.partition(workers);
    if (segments.size() <= 1) {
      additions_.clear();
      std::vector<TreeNode> completes;
      auto on_complete = [&](TreeNode&& child) {
        completes.push_back(std::move(child));
        return false;
      };
      run_traversal(Range{store_.begin(), store_.end()}, idx, ordinal, additions_,
                    on_complete, false, nullptr, nodes_created_);
      commit_additions(false);
      return completes;
    }

    struct WorkerOut {
      std::vector<TreeNode> completes;
      std::vector<TreeNode> additions;
      std::uint64_t created = 0;
    };
    auto run_segment = [&](Range seg) {
      WorkerOut out;
      auto on_complete = [&](TreeNode&& child) {
        out.completes.push_back(std::move(child));
        return false;
      };
      run_traversal(seg, idx, ordinal, out.additions, on_complete, false, nullptr,
                    out.created);
      return out;
    };

    std::vector<std::future<WorkerOut>> futures;
    futures.reserve(segments.size() - 1);
    for (std::size_t k = 1; k < segments.size(); ++k)
      futures.push_back(std::async(std::launch::async, run_segment, segments[k]));

    std::vector<TreeNode> completes;
    additions_.clear();
    auto collect = [&](WorkerOut&& out) {
      nodes_created_ += out.created;
      for (TreeNode& n : out.completes) completes.push_back(std::move(n));
      for (TreeNode& n : out.additions) additions_.push_back(std::move(n));
    };
    collect(run_segment(segments[0]));
    for (auto& f : futures) collect(f.get());
    commit_additions(false);
    return completes;
  }

  /// Removes every stored node intersecting `consumed` (ascending).
  void prune(std::span<const MsgIndex> consumed) {
    if (consumed.empty()) return;
    store_.prune(consumed);
  }

  std::vector<Range> partition(unsigned n) const { return store_.partition(n); }

  void reset() {
    store_.init_root(NodeBins(shape_.type_count()));
    max_index_ = 0;
  }

  const Store& store() const { return store_; }
  const RuleShape& shape() const { return shape_; }
  int rule_index() const { return rule_index_; }
  std::size_t size() const { return store_.size(); }
  std::uint64_t nodes_created() const { return nodes_created_; }
  std::uint64_t nodes_inserted() const { return nodes_inserted_; }

  std::vector<IndexSeq> node_seqs() const {
    std::vector<IndexSeq> out;
    out.reserve(store_.size());
    for (const auto& entry : store_) out.push_back(Store::seq_of(entry));
    return out;
  }

private:
  template <class Validate>
  std::optional<CandidateMatch> ramify_lazy_prechecked(MsgIndex idx, int ordinal,
                                                       Validate& validate) {
    additions_.clear();
    std::optional<CandidateMatch> found;
    auto on_complete = [&](TreeNode&& child) {
      found = validate(child.seq, child.bins);
      return found.has_value();
    };
    run_traversal(Range{store_.begin(), store_.end()}, idx, ordinal, additions_,
                  on_complete, false, nullptr, nodes_created_);
    if (found) {
      additions_.clear();
      return found;
    }
    commit_additions(false);
    return std::nullopt;
  }

  int note_index_and_ordinal(MsgIndex idx, TypeTag tag) {
    if (idx <= max_index_)
      throw ContractViolation("MatchingTree: non-monotonic message index");
    max_index_ = idx;
    const int ordinal = shape_.ordinal_of(tag);
    if (ordinal < 0 || shape_.capacity[static_cast<std::size_t>(ordinal)] == 0)
      return -1;
    return ordinal;
  }

  template <class OnComplete>
  bool run_traversal(Range range, MsgIndex idx, int ordinal,
                     std::vector<TreeNode>& additions, OnComplete&& on_complete,
                     bool erased, const std::atomic<bool>* cancel,
                     std::uint64_t& created) const {
    auto process = [&](const typename Store::value_type& entry) -> bool {
      const IndexSeq& seq = Store::seq_of(entry);
      const NodeBins& bins = Store::bins_of(entry);
      if (bins.count(ordinal) >= shape_.capacity[static_cast<std::size_t>(ordinal)])
        return false;
      TreeNode child{seq.child_with(idx), bins.child_with(ordinal, idx)};
      ++created;
      if (child.seq.size() == static_cast<std::size_t>(shape_.total_positions))
        return on_complete(std::move(child));
      additions.push_back(std::move(child));
      return false;
    };
    if (erased) {
      std::function<bool(const typename Store::value_type&)> step = process;
      return traverse(range, step, cancel);
    }
    return traverse(range, process, cancel);
  }

  template <class Step>
  bool traverse(Range range, Step&& step, const std::atomic<bool>* cancel) const {
    for (auto it = range.first; it != range.second; ++it) {
      if (cancel && cancel->load(std::memory_order_relaxed)) return false;
      if (step(*it)) return true;
    }
    return false;
  }

  void commit_additions(bool rebuild) {
    if (additions_.empty()) return;
    std::sort(additions_.begin(), additions_.end(), tree_node_less);
    nodes_inserted_ += additions_.size();
    if (rebuild)
      store_.rebuild_with(additions_);
    else
      store_.insert_sorted(additions_);
    additions_.clear();
  }

  RuleShape shape_;
  int rule_index_ = 0;
  Store store_;
  MsgIndex max_index_ = 0;
  std::vector<TreeNode> additions_;  // reused ramification buffer
  std::uint64_t nodes_created_ = 0;
  std::uint64_t nodes_inserted_ = 0;
};

using MapMatchingTree = MatchingTree<MapNodeStore>;
using ArrayMatchingTree = MatchingTree<ArrayNodeStore>;

}  // namespace joins
