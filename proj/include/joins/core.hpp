// Core model for fair join pattern matching: messages, reaction rules,
// join definitions, and the two total orders (node order and match
// fairness order) that every matching algorithm in this library shares.
//
// The central convention: every message taken by a matcher gets a
// monotonically increasing index starting at 1. Partial matches are sets
// of such indices, kept as ascending contiguous arrays (IndexSeq). The
// fairness ordering on candidate matches prefers older messages: first by
// node order on the index set, then lexicographically on the assignment
// tuple, then by rule declaration order.

#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace joins {

using TypeTag = std::int32_t;
using MsgIndex = std::int64_t;

/// Thrown when an operation's preconditions are violated by the caller.
class ContractViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

// ---------------------------------------------------------------------------
// Message payloads

/// One payload slot of a message: empty, an integer, a string, or an
/// opaque shared reference (used to carry reply channels and matchers
/// inside messages).
class Value {
public:
  Value() = default;
  Value(std::int64_t v) : data_(v) {}
  Value(int v) : data_(static_cast<std::int64_t>(v)) {}
  Value(std::string s) : data_(std::move(s)) {}
  Value(const char* s) : data_(std::string(s)) {}

  static Value ref(std::shared_ptr<void> p) {
    Value v;
    v.data_ = std::move(p);
    return v;
  }

  bool is_null() const { return std::holds_alternative<std::monostate>(data_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(data_); }

  std::int64_t as_int() const {
    if (!is_int()) throw ContractViolation("Value: not an integer payload");
    return std::get<std::int64_t>(data_);
  }

  const std::string& as_string() const {
    if (!std::holds_alternative<std::string>(data_))
      throw ContractViolation("Value: not a string payload");
    return std::get<std::string>(data_);
  }

  template <class T>
  std::shared_ptr<T> as_ref() const {
    if (!std::holds_alternative<std::shared_ptr<void>>(data_))
      throw ContractViolation("Value: not a reference payload");
    return std::static_pointer_cast<T>(std::get<std::shared_ptr<void>>(data_));
  }

  bool operator==(const Value&) const = default;

private:
  std::variant<std::monostate, std::int64_t, std::string, std::shared_ptr<void>> data_;
};

using Payloads = std::vector<Value>;

struct Message {
  TypeTag type = 0;
  Payloads fields;

  bool operator==(const Message&) const = default;
};

inline Message make_message(TypeTag type, Payloads fields = {}) {
  return Message{type, std::move(fields)};
}

// ---------------------------------------------------------------------------
// Index sequences and node order

/// Ascending sequence of message indices, stored contiguously. This is the
/// payload of a matching-tree node; the empty sequence is the tree root.
class IndexSeq {
public:
  IndexSeq() = default;
  explicit IndexSeq(std::vector<MsgIndex> sorted) : v_(std::move(sorted)) {
    for (std::size_t i = 1; i < v_.size(); ++i)
      if (v_[i - 1] >= v_[i])
        throw ContractViolation("IndexSeq: indices must be strictly ascending");
  }

  static IndexSeq of_sorted_unchecked(std::vector<MsgIndex> sorted) {
    IndexSeq s;
    s.v_ = std::move(sorted);
    return s;
  }

  /// Copy of this sequence with `idx` appended; `idx` must exceed the
  /// current maximum.
  IndexSeq child_with(MsgIndex idx) const {
    if (!v_.empty() && idx <= v_.back())
      throw ContractViolation("IndexSeq: appended index must exceed current maximum");
    IndexSeq c;
    c.v_.reserve(v_.size() + 1);
    c.v_ = v_;
    c.v_.push_back(idx);
    return c;
  }

  std::span<const MsgIndex> indices() const { return v_; }
  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }
  MsgIndex back() const { return v_.back(); }

  bool contains(MsgIndex idx) const {
    return std::binary_search(v_.begin(), v_.end(), idx);
  }

  bool intersects(std::span<const MsgIndex> sorted) const {
    // Both sides ascending; step through the shorter one.
    auto it = v_.begin();
    for (MsgIndex x : sorted) {
      it = std::lower_bound(it, v_.end(), x);
      if (it == v_.end()) return false;
      if (*it == x) return true;
    }
    return false;
  }

  auto begin() const { return v_.begin(); }
  auto end() const { return v_.end(); }

  bool operator==(const IndexSeq&) const = default;
  std::strong_ordering operator<=>(const IndexSeq& other) const {
    return std::lexicographical_compare_three_way(v_.begin(), v_.end(),
                                                  other.v_.begin(), other.v_.end());
  }

private:
  std::vector<MsgIndex> v_;
};

/// Total order on index sequences: element-wise lexicographic, with a strict
/// prefix before its extensions. Iterating any node set sorted by this order
/// reproduces a depth-first left-to-right walk of the conceptual matching
/// tree.
inline std::strong_ordering node_order(const IndexSeq& a, const IndexSeq& b) {
  return a <=> b;
}

std::string to_string(const IndexSeq& seq);

// ---------------------------------------------------------------------------
// Rules

/// One typed slot of a join pattern.
struct ConstructorPattern {
  TypeTag type = 0;
  int arity = 0;
  int position = 0;
};

/// Read-only view of the payloads bound to a rule's pattern positions.
/// Positions not bound (as during filter admission) hold null slots.
class BoundArgs {
public:
  BoundArgs() = default;
  explicit BoundArgs(std::span<const Payloads* const> slots) : slots_(slots) {}

  int positions() const { return static_cast<int>(slots_.size()); }
  bool bound(int position) const {
    return position >= 0 && position < positions() && slots_[position] != nullptr;
  }

  const Payloads& payloads(int position) const {
    if (!bound(position))
      throw ContractViolation("BoundArgs: position not bound");
    return *slots_[static_cast<std::size_t>(position)];
  }

  const Value& arg(int position, int field) const {
    const Payloads& p = payloads(position);
    if (field < 0 || static_cast<std::size_t>(field) >= p.size())
      throw ContractViolation("BoundArgs: field out of range");
    return p[static_cast<std::size_t>(field)];
  }

  std::int64_t arg_int(int position, int field = 0) const {
    return arg(position, field).as_int();
  }

private:
  std::span<const Payloads* const> slots_;
};

/// One conjunct of a rule guard. `dependencies` lists the pattern positions
/// whose payloads the predicate reads; the predicate must be pure and must
/// not touch any other position.
struct GuardClause {
  std::vector<int> dependencies;
  std::function<bool(const BoundArgs&)> predicate;
  std::string label;  // diagnostics only
};

class Matcher;
class ActorRef;

/// Handed to rule bodies; carries the self-reference of the running actor.
/// Matchers driven outside an actor pass a context with no self.
struct ActorContext {
  const ActorRef* self_ref = nullptr;

  bool has_self() const { return self_ref != nullptr; }
  const ActorRef& self() const {
    if (!self_ref) throw ContractViolation("ActorContext: no self reference");
    return *self_ref;
  }
};

struct Continue {};
struct Stop {
  Value value;
};
struct Switch {
  std::shared_ptr<Matcher> next;
};

/// What a rule body tells the actor to do next.
using Result = std::variant<Continue, Stop, Switch>;

using BodyFn = std::function<Result(const BoundArgs&, ActorContext&)>;

struct ReactionRule {
  std::vector<ConstructorPattern> patterns;
  std::vector<GuardClause> guard;  // conjunction; empty means always true
  BodyFn body;
};

struct JoinDefinition {
  std::vector<ReactionRule> rules;  // declaration order breaks fairness ties
};

/// Arity declared for `tag` by the first pattern mentioning it, if any.
std::optional<int> declared_arity(const JoinDefinition& defn, TypeTag tag);

// ---------------------------------------------------------------------------
// Rule shape (per-rule type bookkeeping shared by trees and matchers)

/// Precomputed per-rule data: the distinct message types of the pattern (in
/// first-appearance order), the pattern positions of each, and the per-type
/// capacity (= position count). A rule's matching tree only ever stores
/// per-type counts below capacity.
struct RuleShape {
  std::vector<TypeTag> tags;                 // ordinal -> tag
  std::vector<std::vector<int>> positions;   // ordinal -> ascending positions
  std::vector<int> capacity;                 // ordinal -> positions[o].size()
  std::vector<int> ordinal_by_position;      // position -> ordinal
  int total_positions = 0;

  static RuleShape of(const ReactionRule& rule);

  /// Shape with a single tag of effectively unbounded capacity; nodes never
  /// become complete. Used for unrestricted tree growth.
  static RuleShape unconstrained(TypeTag tag);

  int ordinal_of(TypeTag tag) const {
    for (std::size_t i = 0; i < tags.size(); ++i)
      if (tags[i] == tag) return static_cast<int>(i);
    return -1;
  }

  std::size_t type_count() const { return tags.size(); }
};

// ---------------------------------------------------------------------------
// Candidate matches and fairness

/// A concrete way of firing a rule: which messages, and which message at
/// which pattern position.
struct CandidateMatch {
  int rule_index = 0;
  std::vector<MsgIndex> assignment;  // position -> message index
  IndexSeq node;                     // the same indices, ascending

  bool operator==(const CandidateMatch&) const = default;
};

/// Total fairness order on candidate matches: node order first, then
/// lexicographic on the assignment tuple, then rule declaration order.
/// Never Equal for two distinct (rule_index, assignment) pairs.
inline std::strong_ordering match_fairness_order(const CandidateMatch& a,
                                                 const CandidateMatch& b) {
  if (auto c = node_order(a.node, b.node); c != std::strong_ordering::equal) return c;
  if (auto c = std::lexicographical_compare_three_way(
          a.assignment.begin(), a.assignment.end(), b.assignment.begin(),
          b.assignment.end());
      c != std::strong_ordering::equal)
    return c;
  return a.rule_index <=> b.rule_index;
}

// ---------------------------------------------------------------------------
// Permutation enumeration

/// Scratch buffers reused across assignment enumerations so the hot path
/// allocates nothing per node.
struct AssignScratch {
  std::vector<MsgIndex> tuple;
  std::vector<std::uint64_t> used;  // per-ordinal bitmask over bin entries
};

namespace detail {

template <class Bins, class Visit>
bool assign_from(const RuleShape& shape, const Bins& bins, AssignScratch& s,
                 int position, Visit&& visit) {
  if (position == shape.total_positions)
    return visit(std::span<const MsgIndex>(s.tuple));
  const int ordinal = shape.ordinal_by_position[static_cast<std::size_t>(position)];
  auto bin = bins(ordinal);
  for (std::size_t k = 0; k < bin.size(); ++k) {
    const std::uint64_t bit = std::uint64_t{1} << k;
    if (s.used[static_cast<std::size_t>(ordinal)] & bit) continue;
    s.used[static_cast<std::size_t>(ordinal)] |= bit;
    s.tuple[static_cast<std::size_t>(position)] = bin[k];
    if (assign_from(shape, bins, s, position + 1, visit)) return true;
    s.used[static_cast<std::size_t>(ordinal)] &= ~bit;
  }
  return false;
}

}  // namespace detail

/// Visits every type-respecting bijection position -> index, in ascending
/// lexicographic order of the assignment tuple. `bins` maps a type ordinal to
/// the ascending indices of that type available in the node. `visit` returns
/// true to stop; returns true if stopped.
template <class Bins, class Visit>
bool for_each_assignment(const RuleShape& shape, const Bins& bins,
                         AssignScratch& scratch, Visit&& visit) {
  scratch.tuple.assign(static_cast<std::size_t>(shape.total_positions), 0);
  scratch.used.assign(shape.type_count(), 0);
  return detail::assign_from(shape, bins, scratch, 0, visit);
}

/// All type-respecting bijections pattern position -> message index for
/// `node` under `rule`, ordered ascending lexicographically by the tuple
/// (index at position 0, index at position 1, ...). Throws ContractViolation
/// if the node's per-type message counts do not exactly satisfy the rule.
std::vector<std::vector<MsgIndex>> enumerate_permutations(
    const IndexSeq& node, const std::function<TypeTag(MsgIndex)>& type_of,
    const ReactionRule& rule);

}  // namespace joins
