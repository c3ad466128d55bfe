// Filtering clauses: guard conjuncts that can be falsified by a single
// message of a single-occurrence type. They are applied to incoming
// messages before any tree ramification; a message rejected by the
// relevant filters of every rule in which its type occurs is dropped
// outright. The final guard evaluation stays authoritative; admission is
// only a work-saving pre-test.

#pragma once

#include "joins/core.hpp"

#include <atomic>

namespace joins {

/// A clause usable as an admission test for one message type. `position` is
/// the type's pattern position the incoming payloads are bound to, or -1
/// for dependency-free clauses.
struct FilterClause {
  const GuardClause* clause = nullptr;
  int position = -1;
};

/// Per-rule map from message type to its admission clauses. Holds pointers
/// into the rule it was extracted from; the rule must outlive the set.
struct FilterSet {
  int total_positions = 0;
  std::vector<std::pair<TypeTag, std::vector<FilterClause>>> bins;

  const std::vector<FilterClause>* bin(TypeTag tag) const {
    for (const auto& [t, clauses] : bins)
      if (t == tag) return &clauses;
    return nullptr;
  }
};

/// Extracts the filtering clauses of `rule`: every (clause, type) pair where
/// the type occurs exactly once in the pattern and no clause dependency
/// belongs to any other type. Dependency-free clauses land in every
/// single-occurrence type's bin.
FilterSet extract_filtering_clauses(const ReactionRule& rule);

/// True iff every clause in the bin for `type` accepts `payloads` (vacuously
/// true for types without a bin). A clause that throws counts as
/// non-admission. Increments `evals` per clause evaluated, when given.
bool admit_message(const FilterSet& filters, TypeTag type, const Payloads& payloads,
                   std::atomic<std::uint64_t>* evals = nullptr);

/// Definition-level admission: a message is dropped only if its type occurs
/// in at least one rule and every rule in which it occurs rejects it.
class DefinitionFilter {
public:
  DefinitionFilter() = default;

  /// Builds filters for every rule of `defn`; keeps pointers into `defn`,
  /// which must outlive this object.
  static DefinitionFilter build(const JoinDefinition& defn);

  /// True = keep the message (store and ramify), false = drop entirely.
  bool admit(TypeTag type, const Payloads& payloads,
             std::atomic<std::uint64_t>* evals = nullptr) const;

  const std::vector<FilterSet>& per_rule() const { return per_rule_; }

private:
  std::vector<FilterSet> per_rule_;
  std::vector<std::vector<TypeTag>> rule_types_;  // types occurring per rule
};

}  // namespace joins
