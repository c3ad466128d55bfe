#include "joins/guard_filter.hpp"

#include <iostream>

namespace joins {

FilterSet extract_filtering_clauses(const ReactionRule& rule) {
  FilterSet out;
  out.total_positions = static_cast<int>(rule.patterns.size());

  const RuleShape shape = RuleShape::of(rule);

  for (std::size_t o = 0; o < shape.type_count(); ++o) {
    if (shape.capacity[o] != 1) continue;  // single-occurrence types only
    const TypeTag tag = shape.tags[o];
    const int own_position = shape.positions[o].front();

    std::vector<FilterClause> clauses;
    for (const GuardClause& clause : rule.guard) {
      // Usable iff no dependency belongs to any other type.
      bool foreign = false;
      for (int dep : clause.dependencies)
        if (dep != own_position) {
          foreign = true;
          break;
        }
      if (foreign) continue;
      const int bind_at = clause.dependencies.empty() ? -1 : own_position;
      clauses.push_back(FilterClause{&clause, bind_at});
    }
    if (!clauses.empty()) out.bins.emplace_back(tag, std::move(clauses));
  }
  return out;
}

bool admit_message(const FilterSet& filters, TypeTag type, const Payloads& payloads,
                   std::atomic<std::uint64_t>* evals) {
  const auto* clauses = filters.bin(type);
  if (!clauses) return true;

  std::vector<const Payloads*> slots(static_cast<std::size_t>(filters.total_positions),
                                     nullptr);
  for (const FilterClause& fc : *clauses) {
    if (fc.position >= 0) slots[static_cast<std::size_t>(fc.position)] = &payloads;
    BoundArgs args{slots};
    if (evals) evals->fetch_add(1, std::memory_order_relaxed);
    bool ok = false;
    try {
      ok = fc.clause->predicate(args);
    } catch (const std::exception& e) {
      std::cerr << "joins: filter clause failed during admission ("
                << (fc.clause->label.empty() ? "unnamed" : fc.clause->label)
                << "): " << e.what() << "\n";
      ok = false;
    }
    if (fc.position >= 0) slots[static_cast<std::size_t>(fc.position)] = nullptr;
    if (!ok) return false;
  }
  return true;
}

DefinitionFilter DefinitionFilter::build(const JoinDefinition& defn) {
  DefinitionFilter f;
  f.per_rule_.reserve(defn.rules.size());
  f.rule_types_.reserve(defn.rules.size());
  for (const ReactionRule& rule : defn.rules) {
    f.per_rule_.push_back(extract_filtering_clauses(rule));
    f.rule_types_.push_back(RuleShape::of(rule).tags);
  }
  return f;
}

bool DefinitionFilter::admit(TypeTag type, const Payloads& payloads,
                             std::atomic<std::uint64_t>* evals) const {
  bool occurs_somewhere = false;
  for (std::size_t r = 0; r < per_rule_.size(); ++r) {
    const auto& types = rule_types_[r];
    if (std::find(types.begin(), types.end(), type) == types.end()) continue;
    occurs_somewhere = true;
    if (admit_message(per_rule_[r], type, payloads, evals)) return true;
  }
  // Types in no rule are kept: they may match after a dynamic switch.
  return !occurs_somewhere;
}

}  // namespace joins
