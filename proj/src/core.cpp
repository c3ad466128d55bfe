#include "joins/core.hpp"

#include <limits>
#include <sstream>

namespace joins {

std::string to_string(const IndexSeq& seq) {
  std::ostringstream out;
  out << '{';
  bool first = true;
  for (MsgIndex i : seq) {
    if (!first) out << ',';
    out << i;
    first = false;
  }
  out << '}';
  return out.str();
}

std::optional<int> declared_arity(const JoinDefinition& defn, TypeTag tag) {
  for (const ReactionRule& rule : defn.rules)
    for (const ConstructorPattern& p : rule.patterns)
      if (p.type == tag) return p.arity;
  return std::nullopt;
}

RuleShape RuleShape::of(const ReactionRule& rule) {
  RuleShape shape;
  shape.total_positions = static_cast<int>(rule.patterns.size());
  shape.ordinal_by_position.resize(rule.patterns.size());
  for (const ConstructorPattern& p : rule.patterns) {
    int o = shape.ordinal_of(p.type);
    if (o < 0) {
      o = static_cast<int>(shape.tags.size());
      shape.tags.push_back(p.type);
      shape.positions.emplace_back();
      shape.capacity.push_back(0);
    }
    shape.positions[static_cast<std::size_t>(o)].push_back(p.position);
    shape.capacity[static_cast<std::size_t>(o)] += 1;
    shape.ordinal_by_position[static_cast<std::size_t>(p.position)] = o;
  }
  for (auto& ps : shape.positions) std::sort(ps.begin(), ps.end());
  return shape;
}

RuleShape RuleShape::unconstrained(TypeTag tag) {
  RuleShape shape;
  shape.tags.push_back(tag);
  shape.positions.push_back({});
  shape.capacity.push_back(std::numeric_limits<int>::max());
  shape.total_positions = std::numeric_limits<int>::max();
  return shape;
}

std::vector<std::vector<MsgIndex>> enumerate_permutations(
    const IndexSeq& node, const std::function<TypeTag(MsgIndex)>& type_of,
    const ReactionRule& rule) {
  const RuleShape shape = RuleShape::of(rule);

  // Bin the node's indices by rule type ordinal; ascending order is
  // inherited from the node.
  std::vector<std::vector<MsgIndex>> bins(shape.type_count());
  for (MsgIndex idx : node) {
    const int o = shape.ordinal_of(type_of(idx));
    if (o < 0)
      throw ContractViolation("enumerate_permutations: message type not in rule");
    bins[static_cast<std::size_t>(o)].push_back(idx);
  }
  for (std::size_t o = 0; o < bins.size(); ++o)
    if (static_cast<int>(bins[o].size()) != shape.capacity[o])
      throw ContractViolation(
          "enumerate_permutations: node does not carry exactly the per-type "
          "message counts the rule requires");

  std::vector<std::vector<MsgIndex>> out;
  AssignScratch scratch;
  for_each_assignment(
      shape,
      [&](int o) { return std::span<const MsgIndex>(bins[static_cast<std::size_t>(o)]); },
      scratch, [&](std::span<const MsgIndex> tuple) {
        out.emplace_back(tuple.begin(), tuple.end());
        return false;
      });
  return out;
}

}  // namespace joins
