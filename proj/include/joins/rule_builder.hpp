// Small fluent layer for declaring reaction rules: pattern slots, guard
// clauses with explicit dependency sets, and a body. Sugar only; it builds
// the plain core structs.

#pragma once

#include "joins/core.hpp"

namespace joins {

class RuleBuilder {
public:
  /// Appends a constructor pattern of the given type and payload count.
  RuleBuilder& pattern(TypeTag type, int arity = 0) {
    const int position = static_cast<int>(rule_.patterns.size());
    rule_.patterns.push_back(ConstructorPattern{type, arity, position});
    return *this;
  }

  /// Appends a guard clause reading the payloads at `dependencies`.
  RuleBuilder& clause(std::vector<int> dependencies,
                      std::function<bool(const BoundArgs&)> predicate,
                      std::string label = {}) {
    rule_.guard.push_back(
        GuardClause{std::move(dependencies), std::move(predicate), std::move(label)});
    return *this;
  }

  RuleBuilder& clause(GuardClause c) {
    rule_.guard.push_back(std::move(c));
    return *this;
  }

  /// Convenience clause: integer payload `field` of the single dependency
  /// position satisfies `pred`.
  RuleBuilder& where_int(int position, int field,
                         std::function<bool(std::int64_t)> pred,
                         std::string label = {}) {
    return clause(
        {position},
        [position, field, pred = std::move(pred)](const BoundArgs& args) {
          return pred(args.arg_int(position, field));
        },
        std::move(label));
  }

  /// Convenience clause: integer payloads at two positions are equal.
  RuleBuilder& equal_ints(int pos_a, int field_a, int pos_b, int field_b,
                          std::string label = {}) {
    return clause(
        {pos_a, pos_b},
        [=](const BoundArgs& args) {
          return args.arg_int(pos_a, field_a) == args.arg_int(pos_b, field_b);
        },
        std::move(label));
  }

  ReactionRule body(BodyFn fn) && {
    rule_.body = std::move(fn);
    return std::move(rule_);
  }

  /// Body that ignores its arguments and returns Continue.
  ReactionRule done() && {
    rule_.body = [](const BoundArgs&, ActorContext&) -> Result { return Continue{}; };
    return std::move(rule_);
  }

private:
  ReactionRule rule_;
};

inline RuleBuilder when() { return RuleBuilder{}; }

}  // namespace joins
