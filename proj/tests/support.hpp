// Shared test machinery: random join-definition instances with a small
// guard-clause library, and a driver that feeds a message stream through a
// matcher and returns its fired-match trace.

#pragma once

#include "joins/matcher.hpp"
#include "joins/rule_builder.hpp"

#include <random>
#include <sstream>

namespace joins::test {

/// Drains `messages` through the matcher until the source is exhausted;
/// bodies run with no actor context. Returns the fired-match trace.
inline std::vector<FiredMatch> drive(Matcher& matcher,
                                     std::span<const Message> messages) {
  Mailbox mailbox;
  for (const Message& m : messages) mailbox.put(m);
  mailbox.close();
  ActorContext ctx;
  while (matcher.apply(mailbox, ctx)) {
  }
  return std::vector<FiredMatch>(matcher.trace().begin(), matcher.trace().end());
}

struct RandomInstance {
  JoinDefinition defn;
  std::vector<Message> messages;
  std::string description;
};

/// Guard clauses over single-int payloads, drawn per rule. Dependencies are
/// declared exactly as read.
inline GuardClause random_clause(std::mt19937_64& rng, int positions) {
  auto pos = [&](int n) { return static_cast<int>(rng() % n); };
  switch (rng() % 6) {
    case 0: {  // payload equality between two positions
      const int a = pos(positions), b = pos(positions);
      return GuardClause{{a, b},
                         [a, b](const BoundArgs& args) {
                           return args.arg_int(a) == args.arg_int(b);
                         },
                         "eq"};
    }
    case 1: {  // strict order between two positions
      const int a = pos(positions), b = pos(positions);
      return GuardClause{{a, b},
                         [a, b](const BoundArgs& args) {
                           return args.arg_int(a) < args.arg_int(b);
                         },
                         "lt"};
    }
    case 2: {  // threshold on one position
      const int a = pos(positions);
      const std::int64_t c = static_cast<std::int64_t>(rng() % 4);
      return GuardClause{{a},
                         [a, c](const BoundArgs& args) { return args.arg_int(a) > c; },
                         "gt-const"};
    }
    case 3: {  // parity of one position
      const int a = pos(positions);
      return GuardClause{
          {a}, [a](const BoundArgs& args) { return args.arg_int(a) % 2 == 0; },
          "even"};
    }
    case 4:  // dependency-free, true
      return GuardClause{{}, [](const BoundArgs&) { return true; }, "true"};
    default: {  // sum threshold over two positions
      const int a = pos(positions), b = pos(positions);
      return GuardClause{{a, b},
                         [a, b](const BoundArgs& args) {
                           return args.arg_int(a) + args.arg_int(b) >= 3;
                         },
                         "sum>=3"};
    }
  }
}

/// Instance with <=4 rules, <=4 positions per rule, <=30 messages; message
/// types 1..5 carry one small integer payload, type 6 appears in no rule.
inline RandomInstance make_random_instance(std::mt19937_64& rng) {
  RandomInstance inst;
  const int rules = 1 + static_cast<int>(rng() % 4);
  for (int r = 0; r < rules; ++r) {
    RuleBuilder b;
    const int positions = 1 + static_cast<int>(rng() % 4);
    for (int p = 0; p < positions; ++p)
      b.pattern(static_cast<TypeTag>(1 + rng() % 5), 1);
    const int clauses = static_cast<int>(rng() % 3);
    for (int c = 0; c < clauses; ++c) b.clause(random_clause(rng, positions));
    inst.defn.rules.push_back(std::move(b).done());
  }
  const int count = 3 + static_cast<int>(rng() % 28);
  for (int m = 0; m < count; ++m) {
    const TypeTag tag = static_cast<TypeTag>(1 + rng() % 6);  // 6: unknown type
    inst.messages.push_back(
        make_message(tag, {static_cast<std::int64_t>(rng() % 5)}));
  }

  std::ostringstream desc;
  desc << rules << " rules, " << count << " messages";
  inst.description = desc.str();
  return inst;
}

inline std::string trace_to_string(std::span<const FiredMatch> trace) {
  std::ostringstream out;
  for (const FiredMatch& f : trace) {
    out << "rule " << f.rule_index << " consumed " << to_string(f.consumed)
        << " assignment (";
    for (std::size_t i = 0; i < f.assignment.size(); ++i) {
      if (i) out << ',';
      out << f.assignment[i];
    }
    out << ")\n";
  }
  return out.str();
}

}  // namespace joins::test
