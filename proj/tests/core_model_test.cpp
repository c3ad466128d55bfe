#include "joins/core.hpp"
#include "joins/rule_builder.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

using namespace joins;

namespace {

IndexSeq seq(std::vector<MsgIndex> v) { return IndexSeq(std::move(v)); }

// Independent oracle: explicit construction of the conceptual matching tree
// over indices 1..max_index, walked depth-first with children in ascending
// added-index order.
void dfs_walk(const std::vector<MsgIndex>& node, MsgIndex max_index,
              std::vector<IndexSeq>& out) {
  out.push_back(IndexSeq(std::vector<MsgIndex>(node)));
  const MsgIndex start = node.empty() ? 1 : node.back() + 1;
  for (MsgIndex j = start; j <= max_index; ++j) {
    std::vector<MsgIndex> child(node);
    child.push_back(j);
    dfs_walk(child, max_index, out);
  }
}

std::vector<IndexSeq> dfs_order(MsgIndex max_index) {
  std::vector<IndexSeq> out;
  dfs_walk({}, max_index, out);
  return out;
}

std::size_t position_in(const std::vector<IndexSeq>& order, const IndexSeq& s) {
  return static_cast<std::size_t>(
      std::find(order.begin(), order.end(), s) - order.begin());
}

}  // namespace

TEST_CASE("node_order basic examples") {
  CHECK(node_order(seq({}), seq({1})) == std::strong_ordering::less);
  CHECK(node_order(seq({1, 2}), seq({1, 3})) == std::strong_ordering::less);
  CHECK(node_order(seq({1}), seq({1})) == std::strong_ordering::equal);
  CHECK(node_order(seq({2}), seq({1, 3})) == std::strong_ordering::greater);
}

TEST_CASE("node_order {1,3} before {2}: DFS enumeration oracle") {
  const auto order = dfs_order(3);
  // Figure-style golden order over indices 1..3.
  const std::vector<IndexSeq> expected = {
      seq({}),     seq({1}),    seq({1, 2}), seq({1, 2, 3}),
      seq({1, 3}), seq({2}),    seq({2, 3}), seq({3})};
  CHECK(order == expected);
  CHECK(position_in(order, seq({1, 3})) < position_in(order, seq({2})));
  CHECK(node_order(seq({1, 3}), seq({2})) == std::strong_ordering::less);
}

TEST_CASE("sorting by node_order reproduces the DFS walk (subsets of 1..5)") {
  const auto walk = dfs_order(5);
  std::vector<IndexSeq> all(walk);
  std::mt19937_64 rng(7);
  std::shuffle(all.begin(), all.end(), rng);
  std::sort(all.begin(), all.end(),
            [](const IndexSeq& a, const IndexSeq& b) { return node_order(a, b) < 0; });
  CHECK(all == walk);
}

TEST_CASE("node_order is a strict total order on random sequences") {
  std::mt19937_64 rng(11);
  auto random_seq = [&] {
    std::set<MsgIndex> s;
    const std::size_t n = rng() % 11;
    while (s.size() < n) s.insert(static_cast<MsgIndex>(1 + rng() % 20));
    return IndexSeq(std::vector<MsgIndex>(s.begin(), s.end()));
  };
  for (int iter = 0; iter < 300; ++iter) {
    const IndexSeq a = random_seq(), b = random_seq(), c = random_seq();
    // Trichotomy and antisymmetry.
    const auto ab = node_order(a, b);
    CHECK((ab == std::strong_ordering::equal) == (a == b));
    if (ab == std::strong_ordering::less)
      CHECK(node_order(b, a) == std::strong_ordering::greater);
    // Transitivity.
    if (node_order(a, b) <= 0 && node_order(b, c) <= 0) CHECK(node_order(a, c) <= 0);
  }
}

TEST_CASE("IndexSeq invariants") {
  CHECK_THROWS_AS(seq({2, 1}), ContractViolation);
  CHECK_THROWS_AS(seq({1, 1}), ContractViolation);
  CHECK_THROWS_AS(seq({5}).child_with(5), ContractViolation);
  CHECK(seq({1, 4, 9}).contains(4));
  CHECK_FALSE(seq({1, 4, 9}).contains(5));
  const std::vector<MsgIndex> consumed{2, 4};
  CHECK(seq({1, 4, 9}).intersects(consumed));
  CHECK_FALSE(seq({1, 3, 9}).intersects(consumed));
}

namespace {

constexpr TypeTag kA = 1, kB = 2, kC = 3;

ReactionRule rule_of(std::vector<TypeTag> types) {
  RuleBuilder b;
  for (TypeTag t : types) b.pattern(t, 0);
  return std::move(b).done();
}

// Oracle for permutation enumeration: all bijections by next_permutation
// over positions, filtered for type agreement, sorted by tuple.
std::vector<std::vector<MsgIndex>> brute_force_assignments(
    const std::vector<MsgIndex>& node, const std::map<MsgIndex, TypeTag>& types,
    const ReactionRule& rule) {
  std::vector<MsgIndex> perm(node);
  std::sort(perm.begin(), perm.end());
  std::vector<std::vector<MsgIndex>> out;
  do {
    bool ok = perm.size() == rule.patterns.size();
    for (std::size_t p = 0; ok && p < perm.size(); ++p)
      ok = types.at(perm[p]) == rule.patterns[p].type;
    if (ok) out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("enumerate_permutations examples") {
  auto type_of = [](std::map<MsgIndex, TypeTag> m) {
    return [m](MsgIndex i) { return m.at(i); };
  };

  SUBCASE("single pattern, single bijection") {
    const auto got =
        enumerate_permutations(seq({3}), type_of({{3, kA}}), rule_of({kA}));
    CHECK(got == std::vector<std::vector<MsgIndex>>{{3}});
  }

  SUBCASE("two same-type patterns: both orders, tuple-sorted") {
    const std::map<MsgIndex, TypeTag> types{{4, kC}, {7, kC}};
    const auto rule = rule_of({kC, kC});
    const auto got = enumerate_permutations(seq({4, 7}),
                                            type_of({{4, kC}, {7, kC}}), rule);
    CHECK(got == brute_force_assignments({4, 7}, types, rule));
    CHECK(got == std::vector<std::vector<MsgIndex>>{{4, 7}, {7, 4}});
  }

  SUBCASE("A&A&B mixed types") {
    const std::map<MsgIndex, TypeTag> types{{1, kA}, {2, kA}, {5, kB}};
    const auto rule = rule_of({kA, kA, kB});
    const auto got = enumerate_permutations(
        seq({1, 2, 5}), type_of({{1, kA}, {2, kA}, {5, kB}}), rule);
    CHECK(got == brute_force_assignments({1, 2, 5}, types, rule));
    CHECK(got == std::vector<std::vector<MsgIndex>>{{1, 2, 5}, {2, 1, 5}});
  }

  SUBCASE("node/type mismatch is a contract violation") {
    CHECK_THROWS_AS(
        enumerate_permutations(seq({3}), type_of({{3, kB}}), rule_of({kA})),
        ContractViolation);
    CHECK_THROWS_AS(enumerate_permutations(seq({3, 4}),
                                           type_of({{3, kA}, {4, kA}}),
                                           rule_of({kA})),
                    ContractViolation);
  }
}

TEST_CASE("enumerate_permutations: count and uniqueness properties") {
  std::mt19937_64 rng(23);
  for (int iter = 0; iter < 100; ++iter) {
    // Random rule of up to 5 positions over up to 3 types; node matching it.
    const int positions = 1 + static_cast<int>(rng() % 5);
    std::vector<TypeTag> types;
    for (int p = 0; p < positions; ++p)
      types.push_back(static_cast<TypeTag>(1 + rng() % 3));
    const auto rule = rule_of(types);

    std::map<MsgIndex, TypeTag> type_map;
    std::vector<MsgIndex> indices;
    MsgIndex next = 1;
    for (TypeTag t : types) {
      type_map[next] = t;
      indices.push_back(next++);
    }
    const auto got = enumerate_permutations(
        IndexSeq(std::vector<MsgIndex>(indices)),
        [&](MsgIndex i) { return type_map.at(i); }, rule);

    std::map<TypeTag, std::uint64_t> counts;
    for (TypeTag t : types) counts[t]++;
    std::uint64_t expected = 1;
    for (const auto& [t, n] : counts)
      for (std::uint64_t k = 2; k <= n; ++k) expected *= k;
    CHECK(got.size() == expected);
    std::set<std::vector<MsgIndex>> unique(got.begin(), got.end());
    CHECK(unique.size() == got.size());
    CHECK(std::is_sorted(got.begin(), got.end()));
  }
}

TEST_CASE("match_fairness_order") {
  auto cand = [](int rule, std::vector<MsgIndex> assignment) {
    std::vector<MsgIndex> sorted(assignment);
    std::sort(sorted.begin(), sorted.end());
    return CandidateMatch{rule, std::move(assignment),
                          IndexSeq(std::move(sorted))};
  };

  SUBCASE("older node wins") {
    CHECK(match_fairness_order(cand(0, {1, 2}), cand(0, {2, 3})) ==
          std::strong_ordering::less);
    CHECK(match_fairness_order(cand(0, {1, 3}), cand(0, {2})) ==
          std::strong_ordering::less);
  }
  SUBCASE("rule declaration order breaks full ties") {
    CHECK(match_fairness_order(cand(0, {1, 2}), cand(2, {1, 2})) ==
          std::strong_ordering::less);
  }
  SUBCASE("same node: assignment tuple order decides") {
    CHECK(match_fairness_order(cand(1, {1, 2}), cand(0, {2, 1})) ==
          std::strong_ordering::less);
  }
  SUBCASE("never Equal for distinct rule/assignment pairs") {
    std::mt19937_64 rng(5);
    for (int iter = 0; iter < 200; ++iter) {
      std::vector<MsgIndex> a{static_cast<MsgIndex>(1 + rng() % 4)};
      if (rng() % 2) a.push_back(a[0] + 1 + static_cast<MsgIndex>(rng() % 3));
      std::vector<MsgIndex> b(a);
      if (rng() % 2) std::reverse(b.begin(), b.end());
      const int ra = static_cast<int>(rng() % 3), rb = static_cast<int>(rng() % 3);
      const auto ca = cand(ra, a), cb = cand(rb, b);
      if (ra != rb || ca.assignment != cb.assignment)
        CHECK(match_fairness_order(ca, cb) != std::strong_ordering::equal);
      else
        CHECK(match_fairness_order(ca, cb) == std::strong_ordering::equal);
    }
  }
}

TEST_CASE("guard clauses are deterministic under double evaluation") {
  const GuardClause clause{{0},
                           [](const BoundArgs& args) { return args.arg_int(0) > 2; },
                           "gt2"};
  const Payloads payloads{Value(3)};
  const Payloads* slots[] = {&payloads};
  BoundArgs args{slots};
  CHECK(clause.predicate(args) == clause.predicate(args));
}
