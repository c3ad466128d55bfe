#include "joins/matching_tree.hpp"

#include "joins/rule_builder.hpp"

#include <doctest.h>

#include <map>
#include <random>

using namespace joins;

namespace {

constexpr TypeTag kA = 1, kB = 2, kC = 3;

RuleShape shape_of(std::vector<TypeTag> types) {
  RuleBuilder b;
  for (TypeTag t : types) b.pattern(t, 0);
  const ReactionRule rule = std::move(b).done();
  return RuleShape::of(rule);
}

IndexSeq seq(std::vector<MsgIndex> v) { return IndexSeq(std::move(v)); }

std::vector<IndexSeq> seqs(std::vector<std::vector<MsgIndex>> vs) {
  std::vector<IndexSeq> out;
  for (auto& v : vs) out.push_back(IndexSeq(std::move(v)));
  return out;
}

/// Validator accepting every complete node, assignment = bins in order.
template <class Tree>
auto accept_all(const Tree& tree) {
  return [&tree](const IndexSeq& s, const NodeBins& bins) {
    std::vector<MsgIndex> assignment;
    for (std::size_t o = 0; o < tree.shape().type_count(); ++o)
      for (MsgIndex i : bins.bin(static_cast<int>(o))) assignment.push_back(i);
    return std::optional<CandidateMatch>(
        CandidateMatch{tree.rule_index(), std::move(assignment), s});
  };
}

auto reject_all = [](const IndexSeq&, const NodeBins&) {
  return std::optional<CandidateMatch>();
};

}  // namespace

TEST_CASE_TEMPLATE("unconstrained ramification reproduces the golden DFS order",
                   Store, MapNodeStore, ArrayNodeStore) {
  MatchingTree<Store> tree(RuleShape::unconstrained(kA), 0);
  for (MsgIndex i : {1, 2, 3}) {
    auto completes = tree.ramify_eager(i, kA);
    CHECK(completes.empty());
  }
  CHECK(tree.node_seqs() ==
        seqs({{}, {1}, {1, 2}, {1, 2, 3}, {1, 3}, {2}, {2, 3}, {3}}));
}

TEST_CASE_TEMPLATE("type capacity restricts ramification", Store, MapNodeStore,
                   ArrayNodeStore) {
  MatchingTree<Store> tree(shape_of({kA, kB}), 0);
  CHECK(tree.ramify_eager(1, kA).empty());
  CHECK(tree.node_seqs() == seqs({{}, {1}}));

  SUBCASE("second A adds only a sibling") {
    CHECK(tree.ramify_eager(2, kA).empty());
    CHECK(tree.node_seqs() == seqs({{}, {1}, {2}}));
  }
  SUBCASE("a B completes {1}; the complete node is not stored") {
    auto completes = tree.ramify_eager(2, kB);
    REQUIRE(completes.size() == 1);
    CHECK(completes[0].seq == seq({1, 2}));
    CHECK(tree.node_seqs() == seqs({{}, {1}, {2}}));
  }
  SUBCASE("zero-capacity type leaves the tree unchanged") {
    CHECK(tree.ramify_eager(2, kC).empty());
    CHECK(tree.node_seqs() == seqs({{}, {1}}));
  }
  SUBCASE("non-monotonic index is a contract violation") {
    CHECK_THROWS_AS(tree.ramify_eager(1, kB), ContractViolation);
  }
}

TEST_CASE_TEMPLATE("eager completes are reported in node order", Store,
                   MapNodeStore, ArrayNodeStore) {
  MatchingTree<Store> tree(shape_of({kA, kB}), 0);
  tree.ramify_eager(1, kA);
  tree.ramify_eager(2, kA);
  tree.ramify_eager(3, kA);
  auto completes = tree.ramify_eager(4, kB);
  REQUIRE(completes.size() == 3);
  CHECK(completes[0].seq == seq({1, 4}));
  CHECK(completes[1].seq == seq({2, 4}));
  CHECK(completes[2].seq == seq({3, 4}));
}

TEST_CASE_TEMPLATE("lazy ramification stops at the first valid node", Store,
                   MapNodeStore, ArrayNodeStore) {
  MatchingTree<Store> tree(shape_of({kA, kB}), 0);
  CHECK_FALSE(tree.ramify_lazy(1, kA, accept_all(tree)).has_value());
  auto match = tree.ramify_lazy(2, kB, accept_all(tree));
  REQUIRE(match.has_value());
  CHECK(match->node == seq({1, 2}));
  // Traversal stopped at {1}; the buffered child {2} of the root was dropped.
  CHECK(tree.node_seqs() == seqs({{}, {1}}));
}

TEST_CASE_TEMPLATE("lazy with failing validation grows exactly like eager",
                   Store, MapNodeStore, ArrayNodeStore) {
  MatchingTree<Store> lazy(shape_of({kA, kA, kB}), 0);
  MatchingTree<Store> eager(shape_of({kA, kA, kB}), 0);
  std::mt19937_64 rng(3);
  for (MsgIndex i = 1; i <= 14; ++i) {
    const TypeTag tag = rng() % 2 ? kA : kB;
    CHECK_FALSE(lazy.ramify_lazy(i, tag, reject_all).has_value());
    eager.ramify_eager(i, tag);
    CHECK(lazy.node_seqs() == eager.node_seqs());
  }
}

TEST_CASE("lazy returns the fairest valid candidate") {
  // Guard: payloads equal. Messages 1:A(5), 3:B(7), 4:B(5).
  std::map<MsgIndex, std::int64_t> payload{{1, 5}, {3, 7}, {4, 5}};
  MapMatchingTree tree(shape_of({kA, kB}), 0);
  auto validate = [&](const IndexSeq& s,
                      const NodeBins& bins) -> std::optional<CandidateMatch> {
    const MsgIndex a = bins.bin(0)[0], b = bins.bin(1)[0];
    if (payload.at(a) != payload.at(b)) return std::nullopt;
    return CandidateMatch{0, {a, b}, s};
  };
  CHECK_FALSE(tree.ramify_lazy(1, kA, validate).has_value());
  CHECK_FALSE(tree.ramify_lazy(3, kB, validate).has_value());
  CHECK(tree.node_seqs() == seqs({{}, {1}, {3}}));
  auto match = tree.ramify_lazy(4, kB, validate);
  REQUIRE(match.has_value());
  CHECK(match->node == seq({1, 4}));
  CHECK(match->assignment == std::vector<MsgIndex>{1, 4});
  CHECK(tree.node_seqs() == seqs({{}, {1}, {3}}));
}

TEST_CASE_TEMPLATE("prune removes every node touching a consumed index", Store,
                   MapNodeStore, ArrayNodeStore) {
  MatchingTree<Store> tree(RuleShape::unconstrained(kA), 0);
  tree.ramify_eager(1, kA);
  tree.ramify_eager(2, kA);
  tree.ramify_eager(3, kA);

  SUBCASE("consumed {1,2}") {
    const std::vector<MsgIndex> consumed{1, 2};
    tree.prune(consumed);
    CHECK(tree.node_seqs() == seqs({{}, {3}}));
  }
  SUBCASE("empty consumed set: unchanged") {
    tree.prune({});
    CHECK(tree.node_seqs().size() == 8);
  }
  SUBCASE("superset of all indices: only the root remains") {
    const std::vector<MsgIndex> consumed{1, 2, 3, 4, 5};
    tree.prune(consumed);
    CHECK(tree.node_seqs() == seqs({{}}));
  }
}

TEST_CASE_TEMPLATE("partition splits the in-order sequence evenly", Store,
                   MapNodeStore, ArrayNodeStore) {
  auto flatten = [](const MatchingTree<Store>& tree, unsigned n) {
    std::vector<IndexSeq> flat;
    std::vector<std::size_t> sizes;
    for (auto [b, e] : tree.partition(n)) {
      std::size_t len = 0;
      for (auto it = b; it != e; ++it, ++len) flat.push_back(Store::seq_of(*it));
      sizes.push_back(len);
    }
    return std::pair(flat, sizes);
  };

  SUBCASE("8 nodes, n=2: two segments of 4, first strictly fairer") {
    MatchingTree<Store> tree(RuleShape::unconstrained(kA), 0);
    tree.ramify_eager(1, kA);
    tree.ramify_eager(2, kA);
    tree.ramify_eager(3, kA);
    auto [flat, sizes] = flatten(tree, 2);
    CHECK(sizes == std::vector<std::size_t>{4, 4});
    CHECK(flat == tree.node_seqs());
    CHECK(node_order(flat[3], flat[4]) == std::strong_ordering::less);
  }
  SUBCASE("1 node, n=8: a single singleton segment") {
    MatchingTree<Store> tiny(RuleShape::unconstrained(kA), 0);
    auto [flat, sizes] = flatten(tiny, 8);
    CHECK(flat == tiny.node_seqs());
    CHECK(sizes == std::vector<std::size_t>{1});
  }
  SUBCASE("7 nodes, n=2: sizes 4 and 3, concatenation in order") {
    // Rule A&A&B caps A at 2: ramifying 1:A, 2:A, 3:A gives exactly 7 nodes.
    MatchingTree<Store> tree(shape_of({kA, kA, kB}), 0);
    tree.ramify_eager(1, kA);
    tree.ramify_eager(2, kA);
    tree.ramify_eager(3, kA);
    REQUIRE(tree.size() == 7);
    auto [flat, sizes] = flatten(tree, 2);
    CHECK(sizes == std::vector<std::size_t>{4, 3});
    CHECK(flat == tree.node_seqs());
  }
}

TEST_CASE_TEMPLATE("random operation sequences keep the invariants", Store,
                   MapNodeStore, ArrayNodeStore) {
  std::mt19937_64 rng(17);
  for (int iter = 0; iter < 30; ++iter) {
    const RuleShape shape =
        rng() % 2 ? shape_of({kA, kB, kC}) : shape_of({kA, kA, kB});
    MatchingTree<Store> tree(shape, 0);
    MsgIndex next = 1;
    std::vector<MsgIndex> live;
    for (int step = 0; step < 40; ++step) {
      if (rng() % 4 == 0 && !live.empty()) {
        std::vector<MsgIndex> consumed;
        for (MsgIndex i : live)
          if (rng() % 2) consumed.push_back(i);
        tree.prune(consumed);
        std::erase_if(live, [&](MsgIndex i) {
          return std::find(consumed.begin(), consumed.end(), i) != consumed.end();
        });
      } else {
        const TypeTag tag = static_cast<TypeTag>(1 + rng() % 3);
        if (rng() % 2)
          tree.ramify_eager(next, tag);
        else
          tree.ramify_lazy(next, tag, reject_all);
        live.push_back(next);
        ++next;
      }
      const auto nodes = tree.node_seqs();
      REQUIRE(!nodes.empty());
      CHECK(nodes.front() == IndexSeq{});
      for (std::size_t i = 1; i < nodes.size(); ++i)
        CHECK(node_order(nodes[i - 1], nodes[i]) == std::strong_ordering::less);
      for (const IndexSeq& n : nodes)
        CHECK(n.size() < static_cast<std::size_t>(shape.total_positions));
    }
  }
}

TEST_CASE("sorted_merge") {
  auto node = [](std::vector<MsgIndex> v) {
    return TreeNode{IndexSeq(std::move(v)), NodeBins(1)};
  };
  auto seqs_of = [](const std::vector<TreeNode>& nodes) {
    std::vector<IndexSeq> out;
    for (const TreeNode& n : nodes) out.push_back(n.seq);
    return out;
  };

  SUBCASE("empty left operand") {
    std::vector<TreeNode> additions;
    additions.push_back(node({1}));
    additions.push_back(node({2}));
    auto merged = sorted_merge({}, std::move(additions));
    CHECK(seqs_of(merged) == seqs({{1}, {2}}));
  }
  SUBCASE("interleaving") {
    std::vector<TreeNode> existing;
    existing.push_back(node({1}));
    std::vector<TreeNode> additions;
    additions.push_back(node({1, 2}));
    additions.push_back(node({2}));
    auto merged = sorted_merge(std::move(existing), std::move(additions));
    CHECK(seqs_of(merged) == seqs({{1}, {1, 2}, {2}}));
  }
  SUBCASE("merge equals sort of concatenation") {
    std::mt19937_64 rng(29);
    for (int iter = 0; iter < 50; ++iter) {
      std::vector<std::vector<MsgIndex>> pool;
      for (int i = 0; i < 12; ++i) {
        std::vector<MsgIndex> s;
        for (MsgIndex j = 1; j <= 5; ++j)
          if (rng() % 2) s.push_back(j);
        if (std::find(pool.begin(), pool.end(), s) == pool.end())
          pool.push_back(std::move(s));
      }
      std::shuffle(pool.begin(), pool.end(), rng);
      const std::size_t split = pool.size() / 2;
      std::vector<TreeNode> left, right, all;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        (i < split ? left : right).push_back(node(pool[i]));
        all.push_back(node(pool[i]));
      }
      std::sort(left.begin(), left.end(), tree_node_less);
      std::sort(right.begin(), right.end(), tree_node_less);
      std::sort(all.begin(), all.end(), tree_node_less);
      auto merged = sorted_merge(std::move(left), std::move(right));
      CHECK(seqs_of(merged) == seqs_of(all));
    }
  }
}

TEST_CASE_TEMPLATE("parallel lazy search matches the sequential result", Store,
                   MapNodeStore, ArrayNodeStore) {
  std::map<MsgIndex, std::int64_t> payload;
  auto validator_for = [&payload](int rule_index) {
    return [&payload, rule_index](const IndexSeq& s, const NodeBins& bins)
               -> std::optional<CandidateMatch> {
      const MsgIndex a = bins.bin(0)[0], b = bins.bin(1)[0];
      if (payload.at(a) != payload.at(b)) return std::nullopt;
      return CandidateMatch{rule_index, {a, b}, s};
    };
  };

  std::mt19937_64 rng(31);
  for (int iter = 0; iter < 15; ++iter) {
    payload.clear();
    MatchingTree<Store> par(shape_of({kA, kB}), 0);
    MatchingTree<Store> lazy(shape_of({kA, kB}), 0);
    for (MsgIndex i = 1; i <= 24; ++i) {
      const TypeTag tag = rng() % 2 ? kA : kB;
      payload[i] = static_cast<std::int64_t>(rng() % 3);
      auto seq_match = lazy.ramify_lazy(i, tag, validator_for(0));
      auto par_match =
          par.ramify_lazy_parallel(i, tag, 4, [&] { return validator_for(0); });
      CHECK(seq_match == par_match);
      if (seq_match) {
        lazy.prune(seq_match->node.indices());
        par.prune(par_match->node.indices());
      }
      CHECK(lazy.node_seqs() == par.node_seqs());
    }
  }
}

TEST_CASE("parallel eager matches sequential eager") {
  MapMatchingTree par(shape_of({kA, kA, kB}), 0);
  MapMatchingTree seq_tree(shape_of({kA, kA, kB}), 0);
  std::mt19937_64 rng(37);
  for (MsgIndex i = 1; i <= 20; ++i) {
    const TypeTag tag = rng() % 2 ? kA : kB;
    auto pc = par.ramify_eager_parallel(i, tag, 4);
    auto sc = seq_tree.ramify_eager(i, tag);
    REQUIRE(pc.size() == sc.size());
    for (std::size_t k = 0; k < pc.size(); ++k) CHECK(pc[k].seq == sc[k].seq);
    CHECK(par.node_seqs() == seq_tree.node_seqs());
  }
}
