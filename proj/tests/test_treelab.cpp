#include <doctest.h>

#include <set>

#include "mso/treelab.hpp"
#include "corpus.hpp"

using namespace mso;

namespace {

FiniteStructure tr(const std::vector<int>& parent) { return FiniteStructure::tree(parent); }

Mask mask_of(std::initializer_list<unsigned> ids) {
  Mask m = 0;
  for (unsigned i : ids) m |= 1ull << i;
  return m;
}

}  // namespace

TEST_CASE("tree sums") {
  // a 2-chain followed by a 3-node tree: five nodes, part two above the
  // first root and incomparable to the rest of part one
  FiniteStructure two = tr({-1, 0});
  FiniteStructure three = tr({-1, 0, 0});
  FiniteStructure s = tree_sum({two, three});
  CHECK(s.size() == 5);
  for (unsigned v = 1; v < 5; ++v) CHECK(s.less(0, v));
  for (unsigned v = 2; v < 5; ++v) CHECK_FALSE(s.comparable(1, v));
  CHECK_FALSE(s.comparable(3, 4));

  // singletons over a k-chain index give a k-chain
  for (unsigned k = 1; k <= 4; ++k) {
    std::vector<FiniteStructure> parts(k, tr({-1}));
    FiniteStructure c = tree_sum(parts);
    for (unsigned i = 0; i < k; ++i)
      for (unsigned j = i + 1; j < k; ++j) CHECK(c.less(i, j));
  }

  // right-nested binary sums agree with the indexed sum
  FiniteStructure a = tr({-1});
  FiniteStructure b = tr({-1, 0});
  FiniteStructure c3 = tr({-1, 0, 0});
  CHECK(tree_canonical_code(tree_sum({a, tree_sum({b, c3})})) ==
        tree_canonical_code(tree_sum({a, b, c3})));
  CHECK(tree_canonical_code(tree_sum({a, tree_sum({c3, b})})) ==
        tree_canonical_code(tree_sum({a, c3, b})));

  // a rootless early part stays incomparable
  FiniteStructure forest = tr({-1, -1});
  FiniteStructure s2 = tree_sum({forest, a});
  CHECK_FALSE(s2.comparable(0, 2));
  CHECK_FALSE(s2.comparable(1, 2));
}

TEST_CASE("cut decomposition") {
  // a chain tree: every part is the branch point itself
  FiniteStructure chain_tree = tr({-1, 0, 1});
  CutDecomposition cd = cut_decomposition(chain_tree, {0, 1, 2});
  CHECK(cd.chain_size() == 3);
  for (unsigned i = 0; i < 3; ++i) CHECK(cd.parts[i] == mask_of({i}));
  CHECK(cd.bc_mask == 0);

  // root with two children, branch through one of them
  FiniteStructure v = tr({-1, 0, 0});
  CutDecomposition cd2 = cut_decomposition(v, {0, 1});
  CHECK(cd2.chain_size() == 2);
  CHECK(cd2.parts[0] == mask_of({0, 2}));
  CHECK(cd2.parts[1] == mask_of({1}));

  // non-maximal branches are rejected
  CHECK_THROWS_AS(cut_decomposition(v, {0}), DomainError);

  // a forest: the second component cuts at the empty segment
  FiniteStructure forest = tr({-1, 0, -1});
  CutDecomposition cd3 = cut_decomposition(forest, {0, 1});
  CHECK(cd3.chain_size() == 3);
  CHECK(cd3.parts[0] == mask_of({2}));
  CHECK((cd3.bc_mask & 1) == 1);
}

TEST_CASE("cut decomposition reconstructs the tree") {
  for (const auto& t : enumerate_forests(6)) {
    for (const auto& b : branches_of(t)) {
      CutDecomposition cd = cut_decomposition(t, b);
      Mask covered = 0;
      for (Mask p : cd.parts) {
        CHECK((covered & p) == 0);
        covered |= p;
      }
      CHECK(covered == t.universe());
      CHECK(tree_canonical_code(cut_reassemble(t, cd)) == tree_canonical_code(t));
      if (cd.bc_mask == 0) {
        // without complement positions the reassembly is the plain ordered sum
        std::vector<FiniteStructure> parts;
        for (Mask p : cd.parts) parts.push_back(induced_substructure(t, p).first);
        CHECK(tree_canonical_code(tree_sum(parts)) == tree_canonical_code(t));
      }
    }
  }
}

TEST_CASE("similarity classes") {
  FiniteStructure v = tr({-1, 0, 0});
  auto c0 = sim_classes(v, {0, 1}, 0);
  REQUIRE(c0.size() == 1);
  CHECK(c0[0] == mask_of({2}));
  auto c1 = sim_classes(v, {0, 1}, 1);
  REQUIRE(c1.size() == 1);
  CHECK(c1[0] == mask_of({2}));

  // two disconnected leftovers split at level 1
  FiniteStructure w = tr({-1, 0, 0, 0});
  auto w0 = sim_classes(w, {0, 1}, 0);
  REQUIRE(w0.size() == 1);
  CHECK(w0[0] == mask_of({2, 3}));
  auto w1 = sim_classes(w, {0, 1}, 1);
  CHECK(w1.size() == 2);

  // classes refine and both are partitions of the complement
  for (const auto& t : enumerate_forests(5)) {
    for (const auto& b : branches_of(t)) {
      auto zero = sim_classes(t, b, 0);
      auto one = sim_classes(t, b, 1);
      Mask all0 = 0, all1 = 0;
      for (Mask m : zero) all0 |= m;
      for (Mask m : one) all1 |= m;
      CHECK(all0 == all1);
      for (Mask m : one) {
        unsigned supers = 0;
        for (Mask z : zero)
          if ((m & z) == m) ++supers;
        CHECK(supers == 1);
      }
    }
  }

  // the whole chain leaves nothing to classify
  FiniteStructure chain_tree = tr({-1, 0});
  CHECK(sim_classes(chain_tree, {0, 1}, 0).empty());
  CHECK_THROWS_AS(sim_classes(w, {1, 2}, 0), DomainError);  // not a chain
}

TEST_CASE("tameness profiles") {
  CHECK(tameness_profile(tr({-1, 0, 1})).n_star == 0);  // chain tree
  CHECK(tameness_profile(tr({-1, 0, 0})).n_star == 1);  // binary root
  // root with k pairwise-incomparable children: k-1 classes on one locus
  for (unsigned k = 3; k <= 5; ++k) {
    std::vector<int> parent{-1};
    for (unsigned i = 1; i <= k; ++i) parent.push_back(0);
    CHECK(tameness_profile(tr(parent)).n_star == k - 1);
  }
  CHECK(tameness_profile(tr({-1, 0, 1})).k_star == 1);
  CHECK(tameness_profile(tr({-1})).k_star == 0);

  // subtree monotonicity on a sampled corpus
  for (const auto& t : enumerate_forests(5)) {
    unsigned full = tameness_profile(t).n_star;
    for (const auto& b : branches_of(t)) {
      for (Mask cls : sim_classes(t, b, 1)) {
        auto [sub, old_of] = induced_substructure(t, cls);
        CHECK(tameness_profile(sub).n_star <= full);
      }
    }
  }
}

TEST_CASE("whole-tree branch decomposition") {
  // three nodes: root and two leaves; first branch 0-1, then leaf 2
  A2Decomposition dec = a2_wellorder(tr({-1, 0, 0}));
  REQUIRE(dec.gamma.size() == 2);
  CHECK(dec.gamma[0].branch == std::vector<unsigned>{0, 1});
  CHECK(dec.gamma[1].branch == std::vector<unsigned>{2});
  CHECK(dec.order == std::vector<unsigned>{0, 1, 2});
  CHECK(dec.gamma[0].color == 0);
  CHECK(dec.representatives == mask_of({0, 2}));

  // a chain tree keeps its own order
  A2Decomposition dc = a2_wellorder(tr({-1, 0, 1, 2}));
  CHECK(dc.gamma.size() == 1);
  CHECK(dc.order == std::vector<unsigned>{0, 1, 2, 3});
}

TEST_CASE("decomposition order is a strict total order with convex branches") {
  for (const auto& t : enumerate_forests(6)) {
    A2Decomposition dec = a2_wellorder(t);
    const unsigned n = t.size();
    // totality and antisymmetry via ranks
    std::set<unsigned> ranks(dec.node_rank.begin(), dec.node_rank.end());
    CHECK(ranks.size() == n);
    // branch order matches the tree order and is convex
    for (const auto& g : dec.gamma) {
      for (std::size_t i = 0; i + 1 < g.branch.size(); ++i) {
        CHECK(t.less(g.branch[i], g.branch[i + 1]));
        CHECK(dec.order_less(g.branch[i], g.branch[i + 1]));
      }
      if (g.branch.size() < 2) continue;
      unsigned lo = dec.node_rank[g.branch.front()];
      unsigned hi = dec.node_rank[g.branch.back()];
      for (unsigned r = lo; r <= hi; ++r) {
        unsigned v = dec.order[r];
        CHECK(dec.node_gamma[v] == dec.node_gamma[g.branch.front()]);
      }
    }
  }
}

TEST_CASE("determination experiment") {
  // chain trees: the decomposition is trivial and already functional at k=n
  std::vector<DeterminationItem> chains;
  for (unsigned len = 1; len <= 4; ++len) {
    std::vector<int> parent{-1};
    for (unsigned i = 1; i < len; ++i) parent.push_back(static_cast<int>(i) - 1);
    DeterminationItem item;
    item.tree = tr(parent);
    item.branch = branches_of(item.tree)[0];
    chains.push_back(item);
  }
  DeterminationReport rep = determination_experiment(1, chains);
  REQUIRE(rep.least_functional_k.has_value());
  CHECK(*rep.least_functional_k == 1);

  // small mixed corpus with a predicate
  std::vector<DeterminationItem> corpus;
  for (const auto& t : enumerate_forests(4)) {
    for (const auto& b : branches_of(t)) {
      DeterminationItem item;
      item.tree = t;
      item.branch = b;
      corpus.push_back(item);
      for (Mask m : testcorpus::predicate_masks(t.size())) {
        DeterminationItem it2;
        it2.tree = t;
        it2.branch = b;
        it2.preds = {m};
        corpus.push_back(it2);
      }
    }
  }
  DeterminationReport r2 = determination_experiment(1, corpus);
  REQUIRE(r2.least_functional_k.has_value());
  CHECK(*r2.least_functional_k <= 4);
  CHECK(!r2.summary.empty());
  // reports reproduce
  DeterminationReport r3 = determination_experiment(1, corpus);
  CHECK(r2.summary == r3.summary);
}
