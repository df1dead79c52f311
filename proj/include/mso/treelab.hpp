#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mso/budget.hpp"
#include "mso/structure.hpp"
#include "mso/theory.hpp"

namespace mso {

// Induced substructure on the given node set; second component maps new
// indices to the original ones.  Chains stay chains; trees keep the nearest
// in-set ancestor as parent.
std::pair<FiniteStructure, std::vector<unsigned>> induced_substructure(
    const FiniteStructure& t, Mask nodes);

// Restriction of a predicate mask to the substructure's index space.
Mask restrict_mask(Mask m, const std::vector<unsigned>& index_map);

// Ordered sum of trees along a finite index chain: orders inside parts are
// kept, the root of an earlier part lies below every node of later parts,
// and rootless earlier parts are incomparable to the rest.  Nodes are
// relabelled part by part.
FiniteStructure tree_sum(const std::vector<FiniteStructure>& parts);

// Branch decomposition data for a tree and a maximal chain B.
struct CutDecomposition {
  std::vector<unsigned> branch;       // B, ascending
  std::vector<Mask> parts;            // T_eta per position of the chain
  std::vector<int> chain_nodes;       // representative per position (-1 for
                                      // the empty-cut part of a forest)
  Mask bc_mask = 0;                   // B^c inside the chain positions
  unsigned chain_size() const { return static_cast<unsigned>(parts.size()); }
};

// Throws when the branch is not maximal; the result always reassembles to
// the input (checked internally).
CutDecomposition cut_decomposition(const FiniteStructure& t,
                                   const std::vector<unsigned>& branch);

// Rebuilds the tree from its decomposition parts: branch parts are rooted
// summands, the empty-locus part of a forest joins disjointly.
FiniteStructure cut_reassemble(const FiniteStructure& t, const CutDecomposition& cd);

// Partition of T \ A by cut locus (level 0) refined by comparability
// components (level 1).  Classes are ordered by locus along A (empty locus
// first) and then by least node.
std::vector<Mask> sim_classes(const FiniteStructure& t,
                              const std::vector<unsigned>& A, int level);

struct TamenessProfile {
  unsigned n_star = 0;
  unsigned k_star = 0;
};

TamenessProfile tameness_profile(const FiniteStructure& t);

// Branch decomposition of the whole tree: iterated branch extraction with
// deterministic tie-breaking, a sibling coloring, and the induced total
// order.
struct A2Node {
  std::vector<unsigned> branch;       // A_eta ascending in the tree order
  Mask carrier = 0;                   // T_eta
  unsigned rep = 0;                   // representative: least node of A_eta
  int parent = -1;                    // index into the node list
  std::vector<unsigned> children;     // canonical sibling order
  int cut_index = -1;                 // position in parent's branch (-1: empty locus)
  unsigned color = 0;
};

struct A2Decomposition {
  std::vector<A2Node> gamma;          // gamma[0] is the root
  std::vector<unsigned> node_gamma;   // tree node -> gamma index
  std::vector<unsigned> order;        // tree nodes in ascending well-order
  std::vector<unsigned> node_rank;    // tree node -> position in `order`
  std::vector<Mask> color_classes;    // one mask per color used
  Mask representatives = 0;
  unsigned colors_used = 0;

  bool order_less(unsigned x, unsigned y) const { return node_rank[x] < node_rank[y]; }
};

A2Decomposition a2_wellorder(const FiniteStructure& t);

// One experiment item: a tree, a branch, and up to one predicate.
struct DeterminationItem {
  FiniteStructure tree;
  std::vector<unsigned> branch;
  std::vector<Mask> preds;  // arity 0 or 1
};

struct DeterminationReport {
  unsigned n = 0;
  struct PerK {
    unsigned k = 0;
    bool functional = false;
    unsigned keys = 0;
    unsigned collisions = 0;
  };
  std::vector<PerK> per_k;                        // ascending k, stops when functional
  std::optional<unsigned> least_functional_k;
  std::vector<PerK> ablated_per_k;                // same map without the B^c predicate
  std::optional<unsigned> ablated_least_functional_k;
  std::string summary;                            // canonical printable form
};

// Tests, for k = n..n+3, whether the depth-k theory of the decomposition
// chain (with branch, complement and per-subtree-theory predicates)
// determines the depth-n theory of the whole tree over the corpus.
DeterminationReport determination_experiment(unsigned n,
                                             const std::vector<DeterminationItem>& corpus,
                                             const Budget& budget = default_budget());

}  // namespace mso
