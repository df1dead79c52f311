#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mso/budget.hpp"
#include "mso/compose.hpp"
#include "mso/formula.hpp"
#include "mso/structure.hpp"
#include "mso/theory.hpp"
#include "mso/treelab.hpp"

namespace mso {

// Subset order used by every deterministic selection: X precedes X' when
// the least point of the symmetric difference lies in X.
inline bool mask_lex_less(Mask x, Mask y) {
  if (x == y) return false;
  Mask d = x ^ y;
  Mask low = d & (~d + 1);
  return (x & low) != 0;
}

// Context covering the selection variables X, Y and the structure's named
// sets (sorted by name); theories over a structure use the same order.
VariableContext selection_context(const FiniteStructure& s);

// Exhaustive check of "for every Y some X satisfies phi".
bool check_pu(const FormulaPtr& phi, const FiniteStructure& s,
              const Budget& budget = default_budget());

struct LexUniformizer {
  FormulaPtr phi;
  FormulaPtr psi;  // phi plus lexicographic minimality, a single formula
  std::map<Mask, Mask> selection;
};

// Lexicographically least witness per Y on a finite chain, with an emitted
// defining formula whose uniqueness is model-checked.
LexUniformizer lex_uniformize(const FormulaPtr& phi, const FiniteStructure& chain,
                              const Budget& budget = default_budget());

struct BlockCertificate {
  std::vector<Theory> block_theories;  // depth n+1 per block, Y side only
  std::vector<Theory> targets;         // chosen depth-n theories per block
  Theory glued_theory;                 // sum of the targets
  std::vector<Mask> block_selection;   // chosen X per block, block-local
};

struct ProductUniformizer {
  FormulaPtr phi;
  unsigned block_size = 1;
  unsigned blocks = 0;
  std::map<Mask, Mask> selection;
  std::map<Mask, BlockCertificate> certificates;
};

// Block-coherent uniformizer on a product chain (blocks of block_size
// points): picks per-block target theories from the least global witness,
// then re-selects each block independently against its target.
ProductUniformizer product_uniformize(const FormulaPtr& phi,
                                      const FiniteStructure& product,
                                      unsigned block_size,
                                      const Budget& budget = default_budget());

struct TreeNodeCertificate {
  unsigned gamma_index = 0;
  Theory target;                      // inherited for the carrier
  Theory branch_target;               // chosen for the node's branch
  std::vector<Theory> child_targets;  // one per gamma child
  bool theory_driven = true;          // false when the direct fallback fired
};

struct TreeUniformizer {
  FormulaPtr phi;
  A2Decomposition decomposition;
  std::map<Mask, Mask> selection;
  std::map<Mask, std::vector<TreeNodeCertificate>> certificates;
};

// Decomposition-driven uniformizer on a finite tree: walks the branch
// decomposition top-down, choosing per-node branch and child target
// theories and selecting each branch part independently.
TreeUniformizer tree_uniformize(const FormulaPtr& phi, const FiniteStructure& tree,
                                const Budget& budget = default_budget());

}  // namespace mso
