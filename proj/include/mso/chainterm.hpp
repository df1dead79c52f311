#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mso/formula.hpp"
#include "mso/ordinal.hpp"

namespace mso {

enum class TermKind : unsigned char { Fin, Omega, Reverse, Concat, OmegaSum };

class ChainTerm;
using ChainTermPtr = std::shared_ptr<const ChainTerm>;

// Term-represented scattered chain.  Normal form: Reverse(Reverse(x)) = x,
// Reverse pushed through Fin and Concat (so it only wraps Omega and
// OmegaSum), nested Concats flattened, empty Concat parts dropped.
class ChainTerm {
 public:
  TermKind kind;
  unsigned fin_size = 0;                    // Fin
  ChainTermPtr child;                       // Reverse
  std::vector<ChainTermPtr> parts;          // Concat
  std::vector<ChainTermPtr> prefix, period; // OmegaSum

  static ChainTermPtr fin(unsigned k);
  static ChainTermPtr omega();
  static ChainTermPtr reverse(ChainTermPtr t);
  static ChainTermPtr concat(std::vector<ChainTermPtr> parts);
  static ChainTermPtr omega_sum(std::vector<ChainTermPtr> prefix,
                                std::vector<ChainTermPtr> period);

  ChainTerm() = default;  // build through the factories above
};

bool term_equal(const ChainTermPtr& a, const ChainTermPtr& b);

// S-expression syntax: `(fin 3)`, `omega`, `(rev t)`, `(concat t...)`,
// `(omegasum (prefix t...) (period t...))`.
ChainTermPtr parse_chain_term(const std::string& text);
std::string print_chain_term(const ChainTermPtr& t);

// Number of points, when finite.
std::optional<std::uint64_t> term_points(const ChainTermPtr& t);
bool term_well_ordered(const ChainTermPtr& t);
bool term_rev_well_ordered(const ChainTermPtr& t);

// Structural Hausdorff degree: 0 for at most one point, 1 for well- or
// reverse-well-ordered terms, otherwise 1 + max over the blocks of the top
// decomposition.
unsigned hdeg(const ChainTermPtr& t);

// Path from the root: one block index per Concat/OmegaSum node on the way
// (OmegaSum indices count prefix blocks first, then the period cyclically),
// and a final leaf position.  Reverse nodes consume no step.
struct ElementAddress {
  std::vector<std::uint64_t> steps;
  bool operator==(const ElementAddress&) const = default;
  bool operator<(const ElementAddress& o) const { return steps < o.steps; }
};

bool address_valid(const ChainTermPtr& t, const ElementAddress& a);

// Order type of the synthesized well-order of the term.
OrdinalCNF term_order_type(const ChainTermPtr& t);

// Ordinal position of the addressed point in the synthesized well-order.
OrdinalCNF rank(const ChainTermPtr& t, const ElementAddress& a);

// Chain-order comparison of two addressed points (-1, 0, 1).
int chain_compare(const ChainTermPtr& t, const ElementAddress& x,
                  const ElementAddress& y);

// Parameterized well-ordering certificate.  Parameter k (1-based, k from 1
// to degree-1) marks the blocks of the depth-(degree-k) decomposition whose
// block index has the stored parity; the synthesis always marks even
// blocks.
struct WellOrderCertificate {
  ChainTermPtr term;
  unsigned degree = 0;
  FormulaPtr formula;
  std::vector<unsigned> param_parity;  // size degree-1; 0 = even (as built)
};

WellOrderCertificate synthesize_wellorder(const ChainTermPtr& t);

// Membership of the addressed point in parameter P_k of the certificate.
bool certificate_param_member(const WellOrderCertificate& c, unsigned k,
                              const ElementAddress& a);

// Evaluates the synthesized order formula on two addressed points using the
// structural semantics of the certificate family.
bool certificate_order_eval(const WellOrderCertificate& c, const ElementAddress& x,
                            const ElementAddress& y);

struct WellOrderVerifyReport {
  bool pass = false;
  std::uint64_t pairs_checked = 0;
  std::string failure;  // empty when pass
};

// Samples address pairs and checks (a) the certificate parameters agree
// with the synthesis marking, (b) the order formula agrees with rank
// comparison.  Reports the first counterexample otherwise.
WellOrderVerifyReport verify_wellorder(const WellOrderCertificate& cert,
                                       const ChainTermPtr& t, unsigned samples,
                                       std::uint64_t seed = 1);

// Deterministic address sampler used by verification and tests.
ElementAddress sample_address(const ChainTermPtr& t, std::uint64_t& rng_state);

}  // namespace mso
