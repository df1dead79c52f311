#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mso/budget.hpp"
#include "mso/theory.hpp"

namespace mso {

// Ordinal below omega^omega in Cantor normal form: a sum of terms
// omega^e * c with strictly decreasing exponents and positive coefficients.
// The empty term list is 0.
struct OrdinalCNF {
  std::vector<std::pair<unsigned, std::uint64_t>> terms;

  bool is_zero() const { return terms.empty(); }
  unsigned degree() const;  // leading exponent; 0 must be checked by callers

  static OrdinalCNF zero() { return {}; }
  static OrdinalCNF nat(std::uint64_t k);
  static OrdinalCNF omega_pow(unsigned e, std::uint64_t coeff = 1);

  bool operator==(const OrdinalCNF&) const = default;
};

int ord_cmp(const OrdinalCNF& a, const OrdinalCNF& b);
inline bool ord_less(const OrdinalCNF& a, const OrdinalCNF& b) { return ord_cmp(a, b) < 0; }

OrdinalCNF ord_add(const OrdinalCNF& a, const OrdinalCNF& b);
OrdinalCNF ord_mul(const OrdinalCNF& a, const OrdinalCNF& b);
// The unique xi with a + xi = b; requires a <= b.
OrdinalCNF ord_left_sub(const OrdinalCNF& a, const OrdinalCNF& b);

// Text form `w^3*2 + w + 4`; `^1` and `*1` may be omitted; plain naturals
// allowed.  Non-canonical sums are normalized.
OrdinalCNF parse_ordinal(const std::string& text);
std::string print_ordinal(const OrdinalCNF& a);

// Depth-n theory of the ordinal as a parameter-free chain.
Theory theory_of_ordinal(const OrdinalCNF& a, unsigned n,
                         const Budget& budget = default_budget());

// Half-open interval [lo, hi).
struct OrdInterval {
  OrdinalCNF lo, hi;
  bool operator==(const OrdInterval&) const = default;
};

// Ordered classes of disjoint intervals exactly covering [0, alpha).
struct IntervalPartition {
  OrdinalCNF alpha;
  std::vector<std::vector<OrdInterval>> classes;
};

// Order type of the rearrangement that lists class 0 first (each class in
// source order), then class 1, and so on.
OrdinalCNF partition_order_type(const IntervalPartition& p);

// A piece of a rearrangement: the source interval and where it lands.
struct PlacedPiece {
  OrdInterval src;
  OrdinalCNF dst_lo, dst_hi;
};

// Pieces in target order with their destination offsets.
std::vector<PlacedPiece> rearrangement_layout(const IntervalPartition& p);

// Pulls the second rearrangement back through the first: a partition of
// p1.alpha (every piece its own class) whose order type equals
// partition_order_type(p2).  Requires p2.alpha == partition_order_type(p1).
IntervalPartition compose_rearrangements(const IntervalPartition& p1,
                                         const IntervalPartition& p2);

// First pair (g1, g2) with g1 + g2 = a and g2 + g1 = b, searching g1 in
// increasing order over CNFs with exponents <= degree(a) and coefficients
// <= bound.
std::optional<std::pair<OrdinalCNF, OrdinalCNF>> decomposition_search(
    const OrdinalCNF& a, const OrdinalCNF& b, std::uint64_t bound);
// Bound defaulted to max coefficient of a and b plus one.
std::optional<std::pair<OrdinalCNF, OrdinalCNF>> decomposition_search(
    const OrdinalCNF& a, const OrdinalCNF& b);

// Leading CNF exponent, i.e. the k with omega^k <= a < omega^(k+1).
unsigned log_of(const OrdinalCNF& a);

}  // namespace mso
