#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mso/budget.hpp"
#include "mso/structure.hpp"
#include "mso/theory.hpp"

namespace mso {

// Ultimately periodic sequence of same-shape theories; without a period it
// is just a finite sequence.
struct TheorySequence {
  unsigned level = 0;
  unsigned arity = 0;
  std::vector<Theory> prefix;
  std::vector<Theory> period;

  void validate() const;
};

// Theory of the concatenation of any two chains realizing a and b.
Theory add(Theory a, Theory b);

// Left fold of add; the empty sequence yields the empty-chain theory.
Theory sum_finite(const TheorySequence& seq);

// Theory of an omega-concatenation with ultimately periodic summands.
// Computed from the finite semigroup generated by the period members:
// achievable member values are s + e^omega with e idempotent.
Theory omega_sum(const TheorySequence& seq, const Budget& budget = default_budget());

// omega_sum of the constant sequence <t, t, ...>.
Theory omega_const(Theory t, const Budget& budget = default_budget());

// Sum over a finite index chain with one theory per index point.
Theory generalized_sum(const FiniteStructure& index,
                       const std::vector<Theory>& per_point, unsigned level,
                       unsigned arity);

// Finite semigroup given by an explicit addition table.
struct SemigroupTable {
  std::vector<std::string> names;
  std::vector<unsigned> table;  // table[i*n+j] = index of names[i]+names[j]

  unsigned size() const { return static_cast<unsigned>(names.size()); }
  unsigned op(unsigned i, unsigned j) const { return table[i * size() + j]; }
  int index_of(const std::string& name) const;
  // Throws DomainError when the table is not associative.
  void validate() const;

  // Text form: `elements: a b c` then one `x y z` line per ordered pair
  // meaning x+y=z.
  static SemigroupTable parse(const std::string& text);
};

// The idempotent power e = x^k with e+e = e; returns (element index, k).
std::pair<unsigned, unsigned> idempotent_power(unsigned x, const SemigroupTable& sg);

struct TowerReport {
  // tower[i] is the theory of the omega^(i+1)-fold repetition.
  std::vector<Theory> tower;
  // Least p >= 1 with tower value at omega^(p+1) equal to the one at
  // omega^p, when reached within the requested depth.
  std::optional<unsigned> stabilization;
  bool stable_idempotent = false;
  bool next_equation_holds = false;  // omega^(p+2) value equals omega^(p+1)
};

TowerReport omega_power_tower(Theory t, unsigned depth,
                              const Budget& budget = default_budget());

// Pair coloring f on a finite chain with values in a finite semigroup and
// f(x,z) = f(x,y) + f(y,z) for x < y < z.
struct AdditiveColoring {
  unsigned chain_size = 0;
  SemigroupTable sg;
  std::vector<unsigned> pair_color;  // upper-triangular, row-major

  unsigned get(unsigned i, unsigned j) const;
  void set(unsigned i, unsigned j, unsigned c);
  // Throws DomainError naming the first violating triple.
  void validate_additivity() const;

  // Builds the coloring from consecutive steps f(i,i+1); additive by
  // construction.
  static AdditiveColoring from_steps(SemigroupTable sg,
                                     const std::vector<unsigned>& steps);
  // First n points of an omega-chain coloring with ultimately periodic
  // steps.
  static AdditiveColoring from_periodic_steps(SemigroupTable sg,
                                              const std::vector<unsigned>& prefix,
                                              const std::vector<unsigned>& period,
                                              unsigned n);
  // Text form: a semigroup table, then `chain N`, then either a `steps:`
  // line with N-1 element names or `pair i j name` lines for all pairs.
  static AdditiveColoring parse(const std::string& text);
};

// Lexicographically least increasing index sequence of the given size on
// which the coloring is constant; nullopt when none exists.
std::optional<std::vector<unsigned>> additive_ramsey(const AdditiveColoring& col,
                                                     unsigned size);

}  // namespace mso
