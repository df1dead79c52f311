#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mso/budget.hpp"
#include "mso/errors.hpp"
#include "mso/formula.hpp"
#include "mso/structure.hpp"

namespace mso {

using TheoryId = std::uint32_t;

enum class VarState : unsigned char { Empty, One, Many };

// Level-0 payload: a total truth assignment to the atom basis over l set
// variables.  Equality atoms are derived: eq(i,j) = sub(i,j) && sub(j,i).
struct Level0 {
  std::vector<VarState> state;
  std::vector<char> sub;   // l*l row-major; diagonal fixed true
  std::vector<char> less;  // l*l row-major; diagonal fixed false

  unsigned arity() const { return static_cast<unsigned>(state.size()); }
  bool get_sub(unsigned i, unsigned j) const { return sub[i * arity() + j]; }
  bool get_less(unsigned i, unsigned j) const { return less[i * arity() + j]; }
  bool get_eq(unsigned i, unsigned j) const { return get_sub(i, j) && get_sub(j, i); }
  bool operator==(const Level0&) const = default;
};

// Interned handle to a canonical theory value.  Level n+1 theories are
// duplicate-free member lists in canonical serialization order.
class Theory {
 public:
  Theory() = default;  // invalid handle
  explicit Theory(TheoryId id) : id_(id) {}

  bool valid() const { return id_ != kInvalid; }
  TheoryId id() const { return id_; }
  unsigned level() const;
  unsigned arity() const;
  bool is_level0() const { return level() == 0; }
  const Level0& payload() const;
  const std::vector<Theory>& members() const;

  bool operator==(const Theory& o) const { return id_ == o.id_; }
  bool operator!=(const Theory& o) const { return id_ != o.id_; }

  static constexpr TheoryId kInvalid = 0xffffffffu;

 private:
  TheoryId id_ = kInvalid;
};

// Canonical (serialization byte-order) comparison and rendering.
int theory_cmp(Theory a, Theory b);
inline bool theory_less(Theory a, Theory b) { return theory_cmp(a, b) < 0; }
std::string serialize_theory(Theory t);
Theory parse_theory(const std::string& text);

Theory intern_level0(Level0 p);
Theory intern_composite(unsigned level, unsigned arity, std::vector<Theory> members);

// Depth-n theory of a finite structure under the given predicate tuple.
Theory eval_theory(const FiniteStructure& s, const std::vector<Mask>& vars,
                   unsigned n, const Budget& budget = default_budget());

// Exhaustive quantifier-expansion semantics; the independent oracle.
bool model_check(const FiniteStructure& s, const FormulaPtr& phi,
                 const std::map<std::string, Mask>& env,
                 const Budget& budget = default_budget());
bool model_check(const FiniteStructure& s, const FormulaPtr& phi,
                 const VariableContext& ctx, const std::vector<Mask>& vars,
                 const Budget& budget = default_budget());

// Decides phi from the theory alone.  Requires dp(phi) <= level and the
// context to cover the free variables with matching arity.
bool decide(const FormulaPtr& phi, Theory t, const VariableContext& ctx);

// Depth reduction by repeated common member projection.  Throws
// CoherenceError when members disagree.
Theory reduce(Theory t, unsigned m);

// Forgets the predicate at `pos`.
Theory drop_var(Theory t, unsigned pos);

// Inserts a fresh empty-interpreted predicate at `pos` (pad appends).
Theory insert_empty_var(Theory t, unsigned pos);
inline Theory pad(Theory t) { return insert_empty_var(t, /*pos=*/~0u); }

// Reorders the predicate positions: result position i holds old position
// perm[i].
Theory permute_vars(Theory t, const std::vector<unsigned>& perm);

// Formula of depth = level(t) characterizing t among same-arity tuples.
FormulaPtr characteristic_formula(Theory t, const VariableContext& ctx);

Theory theory_of_empty_chain(unsigned n, unsigned arity);

// True when some member (at any depth) shows two incomparable singletons,
// which cannot happen in a chain theory.
bool exhibits_incomparability(Theory t);

struct TypeSpace {
  unsigned level = 0;
  unsigned arity = 0;
  std::vector<Theory> types;  // canonically sorted when materialized
  bool materialized = false;

  // Formal-possibility membership; independent of materialization.
  bool contains(Theory t, const Budget& budget = default_budget()) const;
};

// The formally possible theories at (n, l).  Materializes the set; the
// space is doubly exponential, so a budget error is the expected outcome
// beyond small parameters.
TypeSpace enumerate_types(unsigned n, unsigned l,
                          const Budget& budget = default_budget());

// Formal-possibility predicate: level 0 asks for satisfiability in some
// chain of size <= 2l+1; level n+1 asks members to be formally possible
// and to share their drop-last projection.
bool formally_possible(Theory t, const Budget& budget = default_budget());

}  // namespace mso
