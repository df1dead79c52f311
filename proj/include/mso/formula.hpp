#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "mso/errors.hpp"

namespace mso {

enum class FormulaKind : unsigned char { Atom, Not, And, Or, Implies, Exists, Forall };
enum class AtomKind : unsigned char { Sing, Empty, Subset, Less, Equal };

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Immutable AST node of the monadic language of order.  All variables are
// set variables; `X < Y` means both are singletons whose elements compare
// strictly.  Order on trees is the strict tree order.
class Formula {
 public:
  FormulaKind kind;
  AtomKind atom{};      // when kind == Atom
  std::string a, b;     // atom operands; quantified variable in `a`
  FormulaPtr lhs, rhs;  // children; unary nodes use lhs only

  const std::set<std::string>& free_vars() const { return free_; }
  unsigned depth() const { return depth_; }

  static FormulaPtr make_atom(AtomKind k, std::string x, std::string y = {});
  static FormulaPtr make_unary(FormulaKind k, FormulaPtr c);
  static FormulaPtr make_binary(FormulaKind k, FormulaPtr l, FormulaPtr r);
  static FormulaPtr make_quant(FormulaKind k, std::string var, FormulaPtr body);

 private:
  std::set<std::string> free_;
  unsigned depth_ = 0;
  Formula() = default;
};

// Ordered list of free-variable names; position in the list is the
// predicate slot used by theories and structures.
struct VariableContext {
  std::vector<std::string> names;

  VariableContext() = default;
  VariableContext(std::initializer_list<std::string> ns);
  explicit VariableContext(std::vector<std::string> ns);

  std::size_t arity() const { return names.size(); }
  // Index of `name`, or -1.
  int index_of(const std::string& name) const;
};

// Convenience constructors.
namespace fb {
FormulaPtr sing(std::string x);
FormulaPtr empty(std::string x);
FormulaPtr sub(std::string x, std::string y);
FormulaPtr less(std::string x, std::string y);
FormulaPtr eq(std::string x, std::string y);
FormulaPtr lnot(FormulaPtr f);
FormulaPtr land(FormulaPtr l, FormulaPtr r);
FormulaPtr lor(FormulaPtr l, FormulaPtr r);
FormulaPtr implies(FormulaPtr l, FormulaPtr r);
FormulaPtr iff(FormulaPtr l, FormulaPtr r);
FormulaPtr exists(std::string v, FormulaPtr body);
FormulaPtr forall(std::string v, FormulaPtr body);
// Conjunction / disjunction of a list; empty list yields the neutral
// constant encoded as `empty(X) | ~empty(X)` resp. its negation over `var`.
FormulaPtr conj(const std::vector<FormulaPtr>& fs, const std::string& var);
FormulaPtr disj(const std::vector<FormulaPtr>& fs, const std::string& var);
}  // namespace fb

// Quantifier depth: 0 for quantifier-free, +1 per nested quantifier.
unsigned dp(const FormulaPtr& f);

// Parses the textual grammar.  Throws SyntaxError with character offset.
FormulaPtr parse_formula(const std::string& text);

// Canonical printer; parse_formula(print_formula(f)) is structurally
// identical to f.
std::string print_formula(const FormulaPtr& f);

bool structurally_equal(const FormulaPtr& x, const FormulaPtr& y);

// Renames free occurrences of `from` to `to`; `to` must not be bound
// anywhere in f (freshness is the caller's concern).
FormulaPtr rename_free(const FormulaPtr& f, const std::string& from,
                       const std::string& to);

// A variable name based on `base` that is neither in `avoid` nor bound in
// any of the formulas the caller passes via `avoid`.
std::string fresh_var(const std::string& base, const std::set<std::string>& avoid);

// All variable names occurring in f (free or bound).
std::set<std::string> all_vars(const FormulaPtr& f);

}  // namespace mso
