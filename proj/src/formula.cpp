#include "mso/formula.hpp"

#include <algorithm>
#include <cctype>

namespace mso {

FormulaPtr Formula::make_atom(AtomKind k, std::string x, std::string y) {
  auto f = std::shared_ptr<Formula>(new Formula());
  f->kind = FormulaKind::Atom;
  f->atom = k;
  f->a = std::move(x);
  f->b = std::move(y);
  f->free_.insert(f->a);
  if (!f->b.empty()) f->free_.insert(f->b);
  return f;
}

FormulaPtr Formula::make_unary(FormulaKind k, FormulaPtr c) {
  auto f = std::shared_ptr<Formula>(new Formula());
  f->kind = k;
  f->lhs = std::move(c);
  f->free_ = f->lhs->free_;
  f->depth_ = f->lhs->depth_;
  return f;
}

FormulaPtr Formula::make_binary(FormulaKind k, FormulaPtr l, FormulaPtr r) {
  auto f = std::shared_ptr<Formula>(new Formula());
  f->kind = k;
  f->lhs = std::move(l);
  f->rhs = std::move(r);
  f->free_ = f->lhs->free_;
  f->free_.insert(f->rhs->free_.begin(), f->rhs->free_.end());
  f->depth_ = std::max(f->lhs->depth_, f->rhs->depth_);
  return f;
}

FormulaPtr Formula::make_quant(FormulaKind k, std::string var, FormulaPtr body) {
  auto f = std::shared_ptr<Formula>(new Formula());
  f->kind = k;
  f->a = std::move(var);
  f->lhs = std::move(body);
  f->free_ = f->lhs->free_;
  f->free_.erase(f->a);
  f->depth_ = f->lhs->depth_ + 1;
  return f;
}

VariableContext::VariableContext(std::initializer_list<std::string> ns)
    : names(ns) {}
VariableContext::VariableContext(std::vector<std::string> ns)
    : names(std::move(ns)) {}

int VariableContext::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

namespace fb {
FormulaPtr sing(std::string x) { return Formula::make_atom(AtomKind::Sing, std::move(x)); }
FormulaPtr empty(std::string x) { return Formula::make_atom(AtomKind::Empty, std::move(x)); }
FormulaPtr sub(std::string x, std::string y) { return Formula::make_atom(AtomKind::Subset, std::move(x), std::move(y)); }
FormulaPtr less(std::string x, std::string y) { return Formula::make_atom(AtomKind::Less, std::move(x), std::move(y)); }
FormulaPtr eq(std::string x, std::string y) { return Formula::make_atom(AtomKind::Equal, std::move(x), std::move(y)); }
FormulaPtr lnot(FormulaPtr f) { return Formula::make_unary(FormulaKind::Not, std::move(f)); }
FormulaPtr land(FormulaPtr l, FormulaPtr r) { return Formula::make_binary(FormulaKind::And, std::move(l), std::move(r)); }
FormulaPtr lor(FormulaPtr l, FormulaPtr r) { return Formula::make_binary(FormulaKind::Or, std::move(l), std::move(r)); }
FormulaPtr implies(FormulaPtr l, FormulaPtr r) { return Formula::make_binary(FormulaKind::Implies, std::move(l), std::move(r)); }
FormulaPtr iff(FormulaPtr l, FormulaPtr r) {
  return land(implies(l, r), implies(r, l));
}
FormulaPtr exists(std::string v, FormulaPtr body) { return Formula::make_quant(FormulaKind::Exists, std::move(v), std::move(body)); }
FormulaPtr forall(std::string v, FormulaPtr body) { return Formula::make_quant(FormulaKind::Forall, std::move(v), std::move(body)); }

FormulaPtr conj(const std::vector<FormulaPtr>& fs, const std::string& var) {
  if (fs.empty()) return lor(empty(var), lnot(empty(var)));
  FormulaPtr acc = fs[0];
  for (std::size_t i = 1; i < fs.size(); ++i) acc = land(acc, fs[i]);
  return acc;
}
FormulaPtr disj(const std::vector<FormulaPtr>& fs, const std::string& var) {
  if (fs.empty()) return land(empty(var), lnot(empty(var)));
  FormulaPtr acc = fs[0];
  for (std::size_t i = 1; i < fs.size(); ++i) acc = lor(acc, fs[i]);
  return acc;
}
}  // namespace fb

unsigned dp(const FormulaPtr& f) { return f->depth(); }

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Parser {
  const std::string& s;
  std::size_t pos = 0;
  std::vector<std::string> bound;  // quantifier scope stack

  explicit Parser(const std::string& text) : s(text) {}

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  bool eat(const std::string& tok) {
    skip_ws();
    if (s.compare(pos, tok.size(), tok) == 0) {
      pos += tok.size();
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) { throw SyntaxError(msg, pos + 1); }

  bool at_ident_start() {
    skip_ws();
    return pos < s.size() && std::isupper(static_cast<unsigned char>(s[pos]));
  }

  std::string ident() {
    skip_ws();
    if (pos >= s.size() || !std::isupper(static_cast<unsigned char>(s[pos])))
      fail("expected variable");
    std::size_t start = pos;
    while (pos < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
      ++pos;
    return s.substr(start, pos - start);
  }

  // Peeks an identifier without consuming.
  std::string peek_ident() {
    std::size_t save = pos;
    std::string id = at_ident_start() ? ident() : std::string();
    pos = save;
    return id;
  }

  FormulaPtr formula() { return impl(); }

  FormulaPtr impl() {
    FormulaPtr l = disj();
    skip_ws();
    if (eat("->")) return fb::implies(l, impl());
    return l;
  }

  FormulaPtr disj() {
    FormulaPtr l = conj();
    for (;;) {
      skip_ws();
      if (pos < s.size() && s[pos] == '|') {
        ++pos;
        l = fb::lor(l, conj());
      } else {
        return l;
      }
    }
  }

  FormulaPtr conj() {
    FormulaPtr l = unary();
    for (;;) {
      skip_ws();
      if (pos < s.size() && s[pos] == '&') {
        ++pos;
        l = fb::land(l, unary());
      } else {
        return l;
      }
    }
  }

  FormulaPtr unary() {
    skip_ws();
    if (eat("~")) return fb::lnot(unary());
    std::string id = peek_ident();
    if (id == "EX" || id == "ALL") {
      ident();
      std::string v = ident();
      if (v == "EX" || v == "ALL") fail("reserved word used as variable");
      if (std::find(bound.begin(), bound.end(), v) != bound.end())
        fail("variable " + v + " already bound in scope");
      skip_ws();
      if (!eat(".")) fail("expected '.' after quantified variable");
      bound.push_back(v);
      FormulaPtr body = formula();
      bound.pop_back();
      return id == "EX" ? fb::exists(v, body) : fb::forall(v, body);
    }
    return primary();
  }

  FormulaPtr primary() {
    skip_ws();
    if (eat("(")) {
      FormulaPtr f = formula();
      skip_ws();
      if (!eat(")")) fail("expected ')'");
      return f;
    }
    if (eat("sing")) {
      if (!eat("(")) fail("expected '(' after sing");
      std::string v = ident();
      if (!eat(")")) fail("expected ')'");
      return fb::sing(v);
    }
    if (eat("empty")) {
      if (!eat("(")) fail("expected '(' after empty");
      std::string v = ident();
      if (!eat(")")) fail("expected ')'");
      return fb::empty(v);
    }
    if (!at_ident_start()) fail("expected formula");
    std::string x = ident();
    if (x == "EX" || x == "ALL") fail("misplaced quantifier");
    skip_ws();
    if (eat("sub")) return fb::sub(x, ident());
    if (eat("<")) return fb::less(x, ident());
    if (eat("=")) return fb::eq(x, ident());
    fail("expected atom relation after variable " + x);
  }
};

int prec_of(const FormulaPtr& f) {
  switch (f->kind) {
    case FormulaKind::Atom: return 5;
    case FormulaKind::Not: return 4;
    case FormulaKind::And: return 3;
    case FormulaKind::Or: return 2;
    default: return 1;  // Implies, Exists, Forall
  }
}

void print_rec(const FormulaPtr& f, int need, std::string& out) {
  bool paren = prec_of(f) < need;
  if (paren) out += '(';
  switch (f->kind) {
    case FormulaKind::Atom:
      switch (f->atom) {
        case AtomKind::Sing: out += "sing(" + f->a + ")"; break;
        case AtomKind::Empty: out += "empty(" + f->a + ")"; break;
        case AtomKind::Subset: out += f->a + " sub " + f->b; break;
        case AtomKind::Less: out += f->a + " < " + f->b; break;
        case AtomKind::Equal: out += f->a + " = " + f->b; break;
      }
      break;
    case FormulaKind::Not:
      out += '~';
      print_rec(f->lhs, 4, out);
      break;
    case FormulaKind::And:
      print_rec(f->lhs, 3, out);
      out += " & ";
      print_rec(f->rhs, 4, out);
      break;
    case FormulaKind::Or:
      print_rec(f->lhs, 2, out);
      out += " | ";
      print_rec(f->rhs, 3, out);
      break;
    case FormulaKind::Implies:
      print_rec(f->lhs, 2, out);
      out += " -> ";
      print_rec(f->rhs, 1, out);
      break;
    case FormulaKind::Exists:
    case FormulaKind::Forall:
      out += (f->kind == FormulaKind::Exists ? "EX " : "ALL ");
      out += f->a + ". ";
      print_rec(f->lhs, 1, out);
      break;
  }
  if (paren) out += ')';
}

}  // namespace

FormulaPtr parse_formula(const std::string& text) {
  Parser p(text);
  FormulaPtr f = p.formula();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  return f;
}

std::string print_formula(const FormulaPtr& f) {
  std::string out;
  print_rec(f, 0, out);
  return out;
}

bool structurally_equal(const FormulaPtr& x, const FormulaPtr& y) {
  if (x.get() == y.get()) return true;
  if (x->kind != y->kind) return false;
  switch (x->kind) {
    case FormulaKind::Atom:
      return x->atom == y->atom && x->a == y->a && x->b == y->b;
    case FormulaKind::Not:
      return structurally_equal(x->lhs, y->lhs);
    case FormulaKind::Exists:
    case FormulaKind::Forall:
      return x->a == y->a && structurally_equal(x->lhs, y->lhs);
    default:
      return structurally_equal(x->lhs, y->lhs) &&
             structurally_equal(x->rhs, y->rhs);
  }
}

FormulaPtr rename_free(const FormulaPtr& f, const std::string& from,
                       const std::string& to) {
  if (!f->free_vars().count(from)) return f;
  switch (f->kind) {
    case FormulaKind::Atom: {
      std::string a = f->a == from ? to : f->a;
      std::string b = f->b == from ? to : f->b;
      return Formula::make_atom(f->atom, a, b);
    }
    case FormulaKind::Not:
      return Formula::make_unary(f->kind, rename_free(f->lhs, from, to));
    case FormulaKind::Exists:
    case FormulaKind::Forall:
      // `from` is free here, so f->a != from.
      return Formula::make_quant(f->kind, f->a, rename_free(f->lhs, from, to));
    default:
      return Formula::make_binary(f->kind, rename_free(f->lhs, from, to),
                                  rename_free(f->rhs, from, to));
  }
}

std::string fresh_var(const std::string& base, const std::set<std::string>& avoid) {
  if (!avoid.count(base)) return base;
  for (int i = 0;; ++i) {
    std::string cand = base + std::to_string(i);
    if (!avoid.count(cand)) return cand;
  }
}

namespace {
void collect_vars(const FormulaPtr& f, std::set<std::string>& out) {
  switch (f->kind) {
    case FormulaKind::Atom:
      out.insert(f->a);
      if (!f->b.empty()) out.insert(f->b);
      return;
    case FormulaKind::Not:
      collect_vars(f->lhs, out);
      return;
    case FormulaKind::Exists:
    case FormulaKind::Forall:
      out.insert(f->a);
      collect_vars(f->lhs, out);
      return;
    default:
      collect_vars(f->lhs, out);
      collect_vars(f->rhs, out);
  }
}
}  // namespace

std::set<std::string> all_vars(const FormulaPtr& f) {
  std::set<std::string> out;
  collect_vars(f, out);
  return out;
}

}  // namespace mso
