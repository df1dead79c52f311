#include "mso/theory.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <mutex>
#include <set>
#include <sstream>
#include <unordered_map>

namespace mso {

Budget& default_budget() {
  static Budget b(Budget::kDefaultLimit);
  return b;
}

namespace {

struct TheoryNode {
  unsigned char level = 0;
  unsigned char arity = 0;
  Level0 p0;
  std::vector<TheoryId> members;
  std::string serial0;  // cached for level 0 only
};

std::string level0_serial(const Level0& p) {
  const unsigned l = p.arity();
  std::vector<std::string> atoms;
  auto var = [](unsigned i) { return "X" + std::to_string(i); };
  for (unsigned i = 0; i < l; ++i) {
    atoms.push_back("sub(" + var(i) + "," + var(i) + ")");
    if (p.state[i] == VarState::One) atoms.push_back("sing(" + var(i) + ")");
    if (p.state[i] == VarState::Empty) atoms.push_back("empty(" + var(i) + ")");
  }
  for (unsigned i = 0; i < l; ++i)
    for (unsigned j = 0; j < l; ++j) {
      if (i == j) continue;
      if (p.get_sub(i, j)) atoms.push_back("sub(" + var(i) + "," + var(j) + ")");
      if (p.get_less(i, j)) atoms.push_back("lt(" + var(i) + "," + var(j) + ")");
      if (i < j && p.get_eq(i, j)) atoms.push_back("eq(" + var(i) + "," + var(j) + ")");
    }
  std::sort(atoms.begin(), atoms.end());
  std::string out = "[";
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (i) out += ',';
    out += atoms[i];
  }
  out += ']';
  return out;
}

class Pool {
 public:
  static Pool& get() {
    static Pool p;
    return p;
  }

  std::recursive_mutex mu;
  std::deque<TheoryNode> nodes;
  std::unordered_map<std::string, TheoryId> by_key;
  std::unordered_map<std::uint64_t, int> cmp_memo;
  std::unordered_map<std::string, TheoryId> eval_memo;
  std::unordered_map<std::uint64_t, TheoryId> drop_memo;    // id*64+pos
  std::unordered_map<std::uint64_t, TheoryId> insert_memo;  // id*64+pos
  std::unordered_map<std::string, TheoryId> perm_memo;
  std::unordered_map<TheoryId, char> incomp_memo;

  const TheoryNode& node(TheoryId id) {
    std::lock_guard<std::recursive_mutex> g(mu);
    return nodes.at(id);
  }
};

int cmp_ids(TheoryId a, TheoryId b);

TheoryId intern_node(TheoryNode n) {
  Pool& p = Pool::get();
  std::lock_guard<std::recursive_mutex> g(p.mu);
  std::string key;
  if (n.level == 0) {
    n.serial0 = level0_serial(n.p0);
    key = "0:" + std::to_string(n.arity) + ":" + n.serial0;
  } else {
    std::sort(n.members.begin(), n.members.end(),
              [](TheoryId x, TheoryId y) { return cmp_ids(x, y) < 0; });
    n.members.erase(std::unique(n.members.begin(), n.members.end()), n.members.end());
    std::ostringstream k;
    k << 'c' << unsigned(n.level) << ':' << unsigned(n.arity) << ':';
    for (TheoryId m : n.members) k << m << ',';
    key = k.str();
  }
  auto it = p.by_key.find(key);
  if (it != p.by_key.end()) return it->second;
  TheoryId id = static_cast<TheoryId>(p.nodes.size());
  p.nodes.push_back(std::move(n));
  p.by_key.emplace(std::move(key), id);
  return id;
}

int cmp_ids(TheoryId a, TheoryId b) {
  if (a == b) return 0;
  Pool& p = Pool::get();
  std::lock_guard<std::recursive_mutex> g(p.mu);
  std::uint64_t key = (std::uint64_t(a) << 32) | b;
  auto it = p.cmp_memo.find(key);
  if (it != p.cmp_memo.end()) return it->second;
  const TheoryNode& na = p.nodes.at(a);
  const TheoryNode& nb = p.nodes.at(b);
  int r;
  if (na.level == 0 && nb.level == 0) {
    r = na.serial0.compare(nb.serial0);
    r = r < 0 ? -1 : (r > 0 ? 1 : 0);
  } else if (na.level == 0 || nb.level == 0) {
    // '[' < '{' in byte order
    r = na.level == 0 ? -1 : 1;
  } else {
    r = 0;
    std::size_t n = std::min(na.members.size(), nb.members.size());
    for (std::size_t i = 0; i < n && r == 0; ++i)
      r = cmp_ids(na.members[i], nb.members[i]);
    if (r == 0 && na.members.size() != nb.members.size())
      // the longer list continues with ',' which precedes '}'
      r = na.members.size() > nb.members.size() ? -1 : 1;
  }
  p.cmp_memo.emplace(key, r);
  return r;
}

void serialize_rec(TheoryId id, std::string& out) {
  Pool& p = Pool::get();
  const TheoryNode& n = p.node(id);
  if (n.level == 0) {
    out += n.serial0;
    return;
  }
  out += '{';
  for (std::size_t i = 0; i < n.members.size(); ++i) {
    if (i) out += ',';
    serialize_rec(n.members[i], out);
  }
  out += '}';
}

}  // namespace

unsigned Theory::level() const { return Pool::get().node(id_).level; }
unsigned Theory::arity() const { return Pool::get().node(id_).arity; }

const Level0& Theory::payload() const {
  const TheoryNode& n = Pool::get().node(id_);
  if (n.level != 0) throw DomainError("payload access on level>0 theory");
  return n.p0;
}

const std::vector<Theory>& Theory::members() const {
  // Rebuilding a Theory vector per call would be wasteful; keep a per-node
  // cache of wrapped handles.
  static std::unordered_map<TheoryId, std::vector<Theory>> cache;
  static std::mutex cmu;
  std::lock_guard<std::mutex> g(cmu);
  auto it = cache.find(id_);
  if (it != cache.end()) return it->second;
  const TheoryNode& n = Pool::get().node(id_);
  if (n.level == 0) throw DomainError("members access on level-0 theory");
  std::vector<Theory> ms;
  ms.reserve(n.members.size());
  for (TheoryId m : n.members) ms.emplace_back(m);
  return cache.emplace(id_, std::move(ms)).first->second;
}

int theory_cmp(Theory a, Theory b) { return cmp_ids(a.id(), b.id()); }

std::string serialize_theory(Theory t) {
  std::string out;
  serialize_rec(t.id(), out);
  return out;
}

Theory intern_level0(Level0 p) {
  const unsigned l = p.arity();
  if (p.sub.size() != std::size_t(l) * l || p.less.size() != std::size_t(l) * l)
    throw DomainError("level-0 payload matrix size mismatch");
  for (unsigned i = 0; i < l; ++i) {
    p.sub[i * l + i] = 1;
    p.less[i * l + i] = 0;
  }
  TheoryNode n;
  n.level = 0;
  n.arity = static_cast<unsigned char>(l);
  n.p0 = std::move(p);
  return Theory(intern_node(std::move(n)));
}

Theory intern_composite(unsigned level, unsigned arity, std::vector<Theory> members) {
  if (level == 0) throw DomainError("composite theory needs level >= 1");
  if (members.empty()) throw DomainError("composite theory needs at least one member");
  for (Theory m : members)
    if (m.level() != level - 1 || m.arity() != arity + 1)
      throw DomainError("member level/arity mismatch");
  TheoryNode n;
  n.level = static_cast<unsigned char>(level);
  n.arity = static_cast<unsigned char>(arity);
  n.members.reserve(members.size());
  for (Theory m : members) n.members.push_back(m.id());
  return Theory(intern_node(std::move(n)));
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

Level0 level0_of(const FiniteStructure& s, const std::vector<Mask>& vars) {
  const unsigned l = static_cast<unsigned>(vars.size());
  Level0 p;
  p.state.resize(l);
  p.sub.assign(std::size_t(l) * l, 0);
  p.less.assign(std::size_t(l) * l, 0);
  for (unsigned i = 0; i < l; ++i) {
    int c = popcount(vars[i]);
    p.state[i] = c == 0 ? VarState::Empty : (c == 1 ? VarState::One : VarState::Many);
  }
  for (unsigned i = 0; i < l; ++i)
    for (unsigned j = 0; j < l; ++j) {
      p.sub[i * l + j] = mask_subset(vars[i], vars[j]);
      if (i != j && p.state[i] == VarState::One && p.state[j] == VarState::One) {
        int x = mask_single(vars[i]);
        int y = mask_single(vars[j]);
        p.less[i * l + j] = s.less(static_cast<unsigned>(x), static_cast<unsigned>(y));
      }
    }
  return p;
}

std::string eval_key(const FiniteStructure& s, const std::vector<Mask>& vars, unsigned n) {
  std::ostringstream k;
  k << s.canon_key() << '|' << n;
  for (Mask m : vars) k << '|' << std::hex << m;
  return k.str();
}

}  // namespace

Theory eval_theory(const FiniteStructure& s, const std::vector<Mask>& vars,
                   unsigned n, const Budget& budget) {
  for (Mask m : vars)
    if (!mask_subset(m, s.universe()))
      throw DomainError("predicate set exceeds universe");
  if (n == 0) {
    budget.tick();
    return intern_level0(level0_of(s, vars));
  }
  Pool& p = Pool::get();
  std::string key = eval_key(s, vars, n);
  {
    std::lock_guard<std::recursive_mutex> g(p.mu);
    auto it = p.eval_memo.find(key);
    if (it != p.eval_memo.end()) return Theory(it->second);
  }
  std::vector<Theory> members;
  std::vector<Mask> ext = vars;
  ext.push_back(0);
  const Mask uni = s.universe();
  Mask b = 0;
  for (;;) {
    budget.tick();
    ext.back() = b;
    members.push_back(eval_theory(s, ext, n - 1, budget));
    if (b == uni) break;
    b = (b - uni) & uni;  // next subset of uni
  }
  Theory t = intern_composite(n, static_cast<unsigned>(vars.size()), std::move(members));
  std::lock_guard<std::recursive_mutex> g(p.mu);
  p.eval_memo.emplace(std::move(key), t.id());
  return t;
}

// ---------------------------------------------------------------------------
// Model checking

namespace {

struct Checker {
  const FiniteStructure& s;
  const Budget& budget;
  std::map<std::pair<const Formula*, std::vector<Mask>>, bool> memo;

  bool eval(const FormulaPtr& f, std::map<std::string, Mask>& env) {
    std::vector<Mask> key_masks;
    key_masks.reserve(f->free_vars().size());
    for (const auto& v : f->free_vars()) {
      auto it = env.find(v);
      if (it == env.end()) throw DomainError("free variable " + v + " not assigned");
      key_masks.push_back(it->second);
    }
    auto key = std::make_pair(f.get(), std::move(key_masks));
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    bool r = compute(f, env);
    memo.emplace(std::move(key), r);
    return r;
  }

  bool compute(const FormulaPtr& f, std::map<std::string, Mask>& env) {
    switch (f->kind) {
      case FormulaKind::Atom: {
        Mask a = env.at(f->a);
        switch (f->atom) {
          case AtomKind::Sing: return popcount(a) == 1;
          case AtomKind::Empty: return a == 0;
          case AtomKind::Subset: return mask_subset(a, env.at(f->b));
          case AtomKind::Equal: return a == env.at(f->b);
          case AtomKind::Less: {
            Mask b = env.at(f->b);
            if (popcount(a) != 1 || popcount(b) != 1) return false;
            return s.less(static_cast<unsigned>(mask_single(a)),
                          static_cast<unsigned>(mask_single(b)));
          }
        }
        return false;
      }
      case FormulaKind::Not: return !eval(f->lhs, env);
      case FormulaKind::And: return eval(f->lhs, env) && eval(f->rhs, env);
      case FormulaKind::Or: return eval(f->lhs, env) || eval(f->rhs, env);
      case FormulaKind::Implies: return !eval(f->lhs, env) || eval(f->rhs, env);
      case FormulaKind::Exists:
      case FormulaKind::Forall: {
        const bool ex = f->kind == FormulaKind::Exists;
        const Mask uni = s.universe();
        auto old = env.find(f->a);
        std::optional<Mask> saved;
        if (old != env.end()) saved = old->second;
        Mask b = 0;
        bool result = !ex;
        for (;;) {
          budget.tick();
          env[f->a] = b;
          bool v = eval(f->lhs, env);
          if (ex && v) { result = true; break; }
          if (!ex && !v) { result = false; break; }
          if (b == uni) break;
          b = (b - uni) & uni;
        }
        if (saved)
          env[f->a] = *saved;
        else
          env.erase(f->a);
        return result;
      }
    }
    return false;
  }
};

}  // namespace

bool model_check(const FiniteStructure& s, const FormulaPtr& phi,
                 const std::map<std::string, Mask>& env, const Budget& budget) {
  Checker c{s, budget, {}};
  std::map<std::string, Mask> e = env;
  return c.eval(phi, e);
}

bool model_check(const FiniteStructure& s, const FormulaPtr& phi,
                 const VariableContext& ctx, const std::vector<Mask>& vars,
                 const Budget& budget) {
  if (ctx.arity() != vars.size()) throw DomainError("context/assignment arity mismatch");
  std::map<std::string, Mask> env;
  for (std::size_t i = 0; i < vars.size(); ++i) env[ctx.names[i]] = vars[i];
  return model_check(s, phi, env, budget);
}

// ---------------------------------------------------------------------------
// Decision from theories

namespace {

bool decide_rec(const FormulaPtr& f, Theory t, std::map<std::string, unsigned>& pos) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      Theory r = reduce(t, 0);
      const Level0& p = r.payload();
      unsigned i = pos.at(f->a);
      switch (f->atom) {
        case AtomKind::Sing: return p.state[i] == VarState::One;
        case AtomKind::Empty: return p.state[i] == VarState::Empty;
        case AtomKind::Subset: return p.get_sub(i, pos.at(f->b));
        case AtomKind::Equal: return p.get_eq(i, pos.at(f->b));
        case AtomKind::Less: return p.get_less(i, pos.at(f->b));
      }
      return false;
    }
    case FormulaKind::Not: return !decide_rec(f->lhs, t, pos);
    case FormulaKind::And: return decide_rec(f->lhs, t, pos) && decide_rec(f->rhs, t, pos);
    case FormulaKind::Or: return decide_rec(f->lhs, t, pos) || decide_rec(f->rhs, t, pos);
    case FormulaKind::Implies:
      return !decide_rec(f->lhs, t, pos) || decide_rec(f->rhs, t, pos);
    case FormulaKind::Exists:
    case FormulaKind::Forall: {
      if (t.level() == 0)
        throw DomainError("formula depth exceeds theory level");
      const bool ex = f->kind == FormulaKind::Exists;
      auto old = pos.find(f->a);
      std::optional<unsigned> saved;
      if (old != pos.end()) saved = old->second;
      pos[f->a] = t.arity();
      bool result = !ex;
      for (Theory u : t.members()) {
        bool v = decide_rec(f->lhs, u, pos);
        if (ex && v) { result = true; break; }
        if (!ex && !v) { result = false; break; }
      }
      if (saved)
        pos[f->a] = *saved;
      else
        pos.erase(f->a);
      return result;
    }
  }
  return false;
}

}  // namespace

bool decide(const FormulaPtr& phi, Theory t, const VariableContext& ctx) {
  if (ctx.arity() != t.arity())
    throw DomainError("context arity does not match theory arity");
  if (dp(phi) > t.level())
    throw DomainError("formula depth exceeds theory level");
  for (const auto& v : phi->free_vars())
    if (ctx.index_of(v) < 0)
      throw DomainError("free variable " + v + " not in context");
  std::map<std::string, unsigned> pos;
  for (std::size_t i = 0; i < ctx.names.size(); ++i)
    pos[ctx.names[i]] = static_cast<unsigned>(i);
  return decide_rec(phi, t, pos);
}

// ---------------------------------------------------------------------------
// Projections

Theory reduce(Theory t, unsigned m) {
  if (m > t.level()) throw DomainError("reduce target level exceeds theory level");
  while (t.level() > m) {
    const auto& ms = t.members();
    Theory proj = drop_var(ms[0], ms[0].arity() - 1);
    for (std::size_t i = 1; i < ms.size(); ++i) {
      Theory q = drop_var(ms[i], ms[i].arity() - 1);
      if (q != proj)
        throw CoherenceError("members disagree on projection; not a coherent theory");
    }
    t = proj;
  }
  return t;
}

Theory drop_var(Theory t, unsigned pos) {
  const unsigned l = t.arity();
  if (pos >= l) throw DomainError("drop_var index out of range");
  Pool& p = Pool::get();
  std::uint64_t key = std::uint64_t(t.id()) * 64 + pos;
  {
    std::lock_guard<std::recursive_mutex> g(p.mu);
    auto it = p.drop_memo.find(key);
    if (it != p.drop_memo.end()) return Theory(it->second);
  }
  Theory out;
  if (t.is_level0()) {
    const Level0& src = t.payload();
    Level0 q;
    const unsigned m = l - 1;
    q.state.resize(m);
    q.sub.assign(std::size_t(m) * m, 0);
    q.less.assign(std::size_t(m) * m, 0);
    for (unsigned i = 0, ii = 0; i < l; ++i) {
      if (i == pos) continue;
      q.state[ii] = src.state[i];
      for (unsigned j = 0, jj = 0; j < l; ++j) {
        if (j == pos) continue;
        q.sub[ii * m + jj] = src.get_sub(i, j);
        q.less[ii * m + jj] = src.get_less(i, j);
        ++jj;
      }
      ++ii;
    }
    out = intern_level0(std::move(q));
  } else {
    std::vector<Theory> members;
    members.reserve(t.members().size());
    for (Theory u : t.members()) members.push_back(drop_var(u, pos));
    out = intern_composite(t.level(), l - 1, std::move(members));
  }
  std::lock_guard<std::recursive_mutex> g(p.mu);
  p.drop_memo.emplace(key, out.id());
  return out;
}

Theory insert_empty_var(Theory t, unsigned pos) {
  const unsigned l = t.arity();
  if (pos == ~0u) pos = l;
  if (pos > l) throw DomainError("insert position out of range");
  Pool& p = Pool::get();
  std::uint64_t key = std::uint64_t(t.id()) * 64 + pos;
  {
    std::lock_guard<std::recursive_mutex> g(p.mu);
    auto it = p.insert_memo.find(key);
    if (it != p.insert_memo.end()) return Theory(it->second);
  }
  Theory out;
  if (t.is_level0()) {
    const Level0& src = t.payload();
    const unsigned m = l + 1;
    Level0 q;
    q.state.resize(m);
    q.sub.assign(std::size_t(m) * m, 0);
    q.less.assign(std::size_t(m) * m, 0);
    auto oldpos = [&](unsigned i) { return i < pos ? i : i - 1; };
    for (unsigned i = 0; i < m; ++i) {
      q.state[i] = i == pos ? VarState::Empty : src.state[oldpos(i)];
      for (unsigned j = 0; j < m; ++j) {
        bool v;
        if (i == pos)
          v = true;  // empty set is a subset of everything
        else if (j == pos)
          v = src.state[oldpos(i)] == VarState::Empty;
        else
          v = src.get_sub(oldpos(i), oldpos(j));
        q.sub[i * m + j] = v;
        q.less[i * m + j] =
            (i != pos && j != pos) ? src.get_less(oldpos(i), oldpos(j)) : 0;
      }
    }
    out = intern_level0(std::move(q));
  } else {
    std::vector<Theory> members;
    members.reserve(t.members().size());
    for (Theory u : t.members()) members.push_back(insert_empty_var(u, pos));
    out = intern_composite(t.level(), l + 1, std::move(members));
  }
  std::lock_guard<std::recursive_mutex> g(p.mu);
  p.insert_memo.emplace(key, out.id());
  return out;
}

Theory permute_vars(Theory t, const std::vector<unsigned>& perm) {
  const unsigned l = t.arity();
  if (perm.size() != l) throw DomainError("permutation size mismatch");
  Pool& p = Pool::get();
  std::string key = std::to_string(t.id()) + ":";
  for (unsigned x : perm) key += std::to_string(x) + ",";
  {
    std::lock_guard<std::recursive_mutex> g(p.mu);
    auto it = p.perm_memo.find(key);
    if (it != p.perm_memo.end()) return Theory(it->second);
  }
  Theory out;
  if (t.is_level0()) {
    const Level0& src = t.payload();
    Level0 q;
    q.state.resize(l);
    q.sub.assign(std::size_t(l) * l, 0);
    q.less.assign(std::size_t(l) * l, 0);
    for (unsigned i = 0; i < l; ++i) {
      q.state[i] = src.state[perm[i]];
      for (unsigned j = 0; j < l; ++j) {
        q.sub[i * l + j] = src.get_sub(perm[i], perm[j]);
        q.less[i * l + j] = src.get_less(perm[i], perm[j]);
      }
    }
    out = intern_level0(std::move(q));
  } else {
    std::vector<unsigned> ext = perm;
    ext.push_back(l);  // the appended variable stays last
    std::vector<Theory> members;
    members.reserve(t.members().size());
    for (Theory u : t.members()) members.push_back(permute_vars(u, ext));
    out = intern_composite(t.level(), l, std::move(members));
  }
  std::lock_guard<std::recursive_mutex> g(p.mu);
  p.perm_memo.emplace(std::move(key), out.id());
  return out;
}

// ---------------------------------------------------------------------------
// Characteristic formulas

namespace {

FormulaPtr char_formula_rec(Theory t, const VariableContext& ctx,
                            std::map<TheoryId, FormulaPtr>& cache) {
  auto it = cache.find(t.id());
  if (it != cache.end()) return it->second;
  FormulaPtr result;
  if (t.is_level0()) {
    const Level0& p = t.payload();
    const unsigned l = t.arity();
    if (l == 0)
      throw DomainError("characteristic formula of the arity-0 level-0 theory is not expressible");
    std::vector<FormulaPtr> lits;
    auto lit = [&](FormulaPtr a, bool v) { lits.push_back(v ? a : fb::lnot(a)); };
    for (unsigned i = 0; i < l; ++i) {
      lit(fb::sing(ctx.names[i]), p.state[i] == VarState::One);
      lit(fb::empty(ctx.names[i]), p.state[i] == VarState::Empty);
    }
    for (unsigned i = 0; i < l; ++i)
      for (unsigned j = 0; j < l; ++j) {
        if (i == j) continue;
        lit(fb::sub(ctx.names[i], ctx.names[j]), p.get_sub(i, j));
        lit(fb::less(ctx.names[i], ctx.names[j]), p.get_less(i, j));
      }
    result = fb::conj(lits, ctx.names[0]);
  } else {
    std::set<std::string> avoid(ctx.names.begin(), ctx.names.end());
    std::string bvar = fresh_var("B" + std::to_string(t.level() - 1), avoid);
    VariableContext inner = ctx;
    inner.names.push_back(bvar);
    std::vector<FormulaPtr> exist_parts, disj_parts;
    for (Theory u : t.members()) {
      FormulaPtr psi = char_formula_rec(u, inner, cache);
      exist_parts.push_back(fb::exists(bvar, psi));
      disj_parts.push_back(psi);
    }
    result = fb::land(fb::conj(exist_parts, bvar),
                      fb::forall(bvar, fb::disj(disj_parts, bvar)));
  }
  cache.emplace(t.id(), result);
  return result;
}

}  // namespace

FormulaPtr characteristic_formula(Theory t, const VariableContext& ctx) {
  if (ctx.arity() != t.arity())
    throw DomainError("context arity does not match theory arity");
  std::map<TheoryId, FormulaPtr> cache;
  return char_formula_rec(t, ctx, cache);
}

Theory theory_of_empty_chain(unsigned n, unsigned arity) {
  return eval_theory(FiniteStructure::chain(0), std::vector<Mask>(arity, 0), n);
}

bool exhibits_incomparability(Theory t) {
  Pool& p = Pool::get();
  {
    std::lock_guard<std::recursive_mutex> g(p.mu);
    auto it = p.incomp_memo.find(t.id());
    if (it != p.incomp_memo.end()) return it->second;
  }
  bool r = false;
  if (t.is_level0()) {
    const Level0& q = t.payload();
    const unsigned l = t.arity();
    for (unsigned i = 0; i < l && !r; ++i)
      for (unsigned j = i + 1; j < l && !r; ++j)
        if (q.state[i] == VarState::One && q.state[j] == VarState::One &&
            !q.get_less(i, j) && !q.get_less(j, i) && !q.get_eq(i, j))
          r = true;
  } else {
    for (Theory u : t.members())
      if (exhibits_incomparability(u)) {
        r = true;
        break;
      }
  }
  std::lock_guard<std::recursive_mutex> g(p.mu);
  p.incomp_memo.emplace(t.id(), r);
  return r;
}

// ---------------------------------------------------------------------------
// Formally possible type spaces

namespace {

// Materialized level-0 spaces for arity <= 3, built on demand.
const std::vector<Theory>& level0_space(unsigned l, const Budget& budget) {
  static std::map<unsigned, std::vector<Theory>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> g(mu);
  auto it = cache.find(l);
  if (it != cache.end()) return it->second;
  if (l > 3)
    throw BudgetExceeded("level-0 realizability search not supported for arity > 3");
  std::set<TheoryId> seen;
  std::vector<Theory> out;
  for (unsigned n = 0; n <= 2 * l + 1; ++n) {
    FiniteStructure c = FiniteStructure::chain(n);
    std::vector<Mask> vars(l, 0);
    const Mask uni = c.universe();
    // iterate all l-tuples of subsets
    std::size_t total_bits = std::size_t(l) * n;
    if (l == 0) {
      Theory t = eval_theory(c, vars, 0, budget);
      if (seen.insert(t.id()).second) out.push_back(t);
      continue;
    }
    for (std::uint64_t code = 0;; ++code) {
      budget.tick();
      std::uint64_t rest = code;
      for (unsigned i = 0; i < l; ++i) {
        vars[i] = rest & uni;
        rest >>= n;
      }
      Theory t = eval_theory(c, vars, 0, budget);
      if (seen.insert(t.id()).second) out.push_back(t);
      if (total_bits >= 64 || code + 1 >= (1ull << total_bits)) break;
    }
  }
  std::sort(out.begin(), out.end(), theory_less);
  return cache.emplace(l, std::move(out)).first->second;
}

}  // namespace

bool formally_possible(Theory t, const Budget& budget) {
  if (t.is_level0()) {
    const auto& space = level0_space(t.arity(), budget);
    return std::binary_search(space.begin(), space.end(), t, theory_less);
  }
  const auto& ms = t.members();
  if (ms.empty()) return false;
  Theory proj = drop_var(ms[0], ms[0].arity() - 1);
  for (Theory u : ms) {
    if (!formally_possible(u, budget)) return false;
    if (drop_var(u, u.arity() - 1) != proj) return false;
  }
  return true;
}

bool TypeSpace::contains(Theory t, const Budget& budget) const {
  if (t.level() != level || t.arity() != arity) return false;
  if (materialized)
    return std::binary_search(types.begin(), types.end(), t, theory_less);
  return formally_possible(t, budget);
}

TypeSpace enumerate_types(unsigned n, unsigned l, const Budget& budget) {
  TypeSpace out;
  out.level = n;
  out.arity = l;
  out.materialized = true;
  if (n == 0) {
    out.types = level0_space(l, budget);
    return out;
  }
  TypeSpace prev = enumerate_types(n - 1, l + 1, budget);
  // group by drop-last projection
  std::map<TheoryId, std::vector<Theory>> groups;
  for (Theory u : prev.types)
    groups[drop_var(u, u.arity() - 1).id()].push_back(u);
  std::vector<Theory> result;
  for (auto& [proj, g] : groups) {
    if (g.size() > 62)
      throw BudgetExceeded("type space group too large to enumerate subsets");
    const std::uint64_t total = 1ull << g.size();
    for (std::uint64_t sel = 1; sel < total; ++sel) {
      budget.tick();
      std::vector<Theory> members;
      for (std::size_t i = 0; i < g.size(); ++i)
        if ((sel >> i) & 1) members.push_back(g[i]);
      result.push_back(intern_composite(n, l, std::move(members)));
    }
  }
  std::sort(result.begin(), result.end(), theory_less);
  out.types = std::move(result);
  return out;
}

// ---------------------------------------------------------------------------
// Theory text parsing

namespace {

struct TParser {
  const std::string& s;
  std::size_t pos = 0;

  explicit TParser(const std::string& text) : s(text) {}

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  [[noreturn]] void fail(const std::string& msg) { throw SyntaxError(msg, pos + 1); }

  char peek() {
    skip_ws();
    if (pos >= s.size()) fail("unexpected end of theory text");
    return s[pos];
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos;
  }

  unsigned var_index() {
    skip_ws();
    if (pos >= s.size() || s[pos] != 'X') fail("expected variable X<k>");
    ++pos;
    std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) fail("expected variable index");
    return static_cast<unsigned>(std::stoul(s.substr(start, pos - start)));
  }

  std::string ident() {
    skip_ws();
    std::size_t start = pos;
    while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) fail("expected literal name");
    return s.substr(start, pos - start);
  }

  Theory parse() {
    char c = peek();
    if (c == '[') return parse_level0();
    if (c == '{') return parse_composite();
    fail("expected '[' or '{'");
  }

  Theory parse_level0() {
    expect('[');
    struct Atom {
      std::string name;
      unsigned i = 0, j = 0;
      bool binary = false;
    };
    std::vector<Atom> atoms;
    if (peek() != ']') {
      for (;;) {
        Atom a;
        a.name = ident();
        expect('(');
        a.i = var_index();
        if (a.name == "sub" || a.name == "lt" || a.name == "eq") {
          a.binary = true;
          expect(',');
          a.j = var_index();
        } else if (a.name != "sing" && a.name != "empty") {
          fail("unknown literal " + a.name);
        }
        expect(')');
        atoms.push_back(a);
        if (peek() == ',') {
          ++pos;
          continue;
        }
        break;
      }
    }
    expect(']');
    unsigned l = 0;
    for (const auto& a : atoms) {
      l = std::max(l, a.i + 1);
      if (a.binary) l = std::max(l, a.j + 1);
    }
    Level0 p;
    p.state.assign(l, VarState::Many);
    p.sub.assign(std::size_t(l) * l, 0);
    p.less.assign(std::size_t(l) * l, 0);
    std::vector<char> eq_seen(std::size_t(l) * l, 0);
    std::vector<char> refl_seen(l, 0);
    for (const auto& a : atoms) {
      if (a.name == "sing") p.state[a.i] = VarState::One;
      else if (a.name == "empty") p.state[a.i] = VarState::Empty;
      else if (a.name == "sub") {
        if (a.i == a.j) refl_seen[a.i] = 1;
        else p.sub[a.i * l + a.j] = 1;
      } else if (a.name == "lt") {
        p.less[a.i * l + a.j] = 1;
      } else {
        eq_seen[a.i * l + a.j] = eq_seen[a.j * l + a.i] = 1;
      }
    }
    for (unsigned i = 0; i < l; ++i)
      if (!refl_seen[i]) fail("missing reflexive sub(X" + std::to_string(i) + ",X" +
                              std::to_string(i) + ")");
    for (unsigned i = 0; i < l; ++i)
      for (unsigned j = i + 1; j < l; ++j) {
        bool both = p.sub[i * l + j] && p.sub[j * l + i];
        if (both != static_cast<bool>(eq_seen[i * l + j]))
          fail("eq literals inconsistent with sub literals");
      }
    return intern_level0(std::move(p));
  }

  Theory parse_composite() {
    expect('{');
    std::vector<Theory> members;
    for (;;) {
      members.push_back(parse());
      if (peek() == ',') {
        ++pos;
        continue;
      }
      break;
    }
    expect('}');
    unsigned ml = members[0].level(), ma = members[0].arity();
    for (Theory m : members)
      if (m.level() != ml || m.arity() != ma) fail("members disagree on level/arity");
    if (ma == 0) fail("composite members need arity >= 1");
    return intern_composite(ml + 1, ma - 1, std::move(members));
  }
};

}  // namespace

Theory parse_theory(const std::string& text) {
  TParser p(text);
  Theory t = p.parse();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  return t;
}

}  // namespace mso
