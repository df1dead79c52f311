#include "mso/compose.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <unordered_map>

namespace mso {

namespace {

std::recursive_mutex g_mu;
std::unordered_map<std::uint64_t, TheoryId> g_add_memo;
std::unordered_map<TheoryId, TheoryId> g_omega_memo;

void require_chain_shape(Theory t, const char* op) {
  if (exhibits_incomparability(t))
    throw DomainError(std::string(op) + " expects chain theories; "
                      "input exhibits incomparable singletons");
}

int card_of(VarState s) { return s == VarState::Empty ? 0 : (s == VarState::One ? 1 : 2); }

Level0 add_level0(const Level0& a, const Level0& b) {
  const unsigned l = a.arity();
  Level0 r;
  r.state.resize(l);
  r.sub.assign(std::size_t(l) * l, 0);
  r.less.assign(std::size_t(l) * l, 0);
  for (unsigned i = 0; i < l; ++i) {
    int c = std::min(card_of(a.state[i]) + card_of(b.state[i]), 2);
    r.state[i] = c == 0 ? VarState::Empty : (c == 1 ? VarState::One : VarState::Many);
  }
  for (unsigned i = 0; i < l; ++i)
    for (unsigned j = 0; j < l; ++j) {
      if (i == j) continue;
      r.sub[i * l + j] = a.get_sub(i, j) && b.get_sub(i, j);
      if (r.state[i] == VarState::One && r.state[j] == VarState::One) {
        bool i_left = a.state[i] == VarState::One;
        bool j_left = a.state[j] == VarState::One;
        bool v;
        if (i_left && j_left) v = a.get_less(i, j);
        else if (!i_left && !j_left) v = b.get_less(i, j);
        else v = i_left;  // left part precedes right part
        r.less[i * l + j] = v;
      }
    }
  return r;
}

Theory add_rec(Theory a, Theory b) {
  std::uint64_t key = (std::uint64_t(a.id()) << 32) | b.id();
  {
    std::lock_guard<std::recursive_mutex> g(g_mu);
    auto it = g_add_memo.find(key);
    if (it != g_add_memo.end()) return Theory(it->second);
  }
  Theory out;
  if (a.is_level0()) {
    out = intern_level0(add_level0(a.payload(), b.payload()));
  } else {
    std::vector<Theory> members;
    members.reserve(a.members().size() * b.members().size());
    for (Theory u : a.members())
      for (Theory v : b.members()) members.push_back(add_rec(u, v));
    out = intern_composite(a.level(), a.arity(), std::move(members));
  }
  std::lock_guard<std::recursive_mutex> g(g_mu);
  g_add_memo.emplace(key, out.id());
  return out;
}

}  // namespace

Theory add(Theory a, Theory b) {
  if (a.level() != b.level() || a.arity() != b.arity())
    throw DomainError("add requires equal level and arity");
  require_chain_shape(a, "add");
  require_chain_shape(b, "add");
  return add_rec(a, b);
}

void TheorySequence::validate() const {
  for (const auto& t : prefix)
    if (t.level() != level || t.arity() != arity)
      throw DomainError("sequence entry level/arity mismatch");
  for (const auto& t : period)
    if (t.level() != level || t.arity() != arity)
      throw DomainError("sequence entry level/arity mismatch");
}

Theory sum_finite(const TheorySequence& seq) {
  if (!seq.period.empty())
    throw DomainError("sum_finite expects a sequence without period");
  seq.validate();
  Theory acc = theory_of_empty_chain(seq.level, seq.arity);
  for (Theory t : seq.prefix) acc = add(acc, t);
  return acc;
}

namespace {

// Closure of the given seed under add.
std::vector<Theory> semigroup_closure(const std::vector<Theory>& seed,
                                      const Budget& budget) {
  std::set<TheoryId> seen;
  std::vector<Theory> all;
  for (Theory t : seed)
    if (seen.insert(t.id()).second) all.push_back(t);
  std::size_t frontier_start = 0;
  while (frontier_start < all.size()) {
    std::size_t end = all.size();
    for (std::size_t i = 0; i < end; ++i)
      for (std::size_t j = (i < frontier_start ? frontier_start : 0); j < end; ++j) {
        budget.tick();
        Theory p = add_rec(all[i], all[j]);
        if (seen.insert(p.id()).second) all.push_back(p);
        Theory q = add_rec(all[j], all[i]);
        if (seen.insert(q.id()).second) all.push_back(q);
      }
    frontier_start = end;
  }
  return all;
}

Level0 omega_const_level0(const Level0& a) {
  const unsigned l = a.arity();
  Level0 r;
  r.state.resize(l);
  r.sub = a.sub;
  r.less.assign(std::size_t(l) * l, 0);
  for (unsigned i = 0; i < l; ++i) {
    r.state[i] = a.state[i] == VarState::Empty ? VarState::Empty : VarState::Many;
    r.sub[i * l + i] = 1;
  }
  return r;
}

}  // namespace

Theory omega_const(Theory t, const Budget& budget) {
  {
    std::lock_guard<std::recursive_mutex> g(g_mu);
    auto it = g_omega_memo.find(t.id());
    if (it != g_omega_memo.end()) return Theory(it->second);
  }
  Theory out;
  if (t.is_level0()) {
    out = intern_level0(omega_const_level0(t.payload()));
  } else {
    std::vector<Theory> gen = semigroup_closure(t.members(), budget);
    std::vector<Theory> members;
    for (Theory e : gen) {
      if (add_rec(e, e) != e) continue;
      Theory tail = omega_const(e, budget);
      members.push_back(tail);
      for (Theory s : gen) members.push_back(add_rec(s, tail));
    }
    out = intern_composite(t.level(), t.arity(), std::move(members));
  }
  std::lock_guard<std::recursive_mutex> g(g_mu);
  g_omega_memo.emplace(t.id(), out.id());
  return out;
}

Theory omega_sum(const TheorySequence& seq, const Budget& budget) {
  if (seq.period.empty()) throw DomainError("omega_sum requires a nonempty period");
  seq.validate();
  for (Theory t : seq.prefix) require_chain_shape(t, "omega_sum");
  for (Theory t : seq.period) require_chain_shape(t, "omega_sum");
  Theory block = seq.period[0];
  for (std::size_t i = 1; i < seq.period.size(); ++i)
    block = add_rec(block, seq.period[i]);
  Theory tail = omega_const(block, budget);
  if (seq.prefix.empty()) return tail;
  Theory head = seq.prefix[0];
  for (std::size_t i = 1; i < seq.prefix.size(); ++i)
    head = add_rec(head, seq.prefix[i]);
  return add_rec(head, tail);
}

Theory generalized_sum(const FiniteStructure& index,
                       const std::vector<Theory>& per_point, unsigned level,
                       unsigned arity) {
  if (!index.is_chain()) throw DomainError("generalized_sum index must be a chain");
  if (per_point.size() != index.size())
    throw DomainError("unmapped index point in generalized_sum");
  TheorySequence seq;
  seq.level = level;
  seq.arity = arity;
  seq.prefix = per_point;
  return sum_finite(seq);
}

// ---------------------------------------------------------------------------
// Explicit semigroup tables

int SemigroupTable::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

void SemigroupTable::validate() const {
  const unsigned n = size();
  if (table.size() != std::size_t(n) * n)
    throw DomainError("semigroup table incomplete");
  for (unsigned v : table)
    if (v >= n) throw DomainError("semigroup table entry out of range");
  for (unsigned a = 0; a < n; ++a)
    for (unsigned b = 0; b < n; ++b)
      for (unsigned c = 0; c < n; ++c)
        if (op(op(a, b), c) != op(a, op(b, c)))
          throw DomainError("semigroup table is not associative at (" + names[a] +
                            "," + names[b] + "," + names[c] + ")");
}

SemigroupTable SemigroupTable::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  SemigroupTable sg;
  bool have_elements = false;
  std::map<std::pair<unsigned, unsigned>, unsigned> entries;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok) || tok[0] == '#') continue;
    if (tok == "elements" || tok == "elements:") {
      std::string name;
      while (ls >> name) sg.names.push_back(name);
      have_elements = true;
      continue;
    }
    if (!have_elements) throw DomainError("semigroup text must start with elements line");
    std::string y, z;
    if (!(ls >> y >> z)) throw DomainError("semigroup line needs `x y z`");
    int a = sg.index_of(tok), b = sg.index_of(y), c = sg.index_of(z);
    if (a < 0 || b < 0 || c < 0) throw DomainError("unknown element in semigroup line");
    entries[{unsigned(a), unsigned(b)}] = unsigned(c);
  }
  const unsigned n = sg.size();
  sg.table.assign(std::size_t(n) * n, 0);
  for (unsigned a = 0; a < n; ++a)
    for (unsigned b = 0; b < n; ++b) {
      auto it = entries.find({a, b});
      if (it == entries.end())
        throw DomainError("missing addition entry for " + sg.names[a] + "+" + sg.names[b]);
      sg.table[a * n + b] = it->second;
    }
  sg.validate();
  return sg;
}

std::pair<unsigned, unsigned> idempotent_power(unsigned x, const SemigroupTable& sg) {
  sg.validate();
  if (x >= sg.size()) throw DomainError("element index out of range");
  std::map<unsigned, unsigned> first_seen;  // power value -> exponent
  std::vector<unsigned> by_exp{x};          // by_exp[k] = x^(k+1)
  first_seen[x] = 1;
  unsigned cur = x;
  for (;;) {
    unsigned next = sg.op(cur, x);
    unsigned k = static_cast<unsigned>(by_exp.size()) + 1;
    auto it = first_seen.find(next);
    if (it != first_seen.end()) {
      unsigned mu = it->second;
      unsigned lambda = k - mu;
      unsigned e_exp = lambda;
      while (e_exp < mu) e_exp += lambda;
      unsigned e = by_exp[e_exp - 1];
      return {e, e_exp};
    }
    first_seen[next] = k;
    by_exp.push_back(next);
    cur = next;
  }
}

TowerReport omega_power_tower(Theory t, unsigned depth, const Budget& budget) {
  require_chain_shape(t, "omega_power_tower");
  TowerReport rep;
  if (depth == 0) return rep;
  Theory cur = omega_const(t, budget);
  rep.tower.push_back(cur);
  for (unsigned r = 1; r < depth; ++r) {
    cur = omega_const(cur, budget);
    rep.tower.push_back(cur);
    if (!rep.stabilization && cur == rep.tower[r - 1]) rep.stabilization = r;
  }
  if (rep.stabilization) {
    unsigned p = *rep.stabilization;
    // extend so that the omega^(p+2) entry exists
    while (rep.tower.size() < std::size_t(p) + 2)
      rep.tower.push_back(omega_const(rep.tower.back(), budget));
    Theory v = rep.tower[p];  // value at omega^(p+1)
    rep.stable_idempotent = add(v, v) == v;
    rep.next_equation_holds = rep.tower[p + 1] == rep.tower[p];
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Additive colorings

unsigned AdditiveColoring::get(unsigned i, unsigned j) const {
  if (!(i < j && j < chain_size)) throw DomainError("coloring pair out of range");
  return pair_color[i * chain_size + j];
}

void AdditiveColoring::set(unsigned i, unsigned j, unsigned c) {
  if (!(i < j && j < chain_size)) throw DomainError("coloring pair out of range");
  pair_color[i * chain_size + j] = c;
}

void AdditiveColoring::validate_additivity() const {
  for (unsigned i = 0; i < chain_size; ++i)
    for (unsigned j = i + 1; j < chain_size; ++j)
      for (unsigned k = j + 1; k < chain_size; ++k)
        if (get(i, k) != sg.op(get(i, j), get(j, k)))
          throw DomainError("additivity violation at (" + std::to_string(i) + "," +
                            std::to_string(j) + "," + std::to_string(k) + ")");
}

AdditiveColoring AdditiveColoring::from_steps(SemigroupTable sg_in,
                                              const std::vector<unsigned>& steps) {
  AdditiveColoring c;
  c.sg = std::move(sg_in);
  c.chain_size = static_cast<unsigned>(steps.size()) + 1;
  c.pair_color.assign(std::size_t(c.chain_size) * c.chain_size, 0);
  for (unsigned i = 0; i + 1 < c.chain_size; ++i) {
    unsigned acc = steps[i];
    c.set(i, i + 1, acc);
    for (unsigned j = i + 2; j < c.chain_size; ++j) {
      acc = c.sg.op(acc, steps[j - 1]);
      c.set(i, j, acc);
    }
  }
  return c;
}

AdditiveColoring AdditiveColoring::from_periodic_steps(
    SemigroupTable sg_in, const std::vector<unsigned>& prefix,
    const std::vector<unsigned>& period, unsigned n) {
  if (period.empty()) throw DomainError("periodic steps need a nonempty period");
  std::vector<unsigned> steps;
  for (unsigned i = 0; i + 1 < n; ++i) {
    if (i < prefix.size())
      steps.push_back(prefix[i]);
    else
      steps.push_back(period[(i - prefix.size()) % period.size()]);
  }
  return from_steps(std::move(sg_in), steps);
}

AdditiveColoring AdditiveColoring::parse(const std::string& text) {
  // split out the semigroup part (up to the `chain` line)
  std::istringstream in(text);
  std::string line, sg_text;
  unsigned n = 0;
  std::vector<std::string> rest;
  bool in_chain = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok) || tok[0] == '#') continue;
    if (tok == "chain") {
      if (!(ls >> n)) throw DomainError("chain line needs a size");
      in_chain = true;
      continue;
    }
    if (!in_chain) {
      sg_text += line + "\n";
    } else {
      rest.push_back(line);
    }
  }
  if (!in_chain) throw DomainError("coloring text needs a `chain N` line");
  SemigroupTable sg = SemigroupTable::parse(sg_text);
  AdditiveColoring c;
  bool have = false;
  for (const auto& l : rest) {
    std::istringstream ls(l);
    std::string tok;
    ls >> tok;
    if (tok == "steps" || tok == "steps:") {
      std::vector<unsigned> steps;
      std::string name;
      while (ls >> name) {
        int e = sg.index_of(name);
        if (e < 0) throw DomainError("unknown element " + name + " in steps");
        steps.push_back(unsigned(e));
      }
      if (steps.size() + 1 != n) throw DomainError("steps line needs N-1 entries");
      c = from_steps(sg, steps);
      have = true;
    } else if (tok == "pair") {
      if (!have) {
        c.sg = sg;
        c.chain_size = n;
        c.pair_color.assign(std::size_t(n) * n, 0);
        have = true;
      }
      unsigned i, j;
      std::string name;
      if (!(ls >> i >> j >> name)) throw DomainError("pair line needs `pair i j name`");
      int e = c.sg.index_of(name);
      if (e < 0) throw DomainError("unknown element " + name + " in pair line");
      c.set(i, j, unsigned(e));
    } else {
      throw DomainError("unexpected coloring line: " + l);
    }
  }
  if (!have) throw DomainError("coloring text needs steps or pair lines");
  c.validate_additivity();
  return c;
}

namespace {

bool ramsey_extend(const AdditiveColoring& col, unsigned color,
                   std::vector<unsigned>& acc, unsigned size) {
  if (acc.size() == size) return true;
  unsigned from = acc.empty() ? 0 : acc.back() + 1;
  for (unsigned cand = from; cand < col.chain_size; ++cand) {
    bool ok = true;
    for (unsigned prev : acc)
      if (col.get(prev, cand) != color) {
        ok = false;
        break;
      }
    if (!ok) continue;
    acc.push_back(cand);
    if (ramsey_extend(col, color, acc, size)) return true;
    acc.pop_back();
  }
  return false;
}

}  // namespace

std::optional<std::vector<unsigned>> additive_ramsey(const AdditiveColoring& col,
                                                     unsigned size) {
  col.validate_additivity();
  if (size == 0) return std::vector<unsigned>{};
  if (size == 1) {
    if (col.chain_size == 0) return std::nullopt;
    return std::vector<unsigned>{0u};
  }
  std::optional<std::vector<unsigned>> best;
  for (unsigned i = 0; i + 1 < col.chain_size; ++i) {
    for (unsigned c = 0; c < col.sg.size(); ++c) {
      std::vector<unsigned> acc{i};
      if (ramsey_extend(col, c, acc, size)) {
        if (!best || acc < *best) best = acc;
      }
    }
    if (best && (*best)[0] == i) break;  // later starts cannot be lex-smaller
  }
  return best;
}

}  // namespace mso
