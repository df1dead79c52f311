#include "mso/structure.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <sstream>

namespace mso {

FiniteStructure FiniteStructure::chain(unsigned n) {
  if (n > 63) throw DomainError("structure too large (max 63 points)");
  FiniteStructure s;
  s.kind_ = Kind::Chain;
  s.size_ = n;
  s.finish();
  return s;
}

FiniteStructure FiniteStructure::tree(const std::vector<int>& parent) {
  if (parent.size() > 63) throw DomainError("structure too large (max 63 points)");
  FiniteStructure s;
  s.kind_ = Kind::Tree;
  s.size_ = static_cast<unsigned>(parent.size());
  s.parent_ = parent;
  s.anc_.assign(s.size_, 0);
  for (unsigned i = 0; i < s.size_; ++i) {
    Mask seen = 1ull << i;
    int p = parent[i];
    while (p >= 0) {
      if (p >= static_cast<int>(s.size_)) throw DomainError("parent index out of range");
      if (seen & (1ull << p)) throw DomainError("parent links contain a cycle");
      seen |= 1ull << p;
      s.anc_[i] |= 1ull << p;
      p = parent[p];
    }
  }
  s.finish();
  return s;
}

void FiniteStructure::finish() {
  std::ostringstream k;
  k << (kind_ == Kind::Chain ? "c" : "t") << size_;
  for (int p : parent_) k << ',' << p;
  key_ = k.str();
}

bool FiniteStructure::less(unsigned x, unsigned y) const {
  if (x >= size_ || y >= size_) throw DomainError("node index out of range");
  if (kind_ == Kind::Chain) return x < y;
  return (anc_[y] >> x) & 1;
}

void FiniteStructure::set_named(const std::string& name, Mask m) {
  if (!mask_subset(m, universe())) throw DomainError("named set exceeds universe");
  named_[name] = m;
}

Mask FiniteStructure::named(const std::string& name) const {
  auto it = named_.find(name);
  if (it == named_.end()) throw DomainError("unknown named set " + name);
  return it->second;
}

FiniteStructure FiniteStructure::concat(const FiniteStructure& a, const FiniteStructure& b) {
  if (!a.is_chain() || !b.is_chain()) throw DomainError("concat expects chains");
  return chain(a.size() + b.size());
}

// ---------------------------------------------------------------------------
// File formats

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> toks;
  std::string t;
  while (in >> t) toks.push_back(t);
  return toks;
}

[[noreturn]] void file_fail(const std::string& msg, unsigned line) {
  throw SyntaxError(msg + " (line " + std::to_string(line) + ")", line);
}

}  // namespace

FiniteStructure parse_tree_file(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::pair<long, long>> nodes;  // (id, parent id or -1)
  std::vector<std::pair<std::string, std::vector<long>>> sets;
  unsigned lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = tokenize(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    if (std::isdigit(static_cast<unsigned char>(toks[0][0]))) {
      if (toks.size() != 2) file_fail("node line needs `id parent|-`", lineno);
      long id = std::stol(toks[0]);
      long par = toks[1] == "-" ? -1 : std::stol(toks[1]);
      nodes.emplace_back(id, par);
    } else {
      std::vector<long> ids;
      for (std::size_t i = 1; i < toks.size(); ++i) ids.push_back(std::stol(toks[i]));
      sets.emplace_back(toks[0], ids);
    }
  }
  std::map<long, unsigned> index;
  for (auto& [id, par] : nodes) {
    if (index.count(id)) throw DomainError("duplicate node id " + std::to_string(id));
    index[id] = static_cast<unsigned>(index.size());
  }
  std::vector<int> parent(nodes.size(), -1);
  for (auto& [id, par] : nodes) {
    if (par >= 0) {
      auto it = index.find(par);
      if (it == index.end()) throw DomainError("unknown parent id " + std::to_string(par));
      parent[index[id]] = static_cast<int>(it->second);
    }
  }
  FiniteStructure t = FiniteStructure::tree(parent);
  for (auto& [name, ids] : sets) {
    Mask m = 0;
    for (long id : ids) {
      auto it = index.find(id);
      if (it == index.end()) throw DomainError("unknown node id in set " + name);
      m |= 1ull << it->second;
    }
    t.set_named(name, m);
  }
  return t;
}

FiniteStructure parse_chain_file(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  unsigned lineno = 0;
  if (!std::getline(in, line)) throw SyntaxError("empty chain file", 0);
  ++lineno;
  auto head = tokenize(line);
  if (head.size() != 2 || head[0] != "chain")
    file_fail("chain file must start with `chain N`", lineno);
  unsigned n = static_cast<unsigned>(std::stoul(head[1]));
  FiniteStructure c = FiniteStructure::chain(n);
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = tokenize(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    Mask m = 0;
    for (std::size_t i = 1; i < toks.size(); ++i) {
      unsigned id = static_cast<unsigned>(std::stoul(toks[i]));
      if (id >= n) file_fail("point " + toks[i] + " outside chain", lineno);
      m |= 1ull << id;
    }
    c.set_named(toks[0], m);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Isomorphism machinery

namespace {

std::string code_of(const FiniteStructure& t, unsigned node,
                    const std::vector<std::vector<unsigned>>& children) {
  std::vector<std::string> subs;
  for (unsigned c : children[node]) subs.push_back(code_of(t, c, children));
  std::sort(subs.begin(), subs.end());
  std::string out = "(";
  for (auto& s : subs) out += s;
  out += ")";
  return out;
}

}  // namespace

std::string tree_canonical_code(const FiniteStructure& t) {
  std::vector<std::vector<unsigned>> children(t.size());
  std::vector<unsigned> roots;
  for (unsigned i = 0; i < t.size(); ++i) {
    int p = t.parent_of(i);
    if (p < 0)
      roots.push_back(i);
    else
      children[p].push_back(i);
  }
  std::vector<std::string> codes;
  for (unsigned r : roots) codes.push_back(code_of(t, r, children));
  std::sort(codes.begin(), codes.end());
  std::string out;
  for (auto& c : codes) out += c;
  return out;
}

namespace {

// Rooted trees on exactly n nodes, as parent vectors with node 0 the root,
// one per isomorphism class.
void gen_trees(unsigned n, std::vector<std::vector<int>>& out);

// Composes a forest from a multiset of component trees.
void gen_forests_rec(unsigned remaining, unsigned max_component,
                     std::vector<std::vector<int>>& acc_components,
                     std::vector<std::vector<int>>& out,
                     const std::vector<std::vector<std::vector<int>>>& trees_by_size) {
  if (remaining == 0) {
    std::vector<int> parent;
    for (auto& comp : acc_components) {
      unsigned offset = static_cast<unsigned>(parent.size());
      for (int p : comp) parent.push_back(p < 0 ? -1 : p + static_cast<int>(offset));
    }
    out.push_back(parent);
    return;
  }
  for (unsigned k = std::min(remaining, max_component); k >= 1; --k) {
    for (auto& tr : trees_by_size[k]) {
      acc_components.push_back(tr);
      gen_forests_rec(remaining - k, k, acc_components, out, trees_by_size);
      acc_components.pop_back();
    }
    if (k == 1) break;
  }
}

void gen_trees(unsigned n, std::vector<std::vector<int>>& out) {
  if (n == 1) {
    out.push_back({-1});
    return;
  }
  // A rooted tree on n nodes = root + a forest on n-1 nodes hung below it.
  std::vector<std::vector<std::vector<int>>> trees_by_size(n);
  for (unsigned k = 1; k < n; ++k) gen_trees(k, trees_by_size[k]);
  std::vector<std::vector<int>> forests;
  std::vector<std::vector<int>> acc;
  gen_forests_rec(n - 1, n - 1, acc, forests, trees_by_size);
  std::set<std::string> seen;
  for (auto& f : forests) {
    std::vector<int> parent(n, -1);
    for (unsigned i = 0; i < n - 1; ++i)
      parent[i + 1] = f[i] < 0 ? 0 : f[i] + 1;
    FiniteStructure t = FiniteStructure::tree(parent);
    std::string code = tree_canonical_code(t);
    if (seen.insert(code).second) out.push_back(parent);
  }
}

}  // namespace

std::vector<FiniteStructure> enumerate_forests(unsigned max_nodes) {
  std::vector<std::vector<std::vector<int>>> trees_by_size(max_nodes + 1);
  for (unsigned k = 1; k <= max_nodes; ++k) gen_trees(k, trees_by_size[k]);
  std::vector<FiniteStructure> out;
  std::set<std::string> seen;
  for (unsigned n = 1; n <= max_nodes; ++n) {
    std::vector<std::vector<int>> forests;
    std::vector<std::vector<int>> acc;
    gen_forests_rec(n, n, acc, forests, trees_by_size);
    for (auto& parent : forests) {
      FiniteStructure t = FiniteStructure::tree(parent);
      std::string code = tree_canonical_code(t);
      if (seen.insert(code).second) out.push_back(t);
    }
  }
  return out;
}

std::vector<std::vector<unsigned>> branches_of(const FiniteStructure& t) {
  std::vector<std::vector<unsigned>> out;
  if (t.is_chain()) {
    if (t.size() == 0) return out;
    std::vector<unsigned> chain(t.size());
    for (unsigned i = 0; i < t.size(); ++i) chain[i] = i;
    out.push_back(chain);
    return out;
  }
  // Leaves are nodes with no children; a branch is the ancestor path of a
  // leaf plus the leaf.
  std::vector<bool> has_child(t.size(), false);
  for (unsigned i = 0; i < t.size(); ++i)
    if (t.parent_of(i) >= 0) has_child[t.parent_of(i)] = true;
  for (unsigned leaf = 0; leaf < t.size(); ++leaf) {
    if (has_child[leaf]) continue;
    std::vector<unsigned> chain;
    int x = static_cast<int>(leaf);
    while (x >= 0) {
      chain.push_back(static_cast<unsigned>(x));
      x = t.parent_of(x);
    }
    std::reverse(chain.begin(), chain.end());
    out.push_back(chain);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace mso
