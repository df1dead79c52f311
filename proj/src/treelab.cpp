#include "mso/treelab.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace mso {

std::pair<FiniteStructure, std::vector<unsigned>> induced_substructure(
    const FiniteStructure& t, Mask nodes) {
  std::vector<unsigned> old_of;
  std::vector<int> new_of(t.size(), -1);
  for (unsigned i = 0; i < t.size(); ++i)
    if ((nodes >> i) & 1) {
      new_of[i] = static_cast<int>(old_of.size());
      old_of.push_back(i);
    }
  if (t.is_chain())
    return {FiniteStructure::chain(static_cast<unsigned>(old_of.size())), old_of};
  std::vector<int> parent(old_of.size(), -1);
  for (std::size_t i = 0; i < old_of.size(); ++i) {
    int p = t.parent_of(old_of[i]);
    while (p >= 0 && new_of[p] < 0) p = t.parent_of(p);
    parent[i] = p < 0 ? -1 : new_of[p];
  }
  return {FiniteStructure::tree(parent), old_of};
}

Mask restrict_mask(Mask m, const std::vector<unsigned>& index_map) {
  Mask out = 0;
  for (std::size_t i = 0; i < index_map.size(); ++i)
    if ((m >> index_map[i]) & 1) out |= 1ull << i;
  return out;
}

FiniteStructure tree_sum(const std::vector<FiniteStructure>& parts) {
  unsigned total = 0;
  for (const auto& p : parts) total += p.size();
  if (total > 63) throw DomainError("tree sum too large (max 63 points)");
  std::vector<int> parent(total, -1);
  unsigned offset = 0;
  int last_root = -1;  // global index of the latest rooted part's root
  for (const auto& p : parts) {
    // a part has a root when it has exactly one minimal node
    int local_root = -1;
    int minimal_count = 0;
    for (unsigned i = 0; i < p.size(); ++i)
      if ((p.is_chain() ? (i == 0) : (p.parent_of(i) < 0))) {
        ++minimal_count;
        local_root = static_cast<int>(i);
      }
    bool rooted = p.size() > 0 && minimal_count == 1;
    for (unsigned i = 0; i < p.size(); ++i) {
      int pp = p.is_chain() ? (i == 0 ? -1 : static_cast<int>(i) - 1)
                            : p.parent_of(i);
      parent[offset + i] = pp < 0 ? last_root : pp + static_cast<int>(offset);
    }
    if (rooted) last_root = static_cast<int>(offset) + local_root;
    offset += p.size();
  }
  return FiniteStructure::tree(parent);
}

// ---------------------------------------------------------------------------
// Cuts and similarity classes

namespace {

void require_chain_set(const FiniteStructure& t, const std::vector<unsigned>& A) {
  for (std::size_t i = 0; i < A.size(); ++i)
    for (std::size_t j = i + 1; j < A.size(); ++j)
      if (!t.comparable(A[i], A[j]))
        throw DomainError("the given node set is not a chain");
}

// Cut locus of node v on chain A: index of the greatest A-element below-or-
// equal v, or -1 when none.
int cut_index_on(const FiniteStructure& t, const std::vector<unsigned>& A, unsigned v) {
  int best = -1;
  for (std::size_t i = 0; i < A.size(); ++i)
    if (t.leq(A[i], v)) best = static_cast<int>(i);
  return best;
}

bool is_maximal_chain(const FiniteStructure& t, const std::vector<unsigned>& A) {
  require_chain_set(t, A);
  Mask in_a = 0;
  for (unsigned a : A) in_a |= 1ull << a;
  for (unsigned v = 0; v < t.size(); ++v) {
    if ((in_a >> v) & 1) continue;
    bool comparable_to_all = true;
    for (unsigned a : A)
      if (!t.comparable(a, v)) {
        comparable_to_all = false;
        break;
      }
    if (comparable_to_all) return false;  // A + v is a larger chain
  }
  return true;
}

}  // namespace

CutDecomposition cut_decomposition(const FiniteStructure& t,
                                   const std::vector<unsigned>& branch) {
  if (t.is_chain()) throw DomainError("cut decomposition expects a tree");
  if (branch.empty() && t.size() > 0)
    throw DomainError("branch must be nonempty for a nonempty tree");
  std::vector<unsigned> b = branch;
  std::sort(b.begin(), b.end(), [&](unsigned x, unsigned y) { return t.less(x, y); });
  if (!is_maximal_chain(t, b)) throw DomainError("branch is not a maximal chain");
  CutDecomposition cd;
  cd.branch = b;
  std::vector<Mask> at(b.size(), 0);
  Mask empty_part = 0;
  for (unsigned v = 0; v < t.size(); ++v) {
    int c = cut_index_on(t, b, v);
    if (c < 0)
      empty_part |= 1ull << v;
    else
      at[static_cast<std::size_t>(c)] |= 1ull << v;
  }
  if (empty_part) {
    cd.parts.push_back(empty_part);
    cd.chain_nodes.push_back(-1);
    cd.bc_mask |= 1ull;  // the synthetic first position is a complement point
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    cd.parts.push_back(at[i]);
    cd.chain_nodes.push_back(static_cast<int>(b[i]));
  }
  if (tree_canonical_code(cut_reassemble(t, cd)) != tree_canonical_code(t))
    throw Error("internal: decomposition does not reassemble to the tree");
  return cd;
}

FiniteStructure cut_reassemble(const FiniteStructure& t, const CutDecomposition& cd) {
  unsigned total = 0;
  for (Mask p : cd.parts) total += static_cast<unsigned>(popcount(p));
  std::vector<int> parent(total, -1);
  unsigned offset = 0;
  int last_root = -1;
  for (std::size_t pi = 0; pi < cd.parts.size(); ++pi) {
    auto [sub, old_of] = induced_substructure(t, cd.parts[pi]);
    // complement positions join without linking to or from earlier roots
    bool limit_part = cd.chain_nodes[pi] < 0;
    int attach = limit_part ? -1 : last_root;
    int local_root = -1;
    int minimal_count = 0;
    for (unsigned i = 0; i < sub.size(); ++i)
      if (sub.parent_of(i) < 0) {
        ++minimal_count;
        local_root = static_cast<int>(i);
      }
    for (unsigned i = 0; i < sub.size(); ++i) {
      int pp = sub.parent_of(i);
      parent[offset + i] = pp < 0 ? attach : pp + static_cast<int>(offset);
    }
    if (!limit_part && sub.size() > 0 && minimal_count == 1)
      last_root = static_cast<int>(offset) + local_root;
    offset += sub.size();
  }
  return FiniteStructure::tree(parent);
}

std::vector<Mask> sim_classes(const FiniteStructure& t,
                              const std::vector<unsigned>& A, int level) {
  if (level != 0 && level != 1) throw DomainError("similarity level must be 0 or 1");
  std::vector<unsigned> a = A;
  std::sort(a.begin(), a.end(), [&](unsigned x, unsigned y) { return t.less(x, y); });
  require_chain_set(t, a);
  Mask in_a = 0;
  for (unsigned v : a) in_a |= 1ull << v;
  // group by cut locus
  std::map<int, Mask> by_locus;
  for (unsigned v = 0; v < t.size(); ++v) {
    if ((in_a >> v) & 1) continue;
    by_locus[cut_index_on(t, a, v)] |= 1ull << v;
  }
  std::vector<Mask> out;
  for (auto& [locus, cls] : by_locus) {
    if (level == 0) {
      out.push_back(cls);
      continue;
    }
    // refine into comparability components: nodes share a component exactly
    // when they share the least class element below them
    std::map<unsigned, Mask> comps;
    for (unsigned v = 0; v < t.size(); ++v) {
      if (!((cls >> v) & 1)) continue;
      unsigned min_elem = v;
      for (unsigned w = 0; w < t.size(); ++w)
        if (((cls >> w) & 1) && t.less(w, v) && t.less(w, min_elem)) min_elem = w;
      comps[min_elem] |= 1ull << v;
    }
    for (auto& [root, comp] : comps) out.push_back(comp);
  }
  return out;
}

TamenessProfile tameness_profile(const FiniteStructure& t) {
  TamenessProfile prof;
  for (const auto& b : branches_of(t)) {
    prof.k_star = std::max<unsigned>(prof.k_star, b.size() >= 2 ? 1 : 0);
    auto zero = sim_classes(t, b, 0);
    auto one = sim_classes(t, b, 1);
    for (Mask cls : zero) {
      unsigned refined = 0;
      for (Mask sub : one)
        if (sub & cls) ++refined;
      prof.n_star = std::max(prof.n_star, refined);
    }
  }
  return prof;
}

// ---------------------------------------------------------------------------
// Whole-tree branch decomposition

namespace {

// Maximal chains of the induced substructure, given as original node lists.
std::vector<std::vector<unsigned>> branches_within(const FiniteStructure& t, Mask carrier) {
  auto [sub, old_of] = induced_substructure(t, carrier);
  std::vector<std::vector<unsigned>> out;
  for (const auto& b : branches_of(sub)) {
    std::vector<unsigned> mapped;
    for (unsigned v : b) mapped.push_back(old_of[v]);
    out.push_back(mapped);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

A2Decomposition a2_wellorder(const FiniteStructure& t) {
  if (t.is_chain()) throw DomainError("branch decomposition expects a tree");
  A2Decomposition dec;
  dec.node_gamma.assign(t.size(), 0);
  if (t.size() == 0) return dec;

  // breadth-first construction of the index tree
  struct Pending {
    Mask carrier;
    int parent;
    int cut_index;
  };
  std::vector<Pending> queue{{t.universe(), -1, -1}};
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    Pending cur = queue[qi];
    A2Node node;
    node.carrier = cur.carrier;
    node.parent = cur.parent;
    node.cut_index = cur.cut_index;
    node.branch = branches_within(t, cur.carrier)[0];
    node.rep = node.branch[0];
    int my_index = static_cast<int>(dec.gamma.size());
    if (cur.parent >= 0)
      dec.gamma[cur.parent].children.push_back(static_cast<unsigned>(my_index));
    for (unsigned v : node.branch) dec.node_gamma[v] = static_cast<unsigned>(my_index);

    // children: comparability components of the rest, ordered by locus then
    // least node (sim_classes already yields that order)
    Mask rest = cur.carrier;
    for (unsigned v : node.branch) rest &= ~(1ull << v);
    if (rest) {
      auto [sub, old_of] = induced_substructure(t, cur.carrier);
      std::vector<unsigned> local_branch;
      for (unsigned v : node.branch)
        local_branch.push_back(static_cast<unsigned>(
            std::find(old_of.begin(), old_of.end(), v) - old_of.begin()));
      auto classes = sim_classes(sub, local_branch, 1);
      for (Mask cls_local : classes) {
        Mask cls = 0;
        int locus = -1;
        for (unsigned i = 0; i < sub.size(); ++i)
          if ((cls_local >> i) & 1) cls |= 1ull << old_of[i];
        {
          // recover the locus as an index into this node's branch
          std::vector<unsigned> lb = local_branch;
          unsigned any = 0;
          for (unsigned i = 0; i < sub.size(); ++i)
            if ((cls_local >> i) & 1) { any = i; break; }
          locus = cut_index_on(sub, lb, any);
        }
        queue.push_back({cls, my_index, locus});
      }
    }
    dec.gamma.push_back(std::move(node));
  }

  // sibling coloring: the root branch gets color 0; within each same-locus
  // sibling group colors are assigned in order
  dec.colors_used = 1;
  for (auto& node : dec.gamma) {
    std::map<int, unsigned> next_color;
    for (unsigned c : node.children) {
      unsigned col = next_color[dec.gamma[c].cut_index]++;
      dec.gamma[c].color = col;
      dec.colors_used = std::max(dec.colors_used, col + 1);
    }
  }
  dec.color_classes.assign(dec.colors_used, 0);
  for (std::size_t gi = 0; gi < dec.gamma.size(); ++gi)
    for (unsigned v : dec.gamma[gi].branch)
      dec.color_classes[dec.gamma[gi].color] |= 1ull << v;
  for (const auto& node : dec.gamma) dec.representatives |= 1ull << node.rep;

  // total order
  std::vector<unsigned> branch_pos(t.size(), 0);
  for (const auto& node : dec.gamma)
    for (std::size_t i = 0; i < node.branch.size(); ++i)
      branch_pos[node.branch[i]] = static_cast<unsigned>(i);
  std::vector<unsigned> depth(dec.gamma.size(), 0);
  std::vector<unsigned> child_pos(dec.gamma.size(), 0);
  for (std::size_t gi = 0; gi < dec.gamma.size(); ++gi) {
    const auto& node = dec.gamma[gi];
    if (node.parent >= 0) depth[gi] = depth[node.parent] + 1;
    for (std::size_t ci = 0; ci < node.children.size(); ++ci)
      child_pos[node.children[ci]] = static_cast<unsigned>(ci);
  }
  auto gamma_path = [&](unsigned g) {
    std::vector<unsigned> path;
    int x = static_cast<int>(g);
    while (x >= 0) {
      path.push_back(static_cast<unsigned>(x));
      x = dec.gamma[x].parent;
    }
    std::reverse(path.begin(), path.end());
    return path;
  };
  auto less_nodes = [&](unsigned x, unsigned y) {
    unsigned gx = dec.node_gamma[x], gy = dec.node_gamma[y];
    if (gx == gy) return branch_pos[x] < branch_pos[y];
    auto px = gamma_path(gx), py = gamma_path(gy);
    std::size_t i = 0;
    while (i < px.size() && i < py.size() && px[i] == py[i]) ++i;
    if (i == px.size()) return true;   // gx is a strict gamma-ancestor of gy
    if (i == py.size()) return false;  // gy is a strict gamma-ancestor of gx
    return child_pos[px[i]] < child_pos[py[i]];
  };
  dec.order.resize(t.size());
  for (unsigned v = 0; v < t.size(); ++v) dec.order[v] = v;
  std::sort(dec.order.begin(), dec.order.end(), less_nodes);
  dec.node_rank.assign(t.size(), 0);
  for (std::size_t i = 0; i < dec.order.size(); ++i)
    dec.node_rank[dec.order[i]] = static_cast<unsigned>(i);
  return dec;
}

// ---------------------------------------------------------------------------
// Determination experiment

namespace {

struct ItemData {
  std::vector<Theory> realized;  // sorted distinct subtree theories
  std::vector<Mask> chain_preds; // B, B^c, then one mask per realized theory
  unsigned chain_len = 0;
  Theory value;                  // depth-n theory of the whole tree
};

ItemData prepare_item(unsigned n, const DeterminationItem& item, const Budget& budget) {
  ItemData d;
  CutDecomposition cd = cut_decomposition(item.tree, item.branch);
  d.chain_len = cd.chain_size();
  std::vector<Theory> part_theories;
  for (Mask part : cd.parts) {
    auto [sub, old_of] = induced_substructure(item.tree, part);
    std::vector<Mask> preds;
    for (Mask q : item.preds) preds.push_back(restrict_mask(q, old_of));
    part_theories.push_back(eval_theory(sub, preds, n, budget));
  }
  std::set<TheoryId> seen;
  for (Theory th : part_theories)
    if (seen.insert(th.id()).second) d.realized.push_back(th);
  std::sort(d.realized.begin(), d.realized.end(), theory_less);
  Mask b_mask = 0;
  for (unsigned i = 0; i < d.chain_len; ++i)
    if (!((cd.bc_mask >> i) & 1)) b_mask |= 1ull << i;
  d.chain_preds.push_back(b_mask);
  d.chain_preds.push_back(cd.bc_mask);
  for (Theory th : d.realized) {
    Mask m = 0;
    for (unsigned i = 0; i < d.chain_len; ++i)
      if (part_theories[i] == th) m |= 1ull << i;
    d.chain_preds.push_back(m);
  }
  d.value = eval_theory(item.tree, item.preds, n, budget);
  return d;
}

// key of the map: the realized theory list plus the chain theory
std::string key_of(const ItemData& d, unsigned k, bool drop_bc, const Budget& budget) {
  std::vector<Mask> preds;
  preds.push_back(d.chain_preds[0]);
  if (!drop_bc) preds.push_back(d.chain_preds[1]);
  for (std::size_t i = 2; i < d.chain_preds.size(); ++i) preds.push_back(d.chain_preds[i]);
  Theory kt = eval_theory(FiniteStructure::chain(d.chain_len), preds, k, budget);
  std::ostringstream key;
  for (Theory th : d.realized) key << th.id() << ',';
  key << '|' << kt.id();
  return key.str();
}

DeterminationReport::PerK run_level(const std::vector<ItemData>& items, unsigned k,
                                    bool drop_bc, const Budget& budget) {
  DeterminationReport::PerK pk;
  pk.k = k;
  std::map<std::string, std::set<TheoryId>> buckets;
  for (const auto& d : items) buckets[key_of(d, k, drop_bc, budget)].insert(d.value.id());
  pk.keys = static_cast<unsigned>(buckets.size());
  for (auto& [key, vals] : buckets)
    if (vals.size() > 1) ++pk.collisions;
  pk.functional = pk.collisions == 0;
  return pk;
}

}  // namespace

DeterminationReport determination_experiment(unsigned n,
                                             const std::vector<DeterminationItem>& corpus,
                                             const Budget& budget) {
  DeterminationReport rep;
  rep.n = n;
  std::vector<ItemData> items;
  items.reserve(corpus.size());
  for (const auto& it : corpus) items.push_back(prepare_item(n, it, budget));
  for (unsigned k = n; k <= n + 3; ++k) {
    auto pk = run_level(items, k, false, budget);
    rep.per_k.push_back(pk);
    if (pk.functional) {
      rep.least_functional_k = k;
      break;
    }
  }
  for (unsigned k = n; k <= n + 3; ++k) {
    auto pk = run_level(items, k, true, budget);
    rep.ablated_per_k.push_back(pk);
    if (pk.functional) {
      rep.ablated_least_functional_k = k;
      break;
    }
  }
  std::ostringstream out;
  out << "determination n=" << n << " items=" << items.size() << "\n";
  for (const auto& pk : rep.per_k)
    out << "k=" << pk.k << " keys=" << pk.keys << " collisions=" << pk.collisions
        << (pk.functional ? " functional" : " not-functional") << "\n";
  out << "least_functional_k=";
  if (rep.least_functional_k)
    out << *rep.least_functional_k;
  else
    out << "none<=n+3";
  out << "\nablation(drop complement predicate): least_functional_k=";
  if (rep.ablated_least_functional_k)
    out << *rep.ablated_least_functional_k;
  else
    out << "none<=n+3";
  out << "\n";
  rep.summary = out.str();
  return rep;
}

}  // namespace mso
