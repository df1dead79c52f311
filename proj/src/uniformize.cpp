#include "mso/uniformize.hpp"

#include <algorithm>
#include <set>

namespace mso {

namespace {

constexpr const char* kX = "X";
constexpr const char* kY = "Y";

std::vector<std::string> sorted_names(const FiniteStructure& s) {
  std::vector<std::string> names;
  for (const auto& [name, mask] : s.named_sets()) names.push_back(name);
  return names;  // map iteration is already sorted
}

std::vector<Mask> named_masks(const FiniteStructure& s) {
  std::vector<Mask> ms;
  for (const auto& [name, mask] : s.named_sets()) ms.push_back(mask);
  return ms;
}

void check_vars(const FormulaPtr& phi, const VariableContext& ctx) {
  for (const auto& v : phi->free_vars())
    if (ctx.index_of(v) < 0)
      throw DomainError("free variable " + v +
                        " is neither X, Y nor a named set of the structure");
}

std::map<std::string, Mask> env_of(const FiniteStructure& s, Mask x, Mask y) {
  std::map<std::string, Mask> env;
  env[kX] = x;
  env[kY] = y;
  for (const auto& [name, mask] : s.named_sets()) env[name] = mask;
  return env;
}

// All subsets of `space`, sorted by the selection order.
std::vector<Mask> lex_sorted_subsets(Mask space) {
  std::vector<Mask> out;
  Mask b = 0;
  for (;;) {
    out.push_back(b);
    if (b == space) break;
    b = (b - space) & space;
  }
  std::sort(out.begin(), out.end(), mask_lex_less);
  return out;
}

}  // namespace

VariableContext selection_context(const FiniteStructure& s) {
  std::vector<std::string> names{kX, kY};
  for (const auto& n : sorted_names(s)) names.push_back(n);
  return VariableContext(names);
}

bool check_pu(const FormulaPtr& phi, const FiniteStructure& s, const Budget& budget) {
  const VariableContext ctx = selection_context(s);
  check_vars(phi, ctx);
  const unsigned n = dp(phi);
  const auto q = named_masks(s);
  const Mask uni = s.universe();
  Mask y = 0;
  for (;;) {
    bool found = false;
    Mask x = 0;
    for (;;) {
      std::vector<Mask> vars{x, y};
      vars.insert(vars.end(), q.begin(), q.end());
      if (decide(phi, eval_theory(s, vars, n, budget), ctx)) {
        found = true;
        break;
      }
      if (x == uni) break;
      x = (x - uni) & uni;
    }
    if (!found) return false;
    if (y == uni) break;
    y = (y - uni) & uni;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Lexicographic uniformizer on chains

namespace {

FormulaPtr lex_minimality_formula(const FormulaPtr& phi) {
  std::set<std::string> avoid = all_vars(phi);
  avoid.insert(kX);
  avoid.insert(kY);
  std::string xp = fresh_var("XP", avoid);
  avoid.insert(xp);
  std::string z = fresh_var("Z", avoid);
  avoid.insert(z);
  std::string w = fresh_var("W", avoid);
  FormulaPtr phi_xp = rename_free(phi, kX, xp);
  // X = X' or the least point of the difference belongs to X
  FormulaPtr lexle = fb::lor(
      fb::eq(kX, xp),
      fb::exists(z, fb::land(fb::land(fb::land(fb::sing(z), fb::sub(z, kX)),
                                      fb::lnot(fb::sub(z, xp))),
                             fb::forall(w, fb::implies(fb::land(fb::sing(w), fb::less(w, z)),
                                                       fb::iff(fb::sub(w, kX),
                                                               fb::sub(w, xp)))))));
  return fb::land(phi, fb::forall(xp, fb::implies(phi_xp, lexle)));
}

}  // namespace

LexUniformizer lex_uniformize(const FormulaPtr& phi, const FiniteStructure& chain,
                              const Budget& budget) {
  if (!chain.is_chain()) throw DomainError("lex_uniformize expects a chain");
  if (!check_pu(phi, chain, budget))
    throw DomainError("formula is not potentially uniformizable on this chain");
  const VariableContext ctx = selection_context(chain);
  const unsigned n = dp(phi);
  const auto q = named_masks(chain);
  const Mask uni = chain.universe();
  LexUniformizer u;
  u.phi = phi;
  u.psi = lex_minimality_formula(phi);
  Mask y = 0;
  for (;;) {
    std::optional<Mask> best;
    Mask x = 0;
    for (;;) {
      std::vector<Mask> vars{x, y};
      vars.insert(vars.end(), q.begin(), q.end());
      if (decide(phi, eval_theory(chain, vars, n, budget), ctx))
        if (!best || mask_lex_less(x, *best)) best = x;
      if (x == uni) break;
      x = (x - uni) & uni;
    }
    u.selection[y] = *best;
    // the emitted formula must hold exactly at the selected witness
    unsigned hits = 0;
    Mask x2 = 0;
    for (;;) {
      auto env = env_of(chain, x2, y);
      if (model_check(chain, u.psi, env, budget)) {
        ++hits;
        if (x2 != *best)
          throw Error("internal: minimality formula selects a different witness");
      }
      if (x2 == uni) break;
      x2 = (x2 - uni) & uni;
    }
    if (hits != 1) throw Error("internal: minimality formula is not unique");
    if (y == uni) break;
    y = (y - uni) & uni;
  }
  return u;
}

// ---------------------------------------------------------------------------
// Product uniformizer

ProductUniformizer product_uniformize(const FormulaPtr& phi,
                                      const FiniteStructure& product,
                                      unsigned block_size, const Budget& budget) {
  if (!product.is_chain()) throw DomainError("product_uniformize expects a chain");
  if (block_size == 0 || product.size() % block_size != 0)
    throw DomainError("block size must divide the chain size");
  if (!check_pu(phi, product, budget))
    throw DomainError("formula is not potentially uniformizable on this chain");
  const VariableContext ctx = selection_context(product);
  const unsigned n = dp(phi);
  const auto q = named_masks(product);
  const Mask uni = product.universe();
  const unsigned blocks = product.size() / block_size;
  const Mask block_uni = block_size == 64 ? ~0ull : ((1ull << block_size) - 1);
  const FiniteStructure block_chain = FiniteStructure::chain(block_size);

  ProductUniformizer u;
  u.phi = phi;
  u.block_size = block_size;
  u.blocks = blocks;

  auto local = [&](Mask m, unsigned g) { return (m >> (g * block_size)) & block_uni; };

  Mask y = 0;
  for (;;) {
    // least global witness
    std::optional<Mask> best;
    Mask x = 0;
    for (;;) {
      std::vector<Mask> vars{x, y};
      vars.insert(vars.end(), q.begin(), q.end());
      if (decide(phi, eval_theory(product, vars, n, budget), ctx))
        if (!best || mask_lex_less(x, *best)) best = x;
      if (x == uni) break;
      x = (x - uni) & uni;
    }
    BlockCertificate cert;
    Mask glued = 0;
    for (unsigned g = 0; g < blocks; ++g) {
      std::vector<Mask> yb{local(y, g)};
      for (Mask m : q) yb.push_back(local(m, g));
      cert.block_theories.push_back(eval_theory(block_chain, yb, n + 1, budget));
      std::vector<Mask> xb{local(*best, g), local(y, g)};
      for (Mask m : q) xb.push_back(local(m, g));
      Theory target = eval_theory(block_chain, xb, n, budget);
      cert.targets.push_back(target);
      // the block target is achievable from the block's Y-side theory
      // (drop-order: members of the depth-(n+1) theory carry X last)
      // re-select the block against its target
      std::optional<Mask> chosen;
      for (Mask cand : lex_sorted_subsets(block_uni)) {
        std::vector<Mask> cb{cand, local(y, g)};
        for (Mask m : q) cb.push_back(local(m, g));
        if (eval_theory(block_chain, cb, n, budget) == target) {
          chosen = cand;
          break;
        }
      }
      cert.block_selection.push_back(*chosen);
      glued |= *chosen << (g * block_size);
    }
    TheorySequence seq;
    seq.level = n;
    seq.arity = 2 + static_cast<unsigned>(q.size());
    seq.prefix = cert.targets;
    cert.glued_theory = sum_finite(seq);
    if (!decide(phi, cert.glued_theory, ctx))
      throw Error("internal: glued block targets do not satisfy the formula");
    {
      auto env = env_of(product, glued, y);
      if (!model_check(product, phi, env, budget))
        throw Error("internal: glued product selection fails the formula");
    }
    u.selection[y] = glued;
    u.certificates[y] = std::move(cert);
    if (y == uni) break;
    y = (y - uni) & uni;
  }
  return u;
}

// ---------------------------------------------------------------------------
// Tree uniformizer

namespace {

struct TreeUniCtx {
  const FiniteStructure& tree;
  const A2Decomposition& dec;
  unsigned n;
  std::vector<Mask> named;
  Mask y = 0;
  const Budget& budget;

  Theory carrier_theory(Mask carrier, Mask x) {
    auto [sub, old_of] = induced_substructure(tree, carrier);
    std::vector<Mask> vars{restrict_mask(x, old_of), restrict_mask(y, old_of)};
    for (Mask m : named) vars.push_back(restrict_mask(m, old_of));
    return eval_theory(sub, vars, n, budget);
  }

  // theory of the branch viewed as a chain
  Theory branch_theory(const std::vector<unsigned>& branch, Mask x) {
    FiniteStructure chain = FiniteStructure::chain(static_cast<unsigned>(branch.size()));
    std::vector<Mask> vars{restrict_mask(x, branch), restrict_mask(y, branch)};
    for (Mask m : named) vars.push_back(restrict_mask(m, branch));
    return eval_theory(chain, vars, n, budget);
  }

  std::optional<Mask> process(unsigned gi, Theory target,
                              std::vector<TreeNodeCertificate>& certs) {
    const A2Node& node = dec.gamma[gi];
    Mask amask = 0;
    for (unsigned v : node.branch) amask |= 1ull << v;
    // witnesses on this carrier realizing the target
    std::vector<Mask> wits;
    for (Mask w : lex_sorted_subsets(node.carrier))
      if (carrier_theory(node.carrier, w) == target) wits.push_back(w);
    if (wits.empty()) return std::nullopt;

    // candidate tuples in least-witness order
    struct Tuple {
      Theory branch_target;
      std::vector<Theory> child_targets;
    };
    std::vector<Tuple> tuples;
    std::set<std::string> seen;
    for (Mask w : wits) {
      Tuple tp;
      tp.branch_target = branch_theory(node.branch, w & amask);
      std::string key = std::to_string(tp.branch_target.id());
      for (unsigned c : node.children) {
        Theory ct = carrier_theory(dec.gamma[c].carrier, w);
        tp.child_targets.push_back(ct);
        key += "," + std::to_string(ct.id());
      }
      if (seen.insert(key).second) tuples.push_back(std::move(tp));
    }

    for (const auto& tp : tuples) {
      // branch part: least subset realizing the branch target
      std::optional<Mask> xa;
      for (Mask cand : lex_sorted_subsets(amask))
        if (branch_theory(node.branch, cand) == tp.branch_target) {
          xa = cand;
          break;
        }
      if (!xa) continue;
      std::vector<TreeNodeCertificate> sub_certs;
      Mask glued = *xa;
      bool ok = true;
      for (std::size_t ci = 0; ci < node.children.size(); ++ci) {
        auto r = process(node.children[ci], tp.child_targets[ci], sub_certs);
        if (!r) {
          ok = false;
          break;
        }
        glued |= *r;
      }
      if (!ok) continue;
      if (carrier_theory(node.carrier, glued) != target) continue;
      TreeNodeCertificate cert;
      cert.gamma_index = gi;
      cert.target = target;
      cert.branch_target = tp.branch_target;
      cert.child_targets = tp.child_targets;
      cert.theory_driven = true;
      certs.push_back(std::move(cert));
      for (auto& c : sub_certs) certs.push_back(std::move(c));
      return glued;
    }

    // fallback: take the least witness wholesale
    Mask w = wits[0];
    TreeNodeCertificate cert;
    cert.gamma_index = gi;
    cert.target = target;
    cert.branch_target = branch_theory(node.branch, w & amask);
    for (unsigned c : node.children)
      cert.child_targets.push_back(carrier_theory(dec.gamma[c].carrier, w));
    cert.theory_driven = false;
    certs.push_back(std::move(cert));
    return w;
  }
};

}  // namespace

TreeUniformizer tree_uniformize(const FormulaPtr& phi, const FiniteStructure& tree,
                                const Budget& budget) {
  if (tree.is_chain()) throw DomainError("tree_uniformize expects a tree");
  if (!check_pu(phi, tree, budget))
    throw DomainError("formula is not potentially uniformizable on this tree");
  TreeUniformizer u;
  u.phi = phi;
  u.decomposition = a2_wellorder(tree);
  const VariableContext ctx = selection_context(tree);
  const unsigned n = dp(phi);
  const auto q = named_masks(tree);
  const Mask uni = tree.universe();

  Mask y = 0;
  for (;;) {
    TreeUniCtx tc{tree, u.decomposition, n, q, y, budget};
    // global witnesses and their theories, least witness first
    std::vector<Mask> wits;
    for (Mask x : lex_sorted_subsets(uni)) {
      std::vector<Mask> vars{x, y};
      vars.insert(vars.end(), q.begin(), q.end());
      if (decide(phi, eval_theory(tree, vars, n, budget), ctx)) wits.push_back(x);
    }
    if (tree.size() == 0) {
      if (!wits.empty()) u.selection[y] = 0;
      if (y == uni) break;
      y = (y - uni) & uni;
      continue;
    }
    std::vector<Theory> t_candidates;
    std::set<TheoryId> seen;
    for (Mask w : wits) {
      Theory t = tc.carrier_theory(uni, w);
      if (seen.insert(t.id()).second) t_candidates.push_back(t);
    }
    bool done = false;
    for (Theory t_star : t_candidates) {
      std::vector<TreeNodeCertificate> certs;
      auto r = tc.process(0, t_star, certs);
      if (!r) continue;
      auto env = env_of(tree, *r, y);
      if (!model_check(tree, phi, env, budget))
        throw Error("internal: tree selection fails the formula");
      u.selection[y] = *r;
      u.certificates[y] = std::move(certs);
      done = true;
      break;
    }
    if (!done && !wits.empty())
      throw Error("internal: no target candidate produced a selection");
    if (y == uni) break;
    y = (y - uni) & uni;
  }
  return u;
}

}  // namespace mso
