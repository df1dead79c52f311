#include "mso/cli.hpp"

#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mso/budget.hpp"
#include "mso/chainterm.hpp"
#include "mso/compose.hpp"
#include "mso/ordinal.hpp"
#include "mso/theory.hpp"
#include "mso/treelab.hpp"
#include "mso/uniformize.hpp"

namespace mso {

namespace {

using nlohmann::json;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

FiniteStructure load_structure(const std::string& chain_path, const std::string& tree_path) {
  if (!chain_path.empty() && !tree_path.empty())
    throw DomainError("give either --chain or --tree, not both");
  if (!chain_path.empty()) return parse_chain_file(slurp(chain_path));
  if (!tree_path.empty()) return parse_tree_file(slurp(tree_path));
  throw DomainError("a structure file is required (--chain or --tree)");
}

std::vector<Mask> context_masks(const FiniteStructure& s, const std::vector<std::string>& names) {
  std::vector<Mask> out;
  for (const auto& n : names) out.push_back(s.named(n));
  return out;
}

std::string mask_to_ids(Mask m) {
  std::string out = "{";
  bool first = true;
  for (unsigned i = 0; i < 64; ++i)
    if ((m >> i) & 1) {
      if (!first) out += ",";
      out += std::to_string(i);
      first = false;
    }
  return out + "}";
}

std::vector<OrdInterval> parse_interval_list(const std::string& text) {
  std::vector<OrdInterval> out;
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  for (;;) {
    skip();
    if (pos >= text.size()) break;
    if (text[pos] != '[') throw SyntaxError("expected '['", pos);
    ++pos;
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) throw SyntaxError("expected ','", pos);
    OrdInterval iv;
    iv.lo = parse_ordinal(text.substr(pos, comma - pos));
    std::size_t close = text.find(')', comma);
    if (close == std::string::npos) throw SyntaxError("expected ')'", comma);
    iv.hi = parse_ordinal(text.substr(comma + 1, close - comma - 1));
    out.push_back(iv);
    pos = close + 1;
  }
  return out;
}

IntervalPartition parse_partition(const std::string& alpha, const std::string& classes) {
  IntervalPartition p;
  p.alpha = parse_ordinal(alpha);
  std::size_t start = 0;
  for (;;) {
    std::size_t semi = classes.find(';', start);
    std::string chunk = semi == std::string::npos ? classes.substr(start)
                                                  : classes.substr(start, semi - start);
    p.classes.push_back(parse_interval_list(chunk));
    if (semi == std::string::npos) break;
    start = semi + 1;
  }
  return p;
}

struct Output {
  bool as_json = false;
  json j;
  std::ostringstream text;

  void emit(std::ostream& out) {
    if (as_json)
      out << j.dump(2) << "\n";
    else
      out << text.str();
  }
};

// ---------------------------------------------------------------------------
// Subcommand bodies

void run_theory(const FiniteStructure& s, unsigned n,
                const std::vector<std::string>& vars, const Budget& b, Output& o) {
  Theory t = eval_theory(s, context_masks(s, vars), n, b);
  std::string ser = serialize_theory(t);
  o.text << ser << "\n";
  o.j = {{"level", n}, {"arity", vars.size()}, {"theory", ser}};
}

void run_decide(const std::string& formula, const std::string& ordinal_text,
                const FiniteStructure* s, const Budget& b, Output& o) {
  FormulaPtr phi = parse_formula(formula);
  bool result;
  if (!ordinal_text.empty()) {
    if (!phi->free_vars().empty())
      throw DomainError("deciding over an ordinal needs a sentence without free variables");
    OrdinalCNF a = parse_ordinal(ordinal_text);
    result = decide(phi, theory_of_ordinal(a, dp(phi), b), VariableContext{});
  } else {
    if (!s) throw DomainError("decide needs --ordinal or a structure file");
    std::vector<std::string> names(phi->free_vars().begin(), phi->free_vars().end());
    Theory t = eval_theory(*s, context_masks(*s, names), dp(phi), b);
    result = decide(phi, t, VariableContext(names));
  }
  o.text << (result ? "true" : "false") << "\n";
  o.j = {{"formula", print_formula(phi)}, {"result", result}};
}

void run_compose(const std::vector<std::string>& theory_texts, bool omega,
                 unsigned prefix_len, const Budget& b, Output& o) {
  if (theory_texts.empty()) throw DomainError("compose needs at least one --theory");
  std::vector<Theory> ts;
  for (const auto& txt : theory_texts) ts.push_back(parse_theory(txt));
  TheorySequence seq;
  seq.level = ts[0].level();
  seq.arity = ts[0].arity();
  Theory result;
  if (omega) {
    if (prefix_len >= ts.size())
      throw DomainError("prefix length leaves an empty period");
    seq.prefix.assign(ts.begin(), ts.begin() + prefix_len);
    seq.period.assign(ts.begin() + prefix_len, ts.end());
    result = omega_sum(seq, b);
  } else {
    seq.prefix = ts;
    result = sum_finite(seq);
  }
  std::string ser = serialize_theory(result);
  o.text << ser << "\n";
  o.j = {{"theory", ser}};
}

void run_types(unsigned n, unsigned l, const Budget& b, Output& o) {
  TypeSpace sp = enumerate_types(n, l, b);
  o.text << sp.types.size() << "\n";
  json arr = json::array();
  for (Theory t : sp.types) {
    std::string ser = serialize_theory(t);
    o.text << ser << "\n";
    arr.push_back(ser);
  }
  o.j = {{"level", n}, {"arity", l}, {"count", sp.types.size()}, {"types", arr}};
}

void run_ordinal(const std::string& op, const std::string& a_text,
                 const std::string& b_text, const std::string& classes,
                 std::uint64_t bound, bool bound_given, Output& o) {
  if (op == "add" || op == "mul" || op == "cmp" || op == "leftsub") {
    OrdinalCNF a = parse_ordinal(a_text), b2 = parse_ordinal(b_text);
    if (op == "cmp") {
      int c = ord_cmp(a, b2);
      o.text << (c < 0 ? "<" : (c > 0 ? ">" : "=")) << "\n";
      o.j = {{"cmp", c}};
      return;
    }
    OrdinalCNF r = op == "add"   ? ord_add(a, b2)
                   : op == "mul" ? ord_mul(a, b2)
                                 : ord_left_sub(a, b2);
    o.text << print_ordinal(r) << "\n";
    o.j = {{"result", print_ordinal(r)}};
  } else if (op == "parttype") {
    IntervalPartition p = parse_partition(a_text, classes);
    OrdinalCNF r = partition_order_type(p);
    o.text << print_ordinal(r) << "\n";
    o.j = {{"result", print_ordinal(r)}};
  } else if (op == "decomp") {
    OrdinalCNF a = parse_ordinal(a_text), b2 = parse_ordinal(b_text);
    auto r = bound_given ? decomposition_search(a, b2, bound)
                         : decomposition_search(a, b2);
    if (r) {
      o.text << print_ordinal(r->first) << " ; " << print_ordinal(r->second) << "\n";
      o.j = {{"found", true},
             {"g1", print_ordinal(r->first)},
             {"g2", print_ordinal(r->second)}};
    } else {
      o.text << "not found within bound\n";
      o.j = {{"found", false}};
    }
  } else if (op == "log") {
    o.text << log_of(parse_ordinal(a_text)) << "\n";
    o.j = {{"log", log_of(parse_ordinal(a_text))}};
  } else {
    throw DomainError("unknown ordinal operation " + op);
  }
}

void run_wellorder_chain(const std::string& term_text, unsigned samples,
                         std::uint64_t seed, Output& o) {
  ChainTermPtr t = parse_chain_term(term_text);
  WellOrderCertificate cert = synthesize_wellorder(t);
  auto rep = verify_wellorder(cert, t, samples, seed);
  o.text << "degree " << cert.degree << "\n";
  o.text << "parameters " << cert.param_parity.size() << "\n";
  for (unsigned k = 1; k < cert.degree; ++k)
    o.text << "P" << k << " marks the "
           << (cert.param_parity[k - 1] == 0 ? "even" : "odd")
           << "-index blocks of the depth-" << (cert.degree - k)
           << " decomposition\n";
  o.text << "order-type " << print_ordinal(term_order_type(t)) << "\n";
  o.text << "formula " << print_formula(cert.formula) << "\n";
  o.text << "verification " << (rep.pass ? "pass" : ("fail: " + rep.failure)) << " ("
         << rep.pairs_checked << " pairs)\n";
  o.j = {{"degree", cert.degree},
         {"parameters", cert.param_parity.size()},
         {"order_type", print_ordinal(term_order_type(t))},
         {"formula", print_formula(cert.formula)},
         {"verified", rep.pass},
         {"pairs", rep.pairs_checked}};
}

void run_wellorder_tree(const FiniteStructure& t, Output& o) {
  A2Decomposition dec = a2_wellorder(t);
  o.text << "order";
  for (unsigned v : dec.order) o.text << " " << v;
  o.text << "\n";
  o.text << "sub-branches " << dec.gamma.size() << "\n";
  for (std::size_t i = 0; i < dec.gamma.size(); ++i) {
    const auto& g = dec.gamma[i];
    o.text << "A" << i << " parent=" << g.parent << " color=" << g.color << " nodes=";
    for (std::size_t k = 0; k < g.branch.size(); ++k)
      o.text << (k ? "," : "") << g.branch[k];
    o.text << " rep=" << g.rep << "\n";
  }
  o.text << "representatives " << mask_to_ids(dec.representatives) << "\n";
  for (unsigned c = 0; c < dec.colors_used; ++c)
    o.text << "color" << c << " " << mask_to_ids(dec.color_classes[c]) << "\n";
  json branches = json::array();
  for (const auto& g : dec.gamma)
    branches.push_back({{"nodes", g.branch}, {"parent", g.parent}, {"color", g.color}});
  o.j = {{"order", dec.order}, {"sub_branches", branches}};
}

void run_uniformize(const FormulaPtr& phi, const FiniteStructure& s, unsigned block_size,
                    const Budget& b, Output& o) {
  json rows = json::array();
  if (s.is_chain() && block_size > 0) {
    auto u = product_uniformize(phi, s, block_size, b);
    o.text << "mode product blocks=" << u.blocks << " block-size=" << u.block_size << "\n";
    for (const auto& [y, x] : u.selection) {
      o.text << "Y=" << mask_to_ids(y) << " X=" << mask_to_ids(x) << " targets=";
      const auto& c = u.certificates.at(y);
      for (std::size_t i = 0; i < c.targets.size(); ++i)
        o.text << (i ? ";" : "") << serialize_theory(c.targets[i]);
      o.text << "\n";
      rows.push_back({{"y", mask_to_ids(y)}, {"x", mask_to_ids(x)}});
    }
  } else if (s.is_chain()) {
    auto u = lex_uniformize(phi, s, b);
    o.text << "mode lex\n";
    o.text << "psi " << print_formula(u.psi) << "\n";
    for (const auto& [y, x] : u.selection) {
      o.text << "Y=" << mask_to_ids(y) << " X=" << mask_to_ids(x) << "\n";
      rows.push_back({{"y", mask_to_ids(y)}, {"x", mask_to_ids(x)}});
    }
  } else {
    auto u = tree_uniformize(phi, s, b);
    o.text << "mode tree sub-branches=" << u.decomposition.gamma.size() << "\n";
    for (const auto& [y, x] : u.selection) {
      o.text << "Y=" << mask_to_ids(y) << " X=" << mask_to_ids(x);
      auto it = u.certificates.find(y);
      if (it != u.certificates.end()) {
        o.text << " targets=";
        for (std::size_t i = 0; i < it->second.size(); ++i)
          o.text << (i ? ";" : "") << serialize_theory(it->second[i].branch_target);
      }
      o.text << "\n";
      rows.push_back({{"y", mask_to_ids(y)}, {"x", mask_to_ids(x)}});
    }
  }
  o.j = {{"selections", rows}};
}

void run_ramsey(const std::string& path, unsigned size, Output& o) {
  AdditiveColoring col = AdditiveColoring::parse(slurp(path));
  auto r = additive_ramsey(col, size);
  if (!r) {
    o.text << "not found\n";
    o.j = {{"found", false}};
    return;
  }
  for (std::size_t i = 0; i < r->size(); ++i) o.text << (i ? " " : "") << (*r)[i];
  o.text << "\n";
  o.j = {{"found", true}, {"indices", *r}};
}

void run_tower(const std::string& theory_text, const FiniteStructure* s, unsigned n,
               unsigned depth, const Budget& b, Output& o) {
  Theory t;
  if (!theory_text.empty())
    t = parse_theory(theory_text);
  else if (s)
    t = eval_theory(*s, {}, n, b);
  else
    throw DomainError("tower needs --theory or a structure file with -n");
  TowerReport rep = omega_power_tower(t, depth, b);
  json arr = json::array();
  for (std::size_t i = 0; i < rep.tower.size(); ++i) {
    std::string ser = serialize_theory(rep.tower[i]);
    o.text << "omega^" << (i + 1) << " " << ser << "\n";
    arr.push_back(ser);
  }
  if (rep.stabilization) {
    o.text << "stabilizes p=" << *rep.stabilization
           << " idempotent=" << (rep.stable_idempotent ? "yes" : "no")
           << " next-equation=" << (rep.next_equation_holds ? "yes" : "no") << "\n";
  } else {
    o.text << "no stabilization within depth " << depth << "\n";
  }
  o.j = {{"tower", arr},
         {"stabilization", rep.stabilization ? json(*rep.stabilization) : json()},
         {"stable_idempotent", rep.stable_idempotent},
         {"next_equation", rep.next_equation_holds}};
}

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"composition-method toolkit for the monadic theory of order"};
  app.require_subcommand(1);
  bool as_json = false;
  std::uint64_t budget_limit = Budget::kDefaultLimit;
  app.add_flag("--json", as_json, "machine-readable output");
  app.add_option("--budget", budget_limit, "work-unit budget");

  std::string chain_path, tree_path, formula, ordinal_text, term_text, theory_text;
  std::string ord_op, a_text, b_text, classes, coloring_path;
  std::vector<std::string> vars, theory_texts;
  unsigned n = 1, l = 0, samples = 500, depth = 8, block_size = 0, size = 1;
  std::uint64_t seed = 1, bound = 0;
  unsigned prefix_len = 0;
  bool omega = false;

  auto add_structure_opts = [&](CLI::App* c) {
    c->add_option("--chain", chain_path, "chain file");
    c->add_option("--tree", tree_path, "tree file");
  };

  CLI::App* c_theory = app.add_subcommand("theory", "canonical theory of a structure");
  add_structure_opts(c_theory);
  c_theory->add_option("-n,--level", n, "theory depth")->required();
  c_theory->add_option("--vars", vars, "named sets used as predicates (in order)");

  CLI::App* c_decide = app.add_subcommand("decide", "decide a formula");
  add_structure_opts(c_decide);
  c_decide->add_option("--formula", formula, "formula text")->required();
  c_decide->add_option("--ordinal", ordinal_text, "ordinal in CNF text form");

  CLI::App* c_compose = app.add_subcommand("compose", "sum of theories");
  c_compose->add_option("--theory", theory_texts, "theory serialization (repeatable)");
  c_compose->add_flag("--omega", omega, "omega-sum; entries after --prefix-len repeat");
  c_compose->add_option("--prefix-len", prefix_len, "prefix length for --omega");

  CLI::App* c_types = app.add_subcommand("types", "formally possible theories");
  c_types->add_option("-n,--level", n, "level")->required();
  c_types->add_option("-l,--arity", l, "arity")->required();

  CLI::App* c_ord = app.add_subcommand("ordinal", "ordinal arithmetic and partitions");
  c_ord->add_option("op", ord_op, "add|mul|cmp|leftsub|parttype|decomp|log")->required();
  c_ord->add_option("--a,--alpha", a_text, "first ordinal");
  c_ord->add_option("--b,--beta", b_text, "second ordinal");
  c_ord->add_option("--classes", classes, "interval classes `[lo,hi) ... ; ...`");
  CLI::Option* bound_opt = c_ord->add_option("--bound", bound, "coefficient bound");

  CLI::App* c_wchain = app.add_subcommand("wellorder-chain", "well-order a chain term");
  c_wchain->add_option("--term", term_text, "chain term")->required();
  c_wchain->add_option("--samples", samples, "verification sample pairs");
  c_wchain->add_option("--seed", seed, "verification seed");

  CLI::App* c_wtree = app.add_subcommand("wellorder-tree", "well-order a finite tree");
  c_wtree->add_option("--tree", tree_path, "tree file")->required();

  CLI::App* c_unif = app.add_subcommand("uniformize", "definable witness selection");
  add_structure_opts(c_unif);
  c_unif->add_option("--formula", formula, "formula over X, Y and named sets")->required();
  c_unif->add_option("--block-size", block_size, "product mode with this block size");

  CLI::App* c_ramsey = app.add_subcommand("ramsey", "homogeneous set of a coloring");
  c_ramsey->add_option("--file", coloring_path, "coloring file")->required();
  c_ramsey->add_option("--size", size, "requested homogeneous size")->required();

  CLI::App* c_tower = app.add_subcommand("tower", "omega-power stabilization");
  add_structure_opts(c_tower);
  c_tower->add_option("--theory", theory_text, "theory serialization");
  c_tower->add_option("-n,--level", n, "theory depth for structure input");
  c_tower->add_option("--depth", depth, "tower depth");

  try {
    std::vector<std::string> argv = args;
    std::vector<const char*> cargv{"mso"};
    for (const auto& a : argv) cargv.push_back(a.c_str());
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  Budget budget(budget_limit);
  Output o;
  o.as_json = as_json;
  try {
    if (*c_theory) {
      run_theory(load_structure(chain_path, tree_path), n, vars, budget, o);
    } else if (*c_decide) {
      std::optional<FiniteStructure> s;
      if (!chain_path.empty() || !tree_path.empty())
        s = load_structure(chain_path, tree_path);
      run_decide(formula, ordinal_text, s ? &*s : nullptr, budget, o);
    } else if (*c_compose) {
      run_compose(theory_texts, omega, prefix_len, budget, o);
    } else if (*c_types) {
      run_types(n, l, budget, o);
    } else if (*c_ord) {
      run_ordinal(ord_op, a_text, b_text, classes, bound, bound_opt->count() > 0, o);
    } else if (*c_wchain) {
      run_wellorder_chain(term_text, samples, seed, o);
    } else if (*c_wtree) {
      run_wellorder_tree(load_structure("", tree_path), o);
    } else if (*c_unif) {
      run_uniformize(parse_formula(formula), load_structure(chain_path, tree_path),
                     block_size, budget, o);
    } else if (*c_ramsey) {
      run_ramsey(coloring_path, size, o);
    } else if (*c_tower) {
      std::optional<FiniteStructure> s;
      if (!chain_path.empty() || !tree_path.empty())
        s = load_structure(chain_path, tree_path);
      run_tower(theory_text, s ? &*s : nullptr, n, depth, budget, o);
    }
  } catch (const BudgetExceeded& e) {
    err << "budget error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  o.emit(out);
  return 0;
}

}  // namespace mso
