#include "mso/ordinal.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>

#include "mso/compose.hpp"

namespace mso {

unsigned OrdinalCNF::degree() const {
  if (terms.empty()) throw DomainError("degree of 0 is undefined");
  return terms[0].first;
}

OrdinalCNF OrdinalCNF::nat(std::uint64_t k) {
  OrdinalCNF a;
  if (k) a.terms.emplace_back(0u, k);
  return a;
}

OrdinalCNF OrdinalCNF::omega_pow(unsigned e, std::uint64_t coeff) {
  OrdinalCNF a;
  if (coeff) a.terms.emplace_back(e, coeff);
  return a;
}

int ord_cmp(const OrdinalCNF& a, const OrdinalCNF& b) {
  for (std::size_t i = 0;; ++i) {
    bool ea = i == a.terms.size(), eb = i == b.terms.size();
    if (ea && eb) return 0;
    if (ea) return -1;
    if (eb) return 1;
    if (a.terms[i].first != b.terms[i].first)
      return a.terms[i].first < b.terms[i].first ? -1 : 1;
    if (a.terms[i].second != b.terms[i].second)
      return a.terms[i].second < b.terms[i].second ? -1 : 1;
  }
}

OrdinalCNF ord_add(const OrdinalCNF& a, const OrdinalCNF& b) {
  if (b.is_zero()) return a;
  const unsigned lead = b.terms[0].first;
  OrdinalCNF r;
  for (const auto& t : a.terms)
    if (t.first > lead) r.terms.push_back(t);
  if (!a.terms.empty()) {
    // a term with the same exponent as b's head merges into it
    for (const auto& t : a.terms)
      if (t.first == lead) {
        r.terms.emplace_back(lead, t.second + b.terms[0].second);
        for (std::size_t i = 1; i < b.terms.size(); ++i) r.terms.push_back(b.terms[i]);
        return r;
      }
  }
  for (const auto& t : b.terms) r.terms.push_back(t);
  return r;
}

OrdinalCNF ord_mul(const OrdinalCNF& a, const OrdinalCNF& b) {
  if (a.is_zero() || b.is_zero()) return OrdinalCNF::zero();
  OrdinalCNF r = OrdinalCNF::zero();
  const unsigned d = a.degree();
  for (const auto& [e, c] : b.terms) {
    if (e > 0) {
      r = ord_add(r, OrdinalCNF::omega_pow(d + e, c));
    } else {
      // a * finite c: the leading coefficient multiplies, the tail stays
      OrdinalCNF piece;
      piece.terms = a.terms;
      piece.terms[0].second *= c;
      r = ord_add(r, piece);
    }
  }
  return r;
}

OrdinalCNF ord_left_sub(const OrdinalCNF& a, const OrdinalCNF& b) {
  if (ord_cmp(a, b) > 0) throw DomainError("left subtraction needs a <= b");
  std::size_t i = 0;
  while (i < a.terms.size() && i < b.terms.size() && a.terms[i] == b.terms[i]) ++i;
  OrdinalCNF r;
  if (i == a.terms.size()) {
    for (std::size_t j = i; j < b.terms.size(); ++j) r.terms.push_back(b.terms[j]);
    return r;
  }
  // first difference: b's term must dominate
  if (a.terms[i].first == b.terms[i].first) {
    r.terms.emplace_back(b.terms[i].first, b.terms[i].second - a.terms[i].second);
    for (std::size_t j = i + 1; j < b.terms.size(); ++j) r.terms.push_back(b.terms[j]);
    return r;
  }
  for (std::size_t j = i; j < b.terms.size(); ++j) r.terms.push_back(b.terms[j]);
  return r;
}

std::string print_ordinal(const OrdinalCNF& a) {
  if (a.is_zero()) return "0";
  std::ostringstream out;
  for (std::size_t i = 0; i < a.terms.size(); ++i) {
    if (i) out << " + ";
    auto [e, c] = a.terms[i];
    if (e == 0) {
      out << c;
    } else {
      out << "w";
      if (e != 1) out << "^" << e;
      if (c != 1) out << "*" << c;
    }
  }
  return out.str();
}

OrdinalCNF parse_ordinal(const std::string& text) {
  OrdinalCNF acc = OrdinalCNF::zero();
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto number = [&]() -> std::uint64_t {
    skip();
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == start) throw SyntaxError("expected number", pos + 1);
    return std::stoull(text.substr(start, pos - start));
  };
  bool first = true;
  for (;;) {
    skip();
    if (pos >= text.size()) {
      if (first) throw SyntaxError("empty ordinal", pos + 1);
      break;
    }
    if (!first) {
      if (text[pos] != '+') throw SyntaxError("expected '+'", pos + 1);
      ++pos;
      skip();
    }
    first = false;
    unsigned e = 0;
    std::uint64_t c = 0;
    if (pos < text.size() && text[pos] == 'w') {
      ++pos;
      e = 1;
      skip();
      if (pos < text.size() && text[pos] == '^') {
        ++pos;
        e = static_cast<unsigned>(number());
        skip();
      }
      c = 1;
      if (pos < text.size() && text[pos] == '*') {
        ++pos;
        c = number();
      }
    } else {
      e = 0;
      c = number();
    }
    if (c) acc = ord_add(acc, OrdinalCNF::omega_pow(e, c));
  }
  return acc;
}

Theory theory_of_ordinal(const OrdinalCNF& a, unsigned n, const Budget& budget) {
  if (a.is_zero()) return theory_of_empty_chain(n, 0);
  static std::map<std::pair<unsigned, unsigned>, Theory> power_cache;  // (n, exp)
  static std::mutex mu;
  std::vector<Theory> powers(a.degree() + 1);
  {
    std::lock_guard<std::mutex> g(mu);
    for (unsigned e = 0; e <= a.degree(); ++e) {
      auto it = power_cache.find({n, e});
      if (it == power_cache.end()) {
        Theory t = e == 0 ? eval_theory(FiniteStructure::chain(1), {}, n, budget)
                          : omega_const(power_cache.at({n, e - 1}), budget);
        it = power_cache.emplace(std::make_pair(n, e), t).first;
      }
      powers[e] = it->second;
    }
  }
  Theory acc = theory_of_empty_chain(n, 0);
  for (const auto& [e, c] : a.terms)
    for (std::uint64_t k = 0; k < c; ++k) acc = add(acc, powers[e]);
  return acc;
}

// ---------------------------------------------------------------------------
// Interval partitions

namespace {

OrdinalCNF interval_length(const OrdInterval& iv) { return ord_left_sub(iv.lo, iv.hi); }

void validate_partition(const IntervalPartition& p) {
  std::vector<OrdInterval> all;
  for (const auto& cls : p.classes)
    for (const auto& iv : cls) {
      if (ord_cmp(iv.lo, iv.hi) >= 0)
        throw DomainError("empty or reversed interval in partition");
      if (ord_cmp(iv.hi, p.alpha) > 0)
        throw DomainError("interval exceeds the partitioned ordinal");
      all.push_back(iv);
    }
  std::sort(all.begin(), all.end(),
            [](const OrdInterval& x, const OrdInterval& y) { return ord_less(x.lo, y.lo); });
  OrdinalCNF cur = OrdinalCNF::zero();
  for (const auto& iv : all) {
    if (ord_cmp(iv.lo, cur) != 0)
      throw DomainError("partition does not exactly cover [0, alpha): gap or overlap at " +
                        print_ordinal(cur));
    cur = iv.hi;
  }
  if (ord_cmp(cur, p.alpha) != 0)
    throw DomainError("partition does not reach alpha");
}

}  // namespace

OrdinalCNF partition_order_type(const IntervalPartition& p) {
  validate_partition(p);
  OrdinalCNF total = OrdinalCNF::zero();
  for (const auto& cls : p.classes) {
    std::vector<OrdInterval> ivs = cls;
    std::sort(ivs.begin(), ivs.end(),
              [](const OrdInterval& x, const OrdInterval& y) { return ord_less(x.lo, y.lo); });
    for (const auto& iv : ivs) total = ord_add(total, interval_length(iv));
  }
  return total;
}

std::vector<PlacedPiece> rearrangement_layout(const IntervalPartition& p) {
  validate_partition(p);
  std::vector<PlacedPiece> placed;
  OrdinalCNF cursor = OrdinalCNF::zero();
  for (const auto& cls : p.classes) {
    std::vector<OrdInterval> ivs = cls;
    std::sort(ivs.begin(), ivs.end(),
              [](const OrdInterval& x, const OrdInterval& y) { return ord_less(x.lo, y.lo); });
    for (const auto& iv : ivs) {
      PlacedPiece pc;
      pc.src = iv;
      pc.dst_lo = cursor;
      cursor = ord_add(cursor, interval_length(iv));
      pc.dst_hi = cursor;
      placed.push_back(pc);
    }
  }
  return placed;
}

IntervalPartition compose_rearrangements(const IntervalPartition& p1,
                                         const IntervalPartition& p2) {
  OrdinalCNF beta = partition_order_type(p1);
  if (ord_cmp(beta, p2.alpha) != 0)
    throw DomainError("second partition must cover the first rearrangement's order type");
  auto layout1 = rearrangement_layout(p1);
  auto layout2 = rearrangement_layout(p2);
  IntervalPartition out;
  out.alpha = p1.alpha;
  for (const auto& piece2 : layout2) {
    // decompose piece2's source (an interval of beta) into layout1 pieces
    for (const auto& piece1 : layout1) {
      const OrdinalCNF lo = ord_cmp(piece2.src.lo, piece1.dst_lo) > 0 ? piece2.src.lo
                                                                      : piece1.dst_lo;
      const OrdinalCNF hi = ord_cmp(piece2.src.hi, piece1.dst_hi) < 0 ? piece2.src.hi
                                                                      : piece1.dst_hi;
      if (ord_cmp(lo, hi) >= 0) continue;
      // pull back through piece1
      OrdInterval src;
      src.lo = ord_add(piece1.src.lo, ord_left_sub(piece1.dst_lo, lo));
      src.hi = ord_add(piece1.src.lo, ord_left_sub(piece1.dst_lo, hi));
      out.classes.push_back({src});
    }
  }
  return out;
}

std::optional<std::pair<OrdinalCNF, OrdinalCNF>> decomposition_search(
    const OrdinalCNF& a, const OrdinalCNF& b, std::uint64_t bound) {
  if (bound == 0) bound = 1;
  const unsigned max_e = a.is_zero() ? 0 : a.degree();
  // all CNFs with exponents <= max_e, coefficients in 1..bound
  std::vector<OrdinalCNF> cands{OrdinalCNF::zero()};
  std::vector<std::pair<unsigned, std::uint64_t>> cur;
  auto rec = [&](auto&& self, int next_e) -> void {
    for (int e = next_e; e >= 0; --e)
      for (std::uint64_t c = 1; c <= bound; ++c) {
        cur.emplace_back(unsigned(e), c);
        OrdinalCNF v;
        v.terms = cur;
        cands.push_back(v);
        self(self, e - 1);
        cur.pop_back();
      }
  };
  rec(rec, static_cast<int>(max_e));
  std::sort(cands.begin(), cands.end(), ord_less);
  for (const auto& g1 : cands) {
    if (ord_cmp(g1, a) > 0) continue;
    OrdinalCNF g2 = ord_left_sub(g1, a);
    if (ord_cmp(ord_add(g2, g1), b) == 0) return std::make_pair(g1, g2);
  }
  return std::nullopt;
}

std::optional<std::pair<OrdinalCNF, OrdinalCNF>> decomposition_search(
    const OrdinalCNF& a, const OrdinalCNF& b) {
  std::uint64_t m = 0;
  for (const auto& t : a.terms) m = std::max(m, t.second);
  for (const auto& t : b.terms) m = std::max(m, t.second);
  return decomposition_search(a, b, m + 1);
}

unsigned log_of(const OrdinalCNF& a) {
  if (a.is_zero()) throw DomainError("log of 0 is undefined");
  return a.degree();
}

}  // namespace mso
