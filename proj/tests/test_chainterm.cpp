#include <doctest.h>

#include "mso/chainterm.hpp"

using namespace mso;

namespace {

ChainTermPtr T(const std::string& s) { return parse_chain_term(s); }

ElementAddress addr(std::vector<std::uint64_t> steps) {
  ElementAddress a;
  a.steps = std::move(steps);
  return a;
}

// the shared corpus of ultimately periodic terms of degree 1..3
std::vector<ChainTermPtr> degree_corpus() {
  std::vector<std::string> texts = {
      "omega",
      "(rev omega)",
      "(fin 5)",
      "(concat (fin 2) omega)",
      "(concat omega (rev omega))",
      "(concat (rev omega) omega)",
      "(concat omega (fin 3) omega)",
      "(omegasum (prefix) (period (rev omega)))",
      "(omegasum (prefix (fin 2)) (period omega))",
      "(omegasum (prefix) (period (fin 1) (rev omega)))",
      "(omegasum (prefix omega) (period (rev omega) (fin 2)))",
      "(rev (omegasum (prefix) (period omega)))",
      "(rev (omegasum (prefix) (period (rev omega))))",
      "(rev (omegasum (prefix (fin 1)) (period omega (fin 2))))",
      "(omegasum (prefix) (period (concat (rev omega) (fin 1))))",
      "(omegasum (prefix) (period (omegasum (prefix) (period (rev omega)))))",
      "(omegasum (prefix (rev omega)) (period (omegasum (prefix) (period omega))))",
      "(rev (omegasum (prefix) (period (omegasum (prefix) (period (rev omega))))))",
      "(concat (omegasum (prefix) (period (rev omega))) omega)",
      "(concat (rev omega) (omegasum (prefix) (period (rev omega))))",
      "(omegasum (prefix (fin 3)) (period (concat omega (rev omega))))",
      "(omegasum (prefix) (period (concat (fin 1) (rev omega)) omega))",
      "(rev (concat (omegasum (prefix) (period omega)) (fin 2)))",
      "(omegasum (prefix) (period (rev (omegasum (prefix) (period omega)))))",
  };
  std::vector<ChainTermPtr> out;
  for (const auto& t : texts) out.push_back(T(t));
  return out;
}

}  // namespace

TEST_CASE("term normalization") {
  CHECK(term_equal(T("(rev (rev omega))"), T("omega")));
  CHECK(term_equal(T("(rev (fin 4))"), T("(fin 4)")));
  // reversal distributes over concatenation
  CHECK(term_equal(T("(rev (concat (fin 2) omega))"),
                   T("(concat (rev omega) (fin 2))")));
  // nested concatenations flatten, empty parts vanish
  CHECK(term_equal(T("(concat (concat omega (fin 1)) (fin 0) omega)"),
                   T("(concat omega (fin 1) omega)")));
  CHECK(term_equal(T("(omegasum (prefix (fin 2)) (period (fin 0)))"), T("(fin 2)")));
  CHECK_THROWS_AS(ChainTerm::omega_sum({}, {}), DomainError);
}

TEST_CASE("print and parse round-trip") {
  for (const auto& t : degree_corpus())
    CHECK(term_equal(t, parse_chain_term(print_chain_term(t))));
}

TEST_CASE("structural degree") {
  CHECK(hdeg(T("(fin 0)")) == 0);
  CHECK(hdeg(T("(fin 1)")) == 0);
  CHECK(hdeg(T("(fin 5)")) == 1);
  CHECK(hdeg(T("omega")) == 1);
  CHECK(hdeg(T("(rev omega)")) == 1);
  CHECK(hdeg(T("(concat (fin 2) omega)")) == 1);
  CHECK(hdeg(T("(concat omega (rev omega))")) == 2);
  CHECK(hdeg(T("(omegasum (prefix) (period (rev omega)))")) == 2);
  CHECK(hdeg(T("(omegasum (prefix) (period omega))")) == 1);
  CHECK(hdeg(T("(omegasum (prefix) (period (omegasum (prefix) (period (rev omega)))))")) == 3);
  // degree is invariant under reversal
  for (const auto& t : degree_corpus()) CHECK(hdeg(t) == hdeg(ChainTerm::reverse(t)));
}

TEST_CASE("order types") {
  CHECK(term_order_type(T("omega")) == parse_ordinal("w"));
  CHECK(term_order_type(T("(rev omega)")) == parse_ordinal("w"));
  CHECK(term_order_type(T("(fin 4)")) == parse_ordinal("4"));
  CHECK(term_order_type(T("(omegasum (prefix) (period (rev omega)))")) ==
        parse_ordinal("w^2"));
  CHECK(term_order_type(T("(concat omega (rev omega))")) == parse_ordinal("w*2"));
  CHECK(term_order_type(
            T("(omegasum (prefix) (period (omegasum (prefix) (period omega))))")) ==
        parse_ordinal("w^3"));
}

TEST_CASE("rank examples") {
  CHECK(rank(T("omega"), addr({5})) == parse_ordinal("5"));
  for (std::uint64_t k : {0, 3, 7})
    CHECK(rank(T("(rev omega)"), addr({k})) == OrdinalCNF::nat(k));
  // block arithmetic on an omega-sum of reversed blocks
  ChainTermPtr t = T("(omegasum (prefix) (period (rev omega)))");
  for (std::uint64_t i : {0, 1, 3})
    for (std::uint64_t k : {0, 2, 5}) {
      OrdinalCNF expect = ord_add(ord_mul(parse_ordinal("w"), OrdinalCNF::nat(i)),
                                  OrdinalCNF::nat(k));
      CHECK(rank(t, addr({i, k})) == expect);
    }
  CHECK_THROWS_AS(rank(T("(fin 2)"), addr({5})), DomainError);
}

TEST_CASE("rank embeds the chain order on well-ordered terms") {
  ChainTermPtr t = T("(concat (fin 2) omega)");
  std::uint64_t st = 7;
  for (int i = 0; i < 200; ++i) {
    ElementAddress x = sample_address(t, st);
    ElementAddress y = sample_address(t, st);
    int cc = chain_compare(t, x, y);
    int rc = ord_cmp(rank(t, x), rank(t, y));
    CHECK(cc == rc);  // ascending term: ranks follow the chain order
  }
}

TEST_CASE("synthesis of the base cases") {
  WellOrderCertificate asc = synthesize_wellorder(T("omega"));
  CHECK(asc.degree == 1);
  CHECK(asc.param_parity.empty());
  CHECK(print_formula(asc.formula) == "X < Y");
  WellOrderCertificate desc = synthesize_wellorder(T("(rev omega)"));
  CHECK(print_formula(desc.formula) == "Y < X");
  CHECK_THROWS_AS(synthesize_wellorder(T("(fin 1)")), DomainError);
}

TEST_CASE("certificates verify against rank") {
  for (const auto& t : degree_corpus()) {
    WellOrderCertificate cert = synthesize_wellorder(t);
    CHECK(cert.param_parity.size() == hdeg(t) - 1);
    auto rep = verify_wellorder(cert, t, 500);
    INFO(print_chain_term(t), " -> ", rep.failure);
    CHECK(rep.pass);
    CHECK(rep.pairs_checked == 500);
    // the emitted formula is well formed in the surface language
    CHECK(structurally_equal(cert.formula,
                             parse_formula(print_formula(cert.formula))));
  }
}

TEST_CASE("corrupted parameters are detected") {
  ChainTermPtr t = T("(omegasum (prefix) (period (rev omega)))");
  WellOrderCertificate cert = synthesize_wellorder(t);
  WellOrderCertificate bad = cert;
  bad.param_parity[0] = 1;  // odd blocks instead of even
  auto rep = verify_wellorder(bad, t, 500);
  CHECK_FALSE(rep.pass);
  CHECK(rep.failure.find("P1") != std::string::npos);
}

TEST_CASE("rank is injective on sampled addresses") {
  for (const auto& t : degree_corpus()) {
    std::uint64_t st = 99;
    std::vector<ElementAddress> xs;
    for (int i = 0; i < 60; ++i) xs.push_back(sample_address(t, st));
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (std::size_t j = i + 1; j < xs.size(); ++j)
        if (!(xs[i] == xs[j]))
          CHECK(ord_cmp(rank(t, xs[i]), rank(t, xs[j])) != 0);
  }
}

TEST_CASE("address validity") {
  ChainTermPtr t = T("(omegasum (prefix (fin 2)) (period omega))");
  CHECK(address_valid(t, addr({0, 1})));
  CHECK_FALSE(address_valid(t, addr({0, 2})));   // prefix block has two points
  CHECK(address_valid(t, addr({17, 1000})));     // deep period block, any position
  CHECK_FALSE(address_valid(t, addr({0})));      // missing leaf position
  CHECK_FALSE(address_valid(t, addr({0, 1, 0})));
}
