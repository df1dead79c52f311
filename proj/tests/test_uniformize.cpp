#include <doctest.h>

#include "mso/uniformize.hpp"
#include "corpus.hpp"

using namespace mso;

namespace {

FormulaPtr F(const std::string& s) { return parse_formula(s); }

std::map<std::string, Mask> env_xy(const FiniteStructure& s, Mask x, Mask y) {
  std::map<std::string, Mask> env{{"X", x}, {"Y", y}};
  for (const auto& [name, mask] : s.named_sets()) env[name] = mask;
  return env;
}

}  // namespace

TEST_CASE("potential uniformizability") {
  FiniteStructure c3 = FiniteStructure::chain(3);
  CHECK(check_pu(F("X sub Y"), c3));
  CHECK_FALSE(check_pu(F("sing(X) & X sub Y"), FiniteStructure::chain(2)));
  CHECK(check_pu(F("(empty(Y) & empty(X)) | (sing(X) & X sub Y)"), c3));
  // unknown parameter names are rejected
  CHECK_THROWS_AS(check_pu(F("X sub Q"), c3), DomainError);
}

TEST_CASE("subset order") {
  CHECK(mask_lex_less(0b01, 0b10));
  CHECK(mask_lex_less(0b11, 0b10));
  CHECK_FALSE(mask_lex_less(0b10, 0b11));
  CHECK(mask_lex_less(0b1, 0b0));  // the half containing the least point wins
  CHECK_FALSE(mask_lex_less(0b0, 0b0));
}

TEST_CASE("lexicographic uniformizer") {
  FiniteStructure c3 = FiniteStructure::chain(3);
  FormulaPtr phi = F("(empty(Y) & empty(X)) | (sing(X) & X sub Y)");
  LexUniformizer u = lex_uniformize(phi, c3);
  CHECK(u.selection.at(0b110) == 0b010);  // least point of Y = {1,2}
  CHECK(u.selection.at(0b000) == 0b000);
  CHECK(u.selection.size() == 8);

  LexUniformizer ident = lex_uniformize(F("X = Y"), c3);
  for (const auto& [y, x] : ident.selection) CHECK(x == y);

  CHECK_THROWS_AS(lex_uniformize(F("sing(X) & X sub Y"), c3), DomainError);
}

TEST_CASE("lexicographic uniformizer emits a unique formula") {
  for (const auto& text : testcorpus::selection_corpus()) {
    FormulaPtr phi = F(text);
    for (unsigned n = 0; n <= 3; ++n) {
      FiniteStructure c = FiniteStructure::chain(n);
      if (!check_pu(phi, c)) continue;
      LexUniformizer u = lex_uniformize(phi, c);  // verifies psi internally
      for (const auto& [y, x] : u.selection) {
        CHECK(model_check(c, phi, env_xy(c, x, y)));
        CHECK(model_check(c, u.psi, env_xy(c, x, y)));
      }
    }
  }
}

TEST_CASE("product uniformizer") {
  // degenerate product equals the lexicographic selection
  FormulaPtr phi = F("(empty(Y) & empty(X)) | (sing(X) & X sub Y)");
  FiniteStructure c1 = FiniteStructure::chain(1);
  ProductUniformizer p1 = product_uniformize(phi, c1, 1);
  LexUniformizer l1 = lex_uniformize(phi, c1);
  CHECK(p1.selection == l1.selection);

  // two blocks of two: Y = {0,3} picks the first block's witness
  FiniteStructure c4 = FiniteStructure::chain(4);
  ProductUniformizer p2 = product_uniformize(phi, c4, 2);
  CHECK(p2.blocks == 2);
  CHECK(p2.selection.at(0b1001) == 0b0001);
  const BlockCertificate& cert = p2.certificates.at(0b1001);
  CHECK(cert.targets.size() == 2);
  CHECK(decide(phi, cert.glued_theory, selection_context(c4)));

  // every selection satisfies the formula
  for (const auto& [y, x] : p2.selection)
    CHECK(model_check(c4, phi, env_xy(c4, x, y)));
}

TEST_CASE("product block targets depend only on the block theories") {
  FormulaPtr phi = F("(empty(Y) & empty(X)) | (sing(X) & X sub Y)");
  for (unsigned a = 1; a <= 3; ++a)
    for (unsigned b = 1; b <= 3; ++b) {
      FiniteStructure prod = FiniteStructure::chain(a * b);
      if (!check_pu(phi, prod)) continue;
      ProductUniformizer u = product_uniformize(phi, prod, a);
      std::map<std::string, std::string> seen;  // R0 signature -> targets
      for (const auto& [y, cert] : u.certificates) {
        std::string key, val;
        for (Theory t : cert.block_theories) key += std::to_string(t.id()) + ",";
        for (Theory t : cert.targets) val += std::to_string(t.id()) + ",";
        auto it = seen.find(key);
        if (it == seen.end())
          seen.emplace(key, val);
        else
          CHECK(it->second == val);
      }
    }
}

TEST_CASE("tree uniformizer") {
  FiniteStructure t3 = FiniteStructure::tree({-1, 0, 0});
  FormulaPtr phi = F("(empty(Y) & empty(X)) | (sing(X) & X sub Y)");
  TreeUniformizer u = tree_uniformize(phi, t3);
  // both leaves marked: the witness on the first branch is chosen
  CHECK(u.selection.at(0b110) == 0b010);
  for (const auto& [y, x] : u.selection)
    CHECK(model_check(t3, phi, env_xy(t3, x, y)));
  // certificates name per-node targets
  const auto& certs = u.certificates.at(0b110);
  REQUIRE(!certs.empty());
  CHECK(certs[0].gamma_index == 0);

  CHECK_THROWS_AS(tree_uniformize(F("sing(X) & X sub Y"), t3), DomainError);
}

TEST_CASE("tree uniformizer on chain-shaped trees matches a uniformizer") {
  FiniteStructure chain_tree = FiniteStructure::tree({-1, 0, 1});
  FormulaPtr phi = F("(empty(Y) & empty(X)) | (sing(X) & X sub Y)");
  TreeUniformizer u = tree_uniformize(phi, chain_tree);
  for (const auto& [y, x] : u.selection) {
    CHECK(model_check(chain_tree, phi, env_xy(chain_tree, x, y)));
    // exactly one selection per Y by construction; spot-check minimality
    // against the chain uniformizer
    LexUniformizer lex = lex_uniformize(phi, FiniteStructure::chain(3));
    CHECK(lex.selection.at(y) == x);
  }
}

TEST_CASE("uniformizers cover every Y on structures where the formula is p.u.") {
  std::vector<FiniteStructure> structures;
  for (unsigned n = 0; n <= 3; ++n) structures.push_back(FiniteStructure::chain(n));
  structures.push_back(FiniteStructure::tree({-1, 0, 0}));
  structures.push_back(FiniteStructure::tree({-1, 0, 0, 1}));
  for (const auto& text : testcorpus::selection_corpus()) {
    FormulaPtr phi = F(text);
    for (const auto& s : structures) {
      if (!check_pu(phi, s)) continue;
      std::size_t want = std::size_t(1) << s.size();
      if (s.is_chain()) {
        CHECK(lex_uniformize(phi, s).selection.size() == want);
      } else {
        CHECK(tree_uniformize(phi, s).selection.size() == want);
      }
    }
  }
}
