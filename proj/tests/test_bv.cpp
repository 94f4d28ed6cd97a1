#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bvflow/bv.hpp"
#include "bvflow/io.hpp"

using namespace bvflow;

namespace {

// scalar playground with Grassmann test functions for graded checks
const char* kScalar = R"(
[model]
name tscalar
dimension 4
[fields]
field phi
testfn fn dim=0
testfn gn dim=0
testfn on dim=0 odd
testfn pn dim=0 odd
)";

Density P(const Model& m, const std::string& s) {
  return parse_expression(s, m.table, &m.strengths);
}

bool same(const Model& m, const Density& a, const Density& b) {
  return add(m.table, a, scale(b, Coeff(-1))).is_zero();
}

Density br(const Model& m, const Density& x, const Density& y) {
  return antibracket(m.table, x, y, m.antibracket_pairs());
}

}  // namespace

TEST_CASE("graded antisymmetry of the antibracket") {
  Model m = parse_model(kScalar);
  struct Case {
    std::string x, y;
  };
  // mixed parities: phi_af is odd, on/pn are odd test functions
  std::vector<Case> cases = {
      {"fn*phi*phi_af", "gn*phi"},              // odd, even
      {"fn*phi*phi_af", "gn*phi*phi_af"},       // odd, odd
      {"on*phi_af", "gn*phi"},                  // even, even
      {"on*phi_af*phi", "pn*phi_af"},           // even, odd
  };
  for (const Case& c : cases) {
    Density X = P(m, c.x), Y = P(m, c.y);
    int px = parity_of(m.table, X), py = parity_of(m.table, Y);
    Density lhs = br(m, X, Y);
    Density rhs = br(m, Y, X);
    int sg = ((px + 1) * (py + 1)) & 1 ? 1 : -1;
    CHECK(same(m, lhs, scale(rhs, Coeff(sg))));
  }
}

TEST_CASE("bracket lowers antifield number and raises ghost number") {
  Model m = parse_model(kScalar);
  Density X = P(m, "fn*phi^2*phi_af");
  Density Y = P(m, "gn*phi*phi_af");
  Density b = br(m, X, Y);
  CHECK_FALSE(b.is_zero());
  Grading g = grading_of(m.table, b);
  CHECK(g.antifield == 1);
  CHECK(g.ghost == -1);
}

TEST_CASE("right Leibniz rule against an even generator") {
  Model m = parse_model(kScalar);
  Density I0 = P(m, "on*phi_af*phi + fn*phi^2");
  REQUIRE(parity_of(m.table, I0) == 0);
  std::vector<std::pair<std::string, std::string>> cases = {
      {"fn*phi", "gn*phi*phi_af"},
      {"on*phi_af", "gn*phi"},
      {"fn*phi*phi_af", "pn*phi_af"},
  };
  for (auto& [xs, ys] : cases) {
    Density X = P(m, xs), Y = P(m, ys);
    int py = parity_of(m.table, Y);
    Density lhs = br(m, mul(m.table, X, Y), I0);
    Density r1 = mul(m.table, X, br(m, Y, I0));
    Density r2 = mul(m.table, br(m, X, I0), Y);
    if (py) r2 = scale(r2, Coeff(-1));
    CHECK(same(m, lhs, add(m.table, r1, r2)));
  }
}

TEST_CASE("graded Jacobi identity") {
  Model m = parse_model(kScalar);
  Density X = P(m, "fn*phi*phi_af");
  Density Y = P(m, "gn*phi*phi_af");
  Density Z = P(m, "on*phi_af");
  auto sgn = [](int a, int b) { return (a & b & 1) ? -1 : 1; };
  int px = parity_of(m.table, X) + 1;
  int py = parity_of(m.table, Y) + 1;
  int pz = parity_of(m.table, Z) + 1;
  Density s1 = scale(br(m, X, br(m, Y, Z)), Coeff(sgn(px, pz)));
  Density s2 = scale(br(m, Y, br(m, Z, X)), Coeff(sgn(py, px)));
  Density s3 = scale(br(m, Z, br(m, X, Y)), Coeff(sgn(pz, py)));
  Density total = add(m.table, add(m.table, s1, s2), s3);
  CHECK(total.is_zero());
}

TEST_CASE("Laplacian of the quadratic pairing") {
  Model m = parse_model(kScalar);
  // Delta (fn phi phi_af) = -fn
  Density d = P(m, "fn*phi*phi_af");
  Density lap = bv_laplacian(m.table, d, m.antibracket_pairs(), m.dim);
  CHECK(print_density(m.table, lap) == "-fn");
}

TEST_CASE("Laplacian rejects derived contractions") {
  Model m = parse_model(kScalar);
  Density d = P(m, "fn*d[mu](phi)*d[mu](phi_af)");
  CHECK_THROWS_AS(bv_laplacian(m.table, d, m.antibracket_pairs(), m.dim),
                  RegularityError);
}

TEST_CASE("Laplacian product rule") {
  Model m = parse_model(kScalar);
  std::vector<std::pair<std::string, std::string>> cases = {
      {"fn*phi*phi_af", "gn*phi"},
      {"fn*phi*phi_af", "gn*phi*phi_af"},
      {"on*phi_af", "gn*phi"},
      {"on*phi_af", "pn*phi_af*phi"},
      {"fn*phi^2", "gn*phi*phi_af"},
  };
  auto pairs = parse_model(kScalar).antibracket_pairs();
  for (auto& [xs, ys] : cases) {
    Density X = P(m, xs), Y = P(m, ys);
    int px = parity_of(m.table, X);
    Density lhs = bv_laplacian(m.table, mul(m.table, X, Y), pairs, m.dim);
    Density r1 = mul(m.table, bv_laplacian(m.table, X, pairs, m.dim), Y);
    Density r2 = mul(m.table, X, bv_laplacian(m.table, Y, pairs, m.dim));
    Density r3 = br(m, X, Y);
    if (px) {
      r2 = scale(r2, Coeff(-1));
      r3 = scale(r3, Coeff(-1));
    }
    Density rhs = add(m.table, add(m.table, r1, r2), r3);
    CHECK(same(m, lhs, rhs));
  }
}

TEST_CASE("star and single-insertion brackets satisfy the mixed Leibniz "
          "identity") {
  Model m = parse_model(kScalar);
  Density I0 = P(m, "fn*phi^2 + on*phi_af*phi");
  std::vector<std::pair<std::string, std::string>> cases = {
      {"fn*phi*phi_af", "gn*phi"},  // the odd pairing against a linear term
      {"fn*phi", "gn*phi"},
      {"fn*phi*phi_af", "gn*phi*phi_af"},
      {"on*phi_af", "gn*phi^2"},
  };
  for (auto& [xs, ys] : cases) {
    Density X = P(m, xs), Y = P(m, ys);
    Density r = star_t_residual(m, X, Y, I0);
    CHECK(r.is_zero());
  }
}

TEST_CASE("support tags of the two bracket flavors") {
  Model m = parse_model(kScalar);
  Density X = P(m, "fn*phi*phi_af");
  Density Y = P(m, "gn*phi");
  CHECK(star_bracket(m, X, P(m, "fn*phi^2")).support ==
        Support::PairRegularized);
  CHECK(t_bracket(m, X, Y).support == Support::SingleTest);
}
