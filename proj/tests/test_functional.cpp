#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bvflow/functional.hpp"
#include "bvflow/io.hpp"
#include "bvflow/model.hpp"

using namespace bvflow;

namespace {

const char* kScalar = R"(
[model]
name tscalar
dimension 4
[fields]
field phi
testfn fn dim=0
)";

const char* kVector = R"(
[model]
name tvector
dimension 4
[fields]
field A lorentz=1
ghost c
antighost cbar
nl b
strength F A
)";

Density P(const Model& m, const std::string& s) {
  return parse_expression(s, m.table, &m.strengths);
}

}  // namespace

TEST_CASE("a perfect total derivative reduces to zero") {
  Model m = parse_model(kScalar);
  IbpReducer red(m.table);
  Idx nu{IndexSpace::Lorentz, intern_index("w")};
  Density d = apply_derivative(m.table, nu, P(m, "phi*d[w](phi)"));
  CHECK_FALSE(d.is_zero());
  CHECK(red.is_total_derivative(d));
  CHECK_FALSE(red.is_total_derivative(P(m, "phi*phi")));
}

TEST_CASE("integration by parts identifies equivalent densities") {
  Model m = parse_model(kScalar);
  IbpReducer red(m.table);
  CHECK(red.equivalent(P(m, "d[mu](d[mu](phi))*phi"),
                       P(m, "-d[mu](phi)*d[mu](phi)")));
  CHECK(red.equivalent(P(m, "fn*d[mu](d[mu](phi))"),
                       P(m, "d[mu](d[mu](fn))*phi")));
  CHECK_FALSE(red.equivalent(P(m, "phi*phi"), P(m, "fn*phi")));
}

TEST_CASE("reduction is idempotent and linear") {
  Model m = parse_model(kScalar);
  IbpReducer red(m.table);
  Density d = P(m, "d[mu](phi)*d[mu](phi) + fn*d[nu](d[nu](phi))");
  Density r1 = red.reduce(d);
  Density r2 = red.reduce(r1);
  CHECK(print_density(m.table, r1) == print_density(m.table, r2));
}

TEST_CASE("the antisymmetric divergence identity closes under reduction") {
  Model m = parse_model(kVector);
  IbpReducer red(m.table);
  // d_nu F_nu_mu d_mu c integrates to zero against the symmetry of the
  // second derivatives
  Density d = P(m,
                "d[nu](F[nu,mu])*d[mu](c)");
  CHECK(red.is_total_derivative(d));
}

TEST_CASE("support tags are carried, not invented") {
  LocalFunctional f;
  CHECK(f.support == Support::PairRegularized);
  f.support = Support::SingleTest;
  LocalFunctional g = f;
  CHECK(g.support == Support::SingleTest);
}
