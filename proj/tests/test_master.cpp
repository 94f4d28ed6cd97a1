#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "bvflow/bv.hpp"
#include "bvflow/cohomology.hpp"
#include "bvflow/functional.hpp"
#include "bvflow/io.hpp"
#include "bvflow/linalg.hpp"
#include "bvflow/master.hpp"
#include "bvflow/model.hpp"

using namespace bvflow;

namespace {

std::string model_path(const std::string& stem) {
  return std::string(BVFLOW_MODELS_DIR "/") + stem + ".bvm";
}

Density P(const Model& m, const std::string& s) {
  return parse_expression(s, m.table, &m.strengths);
}

Density D(const SymbolTable& t, const Density& a, const Density& b) {
  return add(t, a, scale(b, Coeff(Rat(-1))));
}

Density sym(const Model& m, int id) { return make_symbol(m.table, id); }

// sum of source * generator over the declared pairs, indices contracted
// slot by slot
Density pair_sum(const Model& m) {
  const SymbolTable& t = m.table;
  Density out;
  int32_t next = 900;
  for (auto& [phi, src] : m.source_pairs()) {
    if (phi == m.eta) continue;
    const SymbolInfo& si = t.at(phi);
    std::vector<Idx> ix;
    for (int k = 0; k < si.n_lorentz; ++k)
      ix.push_back(Idx{IndexSpace::Lorentz, next++});
    for (int k = 0; k < si.n_lie; ++k)
      ix.push_back(Idx{IndexSpace::Lie, next++});
    out = add(t, out, mul(t, make_symbol(t, src, ix), make_symbol(t, phi, ix)));
  }
  return out;
}

void check_charges(const Model& m, const Density& d, int antifield) {
  for (const Monomial& mo : d.terms) {
    Grading g = monomial_grading(m.table, mo);
    CHECK(g.ghost == 0);
    CHECK(g.antifield == antifield);
    CHECK(g.parity == 0);
    CHECK(g.dim == Rat(m.dim));
  }
}

}  // namespace

TEST_CASE("the seed action assembles its documented pieces") {
  SUBCASE("scalar") {
    Model m = load_model(model_path("scalar_phi4"));
    ExtendedAction e = build_extended_action(m);
    CHECK(D(m.table, e.i0,
            P(m, "1/2*m2*phi*phi + 1/2*d[mu1](phi)*d[mu1](phi)"))
              .is_zero());
    CHECK(D(m.table, e.v, P(m, "1/24*lam4*phi*phi*phi*phi")).is_zero());
    CHECK(e.sigma.is_zero());
    CHECK(e.h_term.is_zero());
    CHECK(D(m.table, e.q_term, P(m, "-1/2*qk*phi*phi")).is_zero());
  }
  SUBCASE("photon") {
    Model m = load_model(model_path("maxwell"));
    ExtendedAction e = build_extended_action(m);
    CHECK(D(m.table, e.i0,
            P(m,
              "-1/2*i*xi*b*b - i*d[mu1](A[mu1])*b"
              " - 1/2*d[mu1](A[mu2])*d[mu1](A[mu2])"
              " + 1/2*d[mu1](A[mu2])*d[mu2](A[mu1])"
              " + d[mu1](c)*d[mu1](cbar)"))
              .is_zero());
    CHECK(D(m.table, e.sigma, P(m, "-A_src[mu1]*d[mu1](c) + i*cbar_src*b"))
              .is_zero());
    // the photon action has no cubic or quartic part, so the source terms
    // are the whole interaction block
    CHECK(D(m.table, e.v, e.sigma).is_zero());
    CHECK(D(m.table, e.h_term, P(m, "-A[mu1]*d[mu1](c)*eta - i*c*b*eta"))
              .is_zero());
    CHECK(D(m.table, e.q_term, P(m, "-1/2*qk*A[mu1]*A[mu1] + qk*c*cbar"))
              .is_zero());
  }
  SUBCASE("nonabelian") {
    Model m = load_model(model_path("yang_mills"));
    ExtendedAction e = build_extended_action(m);
    CHECK(D(m.table, e.sigma,
            P(m,
              "f[a1,a2,a3]*A[mu1,a1]*A_src[mu1,a2]*c[a3]"
              " - 1/2*f[a1,a2,a3]*c[a1]*c[a2]*c_src[a3]"
              " - A_src[mu1,a1]*d[mu1](c[a1])"
              " + i*cbar_src[a1]*b[a1]"))
              .is_zero());
    CHECK(D(m.table, e.h_term,
            P(m,
              "-1/2*f[a1,a2,a3]*c[a1]*c[a2]*cbar[a3]*eta"
              " - A[mu1,a1]*d[mu1](c[a1])*eta"
              " - i*c[a1]*b[a1]*eta"))
              .is_zero());
    CHECK(D(m.table, e.q_term,
            P(m, "-1/2*qk*A[mu1,a1]*A[mu1,a1] + qk*c[a1]*cbar[a1]"))
              .is_zero());
    CHECK(D(m.table, e.v,
            P(m,
              "-1/4*f[a1,a2,a3]*f[a1,a4,a5]"
              "*A[mu1,a2]*A[mu1,a4]*A[mu2,a3]*A[mu2,a5]"
              " - f[a1,a2,a3]*A[mu1,a1]*A[mu2,a2]*d[mu1](A[mu2,a3])"
              " + f[a1,a2,a3]*A[mu1,a1]*A_src[mu1,a2]*c[a3]"
              " + f[a1,a2,a3]*A[mu1,a1]*c[a2]*d[mu1](cbar[a3])"
              " - 1/2*f[a1,a2,a3]*c[a1]*c[a2]*c_src[a3]"
              " - A_src[mu1,a1]*d[mu1](c[a1])"
              " + i*cbar_src[a1]*b[a1]"))
              .is_zero());
  }
  SUBCASE("totals add up") {
    for (const char* name :
         {"scalar_phi4", "maxwell", "yang_mills", "broken_ym"}) {
      Model m = load_model(model_path(name));
      ExtendedAction e = build_extended_action(m);
      Density s = add(m.table, add(m.table, e.i0, e.v),
                      add(m.table, e.h_term, e.q_term));
      CHECK(D(m.table, e.total, s).is_zero());
    }
  }
  SUBCASE("the eta source variant only adds the pairing term") {
    Model m = load_model(model_path("maxwell"));
    ExtendedAction plain = build_extended_action(m);
    ExtendedAction with = build_extended_action(m, true);
    CHECK(D(m.table, with.sigma,
            add(m.table, plain.sigma, P(m, "qk*eta_src")))
              .is_zero());
    CHECK(D(m.table, with.i0, plain.i0).is_zero());
    CHECK(D(m.table, with.h_term, plain.h_term).is_zero());
    CHECK(D(m.table, with.q_term, plain.q_term).is_zero());
  }
}

TEST_CASE("seed components carry the charges of a physical action") {
  for (const char* name :
       {"scalar_phi4", "maxwell", "yang_mills", "broken_ym"}) {
    CAPTURE(name);
    Model m = load_model(model_path(name));
    ExtendedAction e = build_extended_action(m);
    check_charges(m, e.i0, 0);
    check_charges(m, e.sigma, 1);
    check_charges(m, e.h_term, 0);
    check_charges(m, e.q_term, 0);
    for (const Monomial& mo : e.v.terms) {
      Grading g = monomial_grading(m.table, mo);
      CHECK(g.ghost == 0);
      CHECK(g.parity == 0);
      CHECK(g.dim == Rat(m.dim));
    }
  }
}

TEST_CASE("one source generator reproduces all regulator terms at once") {
  // bracketing the gauge-fixed action with  sum sigma*chi - eta*quadform
  // yields exactly the source, compensator and regulator pieces
  for (const char* name :
       {"scalar_phi4", "maxwell", "yang_mills", "broken_ym"}) {
    CAPTURE(name);
    Model m = load_model(model_path(name));
    const SymbolTable& t = m.table;
    ExtendedAction e = build_extended_action(m);
    Density fixed = m.fermion.is_zero()
                        ? m.brst_action()
                        : gauge_fix(m, m.brst_action(), m.fermion);
    Density gen =
        add(t, pair_sum(m),
            scale(mul(t, sym(m, m.eta), m.regulator_quadform()),
                  Coeff(Rat(-1))));
    Density lhs = antibracket(t, fixed, gen, m.antibracket_pairs());
    Density rhs = add(t, add(t, e.sigma, e.h_term), e.q_term);
    CHECK(D(t, lhs, rhs).is_zero());
  }
}

TEST_CASE("the seed solves the regulated master equation") {
  {
    Model m = load_model(model_path("scalar_phi4"));
    ExtendedAction e = build_extended_action(m);
    CHECK(residual_eme(m, e, e.total).total.is_zero());
  }
  for (const char* name : {"maxwell", "yang_mills"}) {
    CAPTURE(name);
    Model m = load_model(model_path(name));
    ExtendedAction e = build_extended_action(m);
    IbpReducer red(m.table);
    CHECK(red.reduce(residual_eme(m, e, e.total).total).is_zero());
  }
  {
    // the deliberately inconsistent model keeps a genuine obstruction
    Model m = load_model(model_path("broken_ym"));
    ExtendedAction e = build_extended_action(m);
    IbpReducer red(m.table);
    CHECK(!red.reduce(residual_eme(m, e, e.total).total).is_zero());
  }
}

TEST_CASE("loop orders of the residual factor into operator and bracket") {
  struct Case {
    const char* model;
    std::vector<const char*> pool;
  };
  std::vector<Case> cases = {
      {"scalar_phi4",
       {"phi*phi", "phi*phi*phi*phi", "phi_src*phi_src", "m2*phi*phi"}},
      {"maxwell",
       {"c*cbar", "A[mu1]*A[mu1]", "c*A[mu1]*A_src[mu1]",
        "eta*d[mu1](c)*A[mu1]", "d[mu1](A[mu2])*d[mu1](A[mu2])"}},
      {"yang_mills",
       {"c[a1]*cbar[a1]", "A[mu1,a1]*A[mu1,a1]",
        "f[a1,a2,a3]*A[mu1,a1]*A_src[mu1,a2]*c[a3]", "eta*c[a1]*b[a1]"}}};
  std::mt19937 rng(20250825);
  std::uniform_int_distribution<int> num(-3, 3);
  std::uniform_int_distribution<int> den(1, 4);
  for (const Case& c : cases) {
    CAPTURE(c.model);
    Model m = load_model(model_path(c.model));
    const SymbolTable& t = m.table;
    ExtendedAction e = build_extended_action(m);
    Density seed_res = residual_eme(m, e, e.total).total;
    for (const char* s : c.pool) {
      CAPTURE(s);
      int n = num(rng);
      if (n == 0) n = 1;
      Density ghat = scale(P(m, s), Coeff(Rat(n, den(rng))));
      Density gamma =
          add(t, e.total, mul(t, sym(m, m.hbar), ghat));
      CHECK(D(t, hbar_coefficient(t, gamma, 0), e.total).is_zero());
      EmeResidual r = residual_eme(m, e, gamma);
      CHECK(D(t, r.order0, seed_res).is_zero());
      CHECK(D(t, r.order1, script_s(m, e, ghat)).is_zero());
      CHECK(D(t, r.order2,
              scale(effective_bracket(m, ghat, ghat), Coeff(Rat(1, 2))))
                .is_zero());
      Density rebuilt = add(
          t, r.order0,
          add(t, mul(t, sym(m, m.hbar), r.order1),
              mul(t, pow_density(t, sym(m, m.hbar), 2), r.order2)));
      CHECK(D(t, r.total, rebuilt).is_zero());
    }
    // a two term correction mixing the quadratic ghost and photon blocks
    if (std::string(c.model) == "maxwell") {
      Density ghat = add(t, P(m, "c*cbar"), P(m, "A[mu1]*A[mu1]"));
      Density gamma = add(t, e.total, mul(t, sym(m, m.hbar), ghat));
      EmeResidual r = residual_eme(m, e, gamma);
      CHECK(D(t, r.order1, script_s(m, e, ghat)).is_zero());
      CHECK(D(t, r.order2,
              scale(effective_bracket(m, ghat, ghat), Coeff(Rat(1, 2))))
                .is_zero());
    }
  }
}

TEST_CASE("the operator squares to zero modulo boundaries") {
  struct Case {
    const char* model;
    std::vector<const char*> pool;
  };
  std::vector<Case> cases = {
      {"scalar_phi4", {"phi*phi", "phi*phi*phi*phi", "phi_src*phi_src"}},
      {"maxwell",
       {"c*cbar", "A[mu1]*A[mu1]", "c*A[mu1]*A_src[mu1]",
        "d[mu1](A[mu2])*d[mu1](A[mu2])", "eta"}},
      {"yang_mills",
       {"c[a1]*cbar[a1]", "A[mu1,a1]*A[mu1,a1]", "c[a1]*c_src[a1]",
        "A[mu1,a1]*A_src[mu1,a1]", "eta"}}};
  for (const Case& c : cases) {
    CAPTURE(c.model);
    Model m = load_model(model_path(c.model));
    ExtendedAction e = build_extended_action(m);
    IbpReducer red(m.table);
    for (const char* s : c.pool) {
      CAPTURE(s);
      Density a = P(m, s);
      Density ss = script_s(m, e, script_s(m, e, a));
      CHECK(red.reduce(ss).is_zero());
    }
  }
  {
    // without a solved master equation the square keeps obstruction terms
    Model m = load_model(model_path("broken_ym"));
    ExtendedAction e = build_extended_action(m);
    IbpReducer red(m.table);
    for (const char* s :
         {"A[mu1,a1]*A[mu1,a1]", "c[a1]*c_src[a1]", "A[mu1,a1]*A_src[mu1,a1]"}) {
      CAPTURE(s);
      Density ss = script_s(m, e, script_s(m, e, P(m, s)));
      CHECK(!red.reduce(ss).is_zero());
    }
  }
}

TEST_CASE("the operator restricts to the variation away from sources") {
  struct Case {
    const char* model;
    std::vector<const char*> exact;
  };
  std::vector<Case> cases = {
      {"scalar_phi4", {"phi*phi", "phi*phi*phi*phi"}},
      {"maxwell", {"A[mu1]*A[mu1]", "c*cbar"}},
      {"yang_mills", {"A[mu1,a1]*A[mu1,a1]", "c[a1]*cbar[a1]"}}};
  for (const Case& c : cases) {
    CAPTURE(c.model);
    Model m = load_model(model_path(c.model));
    ExtendedAction e = build_extended_action(m);
    for (const char* s : c.exact) {
      CAPTURE(s);
      Density a = P(m, s);
      CHECK(D(m.table, script_s(m, e, a), brst(m, a)).is_zero());
    }
  }
  {
    // derivative couplings agree after moving total derivatives
    Model m = load_model(model_path("maxwell"));
    ExtendedAction e = build_extended_action(m);
    IbpReducer red(m.table);
    Density a = P(m, "d[mu1](A[mu2])*d[mu1](A[mu2])");
    Density gap = D(m.table, script_s(m, e, a), brst(m, a));
    CHECK(!gap.is_zero());
    CHECK(red.reduce(gap).is_zero());
  }
  for (const char* name : {"maxwell", "yang_mills"}) {
    CAPTURE(name);
    Model m = load_model(model_path(name));
    ExtendedAction e = build_extended_action(m);
    Density eta = sym(m, m.eta);
    CHECK(D(m.table, script_s(m, e, eta), sym(m, m.qk)).is_zero());
    CHECK(script_s(m, e, script_s(m, e, eta)).is_zero());
  }
}

TEST_CASE("the source bracket pairs generators with unit weight") {
  SUBCASE("units") {
    Model sc = load_model(model_path("scalar_phi4"));
    Model mx = load_model(model_path("maxwell"));
    Coeff one(Rat(1)), minus(Rat(-1));
    CHECK(D(sc.table, effective_bracket(sc, P(sc, "phi"), P(sc, "phi_src")),
            make_const(sc.table, minus))
              .is_zero());
    CHECK(D(sc.table, effective_bracket(sc, P(sc, "phi_src"), P(sc, "phi")),
            make_const(sc.table, one))
              .is_zero());
    CHECK(D(mx.table, effective_bracket(mx, P(mx, "c"), P(mx, "c_src")),
            make_const(mx.table, minus))
              .is_zero());
    CHECK(D(mx.table, effective_bracket(mx, P(mx, "c_src"), P(mx, "c")),
            make_const(mx.table, one))
              .is_zero());
    CHECK(D(mx.table, effective_bracket(mx, P(mx, "eta"), P(mx, "eta_src")),
            make_const(mx.table, minus))
              .is_zero());
    CHECK(D(mx.table, effective_bracket(mx, P(mx, "eta_src"), P(mx, "eta")),
            make_const(mx.table, one))
              .is_zero());
  }
  SUBCASE("graded antisymmetry") {
    struct Pair {
      const char* model;
      const char* a;
      const char* b;
    };
    std::vector<Pair> ps = {
        {"scalar_phi4", "phi*phi", "phi*phi_src"},
        {"scalar_phi4", "phi*phi*phi_src", "phi*phi_src"},
        {"scalar_phi4", "phi*phi*phi*phi", "phi*phi_src"},
        {"scalar_phi4", "phi_src*phi_src", "phi*phi*phi_src"},
        {"maxwell", "c*cbar", "c*c_src"},
        {"maxwell", "eta*c*cbar", "c*c_src"},
        {"maxwell", "A[mu1]*A_src[mu1]*c",
         "d[mu1](A[mu2])*d[mu1](A[mu2])"}};
    for (const Pair& pr : ps) {
      CAPTURE(pr.a);
      CAPTURE(pr.b);
      Model m = load_model(model_path(pr.model));
      const SymbolTable& t = m.table;
      Density a = P(m, pr.a), b = P(m, pr.b);
      int e = (parity_of(t, a) + 1) * (parity_of(t, b) + 1);
      Density want =
          scale(effective_bracket(m, b, a), Coeff(Rat(e % 2 ? 1 : -1)));
      CHECK(D(t, effective_bracket(m, a, b), want).is_zero());
    }
  }
  SUBCASE("field only functionals commute") {
    Model m = load_model(model_path("maxwell"));
    Density a = P(m, "A[mu1]*A[mu1]");
    Density b = P(m, "c*cbar");
    CHECK(effective_bracket(m, a, b).is_zero());
  }
}

TEST_CASE("the eta source rearrangement leaves the residual unchanged") {
  for (const char* name : {"scalar_phi4", "maxwell", "yang_mills"}) {
    CAPTURE(name);
    Model m = load_model(model_path(name));
    ExtendedAction plain = build_extended_action(m);
    ExtendedAction with = build_extended_action(m, true);
    Density rp = residual_eme(m, plain, plain.total).total;
    Density rw = residual_eme(m, with, with.total, false, true).total;
    CHECK(D(m.table, rw, rp).is_zero());
  }
  {
    Model m = load_model(model_path("maxwell"));
    const SymbolTable& t = m.table;
    ExtendedAction plain = build_extended_action(m);
    ExtendedAction with = build_extended_action(m, true);
    Density ghat = P(m, "c*cbar");
    Density gp = add(t, plain.total, mul(t, sym(m, m.hbar), ghat));
    Density gw = add(t, with.total, mul(t, sym(m, m.hbar), ghat));
    CHECK(D(t, residual_eme(m, with, gw, false, true).total,
            residual_eme(m, plain, gp).total)
              .is_zero());
  }
}

TEST_CASE("the loop term matches the laplacian over underived pairs") {
  Model mx = load_model(model_path("maxwell"));
  Model sc = load_model(model_path("scalar_phi4"));
  auto agree = [](const Model& m, const std::string& s) {
    Density x = P(m, s);
    Density k = kernel_contraction(m, x);
    Density l = bv_laplacian(m.table, x, m.source_pairs(), m.dim);
    return D(m.table, k, mul(m.table, make_symbol(m.table, m.gk), l))
        .is_zero();
  };
  CHECK(agree(mx, "c*c_src*b"));
  CHECK(agree(mx, "A[mu1]*A_src[mu1]"));
  CHECK(agree(mx, "c*cbar*c_src*cbar_src"));
  CHECK(agree(sc, "phi*phi*phi*phi_src"));
  SUBCASE("derivatives transfer onto the kernel") {
    Density x = P(mx, "d[mu1](c)*c_src*A[mu1]");
    Density k = kernel_contraction(mx, x);
    CHECK(D(mx.table, k, P(mx, "d[mu1](Gk)*A[mu1]")).is_zero());
    CHECK_THROWS_AS(
        bv_laplacian(mx.table, x, mx.source_pairs(), mx.dim),
        RegularityError);
  }
  SUBCASE("a color trace has no finite kernel value") {
    Model ym = load_model(model_path("yang_mills"));
    CHECK_THROWS_AS(kernel_contraction(ym, P(ym, "c[a1]*c_src[a1]")),
                    RegularityError);
  }
  SUBCASE("the seed has no coincident source pairs") {
    for (const char* name : {"scalar_phi4", "maxwell", "yang_mills"}) {
      CAPTURE(name);
      Model m = load_model(model_path(name));
      ExtendedAction e = build_extended_action(m);
      CHECK(kernel_contraction(m, e.total).is_zero());
    }
  }
}

TEST_CASE("the quantum residual at the seed is the compensator derivative") {
  for (const char* name : {"maxwell", "yang_mills"}) {
    CAPTURE(name);
    Model m = load_model(model_path(name));
    const SymbolTable& t = m.table;
    ExtendedAction e = build_extended_action(m);
    IbpReducer red(t);
    Density r = residual_msti(m, e, e.total);
    Density want = scale(
        mul(t, sym(m, m.qk), euler_lagrange(t, e.total, m.eta, {})),
        Coeff(Rat(-1)));
    CHECK(red.reduce(D(t, r, want)).is_zero());
  }
  {
    Model m = load_model(model_path("scalar_phi4"));
    ExtendedAction e = build_extended_action(m);
    CHECK(residual_msti(m, e, e.total).is_zero());
  }
  SUBCASE("removing the regulator leaves the classical pairing") {
    for (const char* name : {"maxwell", "yang_mills"}) {
      CAPTURE(name);
      Model m = load_model(model_path(name));
      const SymbolTable& t = m.table;
      ExtendedAction e = build_extended_action(m);
      Density g0 = without_regulator(m, e.total);
      Density want = without_regulator(
          m, scale(effective_bracket(m, g0, g0), Coeff(Rat(1, 2))));
      CHECK(D(t, without_regulator(m, residual_msti(m, e, e.total)), want)
                .is_zero());
    }
  }
  SUBCASE("source free functionals have no residual") {
    Model m = load_model(model_path("scalar_phi4"));
    ExtendedAction e = build_extended_action(m);
    Density g = P(m, "phi*phi*phi*phi");
    CHECK(residual_msti(m, e, g).is_zero());
  }
}

TEST_CASE("corrections couple through the squared bracket alone") {
  Model m = load_model(model_path("maxwell"));
  const SymbolTable& t = m.table;
  CHECK(consistency_condition(m, P(m, "F[mu1,mu2]*F[mu1,mu2]")).is_zero());
  Density mixed = add(t, P(m, "c*A[mu1]*A_src[mu1]"),
                      P(m, "d[mu1](A[mu2])*d[mu1](A[mu2])"));
  Density cc = consistency_condition(m, mixed);
  CHECK(!cc.is_zero());
  CHECK(D(t, cc, P(m, "-4*A[mu1]*d[mu2](d[mu2](A[mu1]))*c")).is_zero());
}

TEST_CASE("anomaly candidates sort into the three verdicts") {
  Model m = load_model(model_path("maxwell"));
  SUBCASE("exact variations are trivial") {
    Density a1 = brst(m, P(m, "A[mu1]*A[mu1]"));
    CHECK(D(m.table, a1, P(m, "2*A[mu1]*d[mu1](c)")).is_zero());
    CHECK(anomaly_first_order(m, a1, Rat(4)) == AnomalyVerdict::Trivial);
  }
  SUBCASE("the bare ghost survives as an obstruction") {
    CHECK(anomaly_first_order(m, P(m, "c"), Rat(4)) ==
          AnomalyVerdict::Nontrivial);
  }
  SUBCASE("unclosed candidates are flagged before any quotient") {
    CHECK(anomaly_first_order(m, P(m, "c*A[mu1]*A[mu1]"), Rat(4)) ==
          AnomalyVerdict::NotClosed);
  }
  SUBCASE("candidates outside the bounded basis are rejected") {
    Density big =
        P(m, "c*F[mu1,mu2]*F[mu1,mu2]*F[mu3,mu4]*F[mu3,mu4]");
    CHECK_THROWS_AS(anomaly_first_order(m, big, Rat(4)),
                    std::invalid_argument);
  }
  SUBCASE("source carrying candidates are rejected") {
    CHECK_THROWS_AS(anomaly_first_order(m, P(m, "cbar_src*b*c"), Rat(4)),
                    std::invalid_argument);
  }
  SUBCASE("verdicts agree with direct linear algebra on the whole basis") {
    MonomialBasis b0 = build_local_basis(m, 0, Rat(4));
    MonomialBasis b1 = build_local_basis(m, 1, Rat(4));
    MonomialBasis b2 = build_local_basis(m, 2, Rat(4));
    Mat m01 = s_matrix(m, b0, b1).mat;
    Mat m12 = s_matrix(m, b1, b2).mat;
    int r01 = rank(m01);
    for (int i = 0; i < static_cast<int>(b1.elems.size()); ++i) {
      CAPTURE(i);
      Density cand = normalize(m.table, Density{{b1.elems[i]}});
      AnomalyVerdict got = anomaly_first_order(m, cand, Rat(4));
      bool closed = true;
      for (int r = 0; r < m12.rows; ++r)
        if (!m12.at(r, i).is_zero()) closed = false;
      AnomalyVerdict want;
      if (!closed) {
        want = AnomalyVerdict::NotClosed;
      } else {
        Mat aug(m01.rows, m01.cols + 1);
        for (int r = 0; r < m01.rows; ++r) {
          for (int c = 0; c < m01.cols; ++c) aug.at(r, c) = m01.at(r, c);
          aug.at(r, m01.cols) = Coeff(Rat(r == i ? 1 : 0));
        }
        want = (rank(aug) == r01) ? AnomalyVerdict::Trivial
                                  : AnomalyVerdict::Nontrivial;
      }
      CHECK(got == want);
    }
  }
}

TEST_CASE("nonlinear antifield dependence is rejected") {
  Model m = load_model(model_path("maxwell"));
  int cbar = m.table.find("cbar");
  int cbar_af = m.table.find("cbar_af");
  REQUIRE(cbar >= 0);
  REQUIRE(cbar_af >= 0);
  for (GaugeRule& r : m.gauge)
    if (r.field == cbar) r.rhs = make_symbol(m.table, cbar_af);
  CHECK_THROWS_WITH_AS(
      build_extended_action(m),
      "nonlinear-in-antifields: only antifield-linear models are supported",
      std::invalid_argument);
}
