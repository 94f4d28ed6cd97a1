#pragma once

#include "bvflow/bv.hpp"
#include "bvflow/functional.hpp"
#include "bvflow/model.hpp"

namespace bvflow {

// Classical seed of the regulated effective theory, assembled from the
// gauge-fixed action with every antifield replaced by the conjugate source.
// The pieces satisfy, with I the antifield action and the bracket over
// antifield pairs,
//   {I, sigma chi - 1/2 eta chi^2} = sigma + h_term + q_term ,
// and the seed solves the regulated master equation: residual_eme on total
// vanishes modulo total derivatives.
struct ExtendedAction {
  Density i0;      // antifield-free quadratic part of the gauge-fixed action
  Density v;       // remaining field self-interactions plus sigma
  Density sigma;   // source terms: sum over gauge rules of rhs * source
  Density h_term;  // 1/2 eta {I, chi^2}, the regulator compensator
  Density q_term;  // -1/2 qk chi^2
  Density total;   // i0 + v + h_term + q_term
};

// Builds the seed from the model's gauge-fixed action. with_eta_source adds
// the qk * eta_src term that trades the explicit qk d/d eta piece of the
// residual for the (eta, eta_src) pair, so the residual takes the plain
// Zinn-Justin shape. Models whose action is quadratic or higher in the
// antifields are rejected with "nonlinear-in-antifields".
ExtendedAction build_extended_action(const Model& m,
                                     bool with_eta_source = false);

// Odd bracket over the (generator, source) pairs. The sources are conjugate
// to their generators with the source in the left slot:
// (sigma_A, phi^B) = delta_A^B and (phi^B, sigma_A) = -delta_A^B.
Density effective_bracket(const Model& m, const Density& a, const Density& b);

// S a = (total, a) + qk dA/d eta. Restricted to source-free densities this
// agrees with the brst derivation, so its cohomology is computed by the
// quotient machinery. Squares to zero modulo total derivatives whenever the
// seed solves the regulated master equation.
Density script_s(const Model& m, const ExtendedAction& ext, const Density& a);

// Residual of the regulated master equation, split by powers of hbar. For a
// functional gamma = total + hbar * correction the orders are the classical
// residual (zero for a valid seed), the linearized operator applied to the
// correction, and half the self-bracket of the correction.
struct EmeResidual {
  Density total;
  Density order0, order1, order2;  // hbar coefficients of total
  bool is_zero() const { return total.is_zero(); }
};

// 1/2 (gamma, gamma) + qk d gamma/d eta. with_free_term restores the
// Koszul piece {i0, gamma} over antifield pairs, which vanishes identically
// on functionals free of antifields. zinn_justin_form drops the explicit qk
// term; gamma must then carry the qk * eta_src piece instead.
EmeResidual residual_eme(const Model& m, const ExtendedAction& ext,
                         const Density& gamma, bool with_free_term = false,
                         bool zinn_justin_form = false);

// Residual of the regulated Slavnov-Taylor identity with the loop term kept
// as a formal kernel: 1/2 (gamma, gamma) - i hbar qk Gk-contraction, where
// the contraction is the source-pair Laplacian with the coincidence delta
// replaced by the smooth kernel symbol, derivative transfers landing on the
// kernel. Dropping every qk monomial leaves the Zinn-Justin residual.
Density residual_msti(const Model& m, const ExtendedAction& ext,
                      const Density& gamma, bool with_free_term = false);

// The second variation of gamma contracted over the source pairs against
// the kernel symbol. Exposed for oracle checks of the loop term.
Density kernel_contraction(const Model& m, const Density& gamma);

// (gamma_hat, gamma_hat): the quadratic admissibility constraint on the
// correction. Vanishes whenever gamma_hat is source independent.
Density consistency_condition(const Model& m, const Density& gamma_hat);

// Drops every monomial carrying the regulator kernel qk.
Density without_regulator(const Model& m, const Density& d);

enum class AnomalyVerdict { Trivial, Nontrivial, NotClosed };

// First-order anomaly test on a source-free ghost-one density: NotClosed if
// the capped variation is not a total derivative, otherwise Trivial exactly
// when the candidate lies in the image of the variation on the ghost-zero
// basis bounded by max_dim.
AnomalyVerdict anomaly_first_order(const Model& m, const Density& a1,
                                   const Rat& max_dim, int struct_cap = 2);

}  // namespace bvflow
