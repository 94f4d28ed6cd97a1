#include "bvflow/master.hpp"

#include <stdexcept>

#include "bvflow/cohomology.hpp"
#include "bvflow/linalg.hpp"

namespace bvflow {

namespace {

Density sym(const SymbolTable& t, int id, const std::vector<Idx>& idx = {}) {
  return make_symbol(t, id, idx);
}

Density neg(const Density& d) { return scale(d, Coeff(Rat(-1))); }

bool is_field_sector(Sector s) {
  switch (s) {
    case Sector::Field:
    case Sector::Ghost:
    case Sector::Antighost:
    case Sector::NlField:
    case Sector::Eta:
      return true;
    default:
      return false;
  }
}

int antifield_degree(const SymbolTable& t, const Monomial& mo) {
  int n = 0;
  for (const Factor& f : mo.fs)
    if (t.at(f.sym).sector == Sector::Antifield) ++n;
  return n;
}

int field_degree(const SymbolTable& t, const Monomial& mo) {
  int n = 0;
  for (const Factor& f : mo.fs)
    if (is_field_sector(t.at(f.sym).sector)) ++n;
  return n;
}

Density qk_times_eta_derivative(const Model& m, const Density& a) {
  if (count_occurrences(a, m.eta) == 0) return {};
  Density el = euler_lagrange(m.table, a, m.eta, {});
  return mul(m.table, sym(m.table, m.qk), el);
}

}  // namespace

ExtendedAction build_extended_action(const Model& m, bool with_eta_source) {
  const SymbolTable& t = m.table;
  Density action = m.brst_action();
  for (const Monomial& mo : action.terms)
    if (antifield_degree(t, mo) > 1)
      throw std::invalid_argument(
          "nonlinear-in-antifields: only antifield-linear models are "
          "supported");

  Density gauge_fixed =
      m.fermion.is_zero() ? action : gauge_fix(m, action, m.fermion);

  ExtendedAction ext;
  Density interactions;
  for (const Monomial& mo : gauge_fixed.terms) {
    if (antifield_degree(t, mo) > 0) continue;
    Density one;
    one.terms.push_back(mo);
    if (field_degree(t, mo) == 2)
      ext.i0 = add(t, ext.i0, one);
    else
      interactions = add(t, interactions, one);
  }

  for (const GaugeRule& r : m.gauge) {
    if (r.rhs.is_zero()) continue;
    ext.sigma = add(t, ext.sigma,
                    mul(t, r.rhs, sym(t, t.source_of(r.field), r.frees)));
  }
  if (with_eta_source)
    ext.sigma = add(t, ext.sigma,
                    mul(t, sym(t, m.qk), sym(t, t.source_of(m.eta))));
  ext.v = add(t, interactions, ext.sigma);

  Density quadform = m.regulator_quadform();
  Density compensator =
      antibracket(t, action, scale(quadform, Coeff(Rat(2))),
                  m.antibracket_pairs());
  ext.h_term =
      mul(t, sym(t, m.eta), scale(compensator, Coeff(Rat(1) / 2)));
  ext.q_term = neg(mul(t, sym(t, m.qk), quadform));

  ext.total = add(t, add(t, add(t, ext.i0, ext.v), ext.h_term), ext.q_term);
  return ext;
}

Density effective_bracket(const Model& m, const Density& a, const Density& b) {
  return antibracket(m.table, a, b, m.source_pairs());
}

Density script_s(const Model& m, const ExtendedAction& ext, const Density& a) {
  return add(m.table, effective_bracket(m, ext.total, a),
             qk_times_eta_derivative(m, a));
}

EmeResidual residual_eme(const Model& m, const ExtendedAction& ext,
                         const Density& gamma, bool with_free_term,
                         bool zinn_justin_form) {
  const SymbolTable& t = m.table;
  Density r = scale(effective_bracket(m, gamma, gamma), Coeff(Rat(1) / 2));
  if (!zinn_justin_form)
    r = add(t, r, qk_times_eta_derivative(m, gamma));
  if (with_free_term)
    r = add(t, r, antibracket(t, ext.i0, gamma, m.antibracket_pairs()));

  EmeResidual out;
  out.total = r;
  out.order0 = hbar_coefficient(t, r, 0);
  out.order1 = hbar_coefficient(t, r, 1);
  out.order2 = hbar_coefficient(t, r, 2);
  return out;
}

Density kernel_contraction(const Model& m, const Density& gamma) {
  const SymbolTable& t = m.table;
  std::vector<Monomial> out;
  for (auto& [phi, phis] : m.source_pairs()) {
    const SymbolInfo& si = t.at(phi);
    int w = si.g.parity ? 1 : -1;
    for (const Monomial& mo : gamma.terms) {
      for (size_t j = 0; j < mo.fs.size(); ++j) {
        if (mo.fs[j].sym != phis) continue;
        for (size_t i = 0; i < mo.fs.size(); ++i) {
          if (i == j || mo.fs[i].sym != phi) continue;
          int sign = w;
          const SymbolInfo& sj = t.at(phis);
          if (sj.g.parity)
            for (size_t q = 0; q < j; ++q)
              if (t.at(mo.fs[q].sym).g.parity) sign = -sign;
          if (si.g.parity)
            for (size_t q = 0; q < mo.fs.size(); ++q) {
              if (q == j || q >= i) continue;
              if (t.at(mo.fs[q].sym).g.parity) sign = -sign;
            }
          Monomial r;
          r.c = mo.c;
          if (sign < 0) r.c = -r.c;
          r.deltas = mo.deltas;
          for (size_t q = 0; q < mo.fs.size(); ++q)
            if (q != i && q != j) r.fs.push_back(mo.fs[q]);
          Factor kernel;
          kernel.sym = m.gk;
          kernel.derivs = mo.fs[i].derivs;
          kernel.derivs.insert(kernel.derivs.end(), mo.fs[j].derivs.begin(),
                               mo.fs[j].derivs.end());
          bool dead = false;
          for (size_t k = 0; k < mo.fs[i].idx.size(); ++k) {
            int32_t a = mo.fs[i].idx[k].id;
            int32_t b = mo.fs[j].idx[k].id;
            if (a == b) {
              if (mo.fs[i].idx[k].space == IndexSpace::Lie)
                throw RegularityError(
                    "Lie-index trace in the kernel contraction needs a group "
                    "dimension, unsupported");
              r.c = r.c * Coeff(m.dim);
              continue;
            }
            bool done = false;
            for (Factor& f : r.fs) {
              for (Idx& ix : f.derivs)
                if (!done && ix.id == b) {
                  ix.id = a;
                  done = true;
                }
              for (Idx& ix : f.idx)
                if (!done && ix.id == b) {
                  ix.id = a;
                  done = true;
                }
            }
            if (!done)
              for (Idx& ix : kernel.derivs)
                if (!done && ix.id == b) {
                  ix.id = a;
                  done = true;
                }
            if (!done) {
              dead = true;
              break;
            }
          }
          if (dead)
            throw RegularityError(
                "crossed index contraction between conjugate occurrences");
          r.fs.push_back(std::move(kernel));
          out.push_back(std::move(r));
        }
      }
    }
  }
  Density d;
  d.terms = std::move(out);
  return normalize(t, std::move(d));
}

Density residual_msti(const Model& m, const ExtendedAction& ext,
                      const Density& gamma, bool with_free_term) {
  const SymbolTable& t = m.table;
  Density r = scale(effective_bracket(m, gamma, gamma), Coeff(Rat(1) / 2));
  if (with_free_term)
    r = add(t, r, antibracket(t, ext.i0, gamma, m.antibracket_pairs()));
  Density loop = kernel_contraction(m, gamma);
  if (!loop.is_zero()) {
    loop = mul(t, mul(t, sym(t, m.hbar), sym(t, m.qk)), loop);
    r = add(t, r, scale(loop, Coeff(Rat(0), Rat(-1))));
  }
  return r;
}

Density consistency_condition(const Model& m, const Density& gamma_hat) {
  return effective_bracket(m, gamma_hat, gamma_hat);
}

Density without_regulator(const Model& m, const Density& d) {
  Density out;
  for (const Monomial& mo : d.terms) {
    bool has = false;
    for (const Factor& f : mo.fs)
      if (f.sym == m.qk) has = true;
    if (!has) out.terms.push_back(mo);
  }
  return out;
}

AnomalyVerdict anomaly_first_order(const Model& m, const Density& a1,
                                   const Rat& max_dim, int struct_cap) {
  const SymbolTable& t = m.table;
  for (const Monomial& mo : a1.terms)
    for (const Factor& f : mo.fs)
      if (t.at(f.sym).sector == Sector::Source)
        throw std::invalid_argument(
            "anomaly candidates must be source free");

  IbpReducer red(t);
  Density varied = capped_variation(m, a1, struct_cap);
  if (!red.reduce(varied).is_zero()) return AnomalyVerdict::NotClosed;

  MonomialBasis below = build_local_basis(m, 0, max_dim, struct_cap);
  MonomialBasis at = build_local_basis(m, 1, max_dim, struct_cap);
  LinearOperatorMatrix s = s_matrix(m, below, at);
  std::optional<std::vector<Coeff>> coords = express_in_basis(m, at, a1);
  if (!coords)
    throw std::invalid_argument(
        "anomaly candidate falls outside the bounded basis");
  return in_column_span(s.mat, *coords) ? AnomalyVerdict::Trivial
                                        : AnomalyVerdict::Nontrivial;
}

}  // namespace bvflow
