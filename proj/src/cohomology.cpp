#include "bvflow/cohomology.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "bvflow/bv.hpp"
#include "bvflow/enumerate.hpp"
#include "bvflow/functional.hpp"
#include "bvflow/io.hpp"

namespace bvflow {

namespace {

using KeyVec = std::map<std::string, Coeff>;

// Sparse echelon over monomial keys. Each row keeps its expansion in the
// columns fed to add(), so express() returns exact coordinates and names the
// first key it cannot cancel.
struct SpanSolver {
  struct Row {
    KeyVec vec;
    std::map<int, Coeff> expr;
  };
  std::map<std::string, Row> rows;

  static void axpy(KeyVec& v, const Coeff& c, const KeyVec& w) {
    for (const auto& [k, cc] : w) {
      auto it = v.find(k);
      if (it == v.end()) {
        Coeff q = c * cc;
        if (!q.is_zero()) v.emplace(k, q);
      } else {
        it->second += c * cc;
        if (it->second.is_zero()) v.erase(it);
      }
    }
  }

  static void axpy(std::map<int, Coeff>& v, const Coeff& c,
                   const std::map<int, Coeff>& w) {
    for (const auto& [k, cc] : w) {
      auto it = v.find(k);
      if (it == v.end()) {
        Coeff q = c * cc;
        if (!q.is_zero()) v.emplace(k, q);
      } else {
        it->second += c * cc;
        if (it->second.is_zero()) v.erase(it);
      }
    }
  }

  bool add(int idx, KeyVec v) {
    std::map<int, Coeff> e;
    e[idx] = Coeff(1);
    while (!v.empty()) {
      const std::string& k = v.rbegin()->first;
      Coeff c = v.rbegin()->second;
      auto it = rows.find(k);
      if (it == rows.end()) {
        Coeff inv = Coeff(1) / c;
        Row r;
        for (const auto& [kk, cc] : v) r.vec[kk] = cc * inv;
        for (const auto& [j, cc] : e) r.expr[j] = cc * inv;
        rows.emplace(k, std::move(r));
        return true;
      }
      axpy(v, -c, it->second.vec);
      axpy(e, -c, it->second.expr);
    }
    return false;
  }

  std::optional<std::map<int, Coeff>> express(KeyVec v,
                                              std::string* escape) const {
    std::map<int, Coeff> e;
    while (!v.empty()) {
      const std::string& k = v.rbegin()->first;
      Coeff c = v.rbegin()->second;
      auto it = rows.find(k);
      if (it == rows.end()) {
        if (escape) *escape = k;
        return std::nullopt;
      }
      axpy(v, -c, it->second.vec);
      axpy(e, c, it->second.expr);
    }
    return e;
  }
};

int struct_count(const SymbolTable& t, const Monomial& m) {
  int n = 0;
  for (const Factor& f : m.fs)
    if (t.at(f.sym).sector == Sector::StructConst) ++n;
  return n;
}

// Coordinates of the total-derivative normal form, recording every monomial
// key seen for later error naming.
KeyVec reduced_coords(const SymbolTable& t, IbpReducer& red, const Density& d,
                      std::map<std::string, Monomial>* registry) {
  Density r = red.reduce(d);
  KeyVec v;
  for (const Monomial& m : r.terms) {
    std::string k = monomial_key(t, m);
    v[k] += m.c;
    if (v[k].is_zero()) v.erase(k);
    if (registry && !registry->count(k)) {
      Monomial u = m;
      u.c = Coeff(1);
      registry->emplace(k, std::move(u));
    }
  }
  return v;
}

std::vector<int> basis_pool(const Model& m) {
  std::vector<int> pool;
  for (int id = 0; id < m.table.size(); ++id) {
    switch (m.table.at(id).sector) {
      case Sector::Field:
      case Sector::Ghost:
      case Sector::Antighost:
      case Sector::NlField:
      case Sector::Eta:
      case Sector::StructConst:
        pool.push_back(id);
        break;
      case Sector::RegKernel:
        // Only the cutoff insertion; the propagator kernel has negative
        // dimension and would make every basis infinite.
        if (id == m.qk) pool.push_back(id);
        break;
      default:
        break;
    }
  }
  return pool;
}

MonomialBasis build_impl(const Model& m, int ghost, const Rat& max_dim,
                         int struct_cap, std::vector<int> pool,
                         IbpReducer& red) {
  MonomialBasis b;
  b.ghost = ghost;
  b.max_dim = max_dim;
  b.struct_cap = struct_cap;
  b.generators = std::move(pool);

  SpanSolver span;
  std::map<std::string, char> seen;
  int col = 0;
  for (const auto& content :
       enumerate_contents(m.table, b.generators, ghost, max_dim)) {
    int nstruct = 0;
    Rat cdim{0};
    for (int id : content) {
      cdim += m.table.at(id).g.dim;
      if (m.table.at(id).sector == Sector::StructConst) ++nstruct;
    }
    if (nstruct > struct_cap) continue;
    Rat room = max_dim - cdim;
    int max_derivs =
        static_cast<int>(numerator(room) / denominator(room));
    for (int nd = 0; nd <= max_derivs; ++nd) {
      for (const Monomial& cand :
           enumerate_family(m.table, content, nd, {})) {
        std::string k = monomial_key(m.table, cand);
        if (seen.count(k)) continue;
        seen.emplace(k, 1);
        KeyVec v = reduced_coords(m.table, red, Density{{cand}}, nullptr);
        if (v.empty()) continue;  // a pure total derivative
        if (span.add(col, std::move(v))) {
          b.elems.push_back(cand);
          ++col;
        }
      }
    }
  }
  return b;
}

Density varied(const Model& m, const Monomial& elem, int struct_cap) {
  return capped_variation(m, Density{{elem}}, struct_cap);
}

LinearOperatorMatrix s_matrix_impl(const Model& m, const MonomialBasis& from,
                                   const MonomialBasis& to, IbpReducer& red) {
  if (to.ghost != from.ghost + 1)
    throw std::invalid_argument(
        "s_matrix: target basis must sit one ghost number above the source");
  if (to.max_dim != from.max_dim || to.struct_cap != from.struct_cap ||
      to.generators != from.generators)
    throw std::invalid_argument(
        "s_matrix: source and target bases disagree on pool or caps");

  std::map<std::string, Monomial> registry;
  SpanSolver span;
  for (size_t j = 0; j < to.elems.size(); ++j) {
    KeyVec v =
        reduced_coords(m.table, red, Density{{to.elems[j]}}, &registry);
    span.add(static_cast<int>(j), std::move(v));
  }

  LinearOperatorMatrix out;
  out.mat = Mat(static_cast<int>(to.elems.size()),
                static_cast<int>(from.elems.size()));
  for (size_t i = 0; i < from.elems.size(); ++i) {
    Density img = varied(m, from.elems[i], from.struct_cap);
    KeyVec v = reduced_coords(m.table, red, img, &registry);
    std::string escape;
    auto x = span.express(std::move(v), &escape);
    if (!x) {
      auto it = registry.find(escape);
      std::string what = it == registry.end()
                             ? escape
                             : print_density(m.table, Density{{it->second}});
      throw std::runtime_error(
          "basis is not closed under the variation: image contains " + what);
    }
    for (const auto& [j, c] : *x) out.mat.at(j, static_cast<int>(i)) = c;
  }
  return out;
}

std::vector<std::pair<int, int>> contractible_pairs(const Model& m) {
  // A rule u -> const * v with v itself inert marks (u, v) as contractible.
  auto inert = [&](int sym) {
    for (const GaugeRule& r : m.gauge)
      if (r.field == sym) return r.rhs.is_zero();
    return true;  // no rule means no variation
  };
  std::vector<std::pair<int, int>> pairs;
  for (const GaugeRule& r : m.gauge) {
    if (r.rhs.terms.size() != 1) continue;
    const Monomial& mo = r.rhs.terms[0];
    if (mo.fs.size() != 1 || !mo.deltas.empty()) continue;
    const Factor& f = mo.fs[0];
    if (!f.derivs.empty() || f.sym == r.field) continue;
    if (!inert(f.sym)) continue;
    pairs.emplace_back(r.field, f.sym);
  }
  if (m.eta >= 0 && m.qk >= 0) pairs.emplace_back(m.eta, m.qk);
  return pairs;
}

}  // namespace

MonomialBasis build_local_basis(const Model& m, int ghost, const Rat& max_dim,
                                int struct_cap) {
  IbpReducer red(m.table);
  return build_impl(m, ghost, max_dim, struct_cap, basis_pool(m), red);
}

Density capped_variation(const Model& m, const Density& d, int struct_cap) {
  Density img = brst(m, d);
  Density kept;
  for (const Monomial& t : img.terms)
    if (struct_count(m.table, t) <= struct_cap) kept.terms.push_back(t);
  return kept;
}

MonomialBasis contractible_pair_reduction(const Model& m, MonomialBasis b) {
  std::vector<char> drop(static_cast<size_t>(m.table.size()), 0);
  for (const auto& [u, v] : contractible_pairs(m)) {
    drop[static_cast<size_t>(u)] = 1;
    drop[static_cast<size_t>(v)] = 1;
  }
  std::vector<int> gens;
  for (int id : b.generators)
    if (!drop[static_cast<size_t>(id)]) gens.push_back(id);
  std::vector<Monomial> elems;
  for (const Monomial& e : b.elems) {
    bool keep = true;
    for (const Factor& f : e.fs)
      if (drop[static_cast<size_t>(f.sym)]) keep = false;
    if (keep) elems.push_back(e);
  }
  b.generators = std::move(gens);
  b.elems = std::move(elems);
  return b;
}

LinearOperatorMatrix s_matrix(const Model& m, const MonomialBasis& from,
                              const MonomialBasis& to) {
  IbpReducer red(m.table);
  return s_matrix_impl(m, from, to, red);
}

std::optional<std::vector<Coeff>> express_in_basis(const Model& m,
                                                   const MonomialBasis& b,
                                                   const Density& d) {
  IbpReducer red(m.table);
  SpanSolver span;
  for (size_t j = 0; j < b.elems.size(); ++j)
    span.add(static_cast<int>(j),
             reduced_coords(m.table, red, Density{{b.elems[j]}}, nullptr));
  auto x = span.express(reduced_coords(m.table, red, d, nullptr), nullptr);
  if (!x) return std::nullopt;
  std::vector<Coeff> out(b.elems.size());
  for (const auto& [j, c] : *x) out[static_cast<size_t>(j)] = c;
  return out;
}

LinearOperatorMatrix s_matrix(const Model& m, const MonomialBasis& from) {
  IbpReducer red(m.table);
  MonomialBasis to = build_impl(m, from.ghost + 1, from.max_dim,
                                from.struct_cap, from.generators, red);
  return s_matrix_impl(m, from, to, red);
}

CohomologyResult cohomology_at(const Model& m, int ghost, const Rat& max_dim,
                               bool drop_contractible, int struct_cap) {
  IbpReducer red(m.table);
  std::vector<int> pool = basis_pool(m);
  if (drop_contractible) {
    std::vector<char> drop(static_cast<size_t>(m.table.size()), 0);
    for (const auto& [u, v] : contractible_pairs(m)) {
      drop[static_cast<size_t>(u)] = 1;
      drop[static_cast<size_t>(v)] = 1;
    }
    std::vector<int> kept;
    for (int id : pool)
      if (!drop[static_cast<size_t>(id)]) kept.push_back(id);
    pool = std::move(kept);
  }
  MonomialBasis below = build_impl(m, ghost - 1, max_dim, struct_cap, pool, red);
  MonomialBasis at = build_impl(m, ghost, max_dim, struct_cap, pool, red);
  int n = static_cast<int>(at.elems.size());

  // The kernel never needs a spanning basis one ghost up: the raised images
  // are compared directly in reduced-key coordinates.
  std::vector<KeyVec> raised(at.elems.size());
  std::map<std::string, int> keyrow;
  for (size_t i = 0; i < at.elems.size(); ++i) {
    raised[i] = reduced_coords(m.table, red,
                               varied(m, at.elems[i], struct_cap), nullptr);
    for (const auto& [k, c] : raised[i]) keyrow.emplace(k, 0);
  }
  int nrows = 0;
  for (auto& [k, row] : keyrow) row = nrows++;
  Mat up(nrows, n);
  for (size_t i = 0; i < at.elems.size(); ++i)
    for (const auto& [k, c] : raised[i])
      up.at(keyrow[k], static_cast<int>(i)) = c;

  LinearOperatorMatrix dn = s_matrix_impl(m, below, at, red);

  std::vector<std::vector<Coeff>> kernel = null_space(up);
  int n_im = static_cast<int>(below.elems.size());
  int n_ker = static_cast<int>(kernel.size());

  Mat joint(n, n_im + n_ker);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n_im; ++j) joint.at(i, j) = dn.mat.at(i, j);
    for (int j = 0; j < n_ker; ++j)
      joint.at(i, n_im + j) = kernel[static_cast<size_t>(j)][static_cast<size_t>(i)];
  }
  std::vector<int> pivots = rref(joint);

  CohomologyResult res;
  res.kernel_dim = n_ker;
  int image_rank = 0;
  for (int p : pivots)
    if (p < n_im) ++image_rank;
  res.image_dim = image_rank;
  res.dim = res.kernel_dim - res.image_dim;
  for (int p : pivots) {
    if (p < n_im) continue;
    const std::vector<Coeff>& x = kernel[static_cast<size_t>(p - n_im)];
    Density d;
    for (int i = 0; i < n; ++i) {
      if (x[static_cast<size_t>(i)].is_zero()) continue;
      Monomial mo = at.elems[static_cast<size_t>(i)];
      mo.c = mo.c * x[static_cast<size_t>(i)];
      d.terms.push_back(std::move(mo));
    }
    res.representatives.push_back(normalize(m.table, d));
  }
  return res;
}

}  // namespace bvflow
