#include "bvflow/functional.hpp"

#include <algorithm>
#include <set>

namespace bvflow {

bool is_total_divergence(const SymbolTable& t, const Density& d) {
  if (d.is_zero()) return true;
  for (const Monomial& m : d.terms) {
    bool jet = false;
    std::map<int32_t, int> cnt;
    for (const Factor& f : m.fs) {
      if (t.at(f.sym).jet_ok) jet = true;
      for (const Idx& ix : f.derivs) ++cnt[ix.id];
      for (const Idx& ix : f.idx) ++cnt[ix.id];
    }
    // a term without jet content integrates to itself, never to a boundary
    if (!jet) return false;
    for (auto& [id, n] : cnt)
      if (n != 2)
        throw IndexError("divergence test requires a scalar density, index " +
                         index_name(id) + " is free");
  }
  std::set<int> syms;
  for (const Monomial& m : d.terms)
    for (const Factor& f : m.fs)
      if (t.at(f.sym).jet_ok) syms.insert(f.sym);
  static int probe = 0;
  for (int sym : syms) {
    const SymbolInfo& si = t.at(sym);
    std::vector<Idx> frees;
    for (int j = 0; j < si.n_lorentz + si.n_lie; ++j)
      frees.push_back(Idx{j < si.n_lorentz ? IndexSpace::Lorentz
                                           : IndexSpace::Lie,
                          intern_index("#t" + std::to_string(probe++))});
    if (!euler_lagrange(t, d, sym, frees).is_zero()) return false;
  }
  return true;
}

std::string IbpReducer::family_key(const SymbolTable& t, const Monomial& m) {
  std::vector<int> syms;
  int nd = 0;
  for (const Factor& f : m.fs) {
    syms.push_back(f.sym);
    nd += static_cast<int>(f.derivs.size());
  }
  std::sort(syms.begin(), syms.end());
  std::string k = std::to_string(nd);
  for (int s : syms) k += "," + std::to_string(s);
  (void)t;
  return k;
}

const IbpReducer::Family& IbpReducer::family_for(const Monomial& m) {
  std::string key = family_key(*t_, m);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;

  Family fam;
  std::vector<int> content;
  int nd = 0;
  for (const Factor& f : m.fs) {
    content.push_back(f.sym);
    nd += static_cast<int>(f.derivs.size());
  }
  fam.basis = enumerate_family(*t_, content, nd, {});
  std::sort(fam.basis.begin(), fam.basis.end(),
            [&](const Monomial& a, const Monomial& b) {
              return monomial_key(*t_, a) > monomial_key(*t_, b);
            });
  for (size_t i = 0; i < fam.basis.size(); ++i)
    fam.index_of[monomial_key(*t_, fam.basis[i])] = static_cast<int>(i);

  if (nd > 0) {
    Idx nu{IndexSpace::Lorentz, intern_index("#ibp")};
    std::vector<Monomial> pre = enumerate_family(*t_, content, nd - 1, {nu});
    int ncols = static_cast<int>(fam.basis.size());
    for (const Monomial& p : pre) {
      Density dp;
      dp.terms.push_back(p);
      Density row_d = normalize(*t_, derivative_raw(*t_, nu, dp));
      if (row_d.is_zero()) continue;
      std::vector<Coeff> row(ncols);
      bool ok = true;
      for (const Monomial& w : row_d.terms) {
        auto jt = fam.index_of.find(monomial_key(*t_, w));
        if (jt == fam.index_of.end()) {
          ok = false;
          break;
        }
        row[jt->second] += w.c;
      }
      if (!ok)
        throw std::logic_error(
            "total derivative escaped its monomial family");
      // eliminate against existing rows, then install if independent
      for (size_t r = 0; r < fam.rows.size(); ++r) {
        const Coeff& c = row[fam.pivot[r]];
        if (c.is_zero()) continue;
        Coeff f = c;
        for (int j = 0; j < ncols; ++j)
          row[j] = row[j] - f * fam.rows[r][j];
      }
      int pv = -1;
      for (int j = 0; j < ncols; ++j)
        if (!row[j].is_zero()) {
          pv = j;
          break;
        }
      if (pv < 0) continue;
      Coeff inv = Coeff(1) / row[pv];
      for (int j = 0; j < ncols; ++j) row[j] = row[j] * inv;
      // back-substitute so every row is clean at every pivot
      for (size_t r = 0; r < fam.rows.size(); ++r) {
        const Coeff& c = fam.rows[r][pv];
        if (c.is_zero()) continue;
        Coeff f = c;
        for (int j = 0; j < ncols; ++j)
          fam.rows[r][j] = fam.rows[r][j] - f * row[j];
      }
      fam.rows.push_back(std::move(row));
      fam.pivot.push_back(pv);
    }
  }
  return cache_.emplace(std::move(key), std::move(fam)).first->second;
}

Density IbpReducer::reduce(const Density& din) {
  Density d = normalize(*t_, din);
  std::map<std::string, std::vector<Monomial>> groups;
  for (const Monomial& m : d.terms) {
    std::map<int32_t, int> cnt;
    for (const Factor& f : m.fs) {
      for (const Idx& ix : f.derivs) ++cnt[ix.id];
      for (const Idx& ix : f.idx) ++cnt[ix.id];
    }
    for (auto& [id, n] : cnt)
      if (n != 2)
        throw IndexError("reduction requires a scalar density, index " +
                         index_name(id) + " is free");
    groups[family_key(*t_, m)].push_back(m);
  }

  Density out;
  for (auto& [key, ms] : groups) {
    const Family& fam = family_for(ms[0]);
    int ncols = static_cast<int>(fam.basis.size());
    std::vector<Coeff> v(ncols);
    for (const Monomial& m : ms) {
      auto it = fam.index_of.find(monomial_key(*t_, m));
      if (it == fam.index_of.end())
        throw std::logic_error("monomial missing from its family");
      v[it->second] += m.c;
    }
    for (size_t r = 0; r < fam.rows.size(); ++r) {
      const Coeff& c = v[fam.pivot[r]];
      if (c.is_zero()) continue;
      Coeff f = c;
      for (int j = 0; j < ncols; ++j) v[j] = v[j] - f * fam.rows[r][j];
    }
    for (int j = 0; j < ncols; ++j) {
      if (v[j].is_zero()) continue;
      Monomial m = fam.basis[j];
      m.c = v[j];
      out.terms.push_back(std::move(m));
    }
  }
  return normalize(*t_, std::move(out));
}

bool IbpReducer::equivalent(const Density& a, const Density& b) {
  return reduce(add(*t_, a, scale(b, Coeff(-1)))).is_zero();
}

}  // namespace bvflow
