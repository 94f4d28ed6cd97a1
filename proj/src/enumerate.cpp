#include "bvflow/enumerate.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace bvflow {

namespace {

struct Slot {
  int factor;
  bool deriv;
  int own_pos;  // for own slots
  IndexSpace space;
};

void matchings(std::vector<int>& open, std::vector<std::pair<int, int>>& cur,
               std::vector<std::vector<std::pair<int, int>>>& out) {
  if (open.empty()) {
    out.push_back(cur);
    return;
  }
  int a = open[0];
  for (size_t j = 1; j < open.size(); ++j) {
    int b = open[j];
    std::vector<int> rest;
    for (size_t k = 1; k < open.size(); ++k)
      if (k != j) rest.push_back(open[k]);
    cur.push_back({a, b});
    matchings(rest, cur, out);
    cur.pop_back();
  }
}

// compositions of n over k bins, bins with allow=false forced to zero
void compositions(int n, const std::vector<bool>& allow, size_t at,
                  std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (at == allow.size()) {
    if (n == 0) out.push_back(cur);
    return;
  }
  int top = allow[at] ? n : 0;
  for (int v = 0; v <= top; ++v) {
    cur.push_back(v);
    compositions(n - v, allow, at + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<Monomial> enumerate_family(const SymbolTable& t,
                                       std::vector<int> content, int n_derivs,
                                       const std::vector<Idx>& frees) {
  std::sort(content.begin(), content.end());
  std::vector<bool> allow;
  for (int id : content) allow.push_back(t.at(id).jet_ok);

  std::vector<std::vector<int>> comps;
  {
    std::vector<int> cur;
    compositions(n_derivs, allow, 0, cur, comps);
  }

  std::map<std::string, Monomial> found;
  for (const std::vector<int>& comp : comps) {
    // build slot table
    std::vector<Slot> slots;
    for (size_t i = 0; i < content.size(); ++i) {
      const SymbolInfo& si = t.at(content[i]);
      for (int dd = 0; dd < comp[i]; ++dd)
        slots.push_back({static_cast<int>(i), true, -1, IndexSpace::Lorentz});
      for (int j = 0; j < si.n_lorentz; ++j)
        slots.push_back({static_cast<int>(i), false, j, IndexSpace::Lorentz});
      for (int j = 0; j < si.n_lie; ++j)
        slots.push_back(
            {static_cast<int>(i), false, si.n_lorentz + j, IndexSpace::Lie});
    }
    std::vector<int> lor_slots, lie_slots;
    for (size_t sI = 0; sI < slots.size(); ++sI)
      (slots[sI].space == IndexSpace::Lorentz ? lor_slots : lie_slots)
          .push_back(static_cast<int>(sI));

    size_t nfree = frees.size();
    if (lor_slots.size() < nfree) continue;
    if ((lor_slots.size() - nfree) % 2 || lie_slots.size() % 2) continue;

    // choose ordered placement of the free names among Lorentz slots
    std::vector<std::vector<int>> free_choices;
    {
      std::vector<int> pick;
      std::function<void(size_t)> rec = [&](size_t j) {
        if (j == nfree) {
          free_choices.push_back(pick);
          return;
        }
        for (int sI : lor_slots) {
          if (std::find(pick.begin(), pick.end(), sI) != pick.end()) continue;
          pick.push_back(sI);
          rec(j + 1);
          pick.pop_back();
        }
      };
      rec(0);
    }

    for (const std::vector<int>& fc : free_choices) {
      std::vector<int> open_lor;
      for (int sI : lor_slots)
        if (std::find(fc.begin(), fc.end(), sI) == fc.end())
          open_lor.push_back(sI);
      std::vector<std::vector<std::pair<int, int>>> match_lor, match_lie;
      {
        std::vector<std::pair<int, int>> cur;
        std::vector<int> o = open_lor;
        matchings(o, cur, match_lor);
        cur.clear();
        std::vector<int> o2 = lie_slots;
        matchings(o2, cur, match_lie);
      }
      for (const auto& ml : match_lor)
        for (const auto& ma : match_lie) {
          // assign names
          std::vector<Idx> names(slots.size(),
                                 Idx{IndexSpace::Lorentz, -1});
          for (size_t j = 0; j < nfree; ++j) names[fc[j]] = frees[j];
          int fresh = 0;
          auto bind = [&](const std::vector<std::pair<int, int>>& mm,
                          IndexSpace sp) {
            for (auto& [a, b] : mm) {
              Idx nm{sp, intern_index("#e" + std::to_string(fresh++))};
              names[a] = nm;
              names[b] = nm;
            }
          };
          bind(ml, IndexSpace::Lorentz);
          bind(ma, IndexSpace::Lie);
          // build monomial
          Monomial m;
          m.c = Coeff(1);
          m.fs.resize(content.size());
          for (size_t i = 0; i < content.size(); ++i) {
            m.fs[i].sym = content[i];
            const SymbolInfo& si = t.at(content[i]);
            m.fs[i].idx.resize(si.n_lorentz + si.n_lie);
          }
          for (size_t sI = 0; sI < slots.size(); ++sI) {
            const Slot& sl = slots[sI];
            if (sl.deriv)
              m.fs[sl.factor].derivs.push_back(names[sI]);
            else
              m.fs[sl.factor].idx[sl.own_pos] = names[sI];
          }
          Density d;
          d.terms.push_back(std::move(m));
          d = normalize(t, std::move(d));
          if (d.is_zero()) continue;
          for (Monomial& w : d.terms) {
            Coeff inv = Coeff(1) / w.c;
            Monomial rep = w;
            rep.c = Coeff(1);
            std::string key = monomial_key(t, rep);
            (void)inv;
            found.emplace(key, std::move(rep));
          }
        }
    }
  }
  std::vector<Monomial> out;
  for (auto& [k, m] : found) out.push_back(std::move(m));
  return out;
}

std::vector<std::vector<int>> enumerate_contents(const SymbolTable& t,
                                                 const std::vector<int>& pool,
                                                 int ghost,
                                                 const Rat& dim_cap) {
  // Dimension caps multiplicity for everything of positive dimension. A
  // dimension-zero generator of positive ghost number (the ghost itself) is
  // capped through the ghost balance: its surplus has to be compensated by
  // negative-ghost generators, which all cost dimension.
  Rat cheapest{0};  // cheapest dimension per unit of negative ghost
  for (int id : pool) {
    const SymbolInfo& si = t.at(id);
    if (si.g.dim == 0 && si.g.ghost < 0)
      throw std::invalid_argument(
          "basis is not finite: dimension-zero generator of negative ghost "
          "number in the pool");
    if (si.g.ghost < 0 && si.g.dim > 0) {
      Rat per = si.g.dim / Rat(-si.g.ghost);
      if (cheapest == 0 || per < cheapest) cheapest = per;
    }
  }
  int comp_max = 0;  // max compensatable ghost surplus
  if (cheapest > 0) {
    Rat q = dim_cap / cheapest;
    comp_max = static_cast<int>(numerator(q) / denominator(q));
  }

  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(size_t, int, Rat)> rec = [&](size_t at, int gh,
                                                  Rat dim) {
    if (at == pool.size()) {
      if (gh == ghost) out.push_back(cur);
      return;
    }
    const SymbolInfo& si = t.at(pool[at]);
    for (int n = 0;; ++n) {
      Rat nd = dim + Rat(n) * si.g.dim;
      int ng = gh + n * si.g.ghost;
      if (nd > dim_cap) break;
      if (si.g.dim == 0) {
        if (si.g.ghost > 0 && n > std::max(ghost, 0) + comp_max) break;
        if (si.g.ghost == 0 && n > 4) break;
      }
      for (int j = 0; j < n; ++j) cur.push_back(pool[at]);
      rec(at + 1, ng, nd);
      for (int j = 0; j < n; ++j) cur.pop_back();
    }
  };
  rec(0, 0, Rat(0));
  return out;
}

}  // namespace bvflow
