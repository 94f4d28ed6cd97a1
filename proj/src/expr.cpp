#include "bvflow/expr.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

namespace bvflow {

namespace {

void append_i32(std::string& s, int32_t v) {
  // big-endian so lexicographic byte order matches numeric order
  for (int shift = 24; shift >= 0; shift -= 8)
    s.push_back(static_cast<char>((v >> shift) & 0xff));
}

std::string factor_key(const SymbolTable& t, const Factor& f) {
  std::string s;
  // constant sectors sort before field content for readable canonical forms
  s.push_back(is_constant_sector(t.at(f.sym).sector) ? 0 : 1);
  append_i32(s, f.sym);
  append_i32(s, static_cast<int32_t>(f.derivs.size()));
  for (const Idx& d : f.derivs) append_i32(s, d.id);
  for (const Idx& d : f.idx) append_i32(s, d.id);
  return s;
}

struct SlotRef {
  int factor;   // -1: none
  bool in_derivs;
  int pos;
};

// All index slots of a monomial in a fixed scan order.
void for_each_slot(Monomial& m, const std::function<void(Idx&)>& fn) {
  for (Factor& f : m.fs) {
    for (Idx& d : f.derivs) fn(d);
    for (Idx& d : f.idx) fn(d);
  }
}

void for_each_slot_c(const Monomial& m, const std::function<void(const Idx&)>& fn) {
  for (const Factor& f : m.fs) {
    for (const Idx& d : f.derivs) fn(d);
    for (const Idx& d : f.idx) fn(d);
  }
}

void validate_monomial(const SymbolTable& t, const Monomial& m) {
  for (const Factor& f : m.fs) {
    if (f.sym < 0 || f.sym >= t.size())
      throw IndexError("unknown generator id in monomial");
    const SymbolInfo& si = t.at(f.sym);
    if (static_cast<int>(f.idx.size()) != si.n_lorentz + si.n_lie)
      throw IndexError("wrong index count on " + si.name);
    for (int j = 0; j < static_cast<int>(f.idx.size()); ++j) {
      IndexSpace want =
          j < si.n_lorentz ? IndexSpace::Lorentz : IndexSpace::Lie;
      if (f.idx[j].space != want)
        throw IndexError("index space mismatch on " + si.name);
    }
    for (const Idx& d : f.derivs)
      if (d.space != IndexSpace::Lorentz)
        throw IndexError("non-Lorentz derivative index on " + si.name);
    if (!si.jet_ok && !f.derivs.empty())
      throw IndexError("derivative applied to constant generator " + si.name);
  }
  std::map<int32_t, int> count;
  std::map<int32_t, IndexSpace> space_of;
  for_each_slot_c(m, [&](const Idx& d) {
    auto it = space_of.find(d.id);
    if (it != space_of.end() && it->second != d.space)
      throw IndexError("index " + index_name(d.id) +
                       " used in two different index spaces");
    space_of[d.id] = d.space;
    ++count[d.id];
  });
  for (auto& [id, n] : count)
    if (n > 2)
      throw IndexError("index " + index_name(id) +
                       " appears more than twice");
}

int factor_parity(const SymbolTable& t, const Factor& f) {
  return t.at(f.sym).g.parity;
}

// Sort own antisymmetric index blocks ascending, tracking the sign.
// Returns false when a repeated index makes the factor vanish.
bool sort_antisym(const SymbolTable& t, Factor& f, int& sign) {
  const SymbolInfo& si = t.at(f.sym);
  if (!si.antisym || si.n_lie < 2) return true;
  auto begin = f.idx.begin() + si.n_lorentz;
  auto end = f.idx.end();
  for (auto i = begin; i != end; ++i)
    for (auto j = i + 1; j != end; ++j) {
      if (j->id == i->id) return false;
      if (j->id < i->id) {
        std::iter_swap(i, j);
        sign = -sign;
      }
    }
  return true;
}

struct CanonResult {
  Monomial m;        // canonical representative (empty coeff handled outside)
  std::string key;   // encoding of m.fs
  bool zero = false;
};

// Orbit minimization over dummy relabelings. Free indices stay fixed. For
// each assignment the slot orders and the factor order become well defined;
// the minimal encoding wins. A minimal encoding reachable with both signs
// means the monomial equals minus itself.
CanonResult canonicalize_monomial(const SymbolTable& t, Monomial m) {
  CanonResult out;
  validate_monomial(t, m);

  // coincident-point residues
  int n_delta = 0;
  for (const DeltaFactor& df : m.deltas) {
    if (df.deriv_order > 0)
      throw RegularityError(
          "regularity violation: derivative acting on a coincident-point "
          "contraction");
    ++n_delta;
  }
  if (n_delta >= 2)
    throw RegularityError(
        "singular contraction: product of coincident-point deltas");
  m.deltas.clear();

  std::map<int32_t, int> count;
  for_each_slot(m, [&](Idx& d) { ++count[d.id]; });
  std::vector<int32_t> dum_lor, dum_lie;
  for_each_slot(m, [&](Idx& d) {
    if (count[d.id] != 2) return;
    auto& v = d.space == IndexSpace::Lorentz ? dum_lor : dum_lie;
    if (std::find(v.begin(), v.end(), d.id) == v.end()) v.push_back(d.id);
  });
  std::sort(dum_lor.begin(), dum_lor.end());
  std::sort(dum_lie.begin(), dum_lie.end());
  int nl = static_cast<int>(dum_lor.size());
  int na = static_cast<int>(dum_lie.size());
  if (nl > max_canonical_dummies() || na > max_canonical_dummies())
    throw IndexError("too many contracted index pairs");

  // canonical target labels, skipping pool names that occur free
  std::set<int32_t> free_ids;
  for (auto& [id, n] : count)
    if (n == 1) free_ids.insert(id);
  auto make_labels = [&](IndexSpace sp, int need) {
    std::vector<Idx> v;
    for (int pos = 0; static_cast<int>(v.size()) < need; ++pos) {
      Idx c = canonical_dummy(sp, pos);
      if (!free_ids.count(c.id)) v.push_back(c);
    }
    return v;
  };
  std::vector<Idx> lab_lor = make_labels(IndexSpace::Lorentz, nl);
  std::vector<Idx> lab_lie = make_labels(IndexSpace::Lie, na);

  bool have_best = false;
  std::string best_key;
  Monomial best_m;
  int best_sign = 1;

  std::vector<int> pl(nl), pa(na);
  for (int i = 0; i < nl; ++i) pl[i] = i;
  for (int i = 0; i < na; ++i) pa[i] = i;

  auto try_assignment = [&](const std::vector<int>& al,
                            const std::vector<int>& aa) -> bool {
    // returns false when monomial proven zero
    std::map<int32_t, Idx> rel;
    for (int i = 0; i < nl; ++i) rel[dum_lor[i]] = lab_lor[al[i]];
    for (int i = 0; i < na; ++i) rel[dum_lie[i]] = lab_lie[aa[i]];
    Monomial w = m;
    for_each_slot(w, [&](Idx& d) {
      auto it = rel.find(d.id);
      if (it != rel.end()) d = it->second;
    });
    int sign = 1;
    for (Factor& f : w.fs) {
      std::sort(f.derivs.begin(), f.derivs.end());
      if (!sort_antisym(t, f, sign)) return false;
    }
    // stable sort by factor key; Koszul sign from the induced permutation of
    // the odd factors
    int n = static_cast<int>(w.fs.size());
    std::vector<std::pair<std::string, int>> keyed(n);
    for (int i = 0; i < n; ++i) keyed[i] = {factor_key(t, w.fs[i]), i};
    std::stable_sort(keyed.begin(), keyed.end());
    std::vector<int> odd_seq;
    for (auto& [k, i] : keyed)
      if (factor_parity(t, w.fs[i])) odd_seq.push_back(i);
    for (size_t i = 0; i < odd_seq.size(); ++i)
      for (size_t j = i + 1; j < odd_seq.size(); ++j)
        if (odd_seq[i] > odd_seq[j]) sign = -sign;
    std::vector<Factor> sorted;
    sorted.reserve(n);
    for (auto& [k, i] : keyed) sorted.push_back(w.fs[i]);
    for (int i = 0; i + 1 < n; ++i)
      if (keyed[i].first == keyed[i + 1].first &&
          factor_parity(t, sorted[i]))
        return false;  // identical odd factors
    w.fs = std::move(sorted);
    std::string key;
    for (const Factor& f : w.fs) key += factor_key(t, f);
    if (!have_best || key < best_key) {
      have_best = true;
      best_key = key;
      best_m = w;
      best_sign = sign;
    } else if (key == best_key && sign != best_sign) {
      return false;  // odd self-symmetry
    }
    return true;
  };

  // The minimum over label bijections is reached on a first-encounter
  // labeling of some factor arrangement, provided every canonical label
  // compares below every free name of the same space; then factors with
  // different label-blind skeletons have a label-independent relative order,
  // and only permutations inside equal-skeleton groups, orderings of
  // antisymmetric blocks, and orderings of dummy derivatives on one factor
  // can change the outcome. Free names drawn from the canonical pool break
  // the premise; the exhaustive orbit handles that case.
  bool interleaved = false;
  {
    int32_t maxl_lor = nl ? lab_lor[nl - 1].id : -1;
    int32_t maxl_lie = na ? lab_lie[na - 1].id : -1;
    for (int32_t fid : free_ids) {
      IndexSpace sp = IndexSpace::Lorentz;
      for_each_slot(m, [&](Idx& d) {
        if (d.id == fid) sp = d.space;
      });
      if (sp == IndexSpace::Lorentz ? fid < maxl_lor : fid < maxl_lie)
        interleaved = true;
    }
  }

  bool proven_zero = false;
  if (!interleaved && nl + na > 0) {
    auto skeleton = [&](const Factor& f) {
      std::string s;
      s.push_back(is_constant_sector(t.at(f.sym).sector) ? 0 : 1);
      append_i32(s, f.sym);
      append_i32(s, static_cast<int32_t>(f.derivs.size()));
      std::vector<int32_t> dv;
      for (const Idx& d : f.derivs)
        dv.push_back(count[d.id] == 2 ? 0 : d.id);
      std::sort(dv.begin(), dv.end());
      for (int32_t v : dv) append_i32(s, v);
      for (const Idx& d : f.idx)
        append_i32(s, count[d.id] == 2 ? 0 : d.id);
      return s;
    };
    int n = static_cast<int>(m.fs.size());
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::vector<std::string> skel(n);
    for (int i = 0; i < n; ++i) skel[i] = skeleton(m.fs[i]);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return skel[a] < skel[b]; });

    // choice slots: equal-skeleton runs, dummy derivative lists, antisym
    // index blocks; each contributes the permutations of one id list
    struct Choice {
      enum Kind { Group, Derivs, Block } kind;
      int at;                  // run start in `order`, or factor position
      std::vector<int> items;  // run positions or slot positions, permuted
    };
    std::vector<Choice> choices;
    double cand = 1;
    for (int i = 0; i < n;) {
      int j = i;
      while (j < n && skel[order[j]] == skel[order[i]]) ++j;
      if (j - i > 1) {
        Choice c{Choice::Group, i, {}};
        for (int k = i; k < j; ++k) c.items.push_back(order[k]);
        for (int k = 2; k <= j - i; ++k) cand *= k;
        choices.push_back(std::move(c));
      }
      i = j;
    }
    for (int i = 0; i < n; ++i) {
      const Factor& f = m.fs[i];
      std::vector<int> dpos;
      for (int p = 0; p < static_cast<int>(f.derivs.size()); ++p)
        if (count[f.derivs[p].id] == 2) dpos.push_back(p);
      if (dpos.size() > 1) {
        for (int k = 2; k <= static_cast<int>(dpos.size()); ++k) cand *= k;
        choices.push_back(Choice{Choice::Derivs, i, std::move(dpos)});
      }
      const SymbolInfo& si = t.at(f.sym);
      if (si.antisym && si.n_lie > 1) {
        std::vector<int> bpos;
        for (int p = si.n_lorentz; p < static_cast<int>(f.idx.size()); ++p)
          bpos.push_back(p);
        for (int k = 2; k <= static_cast<int>(bpos.size()); ++k) cand *= k;
        choices.push_back(Choice{Choice::Block, i, std::move(bpos)});
      }
    }
    if (cand > 2.5e6) throw IndexError("canonicalization orbit too large");

    std::map<int, int> derivs_choice, block_choice;  // factor -> choice index
    for (size_t ci = 0; ci < choices.size(); ++ci) {
      if (choices[ci].kind == Choice::Derivs)
        derivs_choice[choices[ci].at] = static_cast<int>(ci);
      else if (choices[ci].kind == Choice::Block)
        block_choice[choices[ci].at] = static_cast<int>(ci);
    }

    std::map<int32_t, int> pos_lor, pos_lie;
    for (int i = 0; i < nl; ++i) pos_lor[dum_lor[i]] = i;
    for (int i = 0; i < na; ++i) pos_lie[dum_lie[i]] = i;
    std::set<std::vector<int>> seen;

    std::function<bool(size_t)> enumerate = [&](size_t ci) -> bool {
      if (ci < choices.size()) {
        std::vector<int> items = choices[ci].items;
        std::sort(items.begin(), items.end());
        do {
          choices[ci].items = items;
          if (!enumerate(ci + 1)) return false;
        } while (std::next_permutation(items.begin(), items.end()));
        return true;
      }
      // materialize the scan order and first-encounter label the dummies
      std::vector<int> scan = order;
      for (const Choice& c : choices)
        if (c.kind == Choice::Group)
          for (size_t k = 0; k < c.items.size(); ++k)
            scan[c.at + k] = c.items[k];
      std::vector<int> al(nl, -1), aa(na, -1);
      int next_l = 0, next_a = 0;
      auto touch = [&](const Idx& d) {
        if (count[d.id] != 2) return;
        if (d.space == IndexSpace::Lorentz) {
          int& slot = al[pos_lor[d.id]];
          if (slot < 0) slot = next_l++;
        } else {
          int& slot = aa[pos_lie[d.id]];
          if (slot < 0) slot = next_a++;
        }
      };
      for (int fi : scan) {
        const Factor& f = m.fs[fi];
        auto dit = derivs_choice.find(fi);
        if (dit != derivs_choice.end()) {
          for (int p : choices[dit->second].items) touch(f.derivs[p]);
        } else {
          for (const Idx& d : f.derivs) touch(d);
        }
        const SymbolInfo& si = t.at(f.sym);
        for (int p = 0; p < si.n_lorentz; ++p) touch(f.idx[p]);
        auto bit = block_choice.find(fi);
        if (bit != block_choice.end()) {
          for (int p : choices[bit->second].items) touch(f.idx[p]);
        } else {
          for (int p = si.n_lorentz; p < static_cast<int>(f.idx.size()); ++p)
            touch(f.idx[p]);
        }
      }
      std::vector<int> fused = al;
      fused.insert(fused.end(), aa.begin(), aa.end());
      if (!seen.insert(std::move(fused)).second) return true;
      return try_assignment(al, aa);
    };
    if (!enumerate(0)) proven_zero = true;
  } else {
    double orbit = 1;
    for (int i = 2; i <= nl; ++i) orbit *= i;
    for (int i = 2; i <= na; ++i) orbit *= i;
    if (orbit > 2.5e6) throw IndexError("canonicalization orbit too large");
    std::vector<int> al = pl;
    bool stop = false;
    do {
      std::vector<int> aa = pa;
      do {
        if (!try_assignment(al, aa)) {
          stop = true;
          break;
        }
      } while (std::next_permutation(aa.begin(), aa.end()));
    } while (!stop && std::next_permutation(al.begin(), al.end()));
    proven_zero = stop;
  }

  if (proven_zero) {
    out.zero = true;
    return out;
  }
  best_m.c = m.c;
  if (best_sign < 0) best_m.c = -best_m.c;
  out.m = std::move(best_m);
  out.key = std::move(best_key);
  return out;
}

// Reduction of structure constant products modulo the Jacobi identity.
//
// Rewriting one canonical monomial by pattern is not sound here: factors
// attached to the pair (ghost cubes, field products) can relabel a reducible
// wiring into an irreducible one, hiding combinations that vanish. Instead a
// monomial holding two or more structure constants is reduced against the
// relation system of its whole rewiring family: every three term identity
// reachable from it, each term canonicalized, the rows kept in reduced
// echelon form with the largest key as pivot. Reduced echelon form of a row
// space is unique, so the expansion depends only on the monomial and is
// cached by canonical key.

std::vector<int> struct_const_positions(const SymbolTable& t,
                                        const Monomial& m) {
  std::vector<int> fpos;
  for (int i = 0; i < static_cast<int>(m.fs.size()); ++i)
    if (t.at(m.fs[i].sym).antisym && t.at(m.fs[i].sym).n_lie == 3)
      fpos.push_back(i);
  return fpos;
}

// pivot key -> expansion in non-pivot keys, meaning [pivot] == sum(row)
using JacRows = std::map<std::string, std::map<std::string, Coeff>>;

void jac_reduce(const JacRows& ech, std::map<std::string, Coeff>& v) {
  for (;;) {
    auto hit = v.end();
    for (auto it = v.begin(); it != v.end(); ++it)
      if (!it->second.is_zero() && ech.count(it->first)) hit = it;
    if (hit == v.end()) break;
    Coeff c = hit->second;
    const auto& rep = ech.at(hit->first);
    v.erase(hit);
    for (const auto& [k, rc] : rep) v[k] += c * rc;
  }
  for (auto it = v.begin(); it != v.end();)
    it = it->second.is_zero() ? v.erase(it) : std::next(it);
}

void jac_insert(JacRows& ech, std::map<std::string, Coeff> v) {
  jac_reduce(ech, v);
  if (v.empty()) return;
  auto pit = std::prev(v.end());
  std::string pkey = pit->first;
  Coeff pc = pit->second;
  v.erase(pit);
  std::map<std::string, Coeff> rep;
  for (const auto& [k, c] : v) rep[k] = -(c / pc);
  for (auto& [k0, row] : ech) {
    auto f = row.find(pkey);
    if (f == row.end()) continue;
    Coeff c0 = f->second;
    row.erase(f);
    for (const auto& [k, rc] : rep) row[k] += c0 * rc;
    for (auto it = row.begin(); it != row.end();)
      it = it->second.is_zero() ? row.erase(it) : std::next(it);
  }
  ech.emplace(std::move(pkey), std::move(rep));
}

struct JacExpansion {
  // basis monomials with coefficients for a unit coefficient input
  std::vector<std::pair<std::string, Monomial>> terms;
};

const JacExpansion& jacobi_expansion(const SymbolTable& t,
                                     const CanonResult& in) {
  static std::map<std::string, JacExpansion> cache;
  auto hit = cache.find(in.key);
  if (hit != cache.end()) return hit->second;

  std::map<std::string, Monomial> family;
  std::set<std::string> explored;
  JacRows ech;
  Monomial base = in.m;
  base.c = Coeff(1);
  family.emplace(in.key, std::move(base));
  std::vector<std::string> work{in.key};
  size_t guard = 0;
  while (!work.empty()) {
    if (++guard > 20000)
      throw std::runtime_error("structure constant closure did not terminate");
    std::string k = std::move(work.back());
    work.pop_back();
    if (!explored.insert(k).second) continue;
    Monomial K = family.at(k);
    std::vector<int> fpos = struct_const_positions(t, K);
    for (size_t x = 0; x < fpos.size(); ++x)
      for (size_t y = x + 1; y < fpos.size(); ++y) {
        const Factor& f1 = K.fs[fpos[x]];
        const Factor& f2 = K.fs[fpos[y]];
        std::vector<int32_t> shared;
        for (const Idx& i1 : f1.idx)
          for (const Idx& i2 : f2.idx)
            if (i1.id == i2.id) shared.push_back(i1.id);
        for (int32_t e : shared) {
          std::vector<int32_t> r1, r2;
          for (const Idx& i : f1.idx)
            if (i.id != e) r1.push_back(i.id);
          for (const Idx& i : f2.idx)
            if (i.id != e) r2.push_back(i.id);
          if (r1.size() != 2 || r2.size() != 2) continue;
          // f[e,a,b] f[e,c,d] + f[e,b,c] f[e,a,d] + f[e,c,a] f[e,b,d] = 0,
          // valid however a, b, c, d are wired to the rest of the monomial
          const int32_t a = r1[0], b = r1[1], c = r2[0], d = r2[1];
          const int32_t pat[3][4] = {
              {a, b, c, d}, {b, c, a, d}, {c, a, b, d}};
          std::map<std::string, Coeff> row;
          for (const auto& p : pat) {
            Monomial w = K;
            w.c = Coeff(1);
            IndexSpace sp = IndexSpace::Lie;
            w.fs[fpos[x]].idx = {Idx{sp, e}, Idx{sp, p[0]}, Idx{sp, p[1]}};
            w.fs[fpos[y]].idx = {Idx{sp, e}, Idx{sp, p[2]}, Idx{sp, p[3]}};
            CanonResult cr = canonicalize_monomial(t, std::move(w));
            if (cr.zero || cr.m.c.is_zero()) continue;
            row[cr.key] += cr.m.c;
            if (!family.count(cr.key)) {
              Monomial u = cr.m;
              u.c = Coeff(1);
              family.emplace(cr.key, std::move(u));
            }
            if (!explored.count(cr.key)) work.push_back(cr.key);
          }
          for (auto it = row.begin(); it != row.end();)
            it = it->second.is_zero() ? row.erase(it) : std::next(it);
          if (!row.empty()) jac_insert(ech, std::move(row));
        }
      }
  }

  const JacExpansion* out = nullptr;
  for (const auto& [k, fm] : family) {
    std::map<std::string, Coeff> v;
    v[k] = Coeff(1);
    jac_reduce(ech, v);
    JacExpansion ex;
    for (const auto& [k2, c] : v) {
      Monomial mm = family.at(k2);
      mm.c = c;
      ex.terms.emplace_back(k2, std::move(mm));
    }
    auto [it, fresh] = cache.emplace(k, std::move(ex));
    (void)fresh;
    if (k == in.key) out = &it->second;
  }
  return *out;
}

}  // namespace

Density make_const(const SymbolTable&, Coeff c) {
  Density d;
  if (!c.is_zero()) d.terms.push_back(Monomial{std::move(c), {}, {}});
  return d;
}

Density make_symbol(const SymbolTable& t, int sym, std::vector<Idx> idx) {
  const SymbolInfo& si = t.at(sym);
  if (static_cast<int>(idx.size()) != si.n_lorentz + si.n_lie)
    throw IndexError("wrong index count for " + si.name);
  Density d;
  d.terms.push_back(Monomial{Coeff(1), {Factor{sym, {}, std::move(idx)}}, {}});
  return d;
}

Density normalize(const SymbolTable& t, Density d) {
  std::map<std::string, std::pair<Coeff, Monomial>> acc;
  std::vector<Monomial> work = std::move(d.terms);
  int guard = 0;
  while (!work.empty()) {
    if (++guard > 200000)
      throw std::runtime_error("normalization did not terminate");
    Monomial m = std::move(work.back());
    work.pop_back();
    if (m.c.is_zero()) continue;
    CanonResult cr = canonicalize_monomial(t, std::move(m));
    if (cr.zero || cr.m.c.is_zero()) continue;
    if (struct_const_positions(t, cr.m).size() >= 2) {
      const JacExpansion& ex = jacobi_expansion(t, cr);
      for (const auto& [k, em] : ex.terms) {
        Coeff c = cr.m.c * em.c;
        auto it = acc.find(k);
        if (it == acc.end()) {
          Monomial mm = em;
          acc.emplace(k, std::make_pair(c, std::move(mm)));
        } else {
          it->second.first += c;
        }
      }
      continue;
    }
    auto it = acc.find(cr.key);
    if (it == acc.end())
      acc.emplace(std::move(cr.key),
                  std::make_pair(cr.m.c, std::move(cr.m)));
    else
      it->second.first += cr.m.c;
  }
  Density out;
  for (auto& [key, pr] : acc) {
    if (pr.first.is_zero()) continue;
    pr.second.c = pr.first;
    out.terms.push_back(std::move(pr.second));
  }
  return out;
}

Density add(const SymbolTable& t, const Density& a, const Density& b) {
  Density d = a;
  d.terms.insert(d.terms.end(), b.terms.begin(), b.terms.end());
  return normalize(t, std::move(d));
}

Density scale(const Density& a, const Coeff& c) {
  if (c.is_zero()) return Density{};
  Density d = a;
  for (Monomial& m : d.terms) m.c *= c;
  return d;
}

namespace {

std::vector<Monomial> raw_mul_terms(const Density& a, const Density& b) {
  std::vector<Monomial> out;
  for (const Monomial& ma : a.terms)
    for (const Monomial& mb : b.terms) {
      Monomial m;
      m.c = ma.c * mb.c;
      m.fs = ma.fs;
      m.fs.insert(m.fs.end(), mb.fs.begin(), mb.fs.end());
      m.deltas = ma.deltas;
      m.deltas.insert(m.deltas.end(), mb.deltas.begin(), mb.deltas.end());
      out.push_back(std::move(m));
    }
  return out;
}

std::vector<Monomial> raw_derivative(const SymbolTable& t, Idx mu,
                                     const std::vector<Monomial>& terms) {
  std::vector<Monomial> out;
  for (const Monomial& m : terms) {
    if (!m.deltas.empty())
      throw RegularityError(
          "derivative of a coincident-point contraction residue");
    for (size_t p = 0; p < m.fs.size(); ++p) {
      if (!t.at(m.fs[p].sym).jet_ok) continue;
      Monomial w = m;
      w.fs[p].derivs.push_back(mu);
      out.push_back(std::move(w));
    }
  }
  return out;
}

}  // namespace

Density mul(const SymbolTable& t, const Density& a, const Density& b) {
  Density d;
  d.terms = raw_mul_terms(a, b);
  return normalize(t, std::move(d));
}

Density add_raw(const Density& a, const Density& b) {
  Density d = a;
  d.terms.insert(d.terms.end(), b.terms.begin(), b.terms.end());
  return d;
}

Density mul_raw(const Density& a, const Density& b) {
  Density d;
  d.terms = raw_mul_terms(a, b);
  return d;
}

Density derivative_raw(const SymbolTable& t, Idx mu, const Density& d) {
  Density out;
  out.terms = raw_derivative(t, mu, d.terms);
  return out;
}

Density pow_density(const SymbolTable& t, const Density& a, int n) {
  if (n < 0) throw std::invalid_argument("negative power");
  Density r = make_const(t, Coeff(1));
  for (int i = 0; i < n; ++i) r = mul(t, r, a);
  return r;
}

Density apply_derivative(const SymbolTable& t, Idx mu, const Density& d) {
  Density out;
  out.terms = raw_derivative(t, mu, d.terms);
  return normalize(t, std::move(out));
}

int monomial_parity(const SymbolTable& t, const Monomial& m) {
  int p = 0;
  for (const Factor& f : m.fs) p += t.at(f.sym).g.parity;
  return p & 1;
}

Grading monomial_grading(const SymbolTable& t, const Monomial& m) {
  Grading g;
  for (const Factor& f : m.fs) {
    g = g + t.at(f.sym).g;
    g.dim += static_cast<int>(f.derivs.size());
  }
  return g;
}

Grading grading_of(const SymbolTable& t, const Density& d) {
  if (d.terms.empty()) return Grading{};
  Grading g = monomial_grading(t, d.terms[0]);
  for (size_t i = 1; i < d.terms.size(); ++i)
    if (!(monomial_grading(t, d.terms[i]) == g))
      throw GradingError("density is not grading homogeneous");
  return g;
}

bool is_homogeneous(const SymbolTable& t, const Density& d) {
  if (d.terms.empty()) return true;
  Grading g = monomial_grading(t, d.terms[0]);
  for (size_t i = 1; i < d.terms.size(); ++i)
    if (!(monomial_grading(t, d.terms[i]) == g)) return false;
  return true;
}

int parity_of(const SymbolTable& t, const Density& d) {
  if (d.terms.empty()) return 0;
  int p = monomial_parity(t, d.terms[0]);
  for (size_t i = 1; i < d.terms.size(); ++i)
    if (monomial_parity(t, d.terms[i]) != p)
      throw GradingError("density has mixed parity");
  return p;
}

int count_occurrences(const Density& d, int sym) {
  int n = 0;
  for (const Monomial& m : d.terms)
    for (const Factor& f : m.fs)
      if (f.sym == sym) ++n;
  return n;
}

bool depends_on(const Density& d, int sym) {
  return count_occurrences(d, sym) > 0;
}

Density euler_lagrange(const SymbolTable& t, const Density& d, int sym,
                       const std::vector<Idx>& frees) {
  if (sym < 0 || sym >= t.size())
    throw IndexError("unknown generator in variation");
  const SymbolInfo& si = t.at(sym);
  if (static_cast<int>(frees.size()) != si.n_lorentz + si.n_lie)
    throw IndexError("free index count mismatch in variation of " + si.name);
  for (const Monomial& m : d.terms)
    for (const Factor& f : m.fs) {
      for (const Idx& used : f.derivs)
        for (const Idx& fr : frees)
          if (used.id == fr.id)
            throw IndexError("variation index already used in density");
      for (const Idx& used : f.idx)
        for (const Idx& fr : frees)
          if (used.id == fr.id)
            throw IndexError("variation index already used in density");
    }

  std::vector<Monomial> out;
  int spar = si.g.parity;
  for (const Monomial& m : d.terms) {
    for (size_t p = 0; p < m.fs.size(); ++p) {
      if (m.fs[p].sym != sym) continue;
      int sign = 1;
      if (spar)
        for (size_t q = 0; q < p; ++q)
          if (factor_parity(t, m.fs[q])) sign = -sign;
      Factor occ = m.fs[p];
      Monomial r = m;
      r.fs.erase(r.fs.begin() + p);
      // bind own indices of the removed occurrence to the requested frees:
      // the contracted partner slot (in the rest or in occ's own derivative
      // list) is renamed
      std::vector<Idx> alpha = occ.derivs;
      for (size_t j = 0; j < occ.idx.size(); ++j) {
        int32_t nm = occ.idx[j].id;
        bool found = false;
        for (Factor& f : r.fs) {
          for (Idx& dslot : f.derivs)
            if (!found && dslot.id == nm) {
              dslot = frees[j];
              found = true;
            }
          for (Idx& islot : f.idx)
            if (!found && islot.id == nm) {
              islot = frees[j];
              found = true;
            }
        }
        for (Idx& a : alpha)
          if (!found && a.id == nm) {
            a = frees[j];
            found = true;
          }
        // an index of occ contracted with another own index of occ would
        // already have vanished or been caught by validation
        if (!found)
          throw IndexError(
              "variation of a density with a free index on the varied "
              "generator");
      }
      if (alpha.size() & 1) sign = -sign;
      if (sign < 0) r.c = -r.c;
      std::vector<Monomial> terms = {std::move(r)};
      for (const Idx& mu : alpha) terms = raw_derivative(t, mu, terms);
      for (Monomial& w : terms) out.push_back(std::move(w));
    }
  }
  Density res;
  res.terms = std::move(out);
  return normalize(t, std::move(res));
}

Density substitute(const SymbolTable& t, const Density& d, int sym,
                   const Density& repl, const std::vector<Idx>& frees) {
  const SymbolInfo& si = t.at(sym);
  if (static_cast<int>(frees.size()) != si.n_lorentz + si.n_lie)
    throw IndexError("free index count mismatch in substitution");
  if (!repl.is_zero() && parity_of(t, repl) != si.g.parity)
    throw GradingError("substitution changes parity of " + si.name);
  static int fresh_counter = 0;

  std::vector<Monomial> out;
  for (const Monomial& m : d.terms) {
    // build the replaced monomial as an ordered product, expanding each
    // occurrence in place
    std::vector<Monomial> acc = {Monomial{m.c, {}, m.deltas}};
    for (const Factor& f : m.fs) {
      if (f.sym != sym) {
        for (Monomial& w : acc) w.fs.push_back(f);
        continue;
      }
      // rename repl: frees -> occurrence indices, internal dummies -> fresh,
      // counted per monomial since different terms may reuse a dummy name
      Density rp = repl;
      for (Monomial& w : rp.terms) {
        std::map<int32_t, Idx> ren;
        for (size_t j = 0; j < frees.size(); ++j) ren[frees[j].id] = f.idx[j];
        std::map<int32_t, int> cnt;
        for_each_slot(w, [&](Idx& ix) { ++cnt[ix.id]; });
        for_each_slot(w, [&](Idx& ix) {
          auto it = ren.find(ix.id);
          if (it != ren.end()) {
            ix = it->second;
            return;
          }
          if (cnt[ix.id] == 2) {
            // per-splice fresh dummy name; '#' keeps it out of parser reach
            int32_t nid = intern_index("#s" + std::to_string(fresh_counter) +
                                       "_" + index_name(ix.id));
            ren[ix.id] = Idx{ix.space, nid};
            ix = ren[ix.id];
          }
        });
        ++fresh_counter;
      }
      std::vector<Monomial> rterms = rp.terms;
      for (auto it = f.derivs.rbegin(); it != f.derivs.rend(); ++it)
        rterms = raw_derivative(t, *it, rterms);
      std::vector<Monomial> next;
      for (const Monomial& w : acc)
        for (const Monomial& rw : rterms) {
          Monomial nm;
          nm.c = w.c * rw.c;
          nm.fs = w.fs;
          nm.fs.insert(nm.fs.end(), rw.fs.begin(), rw.fs.end());
          nm.deltas = w.deltas;
          next.push_back(std::move(nm));
        }
      acc = std::move(next);
    }
    for (Monomial& w : acc) out.push_back(std::move(w));
  }
  Density res;
  res.terms = std::move(out);
  return normalize(t, std::move(res));
}

Density apply_rule(const SymbolTable& t, const Density& d, int sym,
                   const Density& repl, const std::vector<Idx>& frees,
                   bool odd_rule) {
  const SymbolInfo& si = t.at(sym);
  if (static_cast<int>(frees.size()) != si.n_lorentz + si.n_lie)
    throw IndexError("free index count mismatch in rule for " + si.name);
  if (repl.is_zero()) return Density{};
  static int fresh_counter = 0;

  std::vector<Monomial> out;
  for (const Monomial& m : d.terms) {
    int prefix = 0;
    for (size_t p = 0; p < m.fs.size(); ++p) {
      const Factor& f = m.fs[p];
      if (f.sym != sym) {
        prefix ^= factor_parity(t, f);
        continue;
      }
      // rename repl: frees -> occurrence indices, internal dummies -> fresh,
      // counted per monomial since different terms may reuse a dummy name
      Density rp = repl;
      for (Monomial& w : rp.terms) {
        std::map<int32_t, Idx> ren;
        for (size_t j = 0; j < frees.size(); ++j) ren[frees[j].id] = f.idx[j];
        std::map<int32_t, int> cnt;
        for_each_slot(w, [&](Idx& ix) { ++cnt[ix.id]; });
        for_each_slot(w, [&](Idx& ix) {
          auto it = ren.find(ix.id);
          if (it != ren.end()) {
            ix = it->second;
            return;
          }
          if (cnt[ix.id] == 2) {
            int32_t nid = intern_index("#o" + std::to_string(fresh_counter) +
                                       "_" + index_name(ix.id));
            ren[ix.id] = Idx{ix.space, nid};
            ix = ren[ix.id];
          }
        });
        ++fresh_counter;
      }
      std::vector<Monomial> rterms = rp.terms;
      for (auto it = f.derivs.rbegin(); it != f.derivs.rend(); ++it)
        rterms = raw_derivative(t, *it, rterms);
      for (const Monomial& rw : rterms) {
        Monomial nm;
        nm.c = m.c * rw.c;
        if (odd_rule && prefix) nm.c = -nm.c;
        nm.fs.assign(m.fs.begin(), m.fs.begin() + p);
        nm.fs.insert(nm.fs.end(), rw.fs.begin(), rw.fs.end());
        nm.fs.insert(nm.fs.end(), m.fs.begin() + p + 1, m.fs.end());
        nm.deltas = m.deltas;
        for (const DeltaFactor& df : rw.deltas) nm.deltas.push_back(df);
        out.push_back(std::move(nm));
      }
      prefix ^= factor_parity(t, f);
    }
  }
  Density res;
  res.terms = std::move(out);
  return normalize(t, std::move(res));
}

std::string monomial_key(const SymbolTable& t, const Monomial& m) {
  std::string s;
  for (const Factor& f : m.fs) s += factor_key(t, f);
  return s;
}

Density refresh_dummies(const Density& d) {
  static int counter = 0;
  Density out = d;
  for (Monomial& m : out.terms) {
    std::map<int32_t, int> cnt;
    for_each_slot(m, [&](Idx& ix) { ++cnt[ix.id]; });
    std::map<int32_t, Idx> ren;
    for_each_slot(m, [&](Idx& ix) {
      if (cnt[ix.id] != 2) return;
      auto it = ren.find(ix.id);
      if (it == ren.end()) {
        int32_t nid = intern_index("#r" + std::to_string(counter++));
        it = ren.emplace(ix.id, Idx{ix.space, nid}).first;
      }
      ix = it->second;
    });
  }
  return out;
}

double density_norm(const Density& d) {
  double n = 0;
  for (const Monomial& m : d.terms) {
    n = std::max(n, std::abs(static_cast<double>(m.c.re)));
    n = std::max(n, std::abs(static_cast<double>(m.c.im)));
  }
  return n;
}

Density hbar_coefficient(const SymbolTable& t, const Density& d, int order) {
  int hb = t.find("hbar");
  Density out;
  for (const Monomial& m : d.terms) {
    int n = 0;
    for (const Factor& f : m.fs)
      if (f.sym == hb) ++n;
    if (n != order) continue;
    Monomial w = m;
    w.fs.erase(std::remove_if(w.fs.begin(), w.fs.end(),
                              [&](const Factor& f) { return f.sym == hb; }),
               w.fs.end());
    out.terms.push_back(std::move(w));
  }
  return normalize(t, std::move(out));
}

}  // namespace bvflow
