#include "bvflow/symbols.hpp"

#include <stdexcept>

namespace bvflow {

namespace {

struct IndexPool {
  std::vector<std::string> names;
  std::map<std::string, int32_t> ids;
  int canon_count = 0;
};

IndexPool& pool() {
  static IndexPool p = [] {
    IndexPool q;
    // Reserve canonical dummy names first so they compare smallest in id
    // order. 64 per space is far beyond any density arising at this scale.
    q.canon_count = 64;
    for (int i = 1; i <= q.canon_count; ++i) {
      std::string n = "mu" + std::to_string(i);
      q.ids[n] = static_cast<int32_t>(q.names.size());
      q.names.push_back(n);
    }
    for (int i = 1; i <= q.canon_count; ++i) {
      std::string n = "a" + std::to_string(i);
      q.ids[n] = static_cast<int32_t>(q.names.size());
      q.names.push_back(n);
    }
    return q;
  }();
  return p;
}

}  // namespace

int32_t intern_index(const std::string& name) {
  auto& p = pool();
  auto it = p.ids.find(name);
  if (it != p.ids.end()) return it->second;
  int32_t id = static_cast<int32_t>(p.names.size());
  p.ids[name] = id;
  p.names.push_back(name);
  return id;
}

const std::string& index_name(int32_t id) { return pool().names.at(id); }

Idx canonical_dummy(IndexSpace space, int pos) {
  auto& p = pool();
  if (pos < 0 || pos >= p.canon_count)
    throw std::out_of_range("canonical dummy pool exhausted");
  int32_t base = space == IndexSpace::Lorentz ? 0 : p.canon_count;
  return Idx{space, base + pos};
}

int max_canonical_dummies() { return pool().canon_count; }

Grading antifield_grading(const Grading& g, const Rat& spacetime_dim) {
  return Grading{-g.ghost - 1, g.antifield + 1, (g.parity + 1) & 1,
                 spacetime_dim - g.dim};
}

int SymbolTable::add(SymbolInfo info) {
  if (by_name_.count(info.name))
    throw std::invalid_argument("duplicate symbol: " + info.name);
  int id = static_cast<int>(infos_.size());
  by_name_[info.name] = id;
  infos_.push_back(std::move(info));
  return id;
}

int SymbolTable::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? -1 : it->second;
}

int SymbolTable::require(const std::string& name) const {
  int id = find(name);
  if (id < 0) throw std::invalid_argument("unknown generator: " + name);
  return id;
}

int SymbolTable::add_with_partners(SymbolInfo base, const Rat& spacetime_dim) {
  Grading gaf = antifield_grading(base.g, spacetime_dim);
  SymbolInfo af{base.name + "_af", Sector::Antifield, base.n_lorentz,
                base.n_lie,        gaf,               -1};
  SymbolInfo src{base.name + "_src", Sector::Source, base.n_lorentz,
                 base.n_lie,         gaf,            -1};
  int id = add(std::move(base));
  int aid = add(std::move(af));
  int sid = add(std::move(src));
  infos_[id].partner = aid;
  infos_[aid].partner = id;
  infos_[sid].partner = id;
  af_of_[id] = aid;
  src_of_[id] = sid;
  return id;
}

int SymbolTable::antifield_of(int id) const {
  auto it = af_of_.find(id);
  if (it == af_of_.end())
    throw std::invalid_argument("no antifield partner for " + at(id).name);
  return it->second;
}

int SymbolTable::source_of(int id) const {
  auto it = src_of_.find(id);
  if (it == src_of_.end())
    throw std::invalid_argument("no source partner for " + at(id).name);
  return it->second;
}

}  // namespace bvflow
