#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bvflow/coeff.hpp"

namespace bvflow {

// Quadruple grading carried by every generator and every homogeneous
// expression. pure_ghost = ghost + antifield holds for all generators and is
// preserved by multiplication, so it is stored redundantly and checked.
struct Grading {
  int ghost = 0;
  int antifield = 0;
  int parity = 0;  // Grassmann parity mod 2
  Rat dim{0};      // mass dimension

  int pure_ghost() const { return ghost + antifield; }

  Grading operator+(const Grading& o) const {
    return Grading{ghost + o.ghost, antifield + o.antifield,
                   (parity + o.parity) & 1, dim + o.dim};
  }
  bool operator==(const Grading& o) const {
    return ghost == o.ghost && antifield == o.antifield &&
           parity == o.parity && dim == o.dim;
  }
};

enum class Sector : uint8_t {
  Field,       // physical field (scalar or Lorentz vector)
  Ghost,       // ghost c
  Antighost,   // antighost cbar
  NlField,     // Nakanishi-Lautrup multiplier b
  Eta,         // regulator partner, odd, ghost -1
  Antifield,   // antifield of some generator
  Source,      // source coupled to a BRST variation, gradings of the antifield
  StructConst, // totally antisymmetric structure constant
  RegKernel,   // regulator kernel q_k and the propagator kernel G_k
  Coupling,    // background coupling constant or external test function
  Hbar,        // formal loop-counting parameter
};

inline bool is_constant_sector(Sector s) {
  return s == Sector::StructConst || s == Sector::RegKernel ||
         s == Sector::Coupling || s == Sector::Hbar;
}

struct SymbolInfo {
  std::string name;
  Sector sector = Sector::Field;
  int n_lorentz = 0;  // own Lorentz indices (0 or 1)
  int n_lie = 0;      // own Lie indices
  Grading g;
  int partner = -1;       // field <-> antifield, field <-> source
  bool antisym = false;   // antisymmetric in own Lie indices (structure constant)
  bool jet_ok = true;     // false: spacetime constant, derivatives of it vanish
};

// Interned index names, shared by all tables. Id order defines the canonical
// order used when minimizing over dummy relabelings, so the reserved dummy
// names are interned first and compare smallest.
enum class IndexSpace : uint8_t { Lorentz, Lie };

struct Idx {
  IndexSpace space = IndexSpace::Lorentz;
  int32_t id = 0;
  bool operator==(const Idx& o) const { return space == o.space && id == o.id; }
  bool operator<(const Idx& o) const {
    if (space != o.space) return space < o.space;
    return id < o.id;
  }
};

int32_t intern_index(const std::string& name);
const std::string& index_name(int32_t id);
// Reserved canonical dummy names: mu1, mu2, ... and a1, a2, ...
Idx canonical_dummy(IndexSpace space, int pos);
int max_canonical_dummies();

class SymbolTable {
 public:
  int add(SymbolInfo info);
  int find(const std::string& name) const;  // -1 if absent
  int require(const std::string& name) const;
  const SymbolInfo& at(int id) const { return infos_.at(id); }
  int size() const { return static_cast<int>(infos_.size()); }

  // Declares name plus the derived generators name_af and name_src with the
  // standard grading flips, wiring the partner links. Returns the base id.
  int add_with_partners(SymbolInfo base, const Rat& spacetime_dim);

  int antifield_of(int id) const;
  int source_of(int id) const;

 private:
  std::vector<SymbolInfo> infos_;
  std::map<std::string, int> by_name_;
  std::map<int, int> af_of_, src_of_;
};

// Gradings of the derived generators: the antifield of X has
// ghost = -gh(X) - 1, antifield = af(X) + 1, opposite parity and
// dim = d - dim(X). Sources carry the same grading as the antifield.
Grading antifield_grading(const Grading& g, const Rat& spacetime_dim);

}  // namespace bvflow
