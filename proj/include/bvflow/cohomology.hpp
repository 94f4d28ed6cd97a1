#pragma once

#include <optional>
#include <vector>

#include "bvflow/expr.hpp"
#include "bvflow/linalg.hpp"
#include "bvflow/model.hpp"

namespace bvflow {

// Scalar monomial densities at fixed ghost number and dimension at most
// max_dim, linearly independent modulo total derivatives. The generator pool
// holds the jet sector (fields, ghosts, antighost, multiplier), the structure
// constants, and the regulator pair; antifields, sources, couplings and the
// propagator kernel stay out. struct_cap bounds the structure constant
// multiplicity, which no dimension count bounds.
struct MonomialBasis {
  int ghost = 0;
  Rat max_dim{0};
  int struct_cap = 2;
  std::vector<int> generators;
  std::vector<Monomial> elems;
};

struct LinearOperatorMatrix {
  Mat mat;  // rows index the target basis, columns the source basis
};

struct CohomologyResult {
  int kernel_dim = 0;
  int image_dim = 0;
  int dim = 0;
  std::vector<Density> representatives;
};

MonomialBasis build_local_basis(const Model& m, int ghost, const Rat& max_dim,
                                int struct_cap = 2);

// The ghost-raising variation truncated at the structure constant cap. The
// variation never lowers that count, so the truncation commutes with it and
// the capped square still vanishes.
Density capped_variation(const Model& m, const Density& d, int struct_cap);

// Drops generator pairs (u, v) whose variations are s u = const * v and
// s v = 0, along with every basis element containing either one: the
// antighost with its multiplier and the regulator partner with its kernel.
// Detected from the model rules, never hardwired to names.
MonomialBasis contractible_pair_reduction(const Model& m, MonomialBasis basis);

// Matrix of the ghost-raising variation from `from` into `to`, with images
// reduced modulo total derivatives. Image monomials above the structure
// constant cap are dropped; the variation never lowers that count, so the
// capped space is a genuine quotient complex and the matrix squares to zero.
// Throws std::runtime_error naming the escaping monomial when an image lies
// outside the span of `to`.
LinearOperatorMatrix s_matrix(const Model& m, const MonomialBasis& from,
                              const MonomialBasis& to);
LinearOperatorMatrix s_matrix(const Model& m, const MonomialBasis& from);

// Coordinates of a density over the basis, modulo total derivatives;
// nullopt when it lies outside the span.
std::optional<std::vector<Coeff>> express_in_basis(const Model& m,
                                                   const MonomialBasis& b,
                                                   const Density& d);

// Kernel modulo image of the ghost-raising variation on the local basis,
// with chosen representatives. drop_contractible applies the pair reduction
// to the generator pool before anything is enumerated.
CohomologyResult cohomology_at(const Model& m, int ghost, const Rat& max_dim,
                               bool drop_contractible = false,
                               int struct_cap = 2);

}  // namespace bvflow
