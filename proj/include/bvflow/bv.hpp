#pragma once

#include "bvflow/functional.hpp"
#include "bvflow/model.hpp"

namespace bvflow {

// Sign produced by moving an expression of parity pa past one of parity pb.
inline int koszul_sign(int pa, int pb) { return (pa & pb & 1) ? -1 : 1; }

// Antibracket of two scalar densities over the listed conjugate pairs,
// assembled from left variational derivatives. Odd, carries total dimension
// -d relative to the plain product.
Density antibracket(const SymbolTable& t, const Density& X, const Density& Y,
                    const std::vector<std::pair<int, int>>& pairs);

// Functional Laplacian: second variation contracted over conjugate pairs at
// coincident points. Pairs where either occurrence is derived leave a
// residue that normalize() rejects as a regularity violation. A direct
// Lorentz contraction between the two removed occurrences yields a factor of
// the spacetime dimension; a direct Lie contraction is not supported.
Density bv_laplacian(const SymbolTable& t, const Density& X,
                     const std::vector<std::pair<int, int>>& pairs, int dim);

// Right-parity weighted Laplacian: (-1)^{|X|+1} Delta X per homogeneous
// component.
Density bv_laplacian_right(const SymbolTable& t, const Density& X,
                           const std::vector<std::pair<int, int>>& pairs,
                           int dim);

// Left derivation: gauge rules on fields, qk on eta, Euler-Lagrange
// derivatives of the extended action on antifields. Agrees with the
// antibracket against the extended action up to the sign (-1)^{|X|} and
// total derivative terms.
Density brst(const Model& m, const Density& X);

// Classical master equation: {I, I} integrates to zero, tested through the
// variational exactness criterion. On failure the unreduced bracket density
// is returned through *residual when given.
bool check_cme(const Model& m, Density* residual = nullptr);

// Canonical transformation generated by an odd antifield-free fermion:
// exp of the bracket action, which terminates by antifield count.
Density gauge_fix(const Model& m, const Density& X, const Density& psi,
                  int max_order = 64);
// The same transformation as a shift chi_af -> chi_af - EL(psi, chi).
Density gauge_fix_substitution(const Model& m, const Density& X,
                               const Density& psi);

// Deformed bracket against an even action with the quantum correction:
// {F, I0}_star = {F, I0} - i hbar Delta_R F. Tagged PairRegularized.
LocalFunctional star_bracket(const Model& m, const Density& F,
                             const Density& I0);
// Single-insertion bracket: {X, Y}_T = -{X, Y}. Tagged SingleTest.
LocalFunctional t_bracket(const Model& m, const Density& X, const Density& Y);

// Compatibility of the two structures: the combination
//   {XY, I0}_star - X {Y, I0}_star - (-1)^{|Y|} {X, I0}_star Y
//     + i hbar (-1)^{|Y|} {X, Y}_T
// vanishes identically. Returns the assembled residual.
Density star_t_residual(const Model& m, const Density& X, const Density& Y,
                        const Density& I0);

}  // namespace bvflow
