#pragma once

#include <vector>

#include "bvflow/expr.hpp"

namespace bvflow {

// All scalar monomials with the given factor content (symbol ids with
// multiplicity), exactly n_derivs spacetime derivatives distributed over the
// jet-carrying factors, and the given free Lorentz index names. Every other
// index is contracted in all possible ways. Returns canonical
// representatives with unit coefficient, deduplicated.
std::vector<Monomial> enumerate_family(const SymbolTable& t,
                                       std::vector<int> content, int n_derivs,
                                       const std::vector<Idx>& frees);

// All content multisets over `pool` whose grading matches: ghost number g,
// total dimension + n_derivs <= dim_cap for at least one derivative count.
// Emitted as sorted id vectors; the caller pairs them with derivative counts.
std::vector<std::vector<int>> enumerate_contents(const SymbolTable& t,
                                                 const std::vector<int>& pool,
                                                 int ghost, const Rat& dim_cap);

}  // namespace bvflow
