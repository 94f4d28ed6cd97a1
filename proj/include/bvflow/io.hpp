#pragma once

#include <string>

#include "bvflow/expr.hpp"

namespace bvflow {

// Canonical text form. Re-parsing the output of print_density through
// parse_expression reproduces the density exactly.
std::string print_monomial(const SymbolTable& t, const Monomial& m);
std::string print_density(const SymbolTable& t, const Density& d);

}  // namespace bvflow
