#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bvflow/symbols.hpp"

namespace bvflow {

struct GradingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IndexError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RegularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One generator occurrence: symbol, spacetime derivative indices acting on it
// (order irrelevant, kept sorted), then its own indices in declaration order
// (Lorentz slots first, Lie slots after).
struct Factor {
  int sym = -1;
  std::vector<Idx> derivs;
  std::vector<Idx> idx;

  bool operator==(const Factor& o) const {
    return sym == o.sym && derivs == o.derivs && idx == o.idx;
  }
};

// Contraction residue produced by the functional Laplacian: a delta at
// coincident points, possibly hit by leftover derivatives. normalize() drops
// order-zero residues, rejects derived ones (regularity violation) and
// products of residues (singular contraction).
struct DeltaFactor {
  int deriv_order = 0;
};

struct Monomial {
  Coeff c;
  std::vector<Factor> fs;
  std::vector<DeltaFactor> deltas;
};

// Sum of monomials over one implicit spacetime point. Canonical after
// normalize(): every term in orbit-minimal form, like terms merged, terms
// sorted, zero terms dropped.
struct Density {
  std::vector<Monomial> terms;

  bool is_zero() const { return terms.empty(); }
};

Density make_const(const SymbolTable& t, Coeff c);
Density make_symbol(const SymbolTable& t, int sym, std::vector<Idx> idx = {});

// Canonicalization. Enforces the index discipline (every index name appears
// once, free, or twice, contracted, never more; spaces must match), picks the
// minimal representative over dummy relabelings and orderings of identical
// factor blocks with Koszul signs, sorts antisymmetric index blocks, applies
// the structure-constant Jacobi rewrite to a fixed normal pattern, merges like
// terms.
Density normalize(const SymbolTable& t, Density d);

Density add(const SymbolTable& t, const Density& a, const Density& b);
Density scale(const Density& a, const Coeff& c);
// Graded product: concatenation of factor lists; signs appear only through
// later reordering in normalize().
Density mul(const SymbolTable& t, const Density& a, const Density& b);
Density pow_density(const SymbolTable& t, const Density& a, int n);

// Raw variants that do not canonicalize. Index names are taken literally, so
// expressions sharing dummy names across sub-products keep their wiring until
// one final normalize(). The parser builds terms this way.
Density add_raw(const Density& a, const Density& b);
Density mul_raw(const Density& a, const Density& b);
Density derivative_raw(const SymbolTable& t, Idx mu, const Density& d);

// Total spacetime derivative d_mu with the Leibniz rule. Constant-sector
// generators are transparent.
Density apply_derivative(const SymbolTable& t, Idx mu, const Density& d);

int monomial_parity(const SymbolTable& t, const Monomial& m);
Grading monomial_grading(const SymbolTable& t, const Monomial& m);
// Grading of a homogeneous density; throws GradingError when terms disagree.
// hbar counts toward no grading except its own formal order.
Grading grading_of(const SymbolTable& t, const Density& d);
bool is_homogeneous(const SymbolTable& t, const Density& d);
// Parity of a homogeneous density (0 for empty).
int parity_of(const SymbolTable& t, const Density& d);

// Left variational derivative of the scalar density d by generator sym,
// carrying the free index names `frees` (one per own index slot of sym).
// Derivatives on removed occurrences transfer with (-1)^{order} onto the
// remaining factors. Unknown generator ids throw IndexError.
Density euler_lagrange(const SymbolTable& t, const Density& d, int sym,
                       const std::vector<Idx>& frees);

// Occurrence count of sym, derived occurrences included.
int count_occurrences(const Density& d, int sym);
bool depends_on(const Density& d, int sym);

// Replace every occurrence of sym by repl, whose free indices must be named
// frees in slot order. repl must be homogeneous of the same parity and
// grading shifts are the caller's business. Derivatives distribute onto repl.
Density substitute(const SymbolTable& t, const Density& d, int sym,
                   const Density& repl, const std::vector<Idx>& frees);

// Graded derivation rule sym -> repl: sum over occurrences, replacing one at
// a time in place, with the left prefix sign when odd_rule. Derivatives on
// the occurrence distribute into repl.
Density apply_rule(const SymbolTable& t, const Density& d, int sym,
                   const Density& repl, const std::vector<Idx>& frees,
                   bool odd_rule);

// Monomial-level canonical byte encoding; equal encodings mean equal
// monomials up to coefficient.
std::string monomial_key(const SymbolTable& t, const Monomial& m);

// Rename every contracted index pair to a globally fresh name, term by term.
// Needed before concatenating two independently canonicalized densities,
// whose dummy names would otherwise collide.
Density refresh_dummies(const Density& d);

// Max |coefficient| over terms, as a double (for numeric residual norms).
double density_norm(const Density& d);

Density hbar_coefficient(const SymbolTable& t, const Density& d, int order);

}  // namespace bvflow
