#pragma once

#include <map>

#include "bvflow/enumerate.hpp"

namespace bvflow {

// Distinguishes how a local functional was regularized when it arose from a
// contraction: through a point-split pair of test functions, or a single
// test-function insertion. The algebraic layer only transports the tag.
enum class Support { PairRegularized, SingleTest };

struct LocalFunctional {
  Density den;
  Support support = Support::PairRegularized;
};

// Exactness test through the variational complex: a scalar density with no
// constant-only terms is a total divergence exactly when its variational
// derivative by every non-constant generator vanishes. Cheap on densities
// whose monomial families are far too large to enumerate.
bool is_total_divergence(const SymbolTable& t, const Density& d);

// Normal forms of integrated densities modulo total derivatives. For every
// (factor content, derivative count) family the full space of total
// derivatives is spanned exactly: relations are generated by applying d_mu to
// every one-free-index monomial of the family below, then eliminated with
// greatest-monomial pivoting. Reduction is therefore zero if and only if the
// density is a total derivative.
class IbpReducer {
 public:
  explicit IbpReducer(const SymbolTable& t) : t_(&t) {}

  Density reduce(const Density& d);
  bool equivalent(const Density& a, const Density& b);
  bool is_total_derivative(const Density& d) { return reduce(d).is_zero(); }

 private:
  struct Family {
    std::vector<Monomial> basis;            // sorted by key, descending
    std::map<std::string, int> index_of;    // key -> column
    // echelon rows over the basis: row[i] normalized to unit pivot
    std::vector<std::vector<Coeff>> rows;
    std::vector<int> pivot;
  };

  const Family& family_for(const Monomial& m);
  static std::string family_key(const SymbolTable& t, const Monomial& m);

  const SymbolTable* t_;
  std::map<std::string, Family> cache_;
};

}  // namespace bvflow
