#pragma once

#include <optional>
#include <vector>

#include "bvflow/coeff.hpp"

namespace bvflow {

// Dense exact matrix over the Gaussian rational coefficient field. Row major.
struct Mat {
  int rows = 0, cols = 0;
  std::vector<Coeff> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c) {}
  Coeff& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  const Coeff& at(int r, int c) const {
    return a[static_cast<size_t>(r) * cols + c];
  }
};

// Reduced row echelon form in place; returns the pivot column of each
// nonzero row, in row order. Exact, so rank decisions are sharp.
std::vector<int> rref(Mat& m);

int rank(Mat m);

// Basis of the right null space, one length-cols vector per element.
std::vector<std::vector<Coeff>> null_space(const Mat& m);

// Exact solution of m x = b with free variables set to zero; nullopt when
// the system is inconsistent.
std::optional<std::vector<Coeff>> solve(const Mat& m,
                                        const std::vector<Coeff>& b);

bool in_column_span(const Mat& m, const std::vector<Coeff>& v);

}  // namespace bvflow
