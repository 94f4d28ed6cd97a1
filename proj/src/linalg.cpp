#include "bvflow/linalg.hpp"

#include <stdexcept>
#include <utility>

namespace bvflow {

std::vector<int> rref(Mat& m) {
  std::vector<int> pivots;
  int r = 0;
  for (int c = 0; c < m.cols && r < m.rows; ++c) {
    int p = -1;
    for (int i = r; i < m.rows; ++i) {
      if (!m.at(i, c).is_zero()) {
        p = i;
        break;
      }
    }
    if (p < 0) continue;
    if (p != r) {
      for (int j = 0; j < m.cols; ++j) std::swap(m.at(p, j), m.at(r, j));
    }
    Coeff inv = Coeff(1) / m.at(r, c);
    for (int j = c; j < m.cols; ++j) m.at(r, j) = m.at(r, j) * inv;
    for (int i = 0; i < m.rows; ++i) {
      if (i == r || m.at(i, c).is_zero()) continue;
      Coeff f = m.at(i, c);
      for (int j = c; j < m.cols; ++j)
        m.at(i, j) = m.at(i, j) - f * m.at(r, j);
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

int rank(Mat m) { return static_cast<int>(rref(m).size()); }

std::vector<std::vector<Coeff>> null_space(const Mat& m) {
  Mat e = m;
  std::vector<int> pivots = rref(e);
  std::vector<char> is_pivot(static_cast<size_t>(m.cols), 0);
  for (int c : pivots) is_pivot[static_cast<size_t>(c)] = 1;
  std::vector<std::vector<Coeff>> basis;
  for (int j = 0; j < m.cols; ++j) {
    if (is_pivot[static_cast<size_t>(j)]) continue;
    std::vector<Coeff> v(static_cast<size_t>(m.cols));
    v[static_cast<size_t>(j)] = Coeff(1);
    for (size_t r = 0; r < pivots.size(); ++r)
      v[static_cast<size_t>(pivots[r])] = -e.at(static_cast<int>(r), j);
    basis.push_back(std::move(v));
  }
  return basis;
}

std::optional<std::vector<Coeff>> solve(const Mat& m,
                                        const std::vector<Coeff>& b) {
  if (static_cast<int>(b.size()) != m.rows)
    throw std::invalid_argument("solve: right hand side length mismatch");
  Mat aug(m.rows, m.cols + 1);
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) aug.at(i, j) = m.at(i, j);
    aug.at(i, m.cols) = b[static_cast<size_t>(i)];
  }
  std::vector<int> pivots = rref(aug);
  for (int c : pivots)
    if (c == m.cols) return std::nullopt;
  std::vector<Coeff> x(static_cast<size_t>(m.cols));
  for (size_t r = 0; r < pivots.size(); ++r)
    x[static_cast<size_t>(pivots[r])] = aug.at(static_cast<int>(r), m.cols);
  return x;
}

bool in_column_span(const Mat& m, const std::vector<Coeff>& v) {
  return solve(m, v).has_value();
}

}  // namespace bvflow
