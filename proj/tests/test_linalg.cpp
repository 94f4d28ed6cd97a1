#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "bvflow/linalg.hpp"

using namespace bvflow;

namespace {

Coeff C(long n, long d = 1) { return Coeff(Rat(n, d)); }

std::vector<Coeff> mat_vec(const Mat& m, const std::vector<Coeff>& x) {
  std::vector<Coeff> y(static_cast<size_t>(m.rows));
  for (int i = 0; i < m.rows; ++i) {
    Coeff s;
    for (int j = 0; j < m.cols; ++j)
      s += m.at(i, j) * x[static_cast<size_t>(j)];
    y[static_cast<size_t>(i)] = s;
  }
  return y;
}

bool all_zero(const std::vector<Coeff>& v) {
  for (const Coeff& c : v)
    if (!c.is_zero()) return false;
  return true;
}

Mat random_matrix(std::mt19937& rng, int rows, int cols) {
  std::uniform_int_distribution<int> num(-4, 4);
  std::uniform_int_distribution<int> den(1, 3);
  std::uniform_int_distribution<int> mix(0, 5);
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      Coeff c = C(num(rng), den(rng));
      if (mix(rng) == 0) c = c * Coeff::i_unit();
      m.at(i, j) = c;
    }
  return m;
}

}  // namespace

TEST_CASE("row reduction of an invertible block reaches the identity") {
  Mat m(2, 2);
  m.at(0, 0) = C(1);
  m.at(0, 1) = C(2);
  m.at(1, 0) = C(3);
  m.at(1, 1) = C(4);
  auto pivots = rref(m);
  REQUIRE(pivots.size() == 2);
  CHECK(pivots[0] == 0);
  CHECK(pivots[1] == 1);
  CHECK(m.at(0, 0).is_one());
  CHECK(m.at(0, 1).is_zero());
  CHECK(m.at(1, 0).is_zero());
  CHECK(m.at(1, 1).is_one());
}

TEST_CASE("rank detects exact cancellation") {
  Mat m(3, 3);
  // Third row is the sum of the first two.
  long rows[3][3] = {{1, 2, 3}, {4, 5, 6}, {5, 7, 9}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m.at(i, j) = C(rows[i][j]);
  CHECK(rank(m) == 2);
}

TEST_CASE("null space vectors annihilate the matrix") {
  Mat m(2, 4);
  long rows[2][4] = {{1, 1, 0, 2}, {0, 0, 1, 1}};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 4; ++j) m.at(i, j) = C(rows[i][j]);
  auto ns = null_space(m);
  REQUIRE(ns.size() == 2);
  for (const auto& v : ns) CHECK(all_zero(mat_vec(m, v)));
}

TEST_CASE("solve reconstructs consistent systems and rejects others") {
  Mat m(3, 2);
  long rows[3][2] = {{1, 0}, {0, 1}, {1, 1}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) m.at(i, j) = C(rows[i][j]);
  std::vector<Coeff> good = {C(2), C(3), C(5)};
  auto x = solve(m, good);
  REQUIRE(x.has_value());
  CHECK((*x)[0] == C(2));
  CHECK((*x)[1] == C(3));
  std::vector<Coeff> bad = {C(2), C(3), C(6)};
  CHECK_FALSE(solve(m, bad).has_value());
  CHECK(in_column_span(m, good));
  CHECK_FALSE(in_column_span(m, bad));
}

TEST_CASE("complex entries are eliminated exactly") {
  Mat m(2, 2);
  m.at(0, 0) = Coeff::i_unit();
  m.at(0, 1) = C(1);
  m.at(1, 0) = C(1);
  m.at(1, 1) = -Coeff::i_unit();
  // Second row is -i times the first, so the rank drops.
  CHECK(rank(m) == 1);
  auto ns = null_space(m);
  REQUIRE(ns.size() == 1);
  CHECK(all_zero(mat_vec(m, ns[0])));
}

TEST_CASE("random matrices satisfy rank plus nullity") {
  std::mt19937 rng(20240915);
  for (int trial = 0; trial < 25; ++trial) {
    Mat m = random_matrix(rng, 4, 6);
    int r = rank(m);
    auto ns = null_space(m);
    CHECK(r + static_cast<int>(ns.size()) == 6);
    for (const auto& v : ns) CHECK(all_zero(mat_vec(m, v)));
    // Any image vector must be recognized as solvable.
    std::vector<Coeff> x0(6);
    std::uniform_int_distribution<int> num(-3, 3);
    for (auto& c : x0) c = C(num(rng));
    std::vector<Coeff> b = mat_vec(m, x0);
    auto x = solve(m, b);
    REQUIRE(x.has_value());
    std::vector<Coeff> bx = mat_vec(m, *x);
    for (size_t i = 0; i < b.size(); ++i) CHECK(bx[i] == b[i]);
  }
}

TEST_CASE("row reduction is idempotent") {
  std::mt19937 rng(7);
  Mat m = random_matrix(rng, 5, 5);
  Mat once = m;
  rref(once);
  Mat twice = once;
  rref(twice);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) CHECK(once.at(i, j) == twice.at(i, j));
}
