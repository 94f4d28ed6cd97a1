#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <stdexcept>
#include <string>

namespace bvflow {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

// Exact coefficient in Q(i). The imaginary unit enters through the antighost
// transform, so coefficients are complex rationals throughout.
struct Coeff {
  Rat re{0};
  Rat im{0};

  Coeff() = default;
  Coeff(long n) : re(n) {}
  Coeff(Rat r) : re(std::move(r)) {}
  Coeff(Rat r, Rat i) : re(std::move(r)), im(std::move(i)) {}

  static Coeff i_unit() { return Coeff(Rat(0), Rat(1)); }

  bool is_zero() const { return re == 0 && im == 0; }
  bool is_one() const { return re == 1 && im == 0; }

  Coeff operator-() const { return Coeff(-re, -im); }
  Coeff operator+(const Coeff& o) const { return Coeff(re + o.re, im + o.im); }
  Coeff operator-(const Coeff& o) const { return Coeff(re - o.re, im - o.im); }
  Coeff operator*(const Coeff& o) const {
    return Coeff(re * o.re - im * o.im, re * o.im + im * o.re);
  }
  Coeff& operator+=(const Coeff& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Coeff& operator*=(const Coeff& o) {
    *this = *this * o;
    return *this;
  }
  Coeff operator/(const Coeff& o) const {
    Rat n = o.re * o.re + o.im * o.im;
    if (n == 0) throw std::domain_error("division by zero coefficient");
    return Coeff((re * o.re + im * o.im) / n, (im * o.re - re * o.im) / n);
  }
  bool operator==(const Coeff& o) const { return re == o.re && im == o.im; }

  double real_d() const { return static_cast<double>(re); }
};

std::string rat_str(const Rat& r);
// Canonical text form, re-parseable by the expression parser.
std::string coeff_str(const Coeff& c);

}  // namespace bvflow
