#include "bvflow/coeff.hpp"

namespace bvflow {

std::string rat_str(const Rat& r) {
  std::string s = numerator(r).str();
  if (denominator(r) != 1) s += "/" + denominator(r).str();
  return s;
}

std::string coeff_str(const Coeff& c) {
  if (c.is_zero()) return "0";
  if (c.im == 0) return rat_str(c.re);
  std::string im_part;
  if (c.im == 1)
    im_part = "i";
  else if (c.im == -1)
    im_part = "-i";
  else
    im_part = rat_str(c.im) + "*i";
  if (c.re == 0) return im_part;
  std::string s = "(" + rat_str(c.re);
  if (im_part[0] == '-')
    s += im_part;
  else
    s += "+" + im_part;
  return s + ")";
}

}  // namespace bvflow
