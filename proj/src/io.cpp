#include "bvflow/io.hpp"

namespace bvflow {

namespace {

std::string print_factor(const SymbolTable& t, const Factor& f) {
  std::string core = t.at(f.sym).name;
  if (!f.idx.empty()) {
    core += "[";
    for (size_t i = 0; i < f.idx.size(); ++i) {
      if (i) core += ",";
      core += index_name(f.idx[i].id);
    }
    core += "]";
  }
  for (auto it = f.derivs.rbegin(); it != f.derivs.rend(); ++it)
    core = "d[" + index_name(it->id) + "](" + core + ")";
  return core;
}

bool display_negative(const Coeff& c) {
  if (c.re != 0) return c.re < 0;
  return c.im < 0;
}

}  // namespace

std::string print_monomial(const SymbolTable& t, const Monomial& m) {
  std::string s;
  if (m.fs.empty()) return coeff_str(m.c);
  if (m.c.is_one())
    s = "";
  else if ((-m.c).is_one())
    s = "-";
  else
    s = coeff_str(m.c) + "*";
  for (size_t i = 0; i < m.fs.size(); ++i) {
    if (i) s += "*";
    s += print_factor(t, m.fs[i]);
  }
  for (const DeltaFactor& df : m.deltas)
    s += "*<delta^" + std::to_string(df.deriv_order) + ">";
  return s;
}

std::string print_density(const SymbolTable& t, const Density& d) {
  if (d.terms.empty()) return "0";
  std::string s;
  for (size_t i = 0; i < d.terms.size(); ++i) {
    const Monomial& m = d.terms[i];
    if (i == 0) {
      s += print_monomial(t, m);
    } else if (display_negative(m.c)) {
      Monomial w = m;
      w.c = -w.c;
      s += " - " + print_monomial(t, w);
    } else {
      s += " + " + print_monomial(t, m);
    }
  }
  return s;
}

}  // namespace bvflow
