#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bvflow/expr.hpp"

namespace bvflow {

struct ParseError : std::runtime_error {
  int line = 0, col = 0;
  ParseError(int l, int c, const std::string& msg)
      : std::runtime_error("line " + std::to_string(l) + ", col " +
                           std::to_string(c) + ": " + msg),
        line(l),
        col(c) {}
};

// Field strength macro: name[mu,nu] or name[mu,nu,a] expands to the
// antisymmetrized derivative, plus the structure-constant bilinear when the
// base field carries a Lie index.
struct StrengthDef {
  int base_field = -1;
};

struct GaugeRule {
  int field = -1;
  std::vector<Idx> frees;  // LHS index names, free in rhs
  Density rhs;
};

struct RegulatorSpec {
  enum class Shape { K2, CallanSymanzik, Polynomial };
  Shape shape = Shape::K2;
  std::vector<double> poly;  // Polynomial: q_k = sum_j poly[j] * k^j
  std::vector<int> targets;  // declared generators entering the quadratic form

  double value(double k) const;
  double deriv(double k) const;  // d q_k / d k
};

struct Truncation {
  enum class Scheme { LocalPotential, GaugeSymmetric };
  Scheme scheme = Scheme::LocalPotential;
  int order = 4;
  double mu = 1.0;
  std::vector<std::string> coupling_names;
  std::vector<double> init;
};

class Model {
 public:
  std::string name;
  int dim = 4;
  SymbolTable table;
  std::vector<int> declared;  // generator ids in declaration order
  std::map<std::string, StrengthDef> strengths;
  Density invariant_action;
  std::vector<GaugeRule> gauge;
  Density fermion;  // gauge fixing fermion, empty when absent
  RegulatorSpec regulator;
  std::optional<Truncation> truncation;

  int eta = -1, qk = -1, gk = -1, hbar = -1;

  // sum over gauge rules of (s chi) * chi_af
  Density antifield_action() const;
  // I = I_inv + antifield terms; the generator of s on fields and antifields
  Density classical_action() const;
  // I + qk * eta_af, extending s by  s eta = qk
  Density brst_action() const;
  // sum over regulator targets of the quadratic density (1/2 phi phi,
  // 1/2 A_mu A_mu, cbar c for a ghost pair)
  Density regulator_quadform() const;

  // all (generator, antifield) pairs in declaration order, eta last
  std::vector<std::pair<int, int>> antibracket_pairs() const;
  // all (generator, source) pairs, eta last
  std::vector<std::pair<int, int>> source_pairs() const;
};

// Expression parser over a symbol table; strength macros optional.
Density parse_expression(const std::string& text, const SymbolTable& t,
                         const std::map<std::string, StrengthDef>* strengths =
                             nullptr);

Model parse_model(const std::string& text);
Model load_model(const std::string& path);

}  // namespace bvflow
