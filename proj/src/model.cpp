#include "bvflow/model.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace bvflow {

namespace {

enum class Tok {
  Ident,
  Num,
  Plus,
  Minus,
  Star,
  Slash,
  Caret,
  LParen,
  RParen,
  LBrack,
  RBrack,
  Comma,
  Arrow,
  Equals,
  End
};

struct Token {
  Tok kind;
  std::string text;
  int line, col;
};

struct Lexer {
  const std::string& s;
  size_t p = 0;
  int line, col = 1;

  Lexer(const std::string& text, int line0) : s(text), line(line0) {}

  Token next() {
    while (p < s.size() && (s[p] == ' ' || s[p] == '\t')) {
      ++p;
      ++col;
    }
    if (p >= s.size() || s[p] == '#') return {Tok::End, "", line, col};
    int c0 = col;
    char c = s[p];
    auto one = [&](Tok k) {
      ++p;
      ++col;
      return Token{k, std::string(1, c), line, c0};
    };
    switch (c) {
      case '+': return one(Tok::Plus);
      case '*': return one(Tok::Star);
      case '/': return one(Tok::Slash);
      case '^': return one(Tok::Caret);
      case '(': return one(Tok::LParen);
      case ')': return one(Tok::RParen);
      case '[': return one(Tok::LBrack);
      case ']': return one(Tok::RBrack);
      case ',': return one(Tok::Comma);
      case '=': return one(Tok::Equals);
      case '-':
        if (p + 1 < s.size() && s[p + 1] == '>') {
          p += 2;
          col += 2;
          return {Tok::Arrow, "->", line, c0};
        }
        return one(Tok::Minus);
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string num;
      while (p < s.size() &&
             (std::isdigit(static_cast<unsigned char>(s[p])) || s[p] == '.')) {
        num += s[p++];
        ++col;
      }
      return {Tok::Num, num, line, c0};
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string id;
      while (p < s.size() && (std::isalnum(static_cast<unsigned char>(s[p])) ||
                              s[p] == '_')) {
        id += s[p++];
        ++col;
      }
      return {Tok::Ident, id, line, c0};
    }
    throw ParseError(line, c0, std::string("unexpected character '") + c + "'");
  }
};

struct ExprParser {
  std::vector<Token> toks;
  size_t pos = 0;
  const SymbolTable& t;
  const std::map<std::string, StrengthDef>* strengths;
  int fresh = 0;

  ExprParser(const std::string& text, int line0, const SymbolTable& table,
             const std::map<std::string, StrengthDef>* st)
      : t(table), strengths(st) {
    Lexer lx(text, line0);
    for (;;) {
      Token tk = lx.next();
      toks.push_back(tk);
      if (tk.kind == Tok::End) break;
    }
  }

  const Token& peek() const { return toks[pos]; }
  Token eat() { return toks[pos++]; }
  Token expect(Tok k, const std::string& what) {
    if (peek().kind != k)
      throw ParseError(peek().line, peek().col,
                       "expected " + what + ", got '" + peek().text + "'");
    return eat();
  }

  Density parse() {
    Density d = parse_sum();
    if (peek().kind != Tok::End)
      throw ParseError(peek().line, peek().col,
                       "trailing input '" + peek().text + "'");
    return normalize(t, std::move(d));
  }

  Density parse_sum() {
    bool neg = false;
    if (peek().kind == Tok::Minus) {
      eat();
      neg = true;
    }
    Density d = parse_term();
    if (neg) d = scale(d, Coeff(-1));
    for (;;) {
      if (peek().kind == Tok::Plus) {
        eat();
        d = add_raw(d, parse_term());
      } else if (peek().kind == Tok::Minus) {
        eat();
        d = add_raw(d, scale(parse_term(), Coeff(-1)));
      } else {
        return d;
      }
    }
  }

  Density parse_term() {
    Density d = parse_pow();
    for (;;) {
      if (peek().kind == Tok::Star) {
        eat();
        d = mul_raw(d, parse_pow());
      } else if (peek().kind == Tok::Slash) {
        Token tk = eat();
        Density q = parse_pow();
        Coeff c = constant_of(q, tk);
        d = scale(d, Coeff(1) / c);
      } else {
        return d;
      }
    }
  }

  Coeff constant_of(const Density& qr, const Token& at) {
    Density q = normalize(t, qr);
    if (q.terms.empty())
      throw ParseError(at.line, at.col, "division by zero");
    if (q.terms.size() != 1 || !q.terms[0].fs.empty())
      throw ParseError(at.line, at.col,
                       "division only by numeric constants");
    return q.terms[0].c;
  }

  Density parse_pow() {
    Density d = parse_atom();
    if (peek().kind == Tok::Caret) {
      Token tk = eat();
      Token n = expect(Tok::Num, "integer exponent");
      if (n.text.find('.') != std::string::npos)
        throw ParseError(n.line, n.col, "integer exponent required");
      int e = std::stoi(n.text);
      (void)tk;
      if (e < 0) throw ParseError(n.line, n.col, "negative power");
      Density r = make_const(t, Coeff(1));
      for (int j = 0; j < e; ++j) r = mul_raw(r, d);
      d = std::move(r);
    }
    return d;
  }

  std::vector<std::string> parse_index_names() {
    expect(Tok::LBrack, "'['");
    std::vector<std::string> names;
    for (;;) {
      Token id = expect(Tok::Ident, "index name");
      names.push_back(id.text);
      if (peek().kind == Tok::Comma) {
        eat();
        continue;
      }
      expect(Tok::RBrack, "']'");
      return names;
    }
  }

  Density parse_atom() {
    Token tk = peek();
    if (tk.kind == Tok::Num) {
      eat();
      if (tk.text.find('.') != std::string::npos)
        throw ParseError(tk.line, tk.col,
                         "decimal literals are not exact; use fractions");
      return make_const(t, Coeff(Rat(Int(tk.text))));
    }
    if (tk.kind == Tok::LParen) {
      eat();
      Density d = parse_sum();
      expect(Tok::RParen, "')'");
      return d;
    }
    if (tk.kind != Tok::Ident)
      throw ParseError(tk.line, tk.col, "expected expression");
    eat();
    if (tk.text == "i") return make_const(t, Coeff::i_unit());
    if (tk.text == "d" && peek().kind == Tok::LBrack) {
      std::vector<std::string> names = parse_index_names();
      if (names.size() != 1)
        throw ParseError(tk.line, tk.col, "d[] takes one index");
      expect(Tok::LParen, "'('");
      Density inner = parse_sum();
      expect(Tok::RParen, "')'");
      Idx mu{IndexSpace::Lorentz, intern_index(names[0])};
      return derivative_raw(t, mu, inner);
    }
    if (strengths && strengths->count(tk.text))
      return parse_strength(tk);
    int sym = t.find(tk.text);
    if (sym < 0)
      throw ParseError(tk.line, tk.col, "unknown generator: " + tk.text);
    const SymbolInfo& si = t.at(sym);
    std::vector<Idx> idx;
    if (peek().kind == Tok::LBrack) {
      std::vector<std::string> names = parse_index_names();
      for (size_t j = 0; j < names.size(); ++j) {
        IndexSpace sp = static_cast<int>(j) < si.n_lorentz
                            ? IndexSpace::Lorentz
                            : IndexSpace::Lie;
        idx.push_back(Idx{sp, intern_index(names[j])});
      }
    }
    if (static_cast<int>(idx.size()) != si.n_lorentz + si.n_lie)
      throw ParseError(tk.line, tk.col,
                       "generator " + si.name + " takes " +
                           std::to_string(si.n_lorentz + si.n_lie) +
                           " indices");
    return make_symbol(t, sym, std::move(idx));
  }

  Density parse_strength(const Token& tk) {
    const StrengthDef& sd = strengths->at(tk.text);
    const SymbolInfo& base = t.at(sd.base_field);
    std::vector<std::string> names = parse_index_names();
    size_t want = 2 + (base.n_lie ? 1 : 0);
    if (names.size() != want)
      throw ParseError(tk.line, tk.col,
                       tk.text + " takes " + std::to_string(want) +
                           " indices");
    Idx mu{IndexSpace::Lorentz, intern_index(names[0])};
    Idx nu{IndexSpace::Lorentz, intern_index(names[1])};
    auto vec = [&](Idx lor, std::optional<Idx> lie) {
      std::vector<Idx> idx = {lor};
      if (lie) idx.push_back(*lie);
      return idx;
    };
    std::optional<Idx> a;
    if (base.n_lie) a = Idx{IndexSpace::Lie, intern_index(names[2])};
    Density dmuAnu = derivative_raw(
        t, mu, make_symbol(t, sd.base_field, vec(nu, a)));
    Density dnuAmu = derivative_raw(
        t, nu, make_symbol(t, sd.base_field, vec(mu, a)));
    Density out = add_raw(dmuAnu, scale(dnuAmu, Coeff(-1)));
    if (base.n_lie) {
      int fsym = -1;
      for (int k = 0; k < t.size(); ++k)
        if (t.at(k).sector == Sector::StructConst) fsym = k;
      if (fsym < 0)
        throw ParseError(tk.line, tk.col,
                         "strength on a Lie-indexed field needs a declared "
                         "structure constant");
      Idx b{IndexSpace::Lie, intern_index("#f" + std::to_string(fresh) + "b")};
      Idx c{IndexSpace::Lie, intern_index("#f" + std::to_string(fresh) + "c")};
      ++fresh;
      Density ff = make_symbol(t, fsym, {*a, b, c});
      Density Ab = make_symbol(t, sd.base_field, vec(mu, b));
      Density Ac = make_symbol(t, sd.base_field, vec(nu, c));
      out = add_raw(out, mul_raw(mul_raw(ff, Ab), Ac));
    }
    return out;
  }
};

double poly_value(const std::vector<double>& poly, double k) {
  double v = 0, kp = 1;
  for (double c : poly) {
    v += c * kp;
    kp *= k;
  }
  return v;
}

double poly_deriv(const std::vector<double>& poly, double k) {
  double v = 0, kp = 1;
  for (size_t j = 1; j < poly.size(); ++j) {
    v += poly[j] * j * kp;
    kp *= k;
  }
  return v;
}

}  // namespace

double RegulatorSpec::value(double k) const {
  switch (shape) {
    case Shape::K2:
    case Shape::CallanSymanzik: return k * k;
    case Shape::Polynomial: return poly_value(poly, k);
  }
  return 0;
}

double RegulatorSpec::deriv(double k) const {
  switch (shape) {
    case Shape::K2:
    case Shape::CallanSymanzik: return 2 * k;
    case Shape::Polynomial: return poly_deriv(poly, k);
  }
  return 0;
}

Density parse_expression(const std::string& text, const SymbolTable& t,
                         const std::map<std::string, StrengthDef>* strengths) {
  ExprParser p(text, 1, t, strengths);
  return p.parse();
}

Density Model::antifield_action() const {
  Density out;
  for (const GaugeRule& r : gauge) {
    if (r.rhs.is_zero()) continue;
    int af = table.antifield_of(r.field);
    Density aff = make_symbol(table, af, r.frees);
    out = add(table, out, mul(table, r.rhs, aff));
  }
  return out;
}

Density Model::classical_action() const {
  return add(table, invariant_action, antifield_action());
}

Density Model::brst_action() const {
  Density qa = mul(table, make_symbol(table, qk),
                   make_symbol(table, table.antifield_of(eta)));
  return add(table, classical_action(), qa);
}

Density Model::regulator_quadform() const {
  Density out;
  Coeff half(Rat(1) / 2);
  std::vector<int> ghosts, antighosts;
  for (int id : regulator.targets) {
    const SymbolInfo& si = table.at(id);
    if (si.sector == Sector::Ghost) {
      ghosts.push_back(id);
      continue;
    }
    if (si.sector == Sector::Antighost) {
      antighosts.push_back(id);
      continue;
    }
    std::vector<Idx> idx;
    if (si.n_lorentz) idx.push_back(Idx{IndexSpace::Lorentz, intern_index("#qmu")});
    if (si.n_lie) idx.push_back(Idx{IndexSpace::Lie, intern_index("#qa")});
    Density sq = mul(table, make_symbol(table, id, idx),
                     make_symbol(table, id, idx));
    out = add(table, out, scale(sq, half));
  }
  for (size_t j = 0; j < ghosts.size() && j < antighosts.size(); ++j) {
    const SymbolInfo& gi = table.at(ghosts[j]);
    std::vector<Idx> idx;
    if (gi.n_lie) idx.push_back(Idx{IndexSpace::Lie, intern_index("#qa")});
    Density pair = mul(table, make_symbol(table, antighosts[j], idx),
                       make_symbol(table, ghosts[j], idx));
    out = add(table, out, pair);
  }
  return out;
}

std::vector<std::pair<int, int>> Model::antibracket_pairs() const {
  std::vector<std::pair<int, int>> v;
  for (int id : declared) v.push_back({id, table.antifield_of(id)});
  v.push_back({eta, table.antifield_of(eta)});
  return v;
}

std::vector<std::pair<int, int>> Model::source_pairs() const {
  std::vector<std::pair<int, int>> v;
  for (int id : declared) v.push_back({id, table.source_of(id)});
  v.push_back({eta, table.source_of(eta)});
  return v;
}

namespace {

struct Line {
  int no;
  std::string text;
};

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> w;
  std::istringstream is(s);
  std::string x;
  while (is >> x) {
    if (x[0] == '#') break;
    w.push_back(x);
  }
  return w;
}

Rat parse_rat(const std::string& s, int line) {
  size_t slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rat(Int(s));
    return Rat(Int(s.substr(0, slash)), Int(s.substr(slash + 1)));
  } catch (...) {
    throw ParseError(line, 1, "bad rational: " + s);
  }
}

struct DeclAttrs {
  int lorentz = 0, lie = 0;
  std::optional<Rat> dim;
  std::optional<int> ghost;
  bool odd = false;
};

DeclAttrs parse_attrs(const std::vector<std::string>& w, size_t from,
                      int line) {
  DeclAttrs a;
  for (size_t j = from; j < w.size(); ++j) {
    const std::string& x = w[j];
    size_t eq = x.find('=');
    if (x == "odd") {
      a.odd = true;
      continue;
    }
    if (eq == std::string::npos)
      throw ParseError(line, 1, "bad attribute: " + x);
    std::string key = x.substr(0, eq), val = x.substr(eq + 1);
    if (key == "lorentz")
      a.lorentz = std::stoi(val);
    else if (key == "lie")
      a.lie = std::stoi(val);
    else if (key == "dim")
      a.dim = parse_rat(val, line);
    else if (key == "ghost")
      a.ghost = std::stoi(val);
    else
      throw ParseError(line, 1, "unknown attribute: " + key);
  }
  return a;
}

}  // namespace

Model parse_model(const std::string& text) {
  Model m;
  Rat d_rat;

  // reserved machinery symbols; declarations are checked against these
  auto init_machinery = [&]() {
    d_rat = Rat(m.dim);
    m.hbar = m.table.add(SymbolInfo{"hbar", Sector::Hbar, 0, 0, Grading{}, -1,
                                    false, false});
    m.qk = m.table.add(SymbolInfo{"qk", Sector::RegKernel, 0, 0,
                                  Grading{0, 0, 0, Rat(2)}, -1, false, false});
    m.gk = m.table.add(SymbolInfo{"Gk", Sector::RegKernel, 0, 0,
                                  Grading{0, 0, 0, Rat(-2)}, -1, false, true});
  };

  std::vector<Line> lines;
  {
    std::istringstream is(text);
    std::string ln;
    int no = 0;
    while (std::getline(is, ln)) {
      ++no;
      std::string stripped = ln;
      size_t h = stripped.find('#');
      if (h != std::string::npos) stripped = stripped.substr(0, h);
      size_t b = stripped.find_last_not_of(" \t\r");
      if (b == std::string::npos) continue;
      stripped = stripped.substr(0, b + 1);
      lines.push_back({no, stripped});
    }
  }

  std::string section;
  bool machinery_done = false;
  std::vector<std::pair<int, std::string>> action_lines, fermion_lines;
  std::vector<std::pair<int, std::pair<std::string, std::string>>> gauge_lines;
  std::vector<std::string> target_names;
  int target_line = 0;

  auto ensure_fields_ready = [&](int line) {
    if (!machinery_done) {
      init_machinery();
      machinery_done = true;
    }
    (void)line;
  };

  for (const Line& L : lines) {
    std::string s = L.text;
    size_t first = s.find_first_not_of(" \t");
    s = s.substr(first);
    if (s[0] == '[') {
      size_t close = s.find(']');
      if (close == std::string::npos)
        throw ParseError(L.no, 1, "unterminated section header");
      section = s.substr(1, close - 1);
      continue;
    }
    if (section == "model") {
      std::vector<std::string> w = split_words(s);
      if (w.size() == 2 && w[0] == "name") {
        m.name = w[1];
      } else if (w.size() == 2 && w[0] == "dimension") {
        m.dim = std::stoi(w[1]);
      } else {
        throw ParseError(L.no, 1, "bad model line");
      }
      continue;
    }
    if (section == "fields") {
      ensure_fields_ready(L.no);
      std::vector<std::string> w = split_words(s);
      if (w.size() < 2) throw ParseError(L.no, 1, "bad declaration");
      const std::string& kind = w[0];
      const std::string& name = w[1];
      bool reserved = m.table.find(name) >= 0 || name == "i" || name == "d" ||
                      name == "eta" ||
                      (name.size() > 3 &&
                       name.substr(name.size() - 3) == "_af") ||
                      (name.size() > 4 &&
                       name.substr(name.size() - 4) == "_src");
      if (reserved)
        throw ParseError(L.no, 1, "reserved or duplicate name: " + name);
      if (kind == "strength") {
        if (w.size() != 3) throw ParseError(L.no, 1, "strength NAME FIELD");
        int base = m.table.find(w[2]);
        if (base < 0) throw ParseError(L.no, 1, "unknown field: " + w[2]);
        const SymbolInfo& bi = m.table.at(base);
        if (bi.sector != Sector::Field || bi.n_lorentz != 1)
          throw ParseError(L.no, 1,
                           "strength base must be a Lorentz vector field: " +
                               w[2]);
        m.strengths[name] = StrengthDef{base};
        continue;
      }
      DeclAttrs a = parse_attrs(w, 2, L.no);
      SymbolInfo si;
      si.name = name;
      si.n_lorentz = a.lorentz;
      si.n_lie = a.lie;
      if (kind == "field") {
        si.sector = Sector::Field;
        si.g = Grading{0, 0, 0, a.dim ? *a.dim : (d_rat - 2) / 2};
      } else if (kind == "ghost") {
        si.sector = Sector::Ghost;
        si.g = Grading{1, 0, 1, a.dim ? *a.dim : Rat(0)};
      } else if (kind == "antighost") {
        si.sector = Sector::Antighost;
        si.g = Grading{-1, 0, 1, a.dim ? *a.dim : d_rat - 2};
      } else if (kind == "nl") {
        si.sector = Sector::NlField;
        si.g = Grading{0, 0, 0, a.dim ? *a.dim : d_rat - 2};
      } else if (kind == "testfn") {
        si.sector = Sector::Coupling;
        si.g = Grading{a.ghost ? *a.ghost : 0, 0, a.odd ? 1 : 0,
                       a.dim ? *a.dim : Rat(0)};
        si.jet_ok = true;
        m.table.add(si);
        continue;
      } else if (kind == "coupling") {
        si.sector = Sector::Coupling;
        si.g = Grading{0, 0, 0, a.dim ? *a.dim : Rat(0)};
        si.jet_ok = false;
        m.table.add(si);
        continue;
      } else if (kind == "struct") {
        si.sector = Sector::StructConst;
        si.n_lie = 3;
        si.antisym = true;
        si.jet_ok = false;
        m.table.add(si);
        continue;
      } else {
        throw ParseError(L.no, 1, "unknown declaration kind: " + kind);
      }
      int id = m.table.add_with_partners(si, d_rat);
      m.declared.push_back(id);
      continue;
    }
    if (section == "action") {
      action_lines.push_back({L.no, s});
      continue;
    }
    if (section == "gauge") {
      size_t arrow = s.find("->");
      if (arrow == std::string::npos)
        throw ParseError(L.no, 1, "gauge rule needs '->'");
      gauge_lines.push_back(
          {L.no, {s.substr(0, arrow), s.substr(arrow + 2)}});
      continue;
    }
    if (section == "fermion") {
      fermion_lines.push_back({L.no, s});
      continue;
    }
    if (section == "regulator") {
      std::vector<std::string> w = split_words(s);
      if (w.empty()) continue;
      if (w[0] == "shape") {
        if (w.size() < 2) throw ParseError(L.no, 1, "shape needs a name");
        if (w[1] == "k2")
          m.regulator.shape = RegulatorSpec::Shape::K2;
        else if (w[1] == "callan_symanzik")
          m.regulator.shape = RegulatorSpec::Shape::CallanSymanzik;
        else if (w[1] == "poly") {
          m.regulator.shape = RegulatorSpec::Shape::Polynomial;
          for (size_t j = 2; j < w.size(); ++j)
            m.regulator.poly.push_back(std::stod(w[j]));
        } else {
          throw ParseError(L.no, 1, "unknown regulator shape: " + w[1]);
        }
      } else if (w[0] == "targets") {
        target_names.assign(w.begin() + 1, w.end());
        target_line = L.no;
      } else {
        throw ParseError(L.no, 1, "bad regulator line");
      }
      continue;
    }
    if (section == "truncation") {
      std::vector<std::string> w = split_words(s);
      if (!m.truncation) m.truncation = Truncation{};
      if (w[0] == "scheme") {
        if (w.size() >= 2 && w[1] == "local_potential") {
          m.truncation->scheme = Truncation::Scheme::LocalPotential;
          m.truncation->order = w.size() >= 3 ? std::stoi(w[2]) : 4;
        } else if (w.size() >= 2 && w[1] == "gauge_symmetric") {
          m.truncation->scheme = Truncation::Scheme::GaugeSymmetric;
        } else {
          throw ParseError(L.no, 1, "unknown truncation scheme");
        }
      } else if (w[0] == "mu" && w.size() == 2) {
        m.truncation->mu = std::stod(w[1]);
      } else if (w[0] == "init" && w.size() == 3) {
        m.truncation->coupling_names.push_back(w[1]);
        m.truncation->init.push_back(std::stod(w[2]));
      } else {
        throw ParseError(L.no, 1, "bad truncation line");
      }
      continue;
    }
    throw ParseError(L.no, 1,
                     section.empty() ? "content before any section"
                                     : "unknown section: " + section);
  }

  if (!machinery_done) init_machinery();

  // eta and its partners exist in every model
  {
    SymbolInfo si;
    si.name = "eta";
    si.sector = Sector::Eta;
    si.g = Grading{-1, 0, 1, Rat(2)};
    m.eta = m.table.add_with_partners(si, d_rat);
  }

  for (auto& [no, txt] : action_lines) {
    ExprParser p(txt, no, m.table, &m.strengths);
    Density dterm = p.parse();
    if (!dterm.is_zero() && !is_homogeneous(m.table, dterm))
      throw ParseError(no, 1, "action line is not grading homogeneous");
    m.invariant_action = add(m.table, m.invariant_action, dterm);
  }
  if (!m.invariant_action.is_zero()) {
    Grading g = grading_of(m.table, m.invariant_action);
    if (g.ghost != 0 || g.parity != 0)
      throw ParseError(action_lines.empty() ? 1 : action_lines[0].first, 1,
                       "action must have ghost number 0 and even parity");
    if (g.dim != d_rat)
      throw ParseError(action_lines.empty() ? 1 : action_lines[0].first, 1,
                       "action density dimension must equal the spacetime "
                       "dimension");
    if (g.antifield != 0)
      throw ParseError(action_lines.empty() ? 1 : action_lines[0].first, 1,
                       "invariant action must be antifield free");
  }

  for (auto& [no, lr] : gauge_lines) {
    ExprParser lhs(lr.first, no, m.table, nullptr);
    Token name = lhs.expect(Tok::Ident, "field name");
    int field = m.table.find(name.text);
    if (field < 0) throw ParseError(no, name.col, "unknown field: " + name.text);
    const SymbolInfo& si = m.table.at(field);
    GaugeRule rule;
    rule.field = field;
    if (lhs.peek().kind == Tok::LBrack) {
      std::vector<std::string> names = lhs.parse_index_names();
      for (size_t j = 0; j < names.size(); ++j) {
        IndexSpace sp = static_cast<int>(j) < si.n_lorentz
                            ? IndexSpace::Lorentz
                            : IndexSpace::Lie;
        rule.frees.push_back(Idx{sp, intern_index(names[j])});
      }
    }
    if (static_cast<int>(rule.frees.size()) != si.n_lorentz + si.n_lie)
      throw ParseError(no, name.col, "gauge rule index count mismatch");
    if (lhs.peek().kind != Tok::End)
      throw ParseError(no, lhs.peek().col, "bad gauge rule left side");
    ExprParser rhs(lr.second, no, m.table, &m.strengths);
    rule.rhs = rhs.parse();
    if (!rule.rhs.is_zero()) {
      Grading gf = si.g, gr = grading_of(m.table, rule.rhs);
      if (gr.ghost != gf.ghost + 1 || gr.parity != ((gf.parity + 1) & 1) ||
          gr.dim != gf.dim || gr.antifield != 0)
        throw ParseError(no, 1,
                         "gauge variation of " + si.name +
                             " must raise ghost number by one, flip parity "
                             "and preserve dimension");
    }
    m.gauge.push_back(std::move(rule));
  }

  for (auto& [no, txt] : fermion_lines) {
    ExprParser p(txt, no, m.table, &m.strengths);
    m.fermion = add(m.table, m.fermion, p.parse());
  }
  if (!m.fermion.is_zero()) {
    Grading g = grading_of(m.table, m.fermion);
    if (g.ghost != -1 || g.parity != 1 || g.antifield != 0 || g.dim != d_rat)
      throw ParseError(fermion_lines[0].first, 1,
                       "gauge fixing fermion must be antifield free, odd, "
                       "ghost number -1, density dimension d");
  }

  for (const std::string& nm : target_names) {
    int id = m.table.find(nm);
    if (id < 0)
      throw ParseError(target_line, 1, "unknown regulator target: " + nm);
    const SymbolInfo& si = m.table.at(id);
    Rat need;
    if (si.sector == Sector::Ghost || si.sector == Sector::Antighost)
      need = si.g.dim;  // checked pairwise below
    else
      need = 2 * si.g.dim + 2;
    if (si.sector != Sector::Ghost && si.sector != Sector::Antighost &&
        need != d_rat)
      throw ParseError(target_line, 1,
                       "regulator target " + nm +
                           " breaks dimension homogeneity of the quadratic "
                           "form");
    m.regulator.targets.push_back(id);
  }
  {
    // ghost pair dimension check: qk + dim(cbar) + dim(c) must equal d
    std::vector<const SymbolInfo*> gs, as;
    for (int id : m.regulator.targets) {
      const SymbolInfo& si = m.table.at(id);
      if (si.sector == Sector::Ghost) gs.push_back(&si);
      if (si.sector == Sector::Antighost) as.push_back(&si);
    }
    if (gs.size() != as.size())
      throw ParseError(target_line, 1,
                       "regulator ghost targets must come in "
                       "antighost/ghost pairs");
    for (size_t j = 0; j < gs.size(); ++j)
      if (Rat(2) + gs[j]->g.dim + as[j]->g.dim != d_rat)
        throw ParseError(target_line, 1,
                         "regulator ghost pair breaks dimension homogeneity");
  }

  return m;
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace bvflow
