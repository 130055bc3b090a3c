#include "gridplan/milp/lp_format.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace gridplan::milp {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_terms(std::ostream& os, const std::vector<std::pair<std::int32_t, double>>& terms,
                 const MilpInstance& mi) {
  bool first = true;
  for (const auto& [v, c] : terms) {
    if (c >= 0) {
      os << (first ? "" : " + ") << num(c);
    } else {
      os << (first ? "- " : " - ") << num(-c);
    }
    os << " " << mi.variable(v).name;
    first = false;
  }
}

}  // namespace

void write_lp(const MilpInstance& mi, std::ostream& os) {
  os << "\\ LP export\n";
  os << "Minimize\n obj:";
  {
    bool wrote = false;
    for (std::size_t j = 0; j < mi.num_vars(); ++j) {
      const double c = mi.objective_coef(static_cast<std::int32_t>(j));
      if (c == 0.0) continue;
      if (c >= 0)
        os << (wrote ? " + " : " ") << num(c);
      else
        os << (wrote ? " - " : " - ") << num(-c);
      os << " " << mi.variable(j).name;
      wrote = true;
    }
    const double k = mi.objective_constant();
    if (k != 0.0 || !wrote) {
      if (k >= 0)
        os << (wrote ? " + " : " ") << num(k);
      else
        os << " - " << num(-k);
    }
  }
  os << "\nSubject To\n";
  for (const auto& row : mi.rows()) {
    if (row.terms.empty()) throw Error("cannot export empty row: " + row.name);
    os << " " << row.name << ": ";
    write_terms(os, row.terms, mi);
    os << (row.sense == RowSense::le ? " <= " : row.sense == RowSense::ge ? " >= " : " = ");
    os << num(row.rhs) << "\n";
  }
  os << "Bounds\n";
  for (const auto& v : mi.variables()) {
    os << " ";
    if (v.lower == v.upper) {
      os << v.name << " = " << num(v.lower);
    } else if (!std::isfinite(v.lower) && !std::isfinite(v.upper)) {
      os << v.name << " free";
    } else {
      os << (std::isfinite(v.lower) ? num(v.lower) : "-inf") << " <= " << v.name << " <= "
         << (std::isfinite(v.upper) ? num(v.upper) : "+inf");
    }
    os << "\n";
  }
  bool any_int = false, any_bin = false;
  for (const auto& v : mi.variables()) {
    any_int |= v.kind == VarKind::integer;
    any_bin |= v.kind == VarKind::binary;
  }
  if (any_int) {
    os << "Generals\n";
    for (const auto& v : mi.variables())
      if (v.kind == VarKind::integer) os << " " << v.name << "\n";
  }
  if (any_bin) {
    os << "Binaries\n";
    for (const auto& v : mi.variables())
      if (v.kind == VarKind::binary) os << " " << v.name << "\n";
  }
  os << "End\n";
}

void write_lp_file(const MilpInstance& mi, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open for writing: " + path);
  write_lp(mi, os);
}

namespace {

struct Token {
  enum Kind { word, number, op, colon, end } kind;
  std::string text;
  double value = 0.0;
};

class Lexer {
 public:
  explicit Lexer(std::istream& is) {
    std::string line;
    while (std::getline(is, line)) {
      const auto bs = line.find('\\');
      if (bs != std::string::npos) line.erase(bs);
      buf_ += line;
      buf_ += '\n';
    }
    pos_ = 0;
    advance();
  }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < buf_.size() && std::isspace(static_cast<unsigned char>(buf_[pos_]))) ++pos_;
    if (pos_ >= buf_.size()) {
      tok_ = {Token::end, "", 0};
      return;
    }
    const char c = buf_[pos_];
    if (c == ':') {
      ++pos_;
      tok_ = {Token::colon, ":", 0};
      return;
    }
    if (c == '<' || c == '>' || c == '=') {
      std::string op(1, c);
      ++pos_;
      if (pos_ < buf_.size() && buf_[pos_] == '=') {
        op += '=';
        ++pos_;
      }
      tok_ = {Token::op, op, 0};
      return;
    }
    if (c == '+' || c == '-') {
      ++pos_;
      tok_ = {Token::op, std::string(1, c), 0};
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      while (pos_ < buf_.size() &&
             (std::isdigit(static_cast<unsigned char>(buf_[pos_])) || buf_[pos_] == '.' ||
              buf_[pos_] == 'e' || buf_[pos_] == 'E' ||
              ((buf_[pos_] == '+' || buf_[pos_] == '-') &&
               (buf_[pos_ - 1] == 'e' || buf_[pos_ - 1] == 'E'))))
        ++pos_;
      const std::string text = buf_.substr(start, pos_ - start);
      tok_ = {Token::number, text, std::strtod(text.c_str(), nullptr)};
      return;
    }
    // Identifier: letters, digits and LP-safe punctuation.
    std::size_t start = pos_;
    auto ident_char = [](char ch) {
      return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '(' || ch == ')' ||
             ch == ',' || ch == '@' || ch == '.' || ch == '[' || ch == ']' || ch == '#' ||
             ch == '\'' || ch == '!';
    };
    while (pos_ < buf_.size() && ident_char(buf_[pos_])) ++pos_;
    if (pos_ == start) throw Error(std::string("LP parse: unexpected character '") + c + "'");
    tok_ = {Token::word, buf_.substr(start, pos_ - start), 0};
  }

  std::string buf_;
  std::size_t pos_ = 0;
  Token tok_;
};

bool word_is(const Token& t, const char* a, const char* b = nullptr) {
  if (t.kind != Token::word) return false;
  std::string low;
  for (char c : t.text) low += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return low == a || (b && low == b);
}

bool is_section_start(const Token& t) {
  return word_is(t, "subject", "st") || word_is(t, "s.t.") || word_is(t, "bounds", "bound") ||
         word_is(t, "generals", "general") || word_is(t, "integers", "integer") ||
         word_is(t, "binaries", "binary") || word_is(t, "end") ||
         word_is(t, "minimize", "minimise") || word_is(t, "min") || word_is(t, "such");
}

}  // namespace

MilpInstance read_lp(std::istream& is) {
  Lexer lex(is);
  MilpInstance mi;

  struct VarDecl {
    double lower = 0.0;
    double upper = kInf;
    bool lower_set = false, upper_set = false;
    VarKind kind = VarKind::continuous;
  };
  std::vector<std::string> var_order;
  std::unordered_map<std::string, std::size_t> var_slot;
  std::vector<VarDecl> decls;
  auto slot_of = [&](const std::string& name) {
    auto it = var_slot.find(name);
    if (it != var_slot.end()) return it->second;
    var_slot.emplace(name, var_order.size());
    var_order.push_back(name);
    decls.emplace_back();
    return var_order.size() - 1;
  };

  struct RawRow {
    std::string name;
    std::vector<std::pair<std::size_t, double>> terms;
    RowSense sense;
    double rhs;
  };
  std::vector<RawRow> raw_rows;
  std::vector<std::pair<std::size_t, double>> obj_terms;
  double obj_const = 0.0;

  // Objective header.
  if (!(word_is(lex.peek(), "minimize", "minimise") || word_is(lex.peek(), "min")))
    throw Error("LP parse: expected Minimize");
  lex.take();

  // Linear expression, returns terms + constant; stops at sense op/section.
  auto parse_expr = [&](std::vector<std::pair<std::size_t, double>>& terms, double& constant) {
    double sign = 1.0;
    bool have_sign = false;
    for (;;) {
      const Token& t = lex.peek();
      if (t.kind == Token::end) return;
      if (t.kind == Token::op && (t.text == "+" || t.text == "-")) {
        lex.take();
        sign *= (t.text == "-") ? -1.0 : 1.0;
        have_sign = true;
        continue;
      }
      if (t.kind == Token::op) return;  // sense operator
      if (t.kind == Token::number) {
        const double v = lex.take().value;
        if (lex.peek().kind == Token::word && !is_section_start(lex.peek())) {
          const auto s = slot_of(lex.take().text);
          terms.emplace_back(s, sign * v);
        } else {
          constant += sign * v;
        }
        sign = 1.0;
        have_sign = false;
        continue;
      }
      if (t.kind == Token::word) {
        if (is_section_start(t) && !have_sign) return;
        const auto s = slot_of(lex.take().text);
        terms.emplace_back(s, sign);
        sign = 1.0;
        have_sign = false;
        continue;
      }
      return;
    }
  };

  // Objective: optional name.
  {
    Token t = lex.peek();
    if (t.kind == Token::word && !is_section_start(t)) {
      // Lookahead for colon.
      Token name = lex.take();
      if (lex.peek().kind == Token::colon) {
        lex.take();
      } else {
        // Not a name: first term variable with implicit coefficient 1.
        obj_terms.emplace_back(slot_of(name.text), 1.0);
      }
    }
    parse_expr(obj_terms, obj_const);
  }

  if (!(word_is(lex.peek(), "subject", "st") || word_is(lex.peek(), "s.t.") ||
        word_is(lex.peek(), "such")))
    throw Error("LP parse: expected Subject To");
  lex.take();
  if (word_is(lex.peek(), "to")) lex.take();
  if (word_is(lex.peek(), "that")) lex.take();

  // Rows until a non-row section.
  int auto_row = 0;
  for (;;) {
    const Token& t = lex.peek();
    if (t.kind == Token::end || word_is(t, "bounds", "bound") || word_is(t, "generals", "general") ||
        word_is(t, "integers", "integer") || word_is(t, "binaries", "binary") || word_is(t, "end"))
      break;
    RawRow row;
    Token first = lex.take();
    if (first.kind == Token::word && lex.peek().kind == Token::colon) {
      lex.take();
      row.name = first.text;
    } else {
      row.name = "c" + std::to_string(auto_row);
      if (first.kind == Token::word) {
        row.terms.emplace_back(slot_of(first.text), 1.0);
      } else if (first.kind == Token::number) {
        if (lex.peek().kind == Token::word) {
          row.terms.emplace_back(slot_of(lex.take().text), first.value);
        }
      } else if (first.kind == Token::op && (first.text == "+" || first.text == "-")) {
        // Push back handling: treat as sign of next term, easiest to re-parse.
        double constant = 0.0;
        double sign = first.text == "-" ? -1.0 : 1.0;
        if (lex.peek().kind == Token::number) {
          const double v = lex.take().value;
          if (lex.peek().kind == Token::word)
            row.terms.emplace_back(slot_of(lex.take().text), sign * v);
          else
            constant += sign * v;
        } else if (lex.peek().kind == Token::word) {
          row.terms.emplace_back(slot_of(lex.take().text), sign);
        }
        (void)constant;
      }
    }
    double row_const = 0.0;
    parse_expr(row.terms, row_const);
    const Token op = lex.take();
    if (op.kind != Token::op) throw Error("LP parse: expected row sense in " + row.name);
    row.sense = op.text == "<=" || op.text == "<"   ? RowSense::le
                : op.text == ">=" || op.text == ">" ? RowSense::ge
                                                    : RowSense::eq;
    double rhs_sign = 1.0;
    while (lex.peek().kind == Token::op && (lex.peek().text == "+" || lex.peek().text == "-"))
      rhs_sign *= lex.take().text == "-" ? -1.0 : 1.0;
    const Token rhs = lex.take();
    if (rhs.kind != Token::number) throw Error("LP parse: expected rhs in " + row.name);
    row.rhs = rhs_sign * rhs.value - row_const;
    raw_rows.push_back(std::move(row));
    ++auto_row;
  }

  // Bounds. The line order doubles as the canonical variable order when the
  // section covers every variable (exports always do), so index order
  // survives a round trip.
  std::vector<std::size_t> bounds_order;
  std::vector<bool> in_bounds_order;
  auto note_bounds_slot = [&](std::size_t s) {
    if (in_bounds_order.size() < decls.size()) in_bounds_order.resize(decls.size(), false);
    if (!in_bounds_order[s]) {
      in_bounds_order[s] = true;
      bounds_order.push_back(s);
    }
  };
  if (word_is(lex.peek(), "bounds", "bound")) {
    lex.take();
    for (;;) {
      const Token& t = lex.peek();
      if (t.kind == Token::end || word_is(t, "generals", "general") ||
          word_is(t, "integers", "integer") || word_is(t, "binaries", "binary") ||
          word_is(t, "end"))
        break;
      // Forms: "lo <= x <= hi", "x <= hi", "x >= lo", "x = v", "x free".
      double sign = 1.0;
      auto read_signed_value = [&]() {
        double s = 1.0;
        while (lex.peek().kind == Token::op && (lex.peek().text == "+" || lex.peek().text == "-"))
          s *= lex.take().text == "-" ? -1.0 : 1.0;
        Token v = lex.take();
        if (v.kind == Token::number) return s * v.value;
        if (v.kind == Token::word && (word_is(v, "inf", "infinity"))) return s * kInf;
        throw Error("LP parse: expected bound value");
      };
      (void)sign;
      if (lex.peek().kind == Token::number ||
          (lex.peek().kind == Token::op &&
           (lex.peek().text == "+" || lex.peek().text == "-"))) {
        const double lo = read_signed_value();
        Token op = lex.take();
        if (op.kind != Token::op) throw Error("LP parse: malformed bound line");
        Token name = lex.take();
        const auto s = slot_of(name.text);
        note_bounds_slot(s);
        decls[s].lower = lo;
        decls[s].lower_set = true;
        if (lex.peek().kind == Token::op &&
            (lex.peek().text == "<=" || lex.peek().text == "<")) {
          lex.take();
          decls[s].upper = read_signed_value();
          decls[s].upper_set = true;
        }
      } else {
        Token name = lex.take();
        if (name.kind != Token::word) throw Error("LP parse: malformed bound line");
        if (word_is(lex.peek(), "free")) {
          lex.take();
          const auto s = slot_of(name.text);
          note_bounds_slot(s);
          decls[s].lower = -kInf;
          decls[s].upper = kInf;
          decls[s].lower_set = decls[s].upper_set = true;
          continue;
        }
        Token op = lex.take();
        if (op.kind != Token::op) throw Error("LP parse: malformed bound line");
        const double v = read_signed_value();
        const auto s = slot_of(name.text);
        note_bounds_slot(s);
        if (op.text == "<=" || op.text == "<") {
          decls[s].upper = v;
          decls[s].upper_set = true;
        } else if (op.text == ">=" || op.text == ">") {
          decls[s].lower = v;
          decls[s].lower_set = true;
        } else {
          decls[s].lower = decls[s].upper = v;
          decls[s].lower_set = decls[s].upper_set = true;
        }
      }
    }
  }

  auto read_kind_section = [&](VarKind kind) {
    lex.take();
    for (;;) {
      const Token& t = lex.peek();
      if (t.kind != Token::word || is_section_start(t)) break;
      decls[slot_of(lex.take().text)].kind = kind;
    }
  };
  for (;;) {
    if (word_is(lex.peek(), "generals", "general") || word_is(lex.peek(), "integers", "integer"))
      read_kind_section(VarKind::integer);
    else if (word_is(lex.peek(), "binaries", "binary"))
      read_kind_section(VarKind::binary);
    else
      break;
  }
  if (word_is(lex.peek(), "end")) lex.take();

  std::vector<std::size_t> slot_order;
  if (bounds_order.size() == var_order.size()) {
    slot_order = bounds_order;
  } else {
    slot_order.resize(var_order.size());
    for (std::size_t s = 0; s < var_order.size(); ++s) slot_order[s] = s;
  }
  std::vector<std::int32_t> var_of_slot(var_order.size());
  for (const auto s : slot_order) {
    const auto& d = decls[s];
    double lo = d.lower_set ? d.lower : 0.0;
    double hi = d.upper_set ? d.upper : kInf;
    if (d.kind == VarKind::binary) {
      if (!d.lower_set) lo = 0.0;
      if (!d.upper_set) hi = 1.0;
    }
    var_of_slot[s] = mi.add_variable(var_order[s], lo, hi, d.kind);
  }
  for (const auto& [s, c] : obj_terms) mi.add_objective(var_of_slot[s], c);
  mi.add_objective_constant(obj_const);
  for (auto& row : raw_rows) {
    std::vector<std::pair<std::int32_t, double>> terms;
    terms.reserve(row.terms.size());
    for (const auto& [s, c] : row.terms) terms.emplace_back(var_of_slot[s], c);
    mi.add_row_terms(row.name, row.sense, row.rhs, std::move(terms));
  }
  mi.validate();
  return mi;
}

MilpInstance read_lp_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open LP file: " + path);
  return read_lp(is);
}

}  // namespace gridplan::milp
