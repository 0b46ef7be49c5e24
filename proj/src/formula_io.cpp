#include "qdl/formula_io.hpp"

#include <cctype>
#include <charconv>
#include <vector>

namespace qdl {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Parser {
 public:
  Parser(std::string_view text, AtomTable* mutable_atoms, const AtomTable& atoms)
      : text_(text), mutable_atoms_(mutable_atoms), atoms_(atoms) {}

  Formula parse() {
    auto f = equivalence();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg + " at column " + std::to_string(pos_ + 1) + " in \"" + std::string(text_) + "\"");
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(std::string_view tok) {
    skip_space();
    if (text_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }

  Formula equivalence() {
    auto lhs = implication();
    while (accept("<->")) lhs = Formula::iff(lhs, implication());
    return lhs;
  }

  Formula implication() {
    auto lhs = disjunction();
    skip_space();
    if (accept("->")) return Formula::implies(lhs, implication());
    return lhs;
  }

  Formula disjunction() {
    std::vector<Formula> parts{conjunction()};
    while (accept("|")) parts.push_back(conjunction());
    if (parts.size() == 1) return parts.front();
    return Formula::disj(std::move(parts));
  }

  Formula conjunction() {
    std::vector<Formula> parts{unary()};
    while (accept("&")) parts.push_back(unary());
    if (parts.size() == 1) return parts.front();
    return Formula::conj(std::move(parts));
  }

  Formula unary() {
    if (accept("~")) return Formula::negate(unary());
    return primary();
  }

  Formula primary() {
    skip_space();
    if (accept("(")) {
      auto f = equivalence();
      expect(")");
      return f;
    }
    if (pos_ >= text_.size() || !ident_start(text_[pos_])) fail("expected a formula");
    const auto start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    if (name == "thr") {
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == '(') return threshold();
    }
    // Optional argument list: p(a, b) is the atom "p(a,b)".
    const auto save = pos_;
    if (accept("(")) {
      name += '(';
      bool first = true;
      while (true) {
        skip_space();
        const auto arg_start = pos_;
        while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
        if (pos_ == arg_start) {
          if (first && accept(")")) {
            pos_ = save;
            name.pop_back();
            break;
          }
          fail("expected an argument");
        }
        if (!first) name += ',';
        name.append(text_.substr(arg_start, pos_ - arg_start));
        first = false;
        if (accept(")")) {
          name += ')';
          break;
        }
        expect(",");
      }
    }
    return Formula::atom(resolve(name));
  }

  Formula threshold() {
    expect("(");
    const Weight bound = integer();
    expect(";");
    std::vector<WeightedTerm> terms;
    skip_space();
    if (!accept(")")) {
      do {
        terms.push_back(term());
      } while (accept(","));
      expect(")");
    }
    try {
      return Formula::threshold(std::move(terms), bound);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }

  WeightedTerm term() {
    skip_space();
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+' ||
                                std::isdigit(static_cast<unsigned char>(text_[pos_])))) {
      const Weight w = integer();
      expect("*");
      return {w, equivalence()};
    }
    return {1, equivalence()};
  }

  Weight integer() {
    skip_space();
    const auto start = pos_;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) ++pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    auto digits = text_.substr(start, pos_ - start);
    if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
    Weight value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec == std::errc::result_out_of_range) fail("integer out of 64-bit range");
    if (ec != std::errc() || ptr != digits.data() + digits.size()) fail("expected an integer");
    return value;
  }

  AtomId resolve(const std::string& name) {
    if (mutable_atoms_) return mutable_atoms_->intern(name);
    if (auto id = atoms_.find(name)) return *id;
    fail("unknown atom '" + name + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  AtomTable* mutable_atoms_;
  const AtomTable& atoms_;
};

bool infix(const Formula& f) { return f.is_conjunction() || f.is_disjunction(); }

void print(const Formula& f, const AtomTable& atoms, std::string& out, bool nested) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
      out += atoms.name(f.atom_id());
      return;
    case Formula::Kind::Not:
      out += '~';
      print(f.child(), atoms, out, true);
      return;
    case Formula::Kind::Threshold:
      break;
  }
  if (infix(f)) {
    const char* sep = f.is_conjunction() ? " & " : " | ";
    if (nested) out += '(';
    bool first = true;
    for (const auto& t : f.terms()) {
      if (!first) out += sep;
      first = false;
      print(t.formula, atoms, out, true);
    }
    if (nested) out += ')';
    return;
  }
  out += "thr(" + std::to_string(f.bound()) + ";";
  bool first = true;
  for (const auto& t : f.terms()) {
    out += first ? " " : ", ";
    first = false;
    out += std::to_string(t.weight) + "*";
    print(t.formula, atoms, out, true);
  }
  out += ')';
}

}  // namespace

Formula parse_formula(std::string_view text, AtomTable& atoms, UnknownAtoms policy) {
  Parser p(text, policy == UnknownAtoms::Intern ? &atoms : nullptr, atoms);
  return p.parse();
}

Formula parse_formula(std::string_view text, const AtomTable& atoms) {
  Parser p(text, nullptr, atoms);
  return p.parse();
}

std::string to_string(const Formula& f, const AtomTable& atoms) {
  std::string out;
  print(f, atoms, out, false);
  return out;
}

bool is_atom_name(std::string_view name) {
  if (name.empty() || !ident_start(name.front())) return false;
  std::size_t i = 0;
  while (i < name.size() && ident_char(name[i])) ++i;
  if (i == name.size()) return name != "thr";
  if (name[i] != '(' || name.back() != ')') return false;
  ++i;
  bool need_arg = true;
  for (; i + 1 < name.size(); ++i) {
    if (ident_char(name[i])) {
      need_arg = false;
    } else if (name[i] == ',' && !need_arg) {
      need_arg = true;
    } else {
      return false;
    }
  }
  return !need_arg;
}

}  // namespace qdl
