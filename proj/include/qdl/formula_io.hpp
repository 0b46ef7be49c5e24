// Text syntax for formulas:
//
//   atom            identifier, optionally with arguments: broken(sculpture)
//   ~f              negation
//   f & g & ...     conjunction (one threshold node per unparenthesized chain)
//   f | g | ...     disjunction
//   f -> g          implication, right associative
//   f <-> g         equivalence
//   thr(b; c1*f1, c2*f2, ...)   threshold connective; a bare fi means weight 1
//
// to_string() and parse_formula() round-trip structurally.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "qdl/logic.hpp"

namespace qdl {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class UnknownAtoms { Intern, Reject };

Formula parse_formula(std::string_view text, AtomTable& atoms, UnknownAtoms policy = UnknownAtoms::Intern);
/// Resolves names against a fixed table; unknown atoms are a ParseError.
Formula parse_formula(std::string_view text, const AtomTable& atoms);

std::string to_string(const Formula& f, const AtomTable& atoms);

/// True for names usable as atoms in formula text.
bool is_atom_name(std::string_view name);

}  // namespace qdl
