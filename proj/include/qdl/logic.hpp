// Propositional formulas over linear threshold connectives, classical
// evaluation on scenes and partial evaluation (witnessing) on obscured scenes.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qdl {

using AtomId = std::uint32_t;
using Weight = std::int64_t;

/// Interned ground atomic formulas. Ids are dense, starting at 0.
class AtomTable {
 public:
  AtomId intern(std::string_view name);
  std::optional<AtomId> find(std::string_view name) const;
  const std::string& name(AtomId id) const;
  std::size_t size() const { return names_.size(); }
  std::span<const std::string> names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, AtomId> index_;
};

/// A total assignment to N atoms.
class Scene {
 public:
  Scene() = default;
  explicit Scene(std::size_t n, bool value = false) : bits_(n, value ? 1 : 0) {}
  /// Parses a string over {0,1}.
  static Scene from_string(std::string_view bits);

  std::size_t size() const { return bits_.size(); }
  bool operator[](AtomId id) const { return bits_[id] != 0; }
  void set(AtomId id, bool value) { bits_[id] = value ? 1 : 0; }
  std::string to_string() const;

  friend bool operator==(const Scene&, const Scene&) = default;
  friend auto operator<=>(const Scene&, const Scene&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

enum class Tri : std::uint8_t { False = 0, True = 1, Unknown = 2 };

char to_char(Tri t);
Tri tri_from_char(char c);

/// A partial assignment with entries in {0, 1, *}.
class ObscuredScene {
 public:
  ObscuredScene() = default;
  explicit ObscuredScene(std::size_t n, Tri value = Tri::Unknown) : values_(n, value) {}
  /// Fully revealed copy of a scene.
  explicit ObscuredScene(const Scene& x);
  static ObscuredScene from_string(std::string_view text);

  std::size_t size() const { return values_.size(); }
  Tri operator[](AtomId id) const { return values_[id]; }
  void set(AtomId id, Tri value) { values_[id] = value; }
  void hide(AtomId id) { values_.at(id) = Tri::Unknown; }
  std::size_t hidden_count() const;

  /// True iff x agrees with every revealed entry.
  bool consistent_with(const Scene& x) const;
  /// True iff this agrees with every revealed entry of `coarser`.
  bool refines(const ObscuredScene& coarser) const;
  std::string to_string() const;

  friend bool operator==(const ObscuredScene&, const ObscuredScene&) = default;

 private:
  std::vector<Tri> values_;
};

struct WeightedTerm;

/// Immutable formula tree: atoms, negation and integer threshold
/// connectives [sum_i c_i f_i >= b]. AND/OR/implication/equivalence are
/// built as thresholds.
class Formula {
 public:
  enum class Kind : std::uint8_t { Atom, Not, Threshold };

  static Formula atom(AtomId id);
  static Formula negate(Formula child);
  /// Throws std::invalid_argument on a zero weight.
  static Formula threshold(std::vector<WeightedTerm> terms, Weight bound);

  static Formula conj(std::vector<Formula> children);
  static Formula disj(std::vector<Formula> children);
  static Formula implies(Formula lhs, Formula rhs);
  static Formula iff(Formula lhs, Formula rhs);

  Kind kind() const;
  bool is_atom() const { return kind() == Kind::Atom; }
  AtomId atom_id() const;
  const Formula& child() const;
  std::span<const WeightedTerm> terms() const;
  Weight bound() const;

  /// Recognizers used by the printer.
  bool is_conjunction() const;
  bool is_disjunction() const;

  /// Number of nodes.
  std::size_t size() const;
  /// Largest atom id mentioned plus one (0 for atom-free formulas).
  std::size_t atom_span() const;
  std::vector<AtomId> atoms() const;

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct WeightedTerm {
  Weight weight;
  Formula formula;

  friend bool operator==(const WeightedTerm&, const WeightedTerm&) = default;
};

/// Classical truth value. Throws std::out_of_range if an atom id is not
/// covered by the scene and std::overflow_error on weight overflow.
bool eval(const Formula& f, const Scene& x);

/// Result of partial evaluation: witnessed true, witnessed false, or a
/// residual formula over the hidden atoms.
class PartialEval {
 public:
  enum class Status : std::uint8_t { WitnessedTrue, WitnessedFalse, Residual };

  static PartialEval witnessed(bool value) {
    return PartialEval(value ? Status::WitnessedTrue : Status::WitnessedFalse, std::nullopt);
  }
  static PartialEval residual(Formula f) { return PartialEval(Status::Residual, std::move(f)); }

  Status status() const { return status_; }
  bool is_witnessed() const { return status_ != Status::Residual; }
  bool witnessed_true() const { return status_ == Status::WitnessedTrue; }
  bool witnessed_false() const { return status_ == Status::WitnessedFalse; }
  const Formula& formula() const { return *residual_; }

  friend bool operator==(const PartialEval&, const PartialEval&) = default;

 private:
  PartialEval(Status s, std::optional<Formula> f) : status_(s), residual_(std::move(f)) {}
  Status status_;
  std::optional<Formula> residual_;
};

/// Partial evaluation under an obscured scene. Atoms outside the scene's
/// range are treated as hidden.
PartialEval partial_eval(const Formula& f, const ObscuredScene& rho);

/// Checked int64 arithmetic; throws std::overflow_error.
Weight checked_add(Weight a, Weight b);
Weight checked_sub(Weight a, Weight b);
Weight checked_mul(Weight a, Weight b);

}  // namespace qdl
