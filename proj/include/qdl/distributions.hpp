// Scene distributions, masking processes, sampling, and exact validity /
// concealment computations by enumeration.

#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qdl/logic.hpp"

namespace qdl {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Parses "3/4", "1", "0.25".
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& r);
double to_double(const Rational& r);

/// Finite support distribution over scenes with exact probabilities.
class ExplicitDistribution {
 public:
  struct Entry {
    Scene scene;
    Rational prob;
  };

  /// Throws std::invalid_argument unless the support is nonempty, scenes
  /// are distinct and of equal length, probabilities lie in (0, 1] and sum
  /// to exactly 1.
  explicit ExplicitDistribution(std::vector<Entry> support);

  static ExplicitDistribution uniform(std::vector<Scene> scenes);
  static ExplicitDistribution point(Scene scene);
  /// Product of independent atoms with Pr[atom i = 1] = marginals[i].
  /// Zero-probability scenes are dropped.
  static ExplicitDistribution independent(const std::vector<Rational>& marginals);

  std::size_t num_atoms() const { return num_atoms_; }
  const std::vector<Entry>& support() const { return support_; }

  /// Index into support() for inverse-CDF sampling with u in [0, 1).
  std::size_t draw_index(double u) const;

 private:
  std::size_t num_atoms_ = 0;
  std::vector<Entry> support_;
  std::vector<double> cumulative_;
};

struct FixedSubset {
  std::vector<AtomId> hidden;
};

struct IndependentCoin {
  Rational hide_prob;
};

struct MaskRule {
  Formula condition;
  std::vector<AtomId> hidden;
  Rational prob;
};

/// Rules are tried in order; the first whose condition holds on the scene
/// hides its atoms with the rule's probability. No match hides nothing.
struct ValueDependent {
  std::vector<MaskRule> rules;
};

class MaskingProcess {
 public:
  using Variant = std::variant<FixedSubset, IndependentCoin, ValueDependent>;

  MaskingProcess(Variant v);  // NOLINT: implicit by design of the variant wrapper

  const Variant& variant() const { return v_; }

  template <typename Rng>
  ObscuredScene apply(const Scene& x, Rng& rng) const;

  /// Every obscured scene m(x) can take, with its probability. Outcomes
  /// with probability 0 are omitted; equal outcomes are not merged.
  std::vector<std::pair<ObscuredScene, Rational>> outcomes(const Scene& x) const;

 private:
  Variant v_;
};

/// Raised when exact enumeration would exceed its size limit.
class EstimateOnlyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest N for which exact mask-outcome enumeration is attempted.
inline constexpr std::size_t kMaxExactAtoms = 16;

struct SampleSet {
  std::vector<ObscuredScene> scenes;
  std::uint64_t seed = 0;
  std::string provenance;

  std::size_t size() const { return scenes.size(); }
};

SampleSet sample(const ExplicitDistribution& d, const MaskingProcess& m, std::size_t count, std::uint64_t seed);

/// Pr_{x~D}[f(x) = 1], exactly.
Rational validity(const ExplicitDistribution& d, const Formula& f);

struct Concealment {
  /// min over falsifiable formulas of Pr[witnessed on m(x) | f(x) = 0].
  Rational eta;
  /// No formula in the class is falsified with positive probability; eta
  /// is reported as 1.
  bool vacuous = false;
};

Concealment concealment(const ExplicitDistribution& d, const MaskingProcess& m, const std::vector<Formula>& formulas);

/// Pr_{rho ~ M(D)}[f witnessed false on rho], exactly.
Rational counterexample_rate(const ExplicitDistribution& d, const MaskingProcess& m, const Formula& f);

// ---------------------------------------------------------------------------
// Files.
//
// Distribution:   atoms: a b c          Mask:  fixed a c
//                 1/4 101                      coin 1/2
//                 3/4 001                      when <formula> hide a b with 3/4
// Scenes:         atoms: a b c
//                 1*0
// Blank lines and lines starting with '#' are ignored.

ExplicitDistribution read_distribution(std::istream& in, AtomTable& atoms);
MaskingProcess read_mask(std::istream& in, const AtomTable& atoms);
/// Scenes are re-indexed onto `atoms` (interning unseen names); atoms of the
/// table missing from the file's header read as hidden.
std::vector<ObscuredScene> read_scenes(std::istream& in, AtomTable& atoms);
void write_scenes(std::ostream& out, const std::vector<ObscuredScene>& scenes, const AtomTable& atoms);

// ---------------------------------------------------------------------------

template <typename Rng>
ObscuredScene MaskingProcess::apply(const Scene& x, Rng& rng) const {
  ObscuredScene rho(x);
  if (const auto* fixed = std::get_if<FixedSubset>(&v_)) {
    for (AtomId a : fixed->hidden) rho.hide(a);
  } else if (const auto* coin = std::get_if<IndependentCoin>(&v_)) {
    const double p = to_double(coin->hide_prob);
    for (std::size_t i = 0; i < x.size(); ++i)
      if (rng.uniform() < p) rho.hide(static_cast<AtomId>(i));
  } else {
    for (const auto& rule : std::get<ValueDependent>(v_).rules) {
      if (!eval(rule.condition, x)) continue;
      if (rng.uniform() < to_double(rule.prob))
        for (AtomId a : rule.hidden) rho.hide(a);
      break;
    }
  }
  return rho;
}

}  // namespace qdl
