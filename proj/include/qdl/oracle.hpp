// Brute-force reference implementations for cross-checking the production
// code: exact validity, the consistent-clause set, an ordinary space-bounded
// proof search, exhaustive normal proof enumeration, and a Monte Carlo
// harness for the learning guarantees.
//
// Nothing here calls the production evaluators (eval, partial_eval,
// witnessed_false, minimal_space); the clause search and enumeration use
// their own bitmask representations.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qdl/chaining.hpp"
#include "qdl/distributions.hpp"
#include "qdl/resolution.hpp"

namespace qdl::oracle {

struct EnumLimit {
  std::size_t max_atoms = 12;        // scene / clause enumeration
  std::size_t max_proof_atoms = 6;   // proof enumeration and search
  std::size_t max_space = 3;
};

/// Pr_{x~D}[f(x) = 1] by direct summation.
Rational exact_validity(const Formula& f, const ExplicitDistribution& d);

/// Every clause over `num_atoms` atoms with at most `max_width` literals
/// that no sample witnesses false. Throws std::length_error when num_atoms
/// exceeds limit.max_atoms.
Cnf all_consistent_clauses(std::span<const ObscuredScene> samples, std::size_t num_atoms, std::size_t max_width,
                           const EnumLimit& limit = {});

/// Ordinary space-s search for C from phi and h: a leaf when C extends some
/// clause of either, otherwise a cut on some literal with the s-1 / s split,
/// trying every literal. Weakening leaves index into phi followed by h, so
/// the result verifies against (phi ++ h, {}).
std::optional<ResolutionProof> reference_space_search(const Cnf& phi, const Cnf& h, std::size_t s, const Clause& c,
                                                      std::size_t num_atoms, const EnumLimit& limit = {});

/// Space needed to evaluate a proof tree, by the bottom-up pebbling rule.
std::size_t pebbling_space(const ResolutionProof& p);

// Cut-only normal refutations (root clause empty) over N atoms. Such a
// proof is a binary tree whose internal nodes carry a pivot (distinct along
// each path) and a bit for which child holds the positive literal; every
// clause is the set of literals fixed on its path.

struct ProofShape {
  std::uint64_t nodes;
  std::size_t space;  // minimal space
  BigInt count;
};

/// Number of proofs of each (node count, minimal space) with space <= s,
/// sorted by (space, nodes).
std::vector<ProofShape> normal_proof_histogram(std::size_t num_atoms, std::size_t s, const EnumLimit& limit = {});
BigInt normal_proof_count(std::size_t num_atoms, std::size_t s, const EnumLimit& limit = {});
/// The proof with the given rank in a fixed order (0 <= index < count).
ResolutionProof nth_normal_proof(std::size_t num_atoms, std::size_t s, const BigInt& index,
                                 const EnumLimit& limit = {});
/// All proofs, in rank order. Throws std::length_error beyond `cap` proofs.
std::vector<ResolutionProof> enumerate_normal_proofs(std::size_t num_atoms, std::size_t s,
                                                     std::size_t cap = 1'000'000, const EnumLimit& limit = {});

// ---------------------------------------------------------------------------
// Monte Carlo check of the learning guarantees.

struct ChainingTrialSpec {
  HornKB kb;
  AtomId goal;
  ExplicitDistribution dist;
  MaskingProcess mask;
  LearningMode mode = LearningMode::Credulous;
  double epsilon = 0.1;
  double delta = 0.05;
  double eta = 1.0;
  double c = 1.0;
  std::size_t trials = 200;
  std::uint64_t seed = 1;
  /// Samples per trial; 0 means sample_size_chaining(N, epsilon, delta, eta, c).
  std::size_t samples = 0;
};

struct ResolutionTrialSpec {
  Cnf phi;
  Clause target;
  std::size_t space = 2;
  ExplicitDistribution dist;
  MaskingProcess mask;
  double epsilon = 0.1;
  double delta = 0.05;
  double eta = 1.0;
  double c = 1.0;
  std::size_t trials = 200;
  std::uint64_t seed = 1;
  /// 0 means sample_size_resolution(N, space, epsilon, delta, eta, c).
  std::size_t samples = 0;
  bool backtrack = false;
};

struct TrialOutcome {
  std::uint64_t seed = 0;
  bool proof = false;
  /// The proof checks against the KB / phi and its own premises (and, for
  /// resolution, is normal). Vacuously true without a proof.
  bool verified = true;
  std::size_t premises = 0;
  Rational premise_validity = 1;
  bool premises_valid = true;
};

struct GuaranteeReport {
  std::string kind;
  std::size_t samples_per_trial = 0;
  double epsilon = 0, delta = 0;
  Rational implication_validity;
  bool implication_valid = true;  // validity >= 1 - epsilon
  std::vector<TrialOutcome> outcomes;

  std::size_t proofs = 0;
  std::size_t bad_proofs = 0;    // proof whose premises are not (1-eps)-valid
  std::size_t unverified = 0;
  double proof_rate = 0;
  double bad_rate = 0;
  /// delta + 3 sqrt(delta (1 - delta) / trials)
  double threshold = 0;

  /// bad_rate <= threshold, and proof_rate <= threshold when the implication
  /// is not (1-eps)-valid, and every proof verified.
  bool passed() const;
  std::string to_text() const;
};

GuaranteeReport monte_carlo_guarantee(const ChainingTrialSpec& spec);
GuaranteeReport monte_carlo_guarantee(const ResolutionTrialSpec& spec);

}  // namespace qdl::oracle
