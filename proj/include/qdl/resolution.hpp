// Clauses, treelike resolution proofs, and space-bounded proof search that
// learns hypothesis clauses from obscured scenes.

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qdl/distributions.hpp"
#include "qdl/logic.hpp"

namespace qdl {

struct Literal {
  AtomId atom = 0;
  bool positive = true;

  Literal negated() const { return {atom, !positive}; }
  friend auto operator<=>(const Literal&, const Literal&) = default;
};

/// Value of a literal on an obscured scene (hidden or out of range: Unknown).
Tri literal_value(Literal l, const ObscuredScene& rho);

/// Set of literals, kept sorted by (atom, polarity). Never holds both
/// polarities of an atom.
class Clause {
 public:
  Clause() = default;
  /// Sorts and deduplicates; throws std::invalid_argument if an atom occurs
  /// with both polarities.
  explicit Clause(std::vector<Literal> literals);

  std::span<const Literal> literals() const { return lits_; }
  std::size_t size() const { return lits_.size(); }
  bool empty() const { return lits_.empty(); }

  bool contains(Literal l) const;
  /// Polarity of `a` in the clause, if it occurs.
  std::optional<bool> polarity(AtomId a) const;
  bool is_superset_of(const Clause& other) const;

  /// C v l. Throws std::invalid_argument if the complement of l is in C.
  Clause with(Literal l) const;
  Clause without_atom(AtomId a) const;

  /// OR of the literals as a threshold formula (weights 1, bound 1).
  Formula to_formula() const;

  friend auto operator<=>(const Clause&, const Clause&) = default;

 private:
  std::vector<Literal> lits_;
};

using Cnf = std::vector<Clause>;

Formula cnf_to_formula(const Cnf& cnf);

/// C|rho = 0, computed by partial evaluation of the clause's threshold
/// encoding. Equivalently: every literal of C is witnessed false on rho.
bool witnessed_false(const Clause& c, const ObscuredScene& rho);

// ---------------------------------------------------------------------------
// Proofs.

class ResolutionProof {
 public:
  enum class Kind : std::uint8_t { Hypothesis, Weakening, Cut };

  struct Node {
    Kind kind;
    Clause clause;
    std::size_t from = 0;  // Weakening: index of the premise clause
    AtomId pivot = 0;      // Cut
    std::uint32_t left = 0, right = 0;
  };

  using Index = std::uint32_t;

  ResolutionProof() = default;
  explicit ResolutionProof(std::size_t space) : space_(space) {}

  Index add_hypothesis(Clause c);
  Index add_weakening(Clause derived, std::size_t from);
  /// Conclusion computed from the children: the union of both clauses with
  /// the pivot removed.
  Index add_cut(AtomId pivot, Index left, Index right);
  /// Conclusion given explicitly (not checked here; see verify_proof).
  Index add_cut(AtomId pivot, Index left, Index right, Clause conclusion);

  /// Discards nodes from `size` on (used to roll back failed branches).
  void truncate(std::size_t size) { nodes_.resize(size); }

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  /// The last node added is the root.
  Index root() const { return static_cast<Index>(nodes_.size() - 1); }
  const Node& node(Index i) const { return nodes_.at(i); }
  std::span<const Node> nodes() const { return nodes_; }
  const Clause& conclusion() const { return nodes_.back().clause; }

  /// Declared space bound s.
  std::size_t space() const { return space_; }
  void set_space(std::size_t s) { space_ = s; }

 private:
  std::vector<Node> nodes_;
  std::size_t space_ = 0;
};

/// Fewest clauses held at once when evaluating the tree in the best order:
/// 1 for a leaf; for a cut with children needing a and b, max(a, b) if they
/// differ and a + 1 if they are equal.
std::size_t minimal_space(const ResolutionProof& p);

/// Number of nodes reachable from the root.
std::size_t node_count(const ResolutionProof& p);

/// Distinct hypothesis-leaf clauses in order of first appearance.
Cnf extract_premises(const ResolutionProof& p);

/// Every node is used once (a tree), weakening leaves extend their premise
/// clause of `phi`, hypothesis leaves are clauses of `h`, each cut has the
/// pivot positive in one child and negative in the other with conclusion
/// equal to the union of the rest, and minimal_space <= p.space().
bool verify_proof(const ResolutionProof& p, const Cnf& phi, const Cnf& h);

/// Normality: every cut's conclusion mentions the pivot of each cut above
/// it, and no atom is the pivot of two cuts on one root-to-leaf path.
/// Edges leave cut nodes only towards cut nodes by construction, and each
/// weakening is a single leaf step.
bool check_normal(const ResolutionProof& p);

// ---------------------------------------------------------------------------
// Search.

struct LearnOptions {
  /// On a failed second branch, try the next literal instead of returning
  /// none.
  bool backtrack = false;
  /// Atoms considered for branching; 0 means infer from phi, C and samples.
  std::size_t num_atoms = 0;
  /// Called on every recursive call with the clause, space bound and the
  /// indices (into the caller's sample list) still in scope.
  std::function<void(const Clause&, std::size_t, std::span<const std::uint32_t>)> on_call{};
};

/// Space-s search for a proof of C from phi plus hypothesis clauses that no
/// sample in scope witnesses false. Literals are tried in ascending atom
/// order, positive first. Weakening leaves index into phi.
std::optional<ResolutionProof> learn_search_space(const Cnf& phi, std::size_t s, const Clause& c,
                                                  std::span<const ObscuredScene> samples,
                                                  const LearnOptions& opts = {});

struct LearnConfig {
  std::size_t s = 2;
  double epsilon = 0.1;
  double delta = 0.05;
  double eta = 1.0;
  double c = 1.0;
};

/// learn_search_space on the empty clause. Throws std::invalid_argument on
/// an empty sample list.
std::optional<ResolutionProof> refute(const Cnf& phi, const LearnConfig& cfg, std::span<const ObscuredScene> samples,
                                      const LearnOptions& opts = {});

/// ceil(c * (N^(s-1) log2 N * ln 2 + ln(1/delta)) / (epsilon * eta)).
std::uint64_t sample_size_resolution(std::uint64_t num_atoms, std::uint64_t s, double epsilon, double delta,
                                     double eta, double c = 1.0);

// ---------------------------------------------------------------------------
// Proof counting bounds for normal space-s treelike proofs over N atoms.

struct CountBounds {
  std::uint64_t min_k = 1;      // 2^s - 1
  double max_k = 1;             // 2 (eN/(s-1))^(s-1)
  double log2_max_proofs = 0;   // (eN/(s-1))^(s-1) * log2(8N)
};

/// Throws std::invalid_argument unless N >= s >= 1. For s = 1 the proofs are
/// single leaves: (1, 1, 1).
CountBounds count_bounds(std::uint64_t num_atoms, std::uint64_t s);

/// k <= 2 (eN/(s-1))^(s-1), decided with exact rational arithmetic using a
/// lower bound on e (so a true result is certified).
bool within_node_bound(std::uint64_t k, std::uint64_t num_atoms, std::uint64_t s);
/// count <= (8N)^((eN/(s-1))^(s-1)), certified the same way.
bool within_count_bound(const BigInt& count, std::uint64_t num_atoms, std::uint64_t s);

// ---------------------------------------------------------------------------
// Files and output.
//
// DIMACS: "p cnf N M", clause lines of signed 1-based ids ending in 0, and
// optional "c atom <id> <name>" comments naming atoms (default x<id>).

Cnf read_cnf(std::istream& in, AtomTable& atoms);
void write_cnf(std::ostream& out, const Cnf& cnf, const AtomTable& atoms);

/// "1 -2", "x1 ~x2" or "x1 | ~x2"; an optional trailing 0 is ignored; empty
/// text is the empty clause.
Clause parse_clause(std::string_view text, const AtomTable& atoms);
/// "x1 | ~x2", or "[]" for the empty clause.
std::string to_string(const Clause& c, const AtomTable& atoms);

std::string format_proof(const ResolutionProof& p, const AtomTable& atoms);
std::string proof_to_json(const ResolutionProof& p, const AtomTable& atoms);

}  // namespace qdl
