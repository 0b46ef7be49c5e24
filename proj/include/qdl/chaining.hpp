// Ground Horn knowledge bases, subgoal dependency graphs, and the backward
// search loop (TEST / EXPLORE / GENERATE) with optional query-driven
// learning of atoms from obscured scenes.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qdl/logic.hpp"

namespace qdl {

// ---------------------------------------------------------------------------
// Knowledge bases.

struct HornClause {
  std::vector<AtomId> body;
  AtomId head = 0;
  /// Index of the schema this clause was grounded from, if any.
  std::optional<std::size_t> schema;
  /// "X=sculpture, Y=floor" for grounded clauses.
  std::string bindings;
};

/// [-a1 - ... - ak + head >= 1 - k], i.e. (a1 & ... & ak) -> head.
Formula horn_to_formula(const HornClause& c);

class HornKB {
 public:
  AtomTable atoms;
  /// Source text of rule schemas, referenced by HornClause::schema.
  std::vector<std::string> schemas;

  void add_fact(AtomId a);
  /// Throws std::invalid_argument if the body repeats an atom or contains the head.
  void add_rule(HornClause c);

  bool is_fact(AtomId a) const { return a < fact_flags_.size() && fact_flags_[a]; }
  const std::vector<AtomId>& facts() const { return facts_; }
  const std::vector<HornClause>& rules() const { return rules_; }
  /// Rules with head `a`, in KB order.
  std::span<const std::size_t> rules_with_head(AtomId a) const;

  /// Conjunction of all facts and rules as a single formula.
  Formula to_formula() const;

 private:
  std::vector<AtomId> facts_;
  std::vector<bool> fact_flags_;
  std::vector<HornClause> rules_;
  std::vector<std::vector<std::size_t>> by_head_;
};

/// p(X, c): predicate with variables (uppercase initial) and constants.
struct AtomPattern {
  std::string predicate;
  std::vector<std::string> args;
};

struct RuleSchema {
  std::vector<AtomPattern> body;
  AtomPattern head;
  std::string text;
};

/// Function-free Horn rule schemas and (possibly non-ground) facts.
struct KbSource {
  std::vector<std::string> domain;
  std::vector<AtomPattern> facts;
  std::vector<RuleSchema> rules;
};

bool is_variable(const std::string& term);

/// Propositionalization: every substitution of domain constants for the
/// variables of each schema, in schema order then lexicographic order of
/// bindings (variables by first occurrence, constants in domain order).
/// Groundings whose head also occurs in the body are dropped; repeated body
/// atoms are merged. Throws std::invalid_argument on an empty domain when a
/// variable needs binding, or on predicate arity mismatch.
HornKB ground(const KbSource& source);

/// Lines: `domain c1 c2 ...`, `fact p(c1)`, `rule p(X) & q(X,Y) => r(X)`.
KbSource read_kb_source(std::istream& in);
HornKB read_kb(std::istream& in);

// ---------------------------------------------------------------------------
// Subgoal dependency graphs.

using NodeId = std::uint32_t;

enum class NodeStatus : std::uint8_t { Unknown, Successful, Unsuccessful };

class SubgoalGraph {
 public:
  enum class Kind : std::uint8_t { Query, Threshold };

  struct Edge {
    Weight weight;
    NodeId target;
  };

  struct Node {
    Kind kind;
    AtomId atom = 0;                  // query nodes
    std::size_t rule = 0;             // threshold nodes: index into HornKB::rules()
    Weight threshold = 0;
    Weight w_plus = 0;
    Weight w_minus = 0;
    std::vector<Edge> edges{};
    bool unexplored = false;
    /// GENERATE has nothing more to add from this node.
    bool exhausted = false;
    /// Query node repeating the atom of an ancestor; never expanded.
    bool cyclic = false;
    std::optional<NodeId> parent{};
    /// Child indices from the source; identifies a node across runs.
    std::vector<std::uint32_t> path{};
  };

  explicit SubgoalGraph(AtomId goal);

  NodeId source() const { return 0; }
  AtomId goal() const { return nodes_.front().atom; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t edge_count() const;
  const Node& node(NodeId v) const { return nodes_.at(v); }
  Node& node(NodeId v) { return nodes_.at(v); }
  std::span<const Node> nodes() const { return nodes_; }

  NodeId add_query_node(AtomId atom, NodeId parent);
  NodeId add_threshold_node(std::size_t rule, Weight threshold, Weight w_plus, Weight w_minus, NodeId parent);
  /// Adds an edge from `from` (weighted for threshold nodes), reducing
  /// w_plus or w_minus by the weight.
  void add_edge(NodeId from, NodeId to, Weight weight);

  /// Query node labeled `atom`, if any.
  std::optional<NodeId> find_query(AtomId atom) const;
  bool labels(AtomId atom) const { return find_query(atom).has_value(); }
  /// True if `atom` labels `v` or one of its ancestors.
  bool on_path(NodeId v, AtomId atom) const;

 private:
  std::vector<Node> nodes_;
  std::vector<std::vector<NodeId>> by_atom_;
};

struct StatusResult {
  std::vector<NodeStatus> status;
  /// Order in which nodes became successful (0 = never).
  std::vector<std::size_t> stamp;
  /// For successful query nodes not in the success set: the threshold
  /// child that made them successful.
  std::vector<std::optional<NodeId>> support;

  bool successful(NodeId v) const { return status[v] == NodeStatus::Successful; }
};

/// Least fixed point of the success/failure rules: a threshold node is
/// successful when the weight to successful children plus w_minus plus
/// negative weights to unknown children reaches its threshold, and
/// unsuccessful when the weight to successful children plus w_plus plus
/// positive weights to unknown children falls short. A query node is
/// successful when its atom is in `successes` or some child is successful,
/// and unsuccessful when it is exhausted and every child is unsuccessful.
StatusResult node_status(const SubgoalGraph& g, const std::vector<bool>& successes);

struct SearchOptions {
  /// One query node per atom (a graph) instead of one per path (a tree).
  /// Sharing bounds the graph by the KB size, but the EXPLORE order then
  /// depends on work done under subgoals that a larger KB would prune.
  bool share_subgoals = false;
};

/// Deepest unexplored vertex in depth-first order from the source, not
/// descending into vertices successful from `known`.
std::optional<NodeId> explore(const SubgoalGraph& g, const std::vector<bool>& known);

struct Generated {
  bool fully_explored = false;
  /// Node created by this step, if the new edge reached a fresh vertex.
  std::optional<NodeId> created;
};

/// Adds the next edge out of `v`: for a query node, the threshold node of the
/// next rule with that head; for a threshold node, a weight-1 edge to the
/// next body atom.
Generated generate(SubgoalGraph& g, NodeId v, const HornKB& kb, const SearchOptions& opts = {});

// ---------------------------------------------------------------------------
// Proofs.

struct ProofLine {
  enum class Kind : std::uint8_t { Hypothesis, Learned, Chaining };

  AtomId atom;
  Kind kind;
  std::size_t rule = 0;                 // Chaining: index into HornKB::rules()
  std::vector<std::size_t> premises{};  // Chaining: 1-based line numbers

  friend bool operator==(const ProofLine&, const ProofLine&) = default;
};

struct ChainingProof {
  std::vector<ProofLine> lines;

  AtomId conclusion() const { return lines.back().atom; }
  std::vector<AtomId> learned() const;

  friend bool operator==(const ChainingProof&, const ChainingProof&) = default;
};

/// Proof of the goal if the source is successful from `known`, else nullopt.
/// Atoms with `learned[a]` set are annotated as learned.
std::optional<ChainingProof> test(const SubgoalGraph& g, const std::vector<bool>& known,
                                  const std::vector<bool>& learned = {});

/// Each line is a KB fact, a learned atom accepted by `accept_learned`, or
/// follows by a KB rule from earlier lines; the last line is `goal`.
bool verify_proof(const ChainingProof& p, const HornKB& kb, AtomId goal,
                  const std::function<bool(AtomId)>& accept_learned = {});

/// "1. crushed(sculpture) (hypothesis)" ...
std::string format_proof(const ChainingProof& p, const HornKB& kb);
std::string proof_to_json(const ChainingProof& p, const HornKB& kb);

// ---------------------------------------------------------------------------
// Search.

enum class LearningMode : std::uint8_t { Credulous, Skeptical };

/// Accepts atom h on the samples: credulous when no sample witnesses h
/// false, skeptical when every sample witnesses h true.
bool passes_sample_test(AtomId h, std::span<const ObscuredScene> samples, LearningMode mode);

class BackwardSearch {
 public:
  using Observer = std::function<void(const BackwardSearch&, NodeId proposed)>;

  BackwardSearch(const HornKB& kb, AtomId goal, SearchOptions opts = {});
  /// Learning variant: query vertices passing the sample test join the KB.
  BackwardSearch(const HornKB& kb, AtomId goal, std::span<const ObscuredScene> samples, LearningMode mode,
                 SearchOptions opts = {});

  /// Runs to completion; nullopt means Fail.
  std::optional<ChainingProof> run();

  /// Called with every vertex EXPLORE proposes, before GENERATE.
  void set_observer(Observer obs) { observer_ = std::move(obs); }

  const SubgoalGraph& graph() const { return graph_; }
  const std::vector<bool>& known() const { return known_; }
  const std::vector<bool>& learned_flags() const { return learned_; }
  std::vector<AtomId> learned() const;
  std::size_t iterations() const { return iterations_; }
  const std::vector<NodeId>& proposals() const { return proposals_; }

 private:
  void on_new_vertex(NodeId v);
  bool test_sample(AtomId h);

  const HornKB& kb_;
  SearchOptions opts_;
  SubgoalGraph graph_;
  std::vector<bool> known_;
  std::vector<bool> learned_;
  std::span<const ObscuredScene> samples_;
  std::optional<LearningMode> mode_;
  std::vector<std::int8_t> sample_verdict_;  // -1 untested, 0 reject, 1 accept
  std::size_t iterations_ = 0;
  std::vector<NodeId> proposals_;
  Observer observer_;
};

std::optional<ChainingProof> backward_search(AtomId goal, const HornKB& kb, SearchOptions opts = {});
std::optional<ChainingProof> learn_backward_search(AtomId goal, const HornKB& kb,
                                                   std::span<const ObscuredScene> samples, LearningMode mode,
                                                   SearchOptions opts = {});

/// ceil(c * (N log2 N * ln 2 + ln(1/delta)) / (epsilon * eta)).
std::uint64_t sample_size_chaining(std::uint64_t num_atoms, double epsilon, double delta, double eta, double c = 1.0);

}  // namespace qdl
