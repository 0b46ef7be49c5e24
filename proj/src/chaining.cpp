#include "qdl/chaining.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qdl/formula_io.hpp"

namespace qdl {

Formula horn_to_formula(const HornClause& c) {
  std::vector<WeightedTerm> terms;
  terms.reserve(c.body.size() + 1);
  for (AtomId a : c.body) terms.push_back({-1, Formula::atom(a)});
  terms.push_back({1, Formula::atom(c.head)});
  return Formula::threshold(std::move(terms), 1 - static_cast<Weight>(c.body.size()));
}

// ---------------------------------------------------------------------------
// HornKB

void HornKB::add_fact(AtomId a) {
  if (a >= fact_flags_.size()) fact_flags_.resize(a + 1, false);
  if (fact_flags_[a]) return;
  fact_flags_[a] = true;
  facts_.push_back(a);
}

void HornKB::add_rule(HornClause c) {
  auto sorted = c.body;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("Horn clause body repeats an atom");
  if (std::binary_search(sorted.begin(), sorted.end(), c.head))
    throw std::invalid_argument("Horn clause head occurs in its body");
  if (c.head >= by_head_.size()) by_head_.resize(c.head + 1);
  by_head_[c.head].push_back(rules_.size());
  rules_.push_back(std::move(c));
}

std::span<const std::size_t> HornKB::rules_with_head(AtomId a) const {
  if (a >= by_head_.size()) return {};
  return by_head_[a];
}

Formula HornKB::to_formula() const {
  std::vector<Formula> parts;
  for (AtomId a : facts_) parts.push_back(Formula::atom(a));
  for (const auto& r : rules_) parts.push_back(horn_to_formula(r));
  return Formula::conj(std::move(parts));
}

// ---------------------------------------------------------------------------
// Grounding

bool is_variable(const std::string& term) {
  return !term.empty() && std::isupper(static_cast<unsigned char>(term.front()));
}

namespace {

std::string pattern_text(const AtomPattern& p) {
  if (p.args.empty()) return p.predicate;
  std::string s = p.predicate + "(";
  for (std::size_t i = 0; i < p.args.size(); ++i) s += (i ? "," : "") + p.args[i];
  return s + ")";
}

std::string ground_name(const AtomPattern& p, const std::map<std::string, std::string>& binding) {
  if (p.args.empty()) return p.predicate;
  std::string s = p.predicate + "(";
  for (std::size_t i = 0; i < p.args.size(); ++i) {
    s += i ? "," : "";
    s += is_variable(p.args[i]) ? binding.at(p.args[i]) : p.args[i];
  }
  return s + ")";
}

void collect_variables(const AtomPattern& p, std::vector<std::string>& vars) {
  for (const auto& a : p.args)
    if (is_variable(a) && std::find(vars.begin(), vars.end(), a) == vars.end()) vars.push_back(a);
}

// Calls fn(binding, text) for each assignment of domain constants to vars,
// first variable most significant.
template <typename Fn>
void for_each_binding(const std::vector<std::string>& vars, const std::vector<std::string>& domain, Fn&& fn) {
  if (!vars.empty() && domain.empty()) throw std::invalid_argument("empty domain: cannot ground variables");
  std::vector<std::size_t> idx(vars.size(), 0);
  while (true) {
    std::map<std::string, std::string> binding;
    std::string text;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      binding[vars[i]] = domain[idx[i]];
      text += (i ? ", " : "") + vars[i] + "=" + domain[idx[i]];
    }
    fn(binding, text);
    std::size_t k = vars.size();
    while (k > 0 && ++idx[k - 1] == domain.size()) idx[--k] = 0;
    if (k == 0) return;
  }
}

void check_arity(const AtomPattern& p, std::map<std::string, std::size_t>& arity) {
  auto [it, inserted] = arity.emplace(p.predicate, p.args.size());
  if (!inserted && it->second != p.args.size())
    throw std::invalid_argument("predicate '" + p.predicate + "' used with arity " + std::to_string(p.args.size()) +
                                " and " + std::to_string(it->second));
}

}  // namespace

HornKB ground(const KbSource& source) {
  std::map<std::string, std::size_t> arity;
  for (const auto& f : source.facts) check_arity(f, arity);
  for (const auto& r : source.rules) {
    for (const auto& b : r.body) check_arity(b, arity);
    check_arity(r.head, arity);
  }

  HornKB kb;
  for (const auto& f : source.facts) {
    std::vector<std::string> vars;
    collect_variables(f, vars);
    for_each_binding(vars, source.domain, [&](const auto& binding, const std::string&) {
      kb.add_fact(kb.atoms.intern(ground_name(f, binding)));
    });
  }
  for (std::size_t s = 0; s < source.rules.size(); ++s) {
    const auto& schema = source.rules[s];
    kb.schemas.push_back(schema.text);
    std::vector<std::string> vars;
    for (const auto& b : schema.body) collect_variables(b, vars);
    collect_variables(schema.head, vars);
    for_each_binding(vars, source.domain, [&](const auto& binding, const std::string& text) {
      HornClause c;
      for (const auto& b : schema.body) {
        const AtomId a = kb.atoms.intern(ground_name(b, binding));
        if (std::find(c.body.begin(), c.body.end(), a) == c.body.end()) c.body.push_back(a);
      }
      c.head = kb.atoms.intern(ground_name(schema.head, binding));
      if (std::find(c.body.begin(), c.body.end(), c.head) != c.body.end()) return;
      c.schema = s;
      c.bindings = text;
      kb.add_rule(std::move(c));
    });
  }
  return kb;
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

bool term_ok(const std::string& t) {
  return !t.empty() && std::all_of(t.begin(), t.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

AtomPattern parse_pattern(std::string_view text, std::size_t line) {
  const std::string s = trim(text);
  AtomPattern p;
  const auto open = s.find('(');
  if (open == std::string::npos) {
    p.predicate = s;
  } else {
    if (s.back() != ')') throw ParseError("expected ')' in '" + s + "'", line);
    p.predicate = trim(s.substr(0, open));
    std::stringstream args(s.substr(open + 1, s.size() - open - 2));
    for (std::string a; std::getline(args, a, ',');) p.args.push_back(trim(a));
  }
  if (!term_ok(p.predicate) || !std::isalpha(static_cast<unsigned char>(p.predicate.front())) ||
      is_variable(p.predicate))
    throw ParseError("invalid predicate in '" + s + "'", line);
  for (const auto& a : p.args)
    if (!term_ok(a)) throw ParseError("invalid argument '" + a + "' in '" + s + "'", line);
  return p;
}

}  // namespace

KbSource read_kb_source(std::istream& in) {
  KbSource src;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    const auto space = text.find_first_of(" \t");
    const std::string keyword = text.substr(0, space);
    const std::string rest = space == std::string::npos ? "" : trim(text.substr(space));
    if (keyword == "domain") {
      std::istringstream ws(rest);
      for (std::string c; ws >> c;) {
        if (!term_ok(c) || is_variable(c)) throw ParseError("invalid constant '" + c + "'", line);
        src.domain.push_back(c);
      }
    } else if (keyword == "fact") {
      src.facts.push_back(parse_pattern(rest, line));
    } else if (keyword == "rule") {
      const auto arrow = rest.find("=>");
      if (arrow == std::string::npos) throw ParseError("rule without '=>'", line);
      RuleSchema r;
      const std::string body = trim(rest.substr(0, arrow));
      if (!body.empty()) {
        std::stringstream parts(body);
        for (std::string b; std::getline(parts, b, '&');) r.body.push_back(parse_pattern(b, line));
      }
      r.head = parse_pattern(rest.substr(arrow + 2), line);
      for (std::size_t i = 0; i < r.body.size(); ++i) r.text += (i ? " & " : "") + pattern_text(r.body[i]);
      r.text += (r.body.empty() ? "=> " : " => ") + pattern_text(r.head);
      src.rules.push_back(std::move(r));
    } else {
      throw ParseError("unknown directive '" + keyword + "' (expected domain, fact or rule)", line);
    }
  }
  return src;
}

HornKB read_kb(std::istream& in) {
  auto src = read_kb_source(in);
  try {
    return ground(src);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

// ---------------------------------------------------------------------------
// SubgoalGraph

SubgoalGraph::SubgoalGraph(AtomId goal) {
  Node n{Kind::Query};
  n.atom = goal;
  nodes_.push_back(std::move(n));
  by_atom_.resize(goal + 1);
  by_atom_[goal].push_back(0);
}

std::size_t SubgoalGraph::edge_count() const {
  std::size_t e = 0;
  for (const auto& n : nodes_) e += n.edges.size();
  return e;
}

NodeId SubgoalGraph::add_query_node(AtomId atom, NodeId parent) {
  Node n{Kind::Query};
  n.atom = atom;
  n.parent = parent;
  n.path = nodes_.at(parent).path;
  n.path.push_back(static_cast<std::uint32_t>(nodes_[parent].edges.size()));
  const auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(std::move(n));
  if (atom >= by_atom_.size()) by_atom_.resize(atom + 1);
  by_atom_[atom].push_back(id);
  return id;
}

NodeId SubgoalGraph::add_threshold_node(std::size_t rule, Weight threshold, Weight w_plus, Weight w_minus,
                                        NodeId parent) {
  Node n{Kind::Threshold};
  n.rule = rule;
  n.threshold = threshold;
  n.w_plus = w_plus;
  n.w_minus = w_minus;
  n.parent = parent;
  n.path = nodes_.at(parent).path;
  n.path.push_back(static_cast<std::uint32_t>(nodes_[parent].edges.size()));
  const auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(std::move(n));
  return id;
}

void SubgoalGraph::add_edge(NodeId from, NodeId to, Weight weight) {
  auto& n = nodes_.at(from);
  if (n.kind == Kind::Threshold) {
    if (weight > 0) n.w_plus = checked_sub(n.w_plus, weight);
    else n.w_minus = checked_sub(n.w_minus, weight);
  }
  n.edges.push_back({weight, to});
}

std::optional<NodeId> SubgoalGraph::find_query(AtomId atom) const {
  if (atom >= by_atom_.size() || by_atom_[atom].empty()) return std::nullopt;
  return by_atom_[atom].front();
}

bool SubgoalGraph::on_path(NodeId v, AtomId atom) const {
  for (std::optional<NodeId> cur = v; cur; cur = nodes_[*cur].parent)
    if (nodes_[*cur].kind == Kind::Query && nodes_[*cur].atom == atom) return true;
  return false;
}

// ---------------------------------------------------------------------------
// TEST / EXPLORE / GENERATE

StatusResult node_status(const SubgoalGraph& g, const std::vector<bool>& successes) {
  const std::size_t n = g.size();
  StatusResult r{std::vector<NodeStatus>(n, NodeStatus::Unknown), std::vector<std::size_t>(n, 0),
                 std::vector<std::optional<NodeId>>(n)};
  std::size_t counter = 0;
  auto in_successes = [&](AtomId a) { return a < successes.size() && successes[a]; };
  for (NodeId v = 0; v < n; ++v) {
    const auto& node = g.node(v);
    if (node.kind == SubgoalGraph::Kind::Query && in_successes(node.atom)) {
      r.status[v] = NodeStatus::Successful;
      r.stamp[v] = ++counter;
    }
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (NodeId v = static_cast<NodeId>(n); v-- > 0;) {
      if (r.status[v] != NodeStatus::Unknown) continue;
      const auto& node = g.node(v);
      NodeStatus next = NodeStatus::Unknown;
      if (node.kind == SubgoalGraph::Kind::Threshold) {
        Weight to_successful = 0, unknown_neg = 0, unknown_pos = 0;
        for (const auto& e : node.edges) {
          switch (r.status[e.target]) {
            case NodeStatus::Successful: to_successful = checked_add(to_successful, e.weight); break;
            case NodeStatus::Unknown:
              if (e.weight < 0) unknown_neg = checked_add(unknown_neg, e.weight);
              else unknown_pos = checked_add(unknown_pos, e.weight);
              break;
            case NodeStatus::Unsuccessful: break;
          }
        }
        if (checked_add(checked_add(to_successful, node.w_minus), unknown_neg) >= node.threshold)
          next = NodeStatus::Successful;
        else if (checked_add(checked_add(to_successful, node.w_plus), unknown_pos) < node.threshold)
          next = NodeStatus::Unsuccessful;
      } else {
        bool all_failed = node.exhausted;
        for (const auto& e : node.edges) {
          if (r.status[e.target] == NodeStatus::Successful) {
            next = NodeStatus::Successful;
            r.support[v] = e.target;
            break;
          }
          if (r.status[e.target] != NodeStatus::Unsuccessful) all_failed = false;
        }
        if (next == NodeStatus::Unknown && all_failed) next = NodeStatus::Unsuccessful;
      }
      if (next != NodeStatus::Unknown) {
        r.status[v] = next;
        if (next == NodeStatus::Successful) r.stamp[v] = ++counter;
        changed = true;
      }
    }
  }
  return r;
}

namespace {

std::optional<NodeId> deepest_unexplored(const SubgoalGraph& g, const StatusResult& st, NodeId v,
                                         std::vector<bool>& visited) {
  if (st.successful(v)) return std::nullopt;
  visited[v] = true;
  for (const auto& e : g.node(v).edges) {
    if (visited[e.target]) continue;
    if (auto found = deepest_unexplored(g, st, e.target, visited)) return found;
  }
  if (g.node(v).unexplored) return v;
  return std::nullopt;
}

}  // namespace

std::optional<NodeId> explore(const SubgoalGraph& g, const std::vector<bool>& known) {
  const auto st = node_status(g, known);
  std::vector<bool> visited(g.size(), false);
  return deepest_unexplored(g, st, g.source(), visited);
}

Generated generate(SubgoalGraph& g, NodeId v, const HornKB& kb, const SearchOptions& opts) {
  auto& node = g.node(v);
  if (node.exhausted) return {true, std::nullopt};
  if (node.kind == SubgoalGraph::Kind::Query) {
    const auto rules = kb.rules_with_head(node.atom);
    if (node.cyclic || node.edges.size() >= rules.size()) {
      node.exhausted = true;
      return {true, std::nullopt};
    }
    const std::size_t rule = rules[node.edges.size()];
    const auto k = static_cast<Weight>(kb.rules()[rule].body.size());
    const NodeId t = g.add_threshold_node(rule, k, k, 0, v);
    g.add_edge(v, t, 1);
    return {false, t};
  }
  const auto& body = kb.rules()[node.rule].body;
  const std::size_t next = node.edges.size();
  if (next >= body.size()) {
    node.exhausted = true;
    return {true, std::nullopt};
  }
  const AtomId a = body[next];
  if (opts.share_subgoals) {
    if (auto existing = g.find_query(a)) {
      g.add_edge(v, *existing, 1);
      return {false, std::nullopt};
    }
  }
  const bool cyclic = !opts.share_subgoals && g.on_path(v, a);
  const NodeId q = g.add_query_node(a, v);
  if (cyclic) {
    g.node(q).cyclic = true;
    g.node(q).exhausted = true;
  }
  g.add_edge(v, q, 1);
  return {false, q};
}

// ---------------------------------------------------------------------------
// Proofs

std::vector<AtomId> ChainingProof::learned() const {
  std::vector<AtomId> out;
  for (const auto& l : lines)
    if (l.kind == ProofLine::Kind::Learned) out.push_back(l.atom);
  return out;
}

namespace {

class ProofBuilder {
 public:
  ProofBuilder(const SubgoalGraph& g, const StatusResult& st, const std::vector<bool>& known,
               const std::vector<bool>& learned)
      : g_(g), st_(st), known_(known), learned_(learned) {}

  std::size_t prove(NodeId v) {
    const auto& node = g_.node(v);
    if (auto it = line_of_.find(node.atom); it != line_of_.end()) return it->second;
    ProofLine line{node.atom, ProofLine::Kind::Hypothesis};
    if (node.atom < known_.size() && known_[node.atom]) {
      if (node.atom < learned_.size() && learned_[node.atom]) line.kind = ProofLine::Kind::Learned;
    } else {
      const NodeId t = *st_.support[v];
      const auto& rule_node = g_.node(t);
      line.kind = ProofLine::Kind::Chaining;
      line.rule = rule_node.rule;
      for (const auto& e : rule_node.edges)
        if (st_.successful(e.target) && st_.stamp[e.target] < st_.stamp[t]) line.premises.push_back(prove(e.target));
    }
    proof_.lines.push_back(std::move(line));
    line_of_[node.atom] = proof_.lines.size();
    return proof_.lines.size();
  }

  ChainingProof take() { return std::move(proof_); }

 private:
  const SubgoalGraph& g_;
  const StatusResult& st_;
  const std::vector<bool>& known_;
  const std::vector<bool>& learned_;
  std::map<AtomId, std::size_t> line_of_;
  ChainingProof proof_;
};

}  // namespace

std::optional<ChainingProof> test(const SubgoalGraph& g, const std::vector<bool>& known,
                                  const std::vector<bool>& learned) {
  const auto st = node_status(g, known);
  if (!st.successful(g.source())) return std::nullopt;
  ProofBuilder b(g, st, known, learned);
  b.prove(g.source());
  return b.take();
}

bool verify_proof(const ChainingProof& p, const HornKB& kb, AtomId goal,
                  const std::function<bool(AtomId)>& accept_learned) {
  if (p.lines.empty() || p.lines.back().atom != goal) return false;
  for (std::size_t i = 0; i < p.lines.size(); ++i) {
    const auto& l = p.lines[i];
    switch (l.kind) {
      case ProofLine::Kind::Hypothesis:
        if (!kb.is_fact(l.atom)) return false;
        break;
      case ProofLine::Kind::Learned:
        if (!accept_learned || !accept_learned(l.atom)) return false;
        break;
      case ProofLine::Kind::Chaining: {
        if (l.rule >= kb.rules().size()) return false;
        const auto& rule = kb.rules()[l.rule];
        if (rule.head != l.atom) return false;
        std::vector<AtomId> got;
        for (std::size_t j : l.premises) {
          if (j == 0 || j > i) return false;
          got.push_back(p.lines[j - 1].atom);
        }
        auto want = rule.body;
        std::sort(got.begin(), got.end());
        std::sort(want.begin(), want.end());
        if (got != want) return false;
        break;
      }
    }
  }
  return true;
}

namespace {

std::string rule_text(const HornKB& kb, std::size_t rule) {
  const auto& r = kb.rules()[rule];
  if (r.schema) {
    std::string s = kb.schemas[*r.schema];
    if (!r.bindings.empty()) s += " / " + r.bindings;
    return s;
  }
  std::string s;
  for (std::size_t i = 0; i < r.body.size(); ++i) s += (i ? " & " : "") + kb.atoms.name(r.body[i]);
  return s + (r.body.empty() ? "=> " : " => ") + kb.atoms.name(r.head);
}

const char* kind_name(ProofLine::Kind k) {
  switch (k) {
    case ProofLine::Kind::Hypothesis: return "hypothesis";
    case ProofLine::Kind::Learned: return "learned";
    case ProofLine::Kind::Chaining: return "chaining";
  }
  return "?";
}

}  // namespace

std::string format_proof(const ChainingProof& p, const HornKB& kb) {
  std::ostringstream out;
  for (std::size_t i = 0; i < p.lines.size(); ++i) {
    const auto& l = p.lines[i];
    out << i + 1 << ". " << kb.atoms.name(l.atom) << " (" << kind_name(l.kind);
    if (l.kind == ProofLine::Kind::Chaining) {
      out << ", ";
      for (std::size_t j = 0; j < l.premises.size(); ++j) out << (j ? " & " : "") << l.premises[j];
      if (!l.premises.empty()) out << ", ";
      out << rule_text(kb, l.rule);
    }
    out << ")\n";
  }
  return out.str();
}

std::string proof_to_json(const ChainingProof& p, const HornKB& kb) {
  nlohmann::json lines = nlohmann::json::array();
  for (std::size_t i = 0; i < p.lines.size(); ++i) {
    const auto& l = p.lines[i];
    nlohmann::json j{{"line", i + 1}, {"atom", kb.atoms.name(l.atom)}, {"kind", kind_name(l.kind)}};
    if (l.kind == ProofLine::Kind::Chaining) {
      j["premises"] = l.premises;
      j["rule"] = rule_text(kb, l.rule);
    }
    lines.push_back(std::move(j));
  }
  return nlohmann::json{{"type", "chaining"}, {"lines", std::move(lines)}}.dump(2);
}

// ---------------------------------------------------------------------------
// Search

bool passes_sample_test(AtomId h, std::span<const ObscuredScene> samples, LearningMode mode) {
  const Formula f = Formula::atom(h);
  if (mode == LearningMode::Credulous)
    return std::none_of(samples.begin(), samples.end(),
                        [&](const ObscuredScene& rho) { return partial_eval(f, rho).witnessed_false(); });
  return std::all_of(samples.begin(), samples.end(),
                     [&](const ObscuredScene& rho) { return partial_eval(f, rho).witnessed_true(); });
}

BackwardSearch::BackwardSearch(const HornKB& kb, AtomId goal, SearchOptions opts)
    : kb_(kb), opts_(opts), graph_(goal) {
  if (goal >= kb.atoms.size()) throw std::out_of_range("goal atom not in the KB vocabulary");
  known_.assign(kb.atoms.size(), false);
  learned_.assign(kb.atoms.size(), false);
  for (AtomId a : kb.facts()) known_[a] = true;
}

BackwardSearch::BackwardSearch(const HornKB& kb, AtomId goal, std::span<const ObscuredScene> samples,
                               LearningMode mode, SearchOptions opts)
    : BackwardSearch(kb, goal, opts) {
  samples_ = samples;
  mode_ = mode;
  sample_verdict_.assign(kb.atoms.size(), -1);
}

std::vector<AtomId> BackwardSearch::learned() const {
  std::vector<AtomId> out;
  for (AtomId a = 0; a < learned_.size(); ++a)
    if (learned_[a]) out.push_back(a);
  return out;
}

bool BackwardSearch::test_sample(AtomId h) {
  auto& verdict = sample_verdict_[h];
  if (verdict < 0) verdict = passes_sample_test(h, samples_, *mode_) ? 1 : 0;
  return verdict == 1;
}

void BackwardSearch::on_new_vertex(NodeId v) {
  auto& node = graph_.node(v);
  if (node.kind == SubgoalGraph::Kind::Threshold) {
    node.unexplored = true;
    return;
  }
  const AtomId h = node.atom;
  const bool fresh_label = graph_.find_query(h) == v;
  if (mode_ && fresh_label && !known_[h] && test_sample(h)) {
    known_[h] = true;
    learned_[h] = true;
  }
  node.unexplored = !node.cyclic && !known_[h];
}

std::optional<ChainingProof> BackwardSearch::run() {
  const AtomId goal = graph_.goal();
  if (known_[goal]) return ChainingProof{{ProofLine{goal, ProofLine::Kind::Hypothesis}}};
  graph_.node(graph_.source()).unexplored = true;
  while (true) {
    if (auto proof = test(graph_, known_, learned_)) return proof;
    const auto v = explore(graph_, known_);
    if (!v) return std::nullopt;
    proposals_.push_back(*v);
    if (observer_) observer_(*this, *v);
    ++iterations_;
    const auto step = generate(graph_, *v, kb_, opts_);
    if (step.fully_explored) graph_.node(*v).unexplored = false;
    else if (step.created) on_new_vertex(*step.created);
  }
}

std::optional<ChainingProof> backward_search(AtomId goal, const HornKB& kb, SearchOptions opts) {
  return BackwardSearch(kb, goal, opts).run();
}

std::optional<ChainingProof> learn_backward_search(AtomId goal, const HornKB& kb,
                                                   std::span<const ObscuredScene> samples, LearningMode mode,
                                                   SearchOptions opts) {
  return BackwardSearch(kb, goal, samples, mode, opts).run();
}

std::uint64_t sample_size_chaining(std::uint64_t num_atoms, double epsilon, double delta, double eta, double c) {
  if (num_atoms < 1) throw std::invalid_argument("N must be at least 1");
  if (!(epsilon > 0 && epsilon <= 1)) throw std::invalid_argument("epsilon must lie in (0, 1]");
  if (!(delta > 0 && delta < 1)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (!(eta > 0 && eta <= 1)) throw std::invalid_argument("eta must lie in (0, 1]");
  if (!(c > 0)) throw std::invalid_argument("c must be positive");
  const double n = static_cast<double>(num_atoms);
  const double x = c * (n * std::log2(n) * std::log(2.0) + std::log(1.0 / delta)) / (epsilon * eta);
  // Absorb rounding noise so that exact integers are not bumped up by one.
  return static_cast<std::uint64_t>(std::ceil(x * (1.0 - 1e-12)));
}

}  // namespace qdl
