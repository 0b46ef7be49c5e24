#include "qdl/resolution.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qdl/formula_io.hpp"

namespace qdl {

Tri literal_value(Literal l, const ObscuredScene& rho) {
  if (l.atom >= rho.size()) return Tri::Unknown;
  const Tri v = rho[l.atom];
  if (v == Tri::Unknown || l.positive) return v;
  return v == Tri::True ? Tri::False : Tri::True;
}

// ---------------------------------------------------------------------------
// Clause

Clause::Clause(std::vector<Literal> literals) : lits_(std::move(literals)) {
  std::sort(lits_.begin(), lits_.end());
  lits_.erase(std::unique(lits_.begin(), lits_.end()), lits_.end());
  for (std::size_t i = 1; i < lits_.size(); ++i)
    if (lits_[i].atom == lits_[i - 1].atom) throw std::invalid_argument("clause contains an atom and its negation");
}

bool Clause::contains(Literal l) const { return std::binary_search(lits_.begin(), lits_.end(), l); }

std::optional<bool> Clause::polarity(AtomId a) const {
  auto it = std::lower_bound(lits_.begin(), lits_.end(), Literal{a, false});
  if (it == lits_.end() || it->atom != a) return std::nullopt;
  return it->positive;
}

bool Clause::is_superset_of(const Clause& other) const {
  return std::includes(lits_.begin(), lits_.end(), other.lits_.begin(), other.lits_.end());
}

Clause Clause::with(Literal l) const {
  if (contains(l.negated())) throw std::invalid_argument("adding the complement of a clause literal");
  Clause c = *this;
  if (!contains(l)) c.lits_.insert(std::lower_bound(c.lits_.begin(), c.lits_.end(), l), l);
  return c;
}

Clause Clause::without_atom(AtomId a) const {
  Clause c = *this;
  std::erase_if(c.lits_, [a](Literal l) { return l.atom == a; });
  return c;
}

Formula Clause::to_formula() const {
  std::vector<WeightedTerm> terms;
  terms.reserve(lits_.size());
  for (Literal l : lits_) {
    Formula a = Formula::atom(l.atom);
    terms.push_back({1, l.positive ? a : Formula::negate(a)});
  }
  return Formula::threshold(std::move(terms), 1);
}

Formula cnf_to_formula(const Cnf& cnf) {
  std::vector<Formula> parts;
  parts.reserve(cnf.size());
  for (const auto& c : cnf) parts.push_back(c.to_formula());
  return Formula::conj(std::move(parts));
}

bool witnessed_false(const Clause& c, const ObscuredScene& rho) {
  return partial_eval(c.to_formula(), rho).witnessed_false();
}

// ---------------------------------------------------------------------------
// ResolutionProof

ResolutionProof::Index ResolutionProof::add_hypothesis(Clause c) {
  nodes_.push_back({Kind::Hypothesis, std::move(c)});
  return root();
}

ResolutionProof::Index ResolutionProof::add_weakening(Clause derived, std::size_t from) {
  nodes_.push_back({Kind::Weakening, std::move(derived), from});
  return root();
}

ResolutionProof::Index ResolutionProof::add_cut(AtomId pivot, Index left, Index right) {
  std::vector<Literal> lits;
  for (Index child : {left, right})
    for (Literal l : nodes_.at(child).clause.literals())
      if (l.atom != pivot) lits.push_back(l);
  return add_cut(pivot, left, right, Clause(std::move(lits)));
}

ResolutionProof::Index ResolutionProof::add_cut(AtomId pivot, Index left, Index right, Clause conclusion) {
  nodes_.push_back({Kind::Cut, std::move(conclusion), 0, pivot, left, right});
  return root();
}

namespace {

std::size_t space_of(const ResolutionProof& p, ResolutionProof::Index v) {
  const auto& n = p.node(v);
  if (n.kind != ResolutionProof::Kind::Cut) return 1;
  const std::size_t a = space_of(p, n.left), b = space_of(p, n.right);
  return a == b ? a + 1 : std::max(a, b);
}

void count_nodes(const ResolutionProof& p, ResolutionProof::Index v, std::size_t& k) {
  ++k;
  const auto& n = p.node(v);
  if (n.kind == ResolutionProof::Kind::Cut) {
    count_nodes(p, n.left, k);
    count_nodes(p, n.right, k);
  }
}

void collect_premises(const ResolutionProof& p, ResolutionProof::Index v, Cnf& out, std::set<Clause>& seen) {
  const auto& n = p.node(v);
  if (n.kind == ResolutionProof::Kind::Cut) {
    collect_premises(p, n.left, out, seen);
    collect_premises(p, n.right, out, seen);
  } else if (n.kind == ResolutionProof::Kind::Hypothesis && seen.insert(n.clause).second) {
    out.push_back(n.clause);
  }
}

}  // namespace

std::size_t minimal_space(const ResolutionProof& p) { return p.empty() ? 0 : space_of(p, p.root()); }

std::size_t node_count(const ResolutionProof& p) {
  std::size_t k = 0;
  if (!p.empty()) count_nodes(p, p.root(), k);
  return k;
}

Cnf extract_premises(const ResolutionProof& p) {
  Cnf out;
  std::set<Clause> seen;
  if (!p.empty()) collect_premises(p, p.root(), out, seen);
  return out;
}

bool verify_proof(const ResolutionProof& p, const Cnf& phi, const Cnf& h) {
  if (p.empty()) return false;
  const std::set<Clause> hyps(h.begin(), h.end());
  std::vector<bool> used(p.size(), false);
  std::vector<ResolutionProof::Index> stack{p.root()};
  used[p.root()] = true;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    const auto& n = p.node(v);
    switch (n.kind) {
      case ResolutionProof::Kind::Hypothesis:
        if (!hyps.contains(n.clause)) return false;
        break;
      case ResolutionProof::Kind::Weakening:
        if (n.from >= phi.size() || !n.clause.is_superset_of(phi[n.from])) return false;
        break;
      case ResolutionProof::Kind::Cut: {
        for (auto child : {n.left, n.right}) {
          // Children precede their parent, and each is used once.
          if (child >= v || used[child]) return false;
          used[child] = true;
          stack.push_back(child);
        }
        const auto pl = p.node(n.left).clause.polarity(n.pivot);
        const auto pr = p.node(n.right).clause.polarity(n.pivot);
        if (!pl || !pr || *pl == *pr) return false;
        std::vector<Literal> lits;
        for (auto child : {n.left, n.right})
          for (Literal l : p.node(child).clause.literals())
            if (l.atom != n.pivot) lits.push_back(l);
        std::sort(lits.begin(), lits.end());
        lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
        if (!std::ranges::equal(lits, n.clause.literals())) return false;
        break;
      }
    }
  }
  if (std::find(used.begin(), used.end(), false) != used.end()) return false;
  return minimal_space(p) <= p.space();
}

namespace {

bool normal_below(const ResolutionProof& p, ResolutionProof::Index v, std::vector<AtomId>& path) {
  const auto& n = p.node(v);
  if (n.kind != ResolutionProof::Kind::Cut) return true;
  if (std::find(path.begin(), path.end(), n.pivot) != path.end()) return false;
  for (AtomId a : path)
    if (!n.clause.polarity(a)) return false;
  path.push_back(n.pivot);
  const bool ok = normal_below(p, n.left, path) && normal_below(p, n.right, path);
  path.pop_back();
  return ok;
}

}  // namespace

bool check_normal(const ResolutionProof& p) {
  if (p.empty()) return false;
  std::vector<AtomId> path;
  return normal_below(p, p.root(), path);
}

// ---------------------------------------------------------------------------
// Search

namespace {

std::size_t infer_atoms(const Cnf& phi, const Clause& c, std::span<const ObscuredScene> samples) {
  std::size_t n = 0;
  for (const auto& rho : samples) n = std::max(n, rho.size());
  auto scan = [&](const Clause& cl) {
    for (Literal l : cl.literals()) n = std::max<std::size_t>(n, l.atom + 1);
  };
  for (const auto& cl : phi) scan(cl);
  scan(c);
  return n;
}

class SpaceSearch {
 public:
  SpaceSearch(const Cnf& phi, std::span<const ObscuredScene> samples, const LearnOptions& opts, std::size_t n)
      : phi_(phi), samples_(samples), opts_(opts), n_(n) {}

  std::optional<ResolutionProof::Index> run(std::size_t s, const Clause& c, const std::vector<std::uint32_t>& scope) {
    if (opts_.on_call) opts_.on_call(c, s, scope);
    const Formula f = c.to_formula();
    const bool refuted =
        std::any_of(scope.begin(), scope.end(), [&](auto i) { return partial_eval(f, samples_[i]).witnessed_false(); });
    if (!refuted) return proof_.add_hypothesis(c);
    for (std::size_t j = 0; j < phi_.size(); ++j)
      if (c.is_superset_of(phi_[j])) return proof_.add_weakening(c, j);
    if (s <= 1 || failed_.contains({s, c})) return std::nullopt;

    for (AtomId a = 0; a < n_; ++a) {
      if (c.polarity(a)) continue;
      for (bool positive : {true, false}) {
        const Literal l{a, positive};
        const std::size_t mark = proof_.size();
        const auto first = run(s - 1, c.with(l), restrict(scope, l, Tri::True));
        if (!first) continue;
        const auto second = run(s, c.with(l.negated()), restrict(scope, l, Tri::False));
        if (!second) {
          proof_.truncate(mark);
          if (opts_.backtrack) continue;
          failed_.insert({s, c});
          return std::nullopt;
        }
        return positive ? proof_.add_cut(a, *first, *second) : proof_.add_cut(a, *second, *first);
      }
    }
    // The outcome depends only on (s, C), so failures can be remembered.
    failed_.insert({s, c});
    return std::nullopt;
  }

  ResolutionProof take(std::size_t s) {
    proof_.set_space(s);
    return std::move(proof_);
  }

 private:
  // Samples in scope on which l does not take the value `drop`.
  std::vector<std::uint32_t> restrict(const std::vector<std::uint32_t>& scope, Literal l, Tri drop) const {
    std::vector<std::uint32_t> out;
    out.reserve(scope.size());
    for (auto i : scope)
      if (literal_value(l, samples_[i]) != drop) out.push_back(i);
    return out;
  }

  const Cnf& phi_;
  std::span<const ObscuredScene> samples_;
  const LearnOptions& opts_;
  std::size_t n_;
  ResolutionProof proof_;
  std::set<std::pair<std::size_t, Clause>> failed_;
};

}  // namespace

std::optional<ResolutionProof> learn_search_space(const Cnf& phi, std::size_t s, const Clause& c,
                                                  std::span<const ObscuredScene> samples, const LearnOptions& opts) {
  if (s < 1) throw std::invalid_argument("space bound must be at least 1");
  const std::size_t n = opts.num_atoms ? opts.num_atoms : infer_atoms(phi, c, samples);
  std::vector<std::uint32_t> scope(samples.size());
  for (std::uint32_t i = 0; i < scope.size(); ++i) scope[i] = i;
  SpaceSearch search(phi, samples, opts, n);
  if (!search.run(s, c, scope)) return std::nullopt;
  return search.take(s);
}

std::optional<ResolutionProof> refute(const Cnf& phi, const LearnConfig& cfg, std::span<const ObscuredScene> samples,
                                      const LearnOptions& opts) {
  if (samples.empty()) throw std::invalid_argument("refute needs at least one sample");
  return learn_search_space(phi, cfg.s, Clause{}, samples, opts);
}

std::uint64_t sample_size_resolution(std::uint64_t num_atoms, std::uint64_t s, double epsilon, double delta,
                                     double eta, double c) {
  if (s < 1 || num_atoms < s) throw std::invalid_argument("need N >= s >= 1");
  if (!(epsilon > 0 && epsilon <= 1)) throw std::invalid_argument("epsilon must lie in (0, 1]");
  if (!(delta > 0 && delta < 1)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (!(eta > 0 && eta <= 1)) throw std::invalid_argument("eta must lie in (0, 1]");
  if (!(c > 0)) throw std::invalid_argument("c must be positive");
  const double n = static_cast<double>(num_atoms);
  const double b = std::pow(n, static_cast<double>(s - 1)) * std::log2(n) * std::log(2.0);
  const double x = c * (b + std::log(1.0 / delta)) / (epsilon * eta);
  return static_cast<std::uint64_t>(std::ceil(x * (1.0 - 1e-12)));
}

// ---------------------------------------------------------------------------
// Counting bounds

namespace {

// 2.71828182 < e.
const Rational kELow{BigInt(135914091), BigInt(50000000)};

Rational pow_rational(const Rational& base, std::uint64_t exp) {
  Rational r = 1;
  for (std::uint64_t i = 0; i < exp; ++i) r *= base;
  return r;
}

void check_ns(std::uint64_t n, std::uint64_t s) {
  if (s < 1 || n < s) throw std::invalid_argument("need N >= s >= 1");
}

}  // namespace

CountBounds count_bounds(std::uint64_t num_atoms, std::uint64_t s) {
  check_ns(num_atoms, s);
  if (s > 63) throw std::invalid_argument("space bound too large");
  CountBounds b;
  b.min_k = (std::uint64_t{1} << s) - 1;
  if (s == 1) return b;
  const double l = std::pow(std::exp(1.0) * static_cast<double>(num_atoms) / static_cast<double>(s - 1),
                            static_cast<double>(s - 1));
  b.max_k = 2 * l;
  b.log2_max_proofs = l * std::log2(8.0 * static_cast<double>(num_atoms));
  return b;
}

bool within_node_bound(std::uint64_t k, std::uint64_t num_atoms, std::uint64_t s) {
  check_ns(num_atoms, s);
  if (s == 1) return k <= 1;
  const Rational base = kELow * Rational(num_atoms) / Rational(s - 1);
  return Rational(k) <= 2 * pow_rational(base, s - 1);
}

bool within_count_bound(const BigInt& count, std::uint64_t num_atoms, std::uint64_t s) {
  check_ns(num_atoms, s);
  if (s == 1) return count <= 1;
  const Rational l = pow_rational(kELow * Rational(num_atoms) / Rational(s - 1), s - 1);
  // count <= (8N)^l follows from count^D <= (8N)^floor(l D).
  constexpr unsigned D = 1024;
  const BigInt k = boost::multiprecision::numerator(l) * D / boost::multiprecision::denominator(l);
  if (count <= 1) return true;
  return boost::multiprecision::pow(count, D) <= boost::multiprecision::pow(BigInt(8 * num_atoms), static_cast<unsigned>(k));
}

// ---------------------------------------------------------------------------
// Files and output

namespace {

std::string atom_name(AtomId a, const AtomTable& atoms) {
  return a < atoms.size() ? atoms.name(a) : "x" + std::to_string(a + 1);
}

std::string literal_text(Literal l, const AtomTable& atoms) {
  return (l.positive ? "" : "~") + atom_name(l.atom, atoms);
}

}  // namespace

Cnf read_cnf(std::istream& in, AtomTable& atoms) {
  std::map<long, std::string> names;
  std::vector<std::pair<std::size_t, std::string>> body;
  std::optional<std::pair<long, long>> header;
  std::size_t header_line = 0;
  std::string raw;
  for (std::size_t line = 1; std::getline(in, raw); ++line) {
    std::istringstream ls(raw);
    std::string first;
    if (!(ls >> first)) continue;
    if (first == "c") {
      std::string word, name;
      long id = 0;
      if (ls >> word && word == "atom") {
        if (!(ls >> id >> name) || id < 1) throw ParseError("malformed 'c atom <id> <name>' comment", line);
        if (!names.emplace(id, name).second) throw ParseError("atom " + std::to_string(id) + " named twice", line);
      }
    } else if (first == "p") {
      std::string fmt;
      long n = -1, m = -1;
      if (header) throw ParseError("duplicate problem line", line);
      if (!(ls >> fmt >> n >> m) || fmt != "cnf" || n < 0 || m < 0) throw ParseError("expected 'p cnf N M'", line);
      header = {n, m};
      header_line = line;
    } else {
      if (!header) throw ParseError("clause before 'p cnf' line", line);
      body.emplace_back(line, raw);
    }
  }
  if (!header) throw ParseError("missing 'p cnf N M' line");
  const auto [n, m] = *header;
  for (const auto& [id, name] : names)
    if (id > n) throw ParseError("named atom " + std::to_string(id) + " exceeds N");
  for (long i = 1; i <= n; ++i) {
    const auto it = names.find(i);
    const std::string name = it != names.end() ? it->second : "x" + std::to_string(i);
    if (atoms.intern(name) != static_cast<AtomId>(i - 1))
      throw ParseError("atom name '" + name + "' clashes with the atom table", header_line);
  }

  Cnf cnf;
  std::vector<Literal> current;
  std::size_t current_line = 0;
  for (const auto& [line, text] : body) {
    std::istringstream ls(text);
    std::string tok;
    while (ls >> tok) {
      long v = 0;
      try {
        std::size_t used = 0;
        v = std::stol(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError("expected a signed atom id, got '" + tok + "'", line);
      }
      if (current.empty()) current_line = line;
      if (v == 0) {
        try {
          cnf.emplace_back(std::move(current));
        } catch (const std::invalid_argument& e) {
          throw ParseError(e.what(), current_line);
        }
        current.clear();
        continue;
      }
      if (std::labs(v) > n) throw ParseError("atom id " + std::to_string(std::labs(v)) + " exceeds N", line);
      current.push_back({static_cast<AtomId>(std::labs(v) - 1), v > 0});
    }
  }
  if (!current.empty()) throw ParseError("last clause not terminated by 0", current_line);
  if (static_cast<long>(cnf.size()) != m)
    throw ParseError("header declares " + std::to_string(m) + " clauses, found " + std::to_string(cnf.size()),
                     header_line);
  return cnf;
}

void write_cnf(std::ostream& out, const Cnf& cnf, const AtomTable& atoms) {
  for (AtomId a = 0; a < atoms.size(); ++a)
    if (atoms.name(a) != "x" + std::to_string(a + 1)) out << "c atom " << a + 1 << ' ' << atoms.name(a) << '\n';
  out << "p cnf " << atoms.size() << ' ' << cnf.size() << '\n';
  for (const auto& c : cnf) {
    for (Literal l : c.literals()) out << (l.positive ? "" : "-") << l.atom + 1 << ' ';
    out << "0\n";
  }
}

Clause parse_clause(std::string_view text, const AtomTable& atoms) {
  std::string s(text);
  std::replace_if(s.begin(), s.end(), [](char ch) { return ch == '|' || ch == ','; }, ' ');
  std::istringstream ts(s);
  std::vector<std::string> toks;
  for (std::string t; ts >> t;) toks.push_back(t);
  if (!toks.empty() && toks.back() == "0") toks.pop_back();
  if (toks.size() == 1 && toks.front() == "[]") toks.clear();
  std::vector<Literal> lits;
  for (const auto& t : toks) {
    const bool neg = t.front() == '~' || t.front() == '-';
    const std::string body = neg ? t.substr(1) : t;
    if (body.empty()) throw std::invalid_argument("empty literal in clause");
    AtomId id = 0;
    if (std::all_of(body.begin(), body.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
      const unsigned long v = std::stoul(body);
      if (v == 0 || v > atoms.size()) throw std::invalid_argument("atom id " + body + " out of range");
      id = static_cast<AtomId>(v - 1);
    } else if (auto found = atoms.find(body)) {
      id = *found;
    } else {
      throw std::invalid_argument("unknown atom '" + body + "'");
    }
    lits.push_back({id, !neg});
  }
  return Clause(std::move(lits));
}

std::string to_string(const Clause& c, const AtomTable& atoms) {
  if (c.empty()) return "[]";
  std::string s;
  for (Literal l : c.literals()) s += (s.empty() ? "" : " | ") + literal_text(l, atoms);
  return s;
}

namespace {

void format_node(const ResolutionProof& p, ResolutionProof::Index v, const AtomTable& atoms, int depth,
                 std::ostringstream& out) {
  const auto& n = p.node(v);
  out << std::string(2 * depth, ' ');
  switch (n.kind) {
    case ResolutionProof::Kind::Hypothesis: out << "hyp: "; break;
    case ResolutionProof::Kind::Weakening: out << "weaken #" << n.from + 1 << ": "; break;
    case ResolutionProof::Kind::Cut: out << "cut " << atom_name(n.pivot, atoms) << ": "; break;
  }
  out << to_string(n.clause, atoms) << '\n';
  if (n.kind == ResolutionProof::Kind::Cut) {
    format_node(p, n.left, atoms, depth + 1, out);
    format_node(p, n.right, atoms, depth + 1, out);
  }
}

nlohmann::json node_json(const ResolutionProof& p, ResolutionProof::Index v, const AtomTable& atoms) {
  const auto& n = p.node(v);
  nlohmann::json clause = nlohmann::json::array();
  for (Literal l : n.clause.literals()) clause.push_back(literal_text(l, atoms));
  switch (n.kind) {
    case ResolutionProof::Kind::Hypothesis: return {{"type", "hyp"}, {"clause", clause}};
    case ResolutionProof::Kind::Weakening: return {{"type", "weaken"}, {"clause", clause}, {"from", n.from + 1}};
    case ResolutionProof::Kind::Cut:
      return {{"type", "cut"},
              {"pivot", atom_name(n.pivot, atoms)},
              {"clause", clause},
              {"left", node_json(p, n.left, atoms)},
              {"right", node_json(p, n.right, atoms)}};
  }
  return {};
}

}  // namespace

std::string format_proof(const ResolutionProof& p, const AtomTable& atoms) {
  std::ostringstream out;
  if (!p.empty()) format_node(p, p.root(), atoms, 0, out);
  return out.str();
}

std::string proof_to_json(const ResolutionProof& p, const AtomTable& atoms) {
  nlohmann::json j{{"type", "resolution"}, {"space", p.space()}};
  j["proof"] = p.empty() ? nlohmann::json() : node_json(p, p.root(), atoms);
  return j.dump(2);
}

}  // namespace qdl
