#include "qdl/distributions.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "qdl/formula_io.hpp"
#include "qdl/rng.hpp"

namespace qdl {

Rational parse_rational(std::string_view text) {
  std::string s(text);
  try {
    if (auto slash = s.find('/'); slash != std::string::npos) {
      BigInt num(s.substr(0, slash));
      BigInt den(s.substr(slash + 1));
      if (den == 0) throw std::invalid_argument("zero denominator");
      return Rational(num, den);
    }
    if (auto dot = s.find('.'); dot != std::string::npos) {
      const std::string frac = s.substr(dot + 1);
      BigInt whole(s.substr(0, dot).empty() ? "0" : s.substr(0, dot));
      BigInt num(frac.empty() ? "0" : frac);
      BigInt den = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(frac.size()));
      return Rational(whole) + Rational(num, den);
    }
    return Rational(BigInt(s));
  } catch (const std::exception&) {
    throw std::invalid_argument("not a rational number: '" + s + "'");
  }
}

std::string to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

ExplicitDistribution::ExplicitDistribution(std::vector<Entry> support) : support_(std::move(support)) {
  if (support_.empty()) throw std::invalid_argument("distribution has empty support");
  num_atoms_ = support_.front().scene.size();
  Rational total = 0;
  std::set<Scene> seen;
  for (const auto& e : support_) {
    if (e.scene.size() != num_atoms_) throw std::invalid_argument("distribution scenes differ in length");
    if (e.prob <= 0 || e.prob > 1) throw std::invalid_argument("scene probability outside (0, 1]");
    if (!seen.insert(e.scene).second)
      throw std::invalid_argument("duplicate scene " + e.scene.to_string() + " in distribution");
    total += e.prob;
  }
  if (total != 1) throw std::invalid_argument("distribution probabilities sum to " + to_string(total) + ", not 1");
  double acc = 0.0;
  cumulative_.reserve(support_.size());
  for (const auto& e : support_) cumulative_.push_back(acc += to_double(e.prob));
}

ExplicitDistribution ExplicitDistribution::uniform(std::vector<Scene> scenes) {
  std::vector<Entry> support;
  const Rational p(1, static_cast<long long>(scenes.size()));
  for (auto& x : scenes) support.push_back({std::move(x), p});
  return ExplicitDistribution(std::move(support));
}

ExplicitDistribution ExplicitDistribution::point(Scene scene) { return ExplicitDistribution({{std::move(scene), 1}}); }

ExplicitDistribution ExplicitDistribution::independent(const std::vector<Rational>& marginals) {
  const std::size_t n = marginals.size();
  if (n > 20) throw EstimateOnlyError("independent distribution over more than 20 atoms");
  for (const auto& p : marginals)
    if (p < 0 || p > 1) throw std::invalid_argument("marginal probability outside [0, 1]");
  std::vector<Entry> support;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    Scene x(n);
    Rational p = 1;
    for (std::size_t i = 0; i < n && p != 0; ++i) {
      const bool v = (bits >> i) & 1U;
      x.set(static_cast<AtomId>(i), v);
      p *= v ? marginals[i] : 1 - marginals[i];
    }
    if (p != 0) support.push_back({std::move(x), p});
  }
  return ExplicitDistribution(std::move(support));
}

std::size_t ExplicitDistribution::draw_index(double u) const {
  const double target = u * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  if (it == cumulative_.end()) return support_.size() - 1;
  return static_cast<std::size_t>(it - cumulative_.begin());
}

MaskingProcess::MaskingProcess(Variant v) : v_(std::move(v)) {
  auto check_prob = [](const Rational& p) {
    if (p < 0 || p > 1) throw std::invalid_argument("masking probability outside [0, 1]");
  };
  if (const auto* coin = std::get_if<IndependentCoin>(&v_)) check_prob(coin->hide_prob);
  if (const auto* dep = std::get_if<ValueDependent>(&v_))
    for (const auto& r : dep->rules) check_prob(r.prob);
}

std::vector<std::pair<ObscuredScene, Rational>> MaskingProcess::outcomes(const Scene& x) const {
  std::vector<std::pair<ObscuredScene, Rational>> out;
  const ObscuredScene revealed(x);
  if (const auto* fixed = std::get_if<FixedSubset>(&v_)) {
    ObscuredScene rho = revealed;
    for (AtomId a : fixed->hidden) rho.hide(a);
    out.emplace_back(std::move(rho), 1);
  } else if (const auto* coin = std::get_if<IndependentCoin>(&v_)) {
    const std::size_t n = x.size();
    if (n > kMaxExactAtoms)
      throw EstimateOnlyError("exact enumeration of coin masks over " + std::to_string(n) +
                              " atoms exceeds the limit of " + std::to_string(kMaxExactAtoms) +
                              "; use a Monte Carlo estimate");
    const Rational& p = coin->hide_prob;
    for (std::uint64_t hide = 0; hide < (std::uint64_t{1} << n); ++hide) {
      ObscuredScene rho = revealed;
      Rational prob = 1;
      for (std::size_t i = 0; i < n && prob != 0; ++i) {
        if ((hide >> i) & 1U) {
          rho.hide(static_cast<AtomId>(i));
          prob *= p;
        } else {
          prob *= 1 - p;
        }
      }
      if (prob != 0) out.emplace_back(std::move(rho), prob);
    }
  } else {
    for (const auto& rule : std::get<ValueDependent>(v_).rules) {
      if (!eval(rule.condition, x)) continue;
      if (rule.prob != 0) {
        ObscuredScene rho = revealed;
        for (AtomId a : rule.hidden) rho.hide(a);
        out.emplace_back(std::move(rho), rule.prob);
      }
      if (rule.prob != 1) out.emplace_back(revealed, 1 - rule.prob);
      return out;
    }
    out.emplace_back(revealed, 1);
  }
  return out;
}

SampleSet sample(const ExplicitDistribution& d, const MaskingProcess& m, std::size_t count, std::uint64_t seed) {
  SampleSet out;
  out.seed = seed;
  out.provenance = "sampled";
  out.scenes.reserve(count);
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& x = d.support()[d.draw_index(rng.uniform())].scene;
    out.scenes.push_back(m.apply(x, rng));
  }
  return out;
}

Rational validity(const ExplicitDistribution& d, const Formula& f) {
  Rational total = 0;
  for (const auto& e : d.support())
    if (eval(f, e.scene)) total += e.prob;
  return total;
}

Concealment concealment(const ExplicitDistribution& d, const MaskingProcess& m, const std::vector<Formula>& formulas) {
  Concealment result{1, true};
  for (const auto& f : formulas) {
    Rational falsified = 0;
    Rational witnessed = 0;
    for (const auto& e : d.support()) {
      if (eval(f, e.scene)) continue;
      falsified += e.prob;
      for (const auto& [rho, p] : m.outcomes(e.scene))
        if (partial_eval(f, rho).is_witnessed()) witnessed += e.prob * p;
    }
    if (falsified == 0) continue;
    const Rational eta = witnessed / falsified;
    if (result.vacuous || eta < result.eta) result.eta = eta;
    result.vacuous = false;
  }
  return result;
}

Rational counterexample_rate(const ExplicitDistribution& d, const MaskingProcess& m, const Formula& f) {
  Rational total = 0;
  for (const auto& e : d.support())
    for (const auto& [rho, p] : m.outcomes(e.scene))
      if (partial_eval(f, rho).witnessed_false()) total += e.prob * p;
  return total;
}

// ---------------------------------------------------------------------------
// Files.

namespace {

struct Line {
  std::size_t number;
  std::string text;
};

std::vector<Line> content_lines(std::istream& in) {
  std::vector<Line> lines;
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string::npos || text[first] == '#') continue;
    const auto last = text.find_last_not_of(" \t\r");
    lines.push_back({number, text.substr(first, last - first + 1)});
  }
  return lines;
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream ss(s);
  std::vector<std::string> out;
  for (std::string w; ss >> w;) out.push_back(w);
  return out;
}

// Parses "atoms: a b c" and returns the table ids of the columns.
std::vector<AtomId> read_header(const Line& line, AtomTable& atoms) {
  if (line.text.rfind("atoms:", 0) != 0) throw ParseError("expected header 'atoms: ...'", line.number);
  std::vector<AtomId> columns;
  std::set<std::string> seen;
  for (const auto& name : words(line.text.substr(6))) {
    if (!is_atom_name(name)) throw ParseError("invalid atom name '" + name + "'", line.number);
    if (!seen.insert(name).second) throw ParseError("duplicate atom '" + name + "' in header", line.number);
    columns.push_back(atoms.intern(name));
  }
  return columns;
}

std::vector<AtomId> resolve_atoms(const std::vector<std::string>& names, const AtomTable& atoms, std::size_t line) {
  std::vector<AtomId> ids;
  for (const auto& n : names) {
    auto id = atoms.find(n);
    if (!id) throw ParseError("unknown atom '" + n + "'", line);
    ids.push_back(*id);
  }
  return ids;
}

Rational probability(const std::string& text, std::size_t line) {
  try {
    return parse_rational(text);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), line);
  }
}

}  // namespace

ExplicitDistribution read_distribution(std::istream& in, AtomTable& atoms) {
  const auto lines = content_lines(in);
  if (lines.empty()) throw ParseError("empty distribution file");
  const auto columns = read_header(lines.front(), atoms);
  if (columns.size() != atoms.size())
    throw ParseError("distribution header must name every atom of the vocabulary (" + std::to_string(atoms.size()) +
                         " atoms, header has " + std::to_string(columns.size()) + ")",
                     lines.front().number);
  std::vector<ExplicitDistribution::Entry> support;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto w = words(lines[i].text);
    if (w.size() != 2) throw ParseError("expected '<prob> <bits>'", lines[i].number);
    if (w[1].size() != columns.size())
      throw ParseError("scene has " + std::to_string(w[1].size()) + " entries, header has " +
                           std::to_string(columns.size()),
                       lines[i].number);
    Scene x(atoms.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (w[1][c] != '0' && w[1][c] != '1') throw ParseError("scene entries must be 0 or 1", lines[i].number);
      x.set(columns[c], w[1][c] == '1');
    }
    support.push_back({std::move(x), probability(w[0], lines[i].number)});
  }
  try {
    return ExplicitDistribution(std::move(support));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

MaskingProcess read_mask(std::istream& in, const AtomTable& atoms) {
  const auto lines = content_lines(in);
  if (lines.empty()) throw ParseError("empty mask file");
  const auto head = words(lines.front().text);
  if (head.front() == "fixed") {
    if (lines.size() != 1) throw ParseError("a fixed mask is a single line", lines[1].number);
    return MaskingProcess(FixedSubset{resolve_atoms({head.begin() + 1, head.end()}, atoms, lines.front().number)});
  }
  if (head.front() == "coin") {
    if (head.size() != 2 || lines.size() != 1) throw ParseError("expected 'coin <prob>'", lines.front().number);
    return MaskingProcess(IndependentCoin{probability(head[1], lines.front().number)});
  }
  ValueDependent dep;
  for (const auto& line : lines) {
    // when <formula> hide a b with 3/4
    const auto& t = line.text;
    if (t.rfind("when ", 0) != 0) throw ParseError("expected 'fixed', 'coin' or 'when'", line.number);
    const auto hide = t.rfind(" hide ");
    const auto with = t.rfind(" with ");
    if (hide == std::string::npos || with == std::string::npos || with < hide)
      throw ParseError("expected 'when <formula> hide <atoms> with <prob>'", line.number);
    Formula cond = [&] {
      try {
        return parse_formula(t.substr(5, hide - 5), atoms);
      } catch (const ParseError& e) {
        throw ParseError(e.what(), line.number);
      }
    }();
    auto hidden = resolve_atoms(words(t.substr(hide + 6, with - hide - 6)), atoms, line.number);
    dep.rules.push_back({std::move(cond), std::move(hidden), probability(t.substr(with + 6), line.number)});
  }
  return MaskingProcess(std::move(dep));
}

std::vector<ObscuredScene> read_scenes(std::istream& in, AtomTable& atoms) {
  const auto lines = content_lines(in);
  if (lines.empty()) throw ParseError("empty scene file");
  const auto columns = read_header(lines.front(), atoms);
  std::vector<ObscuredScene> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& t = lines[i].text;
    if (t.size() != columns.size())
      throw ParseError("row has " + std::to_string(t.size()) + " entries, header has " +
                           std::to_string(columns.size()),
                       lines[i].number);
    ObscuredScene rho(atoms.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      try {
        rho.set(columns[c], tri_from_char(t[c]));
      } catch (const std::invalid_argument& e) {
        throw ParseError(e.what(), lines[i].number);
      }
    }
    rows.push_back(std::move(rho));
  }
  return rows;
}

void write_scenes(std::ostream& out, const std::vector<ObscuredScene>& scenes, const AtomTable& atoms) {
  out << "atoms:";
  for (const auto& n : atoms.names()) out << ' ' << n;
  out << '\n';
  for (const auto& rho : scenes) {
    std::string row = rho.to_string();
    row.resize(atoms.size(), '*');
    out << row << '\n';
  }
}

}  // namespace qdl
