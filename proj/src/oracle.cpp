#include "qdl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include "qdl/rng.hpp"

namespace qdl::oracle {

namespace {

bool holds(const Formula& f, const Scene& x) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
      if (f.atom_id() >= x.size()) throw std::out_of_range("atom outside scene");
      return x[f.atom_id()];
    case Formula::Kind::Not:
      return !holds(f.child(), x);
    case Formula::Kind::Threshold: {
      __int128 sum = 0;
      for (const auto& t : f.terms())
        if (holds(t.formula, x)) sum += t.weight;
      return sum >= f.bound();
    }
  }
  return false;
}

}  // namespace

Rational exact_validity(const Formula& f, const ExplicitDistribution& d) {
  Rational total = 0;
  for (const auto& e : d.support())
    if (holds(f, e.scene)) total += e.prob;
  return total;
}

// ---------------------------------------------------------------------------
// Clauses as (positive mask, negative mask).

namespace {

struct Bits {
  std::uint32_t pos = 0, neg = 0;
  auto operator<=>(const Bits&) const = default;
  bool subset_of(Bits o) const { return (pos & ~o.pos) == 0 && (neg & ~o.neg) == 0; }
};

Bits to_bits(const Clause& c) {
  Bits b;
  for (Literal l : c.literals()) {
    if (l.atom >= 32) throw std::length_error("clause atom beyond enumeration limit");
    (l.positive ? b.pos : b.neg) |= 1u << l.atom;
  }
  return b;
}

Clause from_bits(Bits b, std::size_t n) {
  std::vector<Literal> lits;
  for (AtomId a = 0; a < n; ++a) {
    if (b.pos >> a & 1) lits.push_back({a, true});
    if (b.neg >> a & 1) lits.push_back({a, false});
  }
  return Clause(std::move(lits));
}

bool falsified_by(Bits b, const ObscuredScene& rho, std::size_t n) {
  for (AtomId a = 0; a < n; ++a) {
    const bool p = b.pos >> a & 1, q = b.neg >> a & 1;
    if (!p && !q) continue;
    if (a >= rho.size()) return false;
    const Tri v = rho[a];
    if (p && v != Tri::False) return false;
    if (q && v != Tri::True) return false;
  }
  return true;
}

}  // namespace

Cnf all_consistent_clauses(std::span<const ObscuredScene> samples, std::size_t num_atoms, std::size_t max_width,
                           const EnumLimit& limit) {
  if (num_atoms > limit.max_atoms || num_atoms > 20)
    throw std::length_error("clause enumeration limited to " + std::to_string(limit.max_atoms) + " atoms");
  std::size_t total = 1;
  for (std::size_t i = 0; i < num_atoms; ++i) total *= 3;
  Cnf out;
  for (std::size_t code = 0; code < total; ++code) {
    Bits b;
    std::size_t width = 0;
    std::size_t rest = code;
    for (std::size_t a = 0; a < num_atoms; ++a, rest /= 3) {
      if (rest % 3 == 1) b.pos |= 1u << a;
      if (rest % 3 == 2) b.neg |= 1u << a;
      width += rest % 3 != 0;
    }
    if (width > max_width) continue;
    if (std::none_of(samples.begin(), samples.end(),
                     [&](const ObscuredScene& rho) { return falsified_by(b, rho, num_atoms); }))
      out.push_back(from_bits(b, num_atoms));
  }
  return out;
}

namespace {

class ReferenceSearch {
 public:
  ReferenceSearch(std::vector<Bits> axioms, std::size_t n) : axioms_(std::move(axioms)), n_(n) {}

  bool exists(Bits c, std::size_t s) {
    const auto key = std::make_pair(c, s);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    bool ok = axiom_for(c).has_value();
    if (!ok && s > 1) {
      for (std::size_t a = 0; a < n_ && !ok; ++a) {
        const std::uint32_t bit = 1u << a;
        if ((c.pos | c.neg) & bit) continue;
        const Bits with_pos{c.pos | bit, c.neg}, with_neg{c.pos, c.neg | bit};
        ok = (exists(with_pos, s - 1) && exists(with_neg, s)) || (exists(with_neg, s - 1) && exists(with_pos, s));
      }
    }
    memo_[key] = ok;
    return ok;
  }

  ResolutionProof::Index build(Bits c, std::size_t s, ResolutionProof& p) {
    if (auto j = axiom_for(c)) return p.add_weakening(from_bits(c, n_), *j);
    for (std::size_t a = 0; a < n_; ++a) {
      const std::uint32_t bit = 1u << a;
      if ((c.pos | c.neg) & bit) continue;
      const Bits with_pos{c.pos | bit, c.neg}, with_neg{c.pos, c.neg | bit};
      if (exists(with_pos, s - 1) && exists(with_neg, s)) {
        const auto l = build(with_pos, s - 1, p);
        const auto r = build(with_neg, s, p);
        return p.add_cut(static_cast<AtomId>(a), l, r);
      }
      if (exists(with_neg, s - 1) && exists(with_pos, s)) {
        const auto r = build(with_neg, s - 1, p);
        const auto l = build(with_pos, s, p);
        return p.add_cut(static_cast<AtomId>(a), l, r);
      }
    }
    throw std::logic_error("reference search: build without a proof");
  }

 private:
  std::optional<std::size_t> axiom_for(Bits c) const {
    for (std::size_t j = 0; j < axioms_.size(); ++j)
      if (axioms_[j].subset_of(c)) return j;
    return std::nullopt;
  }

  std::vector<Bits> axioms_;
  std::size_t n_;
  std::map<std::pair<Bits, std::size_t>, bool> memo_;
};

}  // namespace

std::optional<ResolutionProof> reference_space_search(const Cnf& phi, const Cnf& h, std::size_t s, const Clause& c,
                                                      std::size_t num_atoms, const EnumLimit& limit) {
  if (s < 1) throw std::invalid_argument("space bound must be at least 1");
  if (num_atoms > limit.max_atoms || num_atoms > 31)
    throw std::length_error("reference search limited to " + std::to_string(limit.max_atoms) + " atoms");
  std::vector<Bits> axioms;
  for (const auto& cl : phi) axioms.push_back(to_bits(cl));
  for (const auto& cl : h) axioms.push_back(to_bits(cl));
  ReferenceSearch search(std::move(axioms), num_atoms);
  const Bits root = to_bits(c);
  if (!search.exists(root, s)) return std::nullopt;
  ResolutionProof p(s);
  search.build(root, s, p);
  return p;
}

namespace {

std::size_t pebble(const ResolutionProof& p, ResolutionProof::Index v) {
  const auto& n = p.node(v);
  if (n.kind != ResolutionProof::Kind::Cut) return 1;
  const std::size_t l = pebble(p, n.left);
  const std::size_t r = pebble(p, n.right);
  // Evaluate the more demanding side first and hold its clause.
  return std::max(std::max(l, r), std::min(l, r) + 1);
}

}  // namespace

std::size_t pebbling_space(const ResolutionProof& p) { return p.empty() ? 0 : pebble(p, p.root()); }

// ---------------------------------------------------------------------------
// Normal proof enumeration

namespace {

std::size_t combine(std::size_t a, std::size_t b) { return a == b ? a + 1 : std::max(a, b); }

class NormalProofs {
 public:
  NormalProofs(std::size_t n, const EnumLimit& limit) : n_(n) {
    if (n > limit.max_proof_atoms || n > 16)
      throw std::length_error("proof enumeration limited to " + std::to_string(limit.max_proof_atoms) + " atoms");
  }

  // Proofs over the atoms outside `used` with minimal space exactly k.
  const BigInt& exact(std::uint32_t used, std::size_t k) {
    const auto key = std::make_pair(used, k);
    if (auto it = exact_.find(key); it != exact_.end()) return it->second;
    BigInt total = k == 1 ? 1 : 0;
    if (k >= 2) {
      for (std::size_t a = 0; a < n_; ++a) {
        if (used >> a & 1) continue;
        const std::uint32_t next = used | 1u << a;
        for (std::size_t s1 = 1; s1 <= k; ++s1)
          for (std::size_t s2 = 1; s2 <= k; ++s2)
            if (combine(s1, s2) == k) total += 2 * exact(next, s1) * exact(next, s2);
      }
    }
    return exact_[key] = total;
  }

  // Node-count histogram of the same class.
  const std::map<std::uint64_t, BigInt>& shapes(std::uint32_t used, std::size_t k) {
    const auto key = std::make_pair(used, k);
    if (auto it = shapes_.find(key); it != shapes_.end()) return it->second;
    std::map<std::uint64_t, BigInt> out;
    if (k == 1) out[1] = 1;
    for (std::size_t a = 0; k >= 2 && a < n_; ++a) {
      if (used >> a & 1) continue;
      const std::uint32_t next = used | 1u << a;
      for (std::size_t s1 = 1; s1 <= k; ++s1)
        for (std::size_t s2 = 1; s2 <= k; ++s2) {
          if (combine(s1, s2) != k) continue;
          const auto& left = shapes(next, s1);
          const auto& right = shapes(next, s2);
          for (const auto& [k1, c1] : left)
            for (const auto& [k2, c2] : right) out[k1 + k2 + 1] += 2 * c1 * c2;
        }
    }
    return shapes_[key] = std::move(out);
  }

  ResolutionProof::Index build(std::uint32_t used, std::size_t k, BigInt index, std::vector<Literal>& path,
                               ResolutionProof& p) {
    if (k == 1) return p.add_hypothesis(Clause(path));
    for (std::size_t a = 0; a < n_; ++a) {
      if (used >> a & 1) continue;
      const std::uint32_t next = used | 1u << a;
      for (int positive_left = 1; positive_left >= 0; --positive_left)
        for (std::size_t s1 = 1; s1 <= k; ++s1)
          for (std::size_t s2 = 1; s2 <= k; ++s2) {
            if (combine(s1, s2) != k) continue;
            const BigInt& c2 = exact(next, s2);
            const BigInt block = exact(next, s1) * c2;
            if (index >= block) {
              index -= block;
              continue;
            }
            const BigInt li = index / c2, ri = index % c2;
            const auto atom = static_cast<AtomId>(a);
            path.push_back({atom, positive_left == 1});
            const auto l = build(next, s1, li, path, p);
            path.back().positive = !path.back().positive;
            const auto r = build(next, s2, ri, path, p);
            path.pop_back();
            return p.add_cut(atom, l, r);
          }
    }
    throw std::out_of_range("proof index out of range");
  }

 private:
  std::size_t n_;
  std::map<std::pair<std::uint32_t, std::size_t>, BigInt> exact_;
  std::map<std::pair<std::uint32_t, std::size_t>, std::map<std::uint64_t, BigInt>> shapes_;
};

void check_space(std::size_t s, const EnumLimit& limit) {
  if (s < 1 || s > limit.max_space) throw std::length_error("space bound outside enumeration limit");
}

}  // namespace

std::vector<ProofShape> normal_proof_histogram(std::size_t num_atoms, std::size_t s, const EnumLimit& limit) {
  check_space(s, limit);
  NormalProofs np(num_atoms, limit);
  std::vector<ProofShape> out;
  for (std::size_t k = 1; k <= s; ++k)
    for (const auto& [nodes, count] : np.shapes(0, k)) out.push_back({nodes, k, count});
  return out;
}

BigInt normal_proof_count(std::size_t num_atoms, std::size_t s, const EnumLimit& limit) {
  check_space(s, limit);
  NormalProofs np(num_atoms, limit);
  BigInt total = 0;
  for (std::size_t k = 1; k <= s; ++k) total += np.exact(0, k);
  return total;
}

ResolutionProof nth_normal_proof(std::size_t num_atoms, std::size_t s, const BigInt& index, const EnumLimit& limit) {
  check_space(s, limit);
  NormalProofs np(num_atoms, limit);
  BigInt rest = index;
  for (std::size_t k = 1; k <= s; ++k) {
    const BigInt& c = np.exact(0, k);
    if (rest < c) {
      ResolutionProof p(s);
      std::vector<Literal> path;
      np.build(0, k, rest, path, p);
      return p;
    }
    rest -= c;
  }
  throw std::out_of_range("proof index out of range");
}

std::vector<ResolutionProof> enumerate_normal_proofs(std::size_t num_atoms, std::size_t s, std::size_t cap,
                                                     const EnumLimit& limit) {
  check_space(s, limit);
  NormalProofs np(num_atoms, limit);
  BigInt total = 0;
  for (std::size_t k = 1; k <= s; ++k) total += np.exact(0, k);
  if (total > cap) throw std::length_error("normal proof count " + total.str() + " exceeds cap");
  std::vector<ResolutionProof> out;
  for (std::size_t k = 1; k <= s; ++k) {
    const auto count = static_cast<std::size_t>(np.exact(0, k));
    for (std::size_t i = 0; i < count; ++i) {
      ResolutionProof p(s);
      std::vector<Literal> path;
      np.build(0, k, i, path, p);
      out.push_back(std::move(p));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo harness

namespace {

// Epsilon as an exact fraction with denominator 10^9.
Rational as_rational(double x) {
  return Rational(BigInt(static_cast<long long>(std::llround(x * 1e9))), BigInt(1000000000));
}

void finish(GuaranteeReport& r) {
  const double n = static_cast<double>(r.outcomes.size());
  for (const auto& o : r.outcomes) {
    r.proofs += o.proof;
    r.bad_proofs += o.proof && !o.premises_valid;
    r.unverified += o.proof && !o.verified;
  }
  r.proof_rate = n > 0 ? static_cast<double>(r.proofs) / n : 0;
  r.bad_rate = n > 0 ? static_cast<double>(r.bad_proofs) / n : 0;
  r.threshold = r.delta + 3 * std::sqrt(r.delta * (1 - r.delta) / std::max(n, 1.0));
}

}  // namespace

bool GuaranteeReport::passed() const {
  if (unverified > 0 || bad_rate > threshold) return false;
  return implication_valid || proof_rate <= threshold;
}

std::string GuaranteeReport::to_text() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(6);
  out << "experiment " << kind << '\n';
  out << "trials " << outcomes.size() << '\n';
  out << "samples_per_trial " << samples_per_trial << '\n';
  out << "epsilon " << epsilon << '\n';
  out << "delta " << delta << '\n';
  out << "implication_validity " << qdl::to_string(implication_validity) << " ("
      << qdl::to_double(implication_validity) << ")\n";
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    out << "trial " << i << " seed " << o.seed << " result " << (o.proof ? "proof" : "fail");
    if (o.proof) {
      out << " premises " << o.premises << " premise_validity " << qdl::to_string(o.premise_validity)
          << (o.premises_valid ? " valid" : " invalid") << (o.verified ? " verified" : " unverified");
    }
    out << '\n';
  }
  out << "proofs " << proofs << '\n';
  out << "proof_rate " << proof_rate << '\n';
  out << "invalid_premise_proofs " << bad_proofs << '\n';
  out << "invalid_premise_rate " << bad_rate << '\n';
  out << "unverified_proofs " << unverified << '\n';
  out << "threshold " << threshold << '\n';
  out << "verdict " << (passed() ? "PASS" : "FAIL") << '\n';
  return out.str();
}

GuaranteeReport monte_carlo_guarantee(const ChainingTrialSpec& spec) {
  const std::size_t n = spec.kb.atoms.size();
  if (spec.dist.num_atoms() != n) throw std::invalid_argument("distribution and KB disagree on the atom count");
  GuaranteeReport r;
  r.kind = "chaining";
  r.epsilon = spec.epsilon;
  r.delta = spec.delta;
  r.samples_per_trial =
      spec.samples ? spec.samples : sample_size_chaining(n, spec.epsilon, spec.delta, spec.eta, spec.c);
  const Rational floor = 1 - as_rational(spec.epsilon);
  r.implication_validity =
      exact_validity(Formula::implies(spec.kb.to_formula(), Formula::atom(spec.goal)), spec.dist);
  r.implication_valid = r.implication_validity >= floor;

  for (std::size_t t = 0; t < spec.trials; ++t) {
    TrialOutcome o;
    o.seed = SplitMix64::split(spec.seed, t);
    const auto samples = sample(spec.dist, spec.mask, r.samples_per_trial, o.seed);
    const auto proof = learn_backward_search(spec.goal, spec.kb, samples.scenes, spec.mode);
    if (proof) {
      o.proof = true;
      const auto learned = proof->learned();
      o.premises = learned.size();
      std::vector<Formula> atoms;
      for (AtomId a : learned) atoms.push_back(Formula::atom(a));
      o.premise_validity = exact_validity(Formula::conj(std::move(atoms)), spec.dist);
      o.premises_valid = o.premise_validity >= floor;
      o.verified = verify_proof(*proof, spec.kb, spec.goal, [&](AtomId a) {
        return passes_sample_test(a, samples.scenes, spec.mode);
      });
    }
    r.outcomes.push_back(std::move(o));
  }
  finish(r);
  return r;
}

GuaranteeReport monte_carlo_guarantee(const ResolutionTrialSpec& spec) {
  const std::size_t n = spec.dist.num_atoms();
  GuaranteeReport r;
  r.kind = "resolution";
  r.epsilon = spec.epsilon;
  r.delta = spec.delta;
  r.samples_per_trial =
      spec.samples ? spec.samples : sample_size_resolution(n, spec.space, spec.epsilon, spec.delta, spec.eta, spec.c);
  const Rational floor = 1 - as_rational(spec.epsilon);
  r.implication_validity = exact_validity(Formula::implies(cnf_to_formula(spec.phi), spec.target.to_formula()), spec.dist);
  r.implication_valid = r.implication_validity >= floor;

  LearnOptions opts;
  opts.backtrack = spec.backtrack;
  opts.num_atoms = n;
  for (std::size_t t = 0; t < spec.trials; ++t) {
    TrialOutcome o;
    o.seed = SplitMix64::split(spec.seed, t);
    const auto samples = sample(spec.dist, spec.mask, r.samples_per_trial, o.seed);
    const auto proof = learn_search_space(spec.phi, spec.space, spec.target, samples.scenes, opts);
    if (proof) {
      o.proof = true;
      const Cnf h = extract_premises(*proof);
      o.premises = h.size();
      o.premise_validity = exact_validity(cnf_to_formula(h), spec.dist);
      o.premises_valid = o.premise_validity >= floor;
      o.verified = verify_proof(*proof, spec.phi, h) && check_normal(*proof);
    }
    r.outcomes.push_back(std::move(o));
  }
  finish(r);
  return r;
}

}  // namespace qdl::oracle
