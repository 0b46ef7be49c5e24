#include "qdl/logic.hpp"

#include <algorithm>
#include <stdexcept>

namespace qdl {

AtomId AtomTable::intern(std::string_view name) {
  if (auto it = index_.find(std::string(name)); it != index_.end()) return it->second;
  const auto id = static_cast<AtomId>(names_.size());
  names_.emplace_back(name);
  index_.emplace(names_.back(), id);
  return id;
}

std::optional<AtomId> AtomTable::find(std::string_view name) const {
  if (auto it = index_.find(std::string(name)); it != index_.end()) return it->second;
  return std::nullopt;
}

const std::string& AtomTable::name(AtomId id) const {
  if (id >= names_.size()) throw std::out_of_range("atom id " + std::to_string(id) + " not interned");
  return names_[id];
}

Scene Scene::from_string(std::string_view bits) {
  Scene x(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != '0' && bits[i] != '1') throw std::invalid_argument("scene entries must be 0 or 1");
    x.set(static_cast<AtomId>(i), bits[i] == '1');
  }
  return x;
}

std::string Scene::to_string() const {
  std::string s(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) s[i] = '1';
  return s;
}

char to_char(Tri t) {
  switch (t) {
    case Tri::False: return '0';
    case Tri::True: return '1';
    case Tri::Unknown: return '*';
  }
  return '?';
}

Tri tri_from_char(char c) {
  switch (c) {
    case '0': return Tri::False;
    case '1': return Tri::True;
    case '*': return Tri::Unknown;
    default: throw std::invalid_argument(std::string("obscured scene entries must be 0, 1 or *, got '") + c + "'");
  }
}

ObscuredScene::ObscuredScene(const Scene& x) : values_(x.size()) {
  for (std::size_t i = 0; i < x.size(); ++i) values_[i] = x[static_cast<AtomId>(i)] ? Tri::True : Tri::False;
}

ObscuredScene ObscuredScene::from_string(std::string_view text) {
  ObscuredScene rho(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) rho.values_[i] = tri_from_char(text[i]);
  return rho;
}

std::size_t ObscuredScene::hidden_count() const {
  return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), Tri::Unknown));
}

bool ObscuredScene::consistent_with(const Scene& x) const {
  if (x.size() != values_.size()) return false;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] == Tri::Unknown) continue;
    if ((values_[i] == Tri::True) != x[static_cast<AtomId>(i)]) return false;
  }
  return true;
}

bool ObscuredScene::refines(const ObscuredScene& coarser) const {
  if (coarser.size() != values_.size()) return false;
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (coarser.values_[i] != Tri::Unknown && coarser.values_[i] != values_[i]) return false;
  return true;
}

std::string ObscuredScene::to_string() const {
  std::string s(values_.size(), '*');
  for (std::size_t i = 0; i < values_.size(); ++i) s[i] = to_char(values_[i]);
  return s;
}

Weight checked_add(Weight a, Weight b) {
  Weight r;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("threshold weight overflow");
  return r;
}

Weight checked_sub(Weight a, Weight b) {
  Weight r;
  if (__builtin_sub_overflow(a, b, &r)) throw std::overflow_error("threshold weight overflow");
  return r;
}

Weight checked_mul(Weight a, Weight b) {
  Weight r;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("threshold weight overflow");
  return r;
}

// Not stores its operand as terms[0].
struct Formula::Node {
  Kind kind;
  AtomId atom = 0;
  Weight bound = 0;
  std::vector<WeightedTerm> terms;
};

Formula Formula::atom(AtomId id) {
  return Formula(std::make_shared<const Node>(Node{Kind::Atom, id, 0, {}}));
}

Formula Formula::negate(Formula child) {
  std::vector<WeightedTerm> terms;
  terms.push_back({1, std::move(child)});
  return Formula(std::make_shared<const Node>(Node{Kind::Not, 0, 0, std::move(terms)}));
}

Formula Formula::threshold(std::vector<WeightedTerm> terms, Weight bound) {
  for (const auto& t : terms)
    if (t.weight == 0) throw std::invalid_argument("threshold weights must be nonzero");
  return Formula(std::make_shared<const Node>(Node{Kind::Threshold, 0, bound, std::move(terms)}));
}

Formula Formula::conj(std::vector<Formula> children) {
  std::vector<WeightedTerm> terms;
  terms.reserve(children.size());
  for (auto& c : children) terms.push_back({1, std::move(c)});
  const auto k = static_cast<Weight>(terms.size());
  return threshold(std::move(terms), k);
}

Formula Formula::disj(std::vector<Formula> children) {
  std::vector<WeightedTerm> terms;
  terms.reserve(children.size());
  for (auto& c : children) terms.push_back({1, std::move(c)});
  return threshold(std::move(terms), 1);
}

Formula Formula::implies(Formula lhs, Formula rhs) {
  return threshold({{-1, std::move(lhs)}, {1, std::move(rhs)}}, 0);
}

Formula Formula::iff(Formula lhs, Formula rhs) {
  return conj({implies(lhs, rhs), implies(rhs, lhs)});
}

Formula::Kind Formula::kind() const { return node_->kind; }

AtomId Formula::atom_id() const {
  if (node_->kind != Kind::Atom) throw std::logic_error("atom_id() on non-atom formula");
  return node_->atom;
}

const Formula& Formula::child() const {
  if (node_->kind != Kind::Not) throw std::logic_error("child() on non-negation formula");
  return node_->terms.front().formula;
}

std::span<const WeightedTerm> Formula::terms() const {
  if (node_->kind != Kind::Threshold) throw std::logic_error("terms() on non-threshold formula");
  return node_->terms;
}

Weight Formula::bound() const {
  if (node_->kind != Kind::Threshold) throw std::logic_error("bound() on non-threshold formula");
  return node_->bound;
}

bool Formula::is_conjunction() const {
  if (kind() != Kind::Threshold || node_->terms.size() < 2) return false;
  return node_->bound == static_cast<Weight>(node_->terms.size()) &&
         std::all_of(node_->terms.begin(), node_->terms.end(), [](const auto& t) { return t.weight == 1; });
}

bool Formula::is_disjunction() const {
  if (kind() != Kind::Threshold || node_->terms.size() < 2) return false;
  return node_->bound == 1 &&
         std::all_of(node_->terms.begin(), node_->terms.end(), [](const auto& t) { return t.weight == 1; });
}

std::size_t Formula::size() const {
  std::size_t n = 1;
  for (const auto& t : node_->terms) n += t.formula.size();
  return n;
}

std::size_t Formula::atom_span() const {
  if (node_->kind == Kind::Atom) return static_cast<std::size_t>(node_->atom) + 1;
  std::size_t n = 0;
  for (const auto& t : node_->terms) n = std::max(n, t.formula.atom_span());
  return n;
}

namespace {

void collect_atoms(const Formula& f, std::vector<AtomId>& out) {
  switch (f.kind()) {
    case Formula::Kind::Atom: out.push_back(f.atom_id()); break;
    case Formula::Kind::Not: collect_atoms(f.child(), out); break;
    case Formula::Kind::Threshold:
      for (const auto& t : f.terms()) collect_atoms(t.formula, out);
      break;
  }
}

}  // namespace

std::vector<AtomId> Formula::atoms() const {
  std::vector<AtomId> out;
  collect_atoms(*this, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  return x.kind == y.kind && x.atom == y.atom && x.bound == y.bound && x.terms == y.terms;
}

bool eval(const Formula& f, const Scene& x) {
  switch (f.kind()) {
    case Formula::Kind::Atom: {
      const auto id = f.atom_id();
      if (id >= x.size()) throw std::out_of_range("atom id " + std::to_string(id) + " outside scene");
      return x[id];
    }
    case Formula::Kind::Not:
      return !eval(f.child(), x);
    case Formula::Kind::Threshold: {
      Weight sum = 0;
      for (const auto& t : f.terms())
        if (eval(t.formula, x)) sum = checked_add(sum, t.weight);
      return sum >= f.bound();
    }
  }
  return false;
}

PartialEval partial_eval(const Formula& f, const ObscuredScene& rho) {
  switch (f.kind()) {
    case Formula::Kind::Atom: {
      const auto id = f.atom_id();
      const Tri v = id < rho.size() ? rho[id] : Tri::Unknown;
      if (v == Tri::Unknown) return PartialEval::residual(f);
      return PartialEval::witnessed(v == Tri::True);
    }
    case Formula::Kind::Not: {
      auto inner = partial_eval(f.child(), rho);
      if (inner.is_witnessed()) return PartialEval::witnessed(!inner.witnessed_true());
      return PartialEval::residual(Formula::negate(inner.formula()));
    }
    case Formula::Kind::Threshold: {
      Weight witnessed_true = 0;
      Weight low = 0;   // unwitnessed terms contribute min{0, c}
      Weight high = 0;  // unwitnessed terms contribute max{0, c}
      std::vector<WeightedTerm> open;
      for (const auto& t : f.terms()) {
        auto r = partial_eval(t.formula, rho);
        if (r.witnessed_true()) {
          witnessed_true = checked_add(witnessed_true, t.weight);
        } else if (!r.is_witnessed()) {
          if (t.weight < 0) low = checked_add(low, t.weight);
          else high = checked_add(high, t.weight);
          open.push_back({t.weight, r.formula()});
        }
      }
      if (checked_add(witnessed_true, low) >= f.bound()) return PartialEval::witnessed(true);
      if (checked_add(witnessed_true, high) < f.bound()) return PartialEval::witnessed(false);
      const Weight reduced = checked_sub(f.bound(), witnessed_true);
      return PartialEval::residual(Formula::threshold(std::move(open), reduced));
    }
  }
  return PartialEval::residual(f);
}

}  // namespace qdl
