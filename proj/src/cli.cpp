#include "qdl/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "qdl/chaining.hpp"
#include "qdl/distributions.hpp"
#include "qdl/formula_io.hpp"
#include "qdl/oracle.hpp"
#include "qdl/resolution.hpp"

namespace qdl {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string kb, cnf, scenes, dist, mask, clause, out, fragment, spec;
  std::string format = "text";
  std::string mode = "credulous";
  std::vector<std::string> queries;
  std::optional<std::size_t> count;
  std::size_t space = 2;
  std::size_t atoms = 0;
  double epsilon = 0.1, delta = 0.05, eta = 1.0, c = 1.0;
  std::uint64_t seed = 1;
  bool backtrack = false;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  return in;
}

template <typename Reader>
auto read_file(const std::string& path, Reader&& reader) {
  auto in = open_input(path);
  try {
    return reader(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

LearningMode parse_mode(const std::string& m) {
  return m == "skeptical" ? LearningMode::Skeptical : LearningMode::Credulous;
}

/// Samples from --scenes, or drawn from --dist/--mask. nullopt if neither.
std::optional<std::vector<ObscuredScene>> load_samples(const Options& o, AtomTable& atoms,
                                                       const std::function<std::size_t()>& default_count) {
  if (!o.scenes.empty() && !o.dist.empty()) throw UsageError("give either --scenes or --dist/--mask, not both");
  if (!o.scenes.empty()) {
    if (o.count) throw UsageError("--count applies only with --dist");
    return read_file(o.scenes, [&](std::istream& in) { return read_scenes(in, atoms); });
  }
  if (o.dist.empty()) {
    if (!o.mask.empty() || o.count) throw UsageError("--mask and --count need --dist");
    return std::nullopt;
  }
  if (o.mask.empty()) throw UsageError("--dist needs --mask");
  const auto d = read_file(o.dist, [&](std::istream& in) { return read_distribution(in, atoms); });
  const auto m = read_file(o.mask, [&](std::istream& in) { return read_mask(in, atoms); });
  return sample(d, m, o.count ? *o.count : default_count(), o.seed).scenes;
}

int cmd_eval(const Options& o, std::ostream& out) {
  if (o.queries.size() != 1) throw UsageError("eval needs exactly one --query formula");
  if (o.scenes.empty()) throw UsageError("eval needs --scenes");
  AtomTable atoms;
  const auto rows = read_file(o.scenes, [&](std::istream& in) { return read_scenes(in, atoms); });
  const Formula f = parse_formula(o.queries.front(), atoms);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = partial_eval(f, rows[i]);
    out << "row " << i + 1 << ": ";
    if (r.witnessed_true()) out << "witnessed true\n";
    else if (r.witnessed_false()) out << "witnessed false\n";
    else out << "residual " << to_string(r.formula(), atoms) << '\n';
  }
  return 0;
}

int cmd_chain(const Options& o, std::ostream& out) {
  if (o.kb.empty() || o.queries.size() != 1) throw UsageError("chain needs --kb and one --query atom");
  HornKB kb = read_file(o.kb, [](std::istream& in) { return read_kb(in); });
  const auto goal = kb.atoms.find(o.queries.front());
  if (!goal) throw UsageError("query atom '" + o.queries.front() + "' is not in the grounded vocabulary");
  const auto samples = load_samples(o, kb.atoms, [&] {
    return sample_size_chaining(kb.atoms.size(), o.epsilon, o.delta, o.eta, o.c);
  });
  const auto proof = samples ? learn_backward_search(*goal, kb, *samples, parse_mode(o.mode))
                             : backward_search(*goal, kb);
  if (!proof) {
    out << (o.format == "json" ? "{\"type\": \"chaining\", \"result\": \"Fail\"}\n" : "Fail\n");
    return 1;
  }
  out << (o.format == "json" ? proof_to_json(*proof, kb) + "\n" : format_proof(*proof, kb));
  return 0;
}

int cmd_resolve(const Options& o, std::ostream& out) {
  if (o.cnf.empty()) throw UsageError("resolve needs --cnf");
  AtomTable atoms;
  const Cnf phi = read_file(o.cnf, [&](std::istream& in) { return read_cnf(in, atoms); });
  const std::size_t n = atoms.size();
  Clause target;
  try {
    target = parse_clause(o.clause, atoms);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--clause: ") + e.what());
  }
  const auto samples = load_samples(o, atoms, [&] {
    return sample_size_resolution(n, o.space, o.epsilon, o.delta, o.eta, o.c);
  });
  if (!samples) throw UsageError("resolve needs --scenes or --dist/--mask");
  if (atoms.size() != n) throw UsageError("scene file names atoms missing from the CNF");
  LearnOptions opts;
  opts.backtrack = o.backtrack;
  opts.num_atoms = n;
  const auto proof = learn_search_space(phi, o.space, target, *samples, opts);
  if (!proof) {
    out << (o.format == "json" ? "{\"type\": \"resolution\", \"result\": \"none\"}\n" : "none\n");
    return 1;
  }
  const Cnf learned = extract_premises(*proof);
  if (o.format == "json") {
    auto j = nlohmann::json::parse(proof_to_json(*proof, atoms));
    j["learned"] = nlohmann::json::array();
    for (const auto& cl : learned) j["learned"].push_back(to_string(cl, atoms));
    out << j.dump(2) << '\n';
  } else {
    out << format_proof(*proof, atoms);
    out << "learned:" << (learned.empty() ? " none" : "") << '\n';
    for (const auto& cl : learned) out << "  " << to_string(cl, atoms) << '\n';
  }
  return 0;
}

int cmd_conceal(const Options& o, std::ostream& out) {
  if (o.dist.empty() || o.mask.empty() || o.queries.empty())
    throw UsageError("conceal needs --dist, --mask and at least one --query formula");
  AtomTable atoms;
  const auto d = read_file(o.dist, [&](std::istream& in) { return read_distribution(in, atoms); });
  const auto m = read_file(o.mask, [&](std::istream& in) { return read_mask(in, atoms); });
  std::vector<Formula> formulas;
  for (const auto& q : o.queries) formulas.push_back(parse_formula(q, std::as_const(atoms)));
  const auto c = concealment(d, m, formulas);
  out << "eta " << to_string(c.eta);
  if (c.vacuous) out << " (vacuous: no formula is ever false)";
  out << '\n';
  return 0;
}

int cmd_samplesize(const Options& o, std::ostream& out) {
  if (o.atoms == 0) throw UsageError("samplesize needs --atoms N >= 1");
  try {
    if (o.fragment == "chain") out << sample_size_chaining(o.atoms, o.epsilon, o.delta, o.eta, o.c) << '\n';
    else out << sample_size_resolution(o.atoms, o.space, o.epsilon, o.delta, o.eta, o.c) << '\n';
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Experiment specs (JSON):
//   kind         "chaining" | "resolution"
//   kb | cnf     path, relative to the spec file
//   goal         atom name (chaining);  target / space / backtrack (resolution)
//   distribution {"independent": {"atom": "p", ...}} (unlisted atoms are 0),
//                or {"file": path}
//   mask         mask file text, e.g. "coin 1/2"
//   mode, epsilon, delta, eta, c, trials, seed, samples

ExplicitDistribution load_distribution(const nlohmann::json& j, AtomTable& atoms,
                                       const std::filesystem::path& base) {
  if (j.contains("file")) {
    return read_file((base / j.at("file").get<std::string>()).string(),
                     [&](std::istream& in) { return read_distribution(in, atoms); });
  }
  const auto& marg = j.at("independent");
  std::vector<Rational> p(atoms.size(), Rational(0));
  for (const auto& [name, value] : marg.items()) {
    const auto id = atoms.find(name);
    if (!id) throw UsageError("distribution names unknown atom '" + name + "'");
    p[*id] = parse_rational(value.is_string() ? value.get<std::string>() : value.dump());
  }
  return ExplicitDistribution::independent(p);
}

int cmd_experiment(const Options& o, std::ostream& out, bool seed_given) {
  const std::filesystem::path spec_path(o.spec);
  const nlohmann::json j = [&] {
    auto in = open_input(o.spec);
    try {
      return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(o.spec + ": " + e.what());
    }
  }();
  const auto base = spec_path.parent_path();
  try {
    const std::string kind = j.at("kind");
    const std::uint64_t seed = seed_given ? o.seed : j.value("seed", std::uint64_t{1});
    std::istringstream mask_text(j.at("mask").get<std::string>());
    oracle::GuaranteeReport report;
    if (kind == "chaining") {
      HornKB kb = read_file((base / j.at("kb").get<std::string>()).string(),
                            [](std::istream& in) { return read_kb(in); });
      const auto goal = kb.atoms.find(j.at("goal").get<std::string>());
      if (!goal) throw UsageError("goal is not in the grounded vocabulary");
      auto dist = load_distribution(j.at("distribution"), kb.atoms, base);
      auto mask = read_mask(mask_text, kb.atoms);
      oracle::ChainingTrialSpec spec{std::move(kb), *goal, std::move(dist), std::move(mask)};
      spec.mode = parse_mode(j.value("mode", std::string("credulous")));
      spec.epsilon = j.value("epsilon", 0.1);
      spec.delta = j.value("delta", 0.05);
      spec.eta = j.value("eta", 1.0);
      spec.c = j.value("c", 1.0);
      spec.trials = j.value("trials", std::size_t{200});
      spec.samples = j.value("samples", std::size_t{0});
      spec.seed = seed;
      report = oracle::monte_carlo_guarantee(spec);
    } else if (kind == "resolution") {
      AtomTable atoms;
      Cnf phi = read_file((base / j.at("cnf").get<std::string>()).string(),
                          [&](std::istream& in) { return read_cnf(in, atoms); });
      Clause target = parse_clause(j.value("target", std::string()), atoms);
      auto dist = load_distribution(j.at("distribution"), atoms, base);
      auto mask = read_mask(mask_text, atoms);
      oracle::ResolutionTrialSpec spec{std::move(phi), std::move(target), j.value("space", std::size_t{2}),
                                       std::move(dist), std::move(mask)};
      spec.epsilon = j.value("epsilon", 0.1);
      spec.delta = j.value("delta", 0.05);
      spec.eta = j.value("eta", 1.0);
      spec.c = j.value("c", 1.0);
      spec.trials = j.value("trials", std::size_t{200});
      spec.samples = j.value("samples", std::size_t{0});
      spec.backtrack = j.value("backtrack", false);
      spec.seed = seed;
      report = oracle::monte_carlo_guarantee(spec);
    } else {
      throw UsageError("unknown experiment kind '" + kind + "'");
    }
    out << report.to_text();
    return report.passed() ? 0 : 1;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(o.spec + ": " + e.what());
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Proof search with premises learned from partially observed examples", "qdl"};
  app.require_subcommand(1);
  Options o;

  auto add_samples = [&](CLI::App* sub) {
    sub->add_option("--scenes", o.scenes, "Obscured scene file");
    sub->add_option("--dist", o.dist, "Scene distribution file (sampled with --mask)");
    sub->add_option("--mask", o.mask, "Masking process file");
    sub->add_option("--count", o.count, "Number of samples to draw (default: the sample-size bound)");
    sub->add_option("--seed", o.seed, "Random seed");
  };
  auto add_params = [&](CLI::App* sub) {
    sub->add_option("--epsilon", o.epsilon, "Accuracy parameter")->capture_default_str();
    sub->add_option("--delta", o.delta, "Confidence parameter")->capture_default_str();
    sub->add_option("--eta", o.eta, "Concealment parameter")->capture_default_str();
    sub->add_option("--const-c", o.c, "Sample-size constant")->capture_default_str();
  };
  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Write output to this file");
    sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "json"}));
  };

  auto* eval = app.add_subcommand("eval", "Partially evaluate a formula on each scene row");
  eval->add_option("--query", o.queries, "Formula")->required();
  eval->add_option("--scenes", o.scenes, "Obscured scene file")->required();
  eval->add_option("--out", o.out, "Write output to this file");

  auto* chain = app.add_subcommand("chain", "Backward chaining, optionally learning atoms from scenes");
  chain->add_option("--kb", o.kb, "Knowledge base file")->required();
  chain->add_option("--query", o.queries, "Goal atom")->required();
  chain->add_option("--mode", o.mode, "Learning mode")->check(CLI::IsMember({"credulous", "skeptical"}));
  add_samples(chain);
  add_params(chain);
  add_output(chain);

  auto* resolve = app.add_subcommand("resolve", "Space-bounded treelike resolution with learning");
  resolve->add_option("--cnf", o.cnf, "DIMACS CNF file")->required();
  resolve->add_option("--clause", o.clause, "Clause to prove (default: empty clause)");
  resolve->add_option("--space", o.space, "Space bound s")->check(CLI::PositiveNumber)->capture_default_str();
  resolve->add_flag("--backtrack", o.backtrack, "Try the next literal when a second branch fails");
  add_samples(resolve);
  add_params(resolve);
  add_output(resolve);

  auto* conceal = app.add_subcommand("conceal", "Exact concealment of a formula class");
  conceal->add_option("--dist", o.dist, "Scene distribution file")->required();
  conceal->add_option("--mask", o.mask, "Masking process file")->required();
  conceal->add_option("--query", o.queries, "Formula in the class (repeatable)")->required();
  conceal->add_option("--out", o.out, "Write output to this file");

  auto* size = app.add_subcommand("samplesize", "Sample-size bound");
  size->add_option("fragment", o.fragment, "chain or res")->required()->check(CLI::IsMember({"chain", "res"}));
  size->add_option("--atoms", o.atoms, "Number of atoms N")->required();
  size->add_option("--space", o.space, "Space bound s (res)")->capture_default_str();
  add_params(size);

  auto* experiment = app.add_subcommand("experiment", "Monte Carlo check of the learning guarantees");
  experiment->add_option("spec", o.spec, "Experiment JSON file")->required();
  auto* seed_opt = experiment->add_option("--seed", o.seed, "Override the spec's seed");
  experiment->add_option("--out", o.out, "Write output to this file");

  std::vector<const char*> argv{"qdl"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  std::ostringstream result;
  int code = 2;
  try {
    if (eval->parsed()) code = cmd_eval(o, result);
    else if (chain->parsed()) code = cmd_chain(o, result);
    else if (resolve->parsed()) code = cmd_resolve(o, result);
    else if (conceal->parsed()) code = cmd_conceal(o, result);
    else if (size->parsed()) code = cmd_samplesize(o, result);
    else code = cmd_experiment(o, result, seed_opt->count() > 0);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  if (o.out.empty()) {
    out << result.str();
  } else {
    std::ofstream f(o.out);
    if (!(f << result.str())) {
      err << "error: cannot write '" << o.out << "'\n";
      return 2;
    }
  }
  return code;
}

}  // namespace qdl
