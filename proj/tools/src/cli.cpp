#include "fractrace_cli/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI/CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fractrace/branch.hpp"
#include "fractrace/dynamics.hpp"
#include "fractrace/error.hpp"
#include "fractrace/io.hpp"
#include "fractrace/kms.hpp"
#include "fractrace/system_io.hpp"
#include "fractrace/test_functions.hpp"
#include "fractrace/trace.hpp"
#include "fractrace/verify.hpp"

namespace fractrace::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Config {
  std::string system = "tent";
  int depth = 10;
  int iters = 0;  // 0: pick from the alphabet size
  std::uint64_t seed = 7;
  std::string out;
  // hutchinson
  bool sampled = false;
  std::int64_t samples = 100000;
  std::string start = "base";
  // trace
  std::string kind = "hutchinson";
  std::vector<std::string> functions;
  int levels = 3;
  std::string coeffs;
  std::string in;
  int r_max = -1;
  // kms
  std::string b = "B0";
  std::string beta = "log:4";
  int kms_depth = 8;
  // verify
  double tolerance = 0.0;
  bool system_only = false;
};

// Thrown for failures that are reported already and only need an exit code.
struct ExitRequest {
  int code;
};

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInput: return kIoError;
    case ErrorCode::kSupportExplosion: return kResourceCap;
    default: return kCheckFailed;
  }
}

std::string Timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

json CoordJson(Coord c, int dim) {
  return dim == 2 ? json::array({c.x, c.y}) : json::array({c.x});
}

json PointsJson(const std::vector<Point>& points, int dim) {
  json out = json::array();
  for (const Point& p : points) out.push_back(CoordJson(p.coords, dim));
  return out;
}

int DefaultIterations(const SelfSimilarSystem& system) {
  int n = 0;
  double size = 1.0;
  while (size * system.size() <= 2e4) {
    size *= system.size();
    ++n;
  }
  return std::max(n, 1);
}

json Envelope(const std::string& command, const SelfSimilarSystem& system,
              json tolerances) {
  json j;
  j["command"] = command;
  j["system"] = system.name();
  j["system_hash"] = system.DefinitionHash();
  j["system_definition"] = SystemToToml(system.definition());
  tolerances["eps_geo"] = system.eps_geo();
  j["tolerances"] = std::move(tolerances);
  j["generated_at"] = Timestamp();
  return j;
}

void Emit(const Config& config, const std::string& name, const json& report,
          std::ostream& out) {
  if (config.out.empty()) {
    out << report.dump(2) << "\n";
    return;
  }
  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec) throw Error(ErrorCode::kInput, "cannot create " + config.out);
  const fs::path path = fs::path(config.out) / (name + ".json");
  WriteFile(path, report.dump(2) + "\n");
  out << path.string() << "\n";
}

std::vector<double> ParseNumbers(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInput, "not a number: '" + part + "'");
    }
  }
  return v;
}

Point ResolveBranchPoint(const SelfSimilarSystem& system, const BranchData& branch,
                         const std::string& text) {
  if (!text.empty() && text[0] == 'B') {
    const std::size_t k = std::stoul(text.substr(1));
    if (k >= branch.branch_set.size()) {
      throw Error(ErrorCode::kInput, "branch point index " + text + " out of range");
    }
    return branch.branch_set[k];
  }
  const std::vector<double> v = ParseNumbers(text);
  if (v.empty() || v.size() > 2) {
    throw Error(ErrorCode::kInput, "branch point must be x or x,y: " + text);
  }
  const Coord c{v[0], v.size() == 2 ? v[1] : 0.0};
  for (const Point& b : branch.branch_set) {
    if (Distance(b.coords, c) <= 1e-6 * system.diam()) return b;
  }
  throw Error(ErrorCode::kInput, text + " is not a branch point of " + system.name());
}

std::vector<TestFunction> SelectFunctions(const std::vector<TestFunction>& family,
                                          const std::vector<std::string>& names) {
  if (names.empty()) return family;
  std::vector<TestFunction> out;
  for (const std::string& n : names) out.push_back(FindFunction(family, n));
  return out;
}

// ---------------------------------------------------------------- analyze

int Analyze(const Config& config, std::ostream& out, std::ostream& err) {
  const SystemPtr system = LoadSystem(config.system);
  const int dim = system->dim();
  const AssumptionReport assumption = CheckAssumptionA(*system, config.depth);
  json report = Envelope("analyze", *system, {{"orbit_depth", config.depth}});
  report["alphabet_size"] = system->size();
  report["dim"] = dim;
  report["diam"] = system->diam();
  report["contraction_upper"] = system->contraction_upper();
  json items = json::array();
  for (const CheckItem& item : assumption.items) {
    items.push_back({{"name", item.name},
                     {"passed", item.passed},
                     {"value", item.value},
                     {"detail", item.detail}});
  }
  report["assumption_a"] = {{"passed", assumption.passed()}, {"checks", items}};

  if (assumption.passed()) {
    const BranchData branch = ComputeBranchData(*system);
    report["branch_set"] = PointsJson(branch.branch_set, dim);
    report["branch_values"] = PointsJson(branch.branch_values, dim);
    report["postcritical_set"] = PointsJson(branch.postcritical, dim);
    json index = json::array();
    for (const BranchIndexEntry& e : branch.index_table) {
      index.push_back({{"y", CoordJson(e.y, dim)},
                       {"branch", e.branch + 1},
                       {"index", e.index}});
    }
    report["branch_index"] = index;
    json orbits = json::array();
    for (const Point& b : branch.branch_set) {
      json counts = json::array();
      double size = 1.0;
      for (int r = 0; r <= config.depth && size <= 1e6; ++r) {
        counts.push_back(Orbit(*system, b, r).size());
        size *= system->size();
      }
      orbits.push_back({{"b", CoordJson(b.coords, dim)}, {"counts", counts}});
    }
    report["orbits"] = orbits;
  }
  Emit(config, "analyze", report, out);
  if (!assumption.passed()) {
    err << "assumption A failed: " << assumption.first_failure() << "\n";
    return kCheckFailed;
  }
  return kOk;
}

// ------------------------------------------------------------- hutchinson

int Hutchinson(const Config& config, std::ostream& out, std::ostream&) {
  const SystemPtr system = LoadSystem(config.system);
  HutchinsonOptions options;
  options.strategy = config.sampled ? HutchinsonStrategy::kSampled
                                    : HutchinsonStrategy::kDeterministic;
  options.samples = config.samples;
  options.seed = config.seed;
  if (config.start == "generic") {
    options.start = system->generic_point();
  } else if (config.start != "base") {
    const std::vector<double> v = ParseNumbers(config.start);
    options.start = Coord{v.at(0), v.size() > 1 ? v[1] : 0.0};
  }
  const int iters = config.iters > 0 ? config.iters : DefaultIterations(*system);
  const HutchinsonEstimate est = EstimateHutchinson(*system, iters, options);
  const DiscreteMeasure& mu = est.measure;

  json report = Envelope("hutchinson", *system, {{"prune_fraction", DiscreteMeasure::kPruneFraction}});
  report["iterations"] = iters;
  report["strategy"] = config.sampled ? "sampled" : "deterministic";
  report["atoms"] = mu.size();
  report["total_mass"] = mu.TotalMass();
  report["error_bound"] = est.error_bound;
  report["certified"] = est.certified;
  json moments;
  moments["mean_x"] = Integrate(mu, [](Coord c) { return c.x; });
  moments["second_xx"] = Integrate(mu, [](Coord c) { return c.x * c.x; });
  if (system->dim() == 2) {
    moments["mean_y"] = Integrate(mu, [](Coord c) { return c.y; });
    moments["second_xy"] = Integrate(mu, [](Coord c) { return c.x * c.y; });
    moments["second_yy"] = Integrate(mu, [](Coord c) { return c.y * c.y; });
  }
  report["moments"] = moments;
  if (!config.out.empty()) {
    fs::create_directories(config.out);
    const fs::path csv = fs::path(config.out) / "hutchinson_measure.csv";
    SaveMeasureCsv(csv, mu, system->dim());
    report["measure_csv"] = csv.filename().string();
  }
  Emit(config, "hutchinson", report, out);
  return kOk;
}

// ------------------------------------------------------------------ trace

ModelTrace ParseKind(const SystemPtr& system, const BranchData& branch,
                     const std::string& kind, int iters) {
  if (kind == "hutchinson") {
    return ModelTrace::Hutchinson(system, GenericHutchinson(*system, iters));
  }
  const std::string prefix = "discrete:";
  if (kind.rfind(prefix, 0) == 0) {
    const std::string rest = kind.substr(prefix.size());
    const std::size_t colon = rest.rfind(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::kInput, "expected discrete:<b>:<r>, got " + kind);
    }
    const Point b = ResolveBranchPoint(*system, branch, rest.substr(0, colon));
    const std::vector<double> r = ParseNumbers(rest.substr(colon + 1));
    if (r.size() != 1 || r[0] < 0 || r[0] != std::floor(r[0])) {
      throw Error(ErrorCode::kInput, "bad depth in " + kind);
    }
    return ModelTrace::Discrete(system, b, static_cast<int>(r[0]));
  }
  throw Error(ErrorCode::kInput, "unknown trace kind " + kind);
}

int TraceEval(const Config& config, std::ostream& out, std::ostream&) {
  const SystemPtr system = LoadSystem(config.system);
  const BranchData branch = ComputeBranchData(*system);
  const int iters = config.iters > 0 ? config.iters : DefaultIterations(*system);
  const ModelTrace trace = ParseKind(system, branch, config.kind, iters);
  const std::vector<TestFunction> fns =
      SelectFunctions(StandardFamily(*system, branch), config.functions);
  TracialityOptions tracial;
  tracial.seed = config.seed;
  tracial.samples = 4;

  json report = Envelope("trace eval", *system, {{"traciality", tracial.tolerance}});
  report["kind"] = trace.Label();
  report["certified_error"] = trace.certified_error();
  json levels = json::array();
  for (int i = 0; i <= config.levels; ++i) {
    const auto psi = RieffelPsi(
        system, i, [&trace](const RankOne& t) { return trace.Evaluate(t); }, tracial);
    json values;
    for (const TestFunction& f : fns) values[f.name] = psi(f.eval);
    levels.push_back({{"level", i}, {"values", values}});
  }
  report["levels"] = levels;
  Emit(config, "trace_eval", report, out);
  return kOk;
}

int TraceSynthesize(const Config& config, std::ostream& out, std::ostream&) {
  const SystemPtr system = LoadSystem(config.system);
  if (config.out.empty()) throw Error(ErrorCode::kInput, "synthesize needs --out");
  if (config.coeffs.empty()) throw Error(ErrorCode::kInput, "synthesize needs --coeffs");
  const BranchData branch = ComputeBranchData(*system);
  TraceCoefficients tc = ParseTraceCoefficients(ReadFile(config.coeffs));
  for (DiscreteCoefficient& d : tc.discrete) {
    std::ostringstream os;
    os.precision(17);
    os << d.b.coords.x;
    if (system->dim() == 2) os << "," << d.b.coords.y;
    d.b = ResolveBranchPoint(*system, branch, os.str());
  }
  const int iters = config.iters > 0 ? config.iters : DefaultIterations(*system);
  const HutchinsonEstimate mu_h = GenericHutchinson(*system, iters);
  const LevelMeasures lm = SynthesizeTrace(*system, tc, config.levels, mu_h);
  SaveLevelMeasures(config.out, lm, *system);

  json report = Envelope("trace synthesize", *system, json::object());
  report["levels"] = lm.max_level();
  report["hutchinson_iterations"] = iters;
  report["unit_value"] = lm.levels.front().TotalMass();
  report["expected_unit_value"] = tc.Total(system->size());
  report["metric_slack"] = lm.metric_slack;
  report["atom_slack"] = lm.atom_slack;
  Emit(config, "synthesize", report, out);
  return kOk;
}

int TraceDecompose(const Config& config, std::ostream& out, std::ostream& err) {
  const SystemPtr system = LoadSystem(config.system);
  if (config.in.empty()) throw Error(ErrorCode::kInput, "decompose needs --in");
  const int dim = system->dim();
  const BranchData branch = ComputeBranchData(*system);
  const LevelMeasures lm = LoadLevelMeasures(config.in, *system);
  CompatibilityOptions copts;
  const CompatibilityReport compat = CheckLevelCompatibility(
      *system, branch, lm, StandardFamily(*system, branch), copts);

  json report = Envelope("trace decompose", *system,
                         {{"compatibility", copts.tolerance},
                          {"equal_orbit_mass", DecomposeOptions{}.equal_mass_tolerance},
                          {"negative_residual", DecomposeOptions{}.negative_tolerance}});
  json checks = json::array();
  for (const RelationCheck& c : compat.checks) {
    checks.push_back({{"relation", c.relation},
                      {"level", c.level},
                      {"subject", c.subject},
                      {"residual", c.residual},
                      {"tolerance", c.tolerance},
                      {"passed", c.passed}});
  }
  report["compatibility"] = {{"passed", compat.passed()}, {"checks", checks}};
  if (const RelationCheck* f = compat.first_failure()) {
    Emit(config, "decompose", report, out);
    err << "compatibility check failed: " << f->relation << " at level " << f->level
        << " (" << f->subject << "): residual " << f->residual << " > "
        << f->tolerance << "\n";
    return kCheckFailed;
  }

  const int iters = config.iters > 0 ? config.iters : DefaultIterations(*system);
  const HutchinsonEstimate mu_h = GenericHutchinson(*system, iters);
  DecomposeOptions options;
  if (config.r_max >= 0) options.r_max = config.r_max;
  const Decomposition d = DecomposeTrace(*system, branch, lm, mu_h, options);

  report["coefficients"] = json::parse(TraceCoefficientsToJson(d.coefficients, dim));
  auto atoms = [dim](const std::vector<ResidualAtom>& v) {
    json a = json::array();
    for (const ResidualAtom& r : v) {
      a.push_back({{"point", CoordJson(r.point.coords, dim)},
                   {"mass", r.mass},
                   {"depth", r.depth}});
    }
    return a;
  };
  report["residual"] = {{"r_max", d.r_max},
                        {"orbit_mass_spread", d.orbit_mass_spread},
                        {"distance_to_hutchinson_part", d.residual_distance},
                        {"tolerance", d.residual_tolerance},
                        {"unresolved", atoms(d.unresolved)},
                        {"off_orbit", atoms(d.off_orbit)},
                        {"passed", d.passed()}};
  if (!config.out.empty()) {
    fs::create_directories(config.out);
    WriteFile(fs::path(config.out) / "coefficients.json",
              TraceCoefficientsToJson(d.coefficients, dim) + "\n");
  }
  Emit(config, "decompose", report, out);
  if (!d.passed()) {
    err << "decomposition residual check failed\n";
    return kCheckFailed;
  }
  return kOk;
}

// -------------------------------------------------------------------- kms

KmsSpec ParseKmsSpec(const Config& config, const SelfSimilarSystem& system,
                     const BranchData& branch) {
  KmsSpec spec;
  spec.b = ResolveBranchPoint(system, branch, config.b);
  spec.depth = config.kms_depth;
  const std::string prefix = "log:";
  if (config.beta.rfind(prefix, 0) == 0) {
    const std::vector<double> v = ParseNumbers(config.beta.substr(prefix.size()));
    if (v.size() != 1) throw Error(ErrorCode::kInput, "bad beta " + config.beta);
    spec.exp_beta = v[0];
    spec.beta = std::log(v[0]);
  } else {
    const std::vector<double> v = ParseNumbers(config.beta);
    if (v.size() != 1) throw Error(ErrorCode::kInput, "bad beta " + config.beta);
    spec.beta = v[0];
  }
  return spec;
}

int Kms(const Config& config, std::ostream& out, std::ostream&) {
  const SystemPtr system = LoadSystem(config.system);
  const BranchData branch = ComputeBranchData(*system);
  const KmsSpec spec = ParseKmsSpec(config, *system, branch);
  const KmsWeights w = ComputeKmsWeights(system->size(), spec);
  const std::vector<TestFunction> fns =
      SelectFunctions(StandardFamily(*system, branch), config.functions);

  json report = Envelope("kms", *system, {{"beta_margin", 1e-6}});
  report["b"] = CoordJson(spec.b.coords, system->dim());
  report["beta"] = spec.beta;
  if (spec.exp_beta) report["exp_beta"] = *spec.exp_beta;
  report["depth"] = spec.depth;
  report["ratio"] = w.ratio;
  report["normalizer"] = w.normalizer;
  report["weights"] = w.weights;
  report["tail"] = w.tail;
  json values;
  for (const TestFunction& f : fns) {
    const KmsValue v = EvalKms(*system, spec, f);
    values[f.name] = {{"value", v.value}, {"bound", v.error_bound}};
  }
  report["values"] = values;
  report["rho_one"] = EvalKms(*system, spec, FindFunction(StandardFamily(*system, branch), "one")).value;
  report["one_minus_tail"] = 1.0 - w.tail;
  Emit(config, "kms", report, out);
  return kOk;
}

// ----------------------------------------------------------------- verify

json SuiteJson(const SuiteReport& suite, std::ostream& out) {
  json list = json::array();
  for (const CriterionResult& c : suite.criteria) {
    const SubCheck* w = c.worst();
    out << (c.passed() ? "PASS " : "FAIL ") << std::left << std::setw(26) << c.id
        << " " << c.name;
    if (w) out << "  [" << w->label << ": " << w->value << (w->lower_bound ? " >= " : " <= ")
               << w->tolerance << "]";
    if (!c.error.empty()) out << "  error: " << c.error;
    out << "\n";
    json checks = json::array();
    for (const SubCheck& s : c.checks) {
      checks.push_back({{"label", s.label},
                        {"value", s.value},
                        {"tolerance", s.tolerance},
                        {"lower_bound", s.lower_bound},
                        {"passed", s.passed()}});
    }
    json entry = {{"id", c.id}, {"name", c.name}, {"passed", c.passed()}, {"checks", checks}};
    if (!c.error.empty()) entry["error"] = c.error;
    if (c.time_limit > 0.0) entry["time_limit_seconds"] = c.time_limit;
    list.push_back(entry);
  }
  return list;
}

int Verify(const Config& config, std::ostream& out, std::ostream& err) {
  const SystemPtr system = LoadSystem(config.system);
  SuiteOptions options;
  options.seed = config.seed;
  if (config.tolerance > 0.0) options.tolerance_override = config.tolerance;
  json tolerances = json::object();
  if (options.tolerance_override) tolerances["override"] = *options.tolerance_override;
  json report = Envelope("verify", *system, tolerances);
  report["seed"] = config.seed;
  bool passed = true;
  if (!config.system_only) {
    const SuiteReport acceptance = RunAcceptanceSuite(options);
    report["acceptance"] = SuiteJson(acceptance, out);
    passed = passed && acceptance.passed();
  }
  const SuiteReport sys = RunSystemSuite(system, options);
  report["system_suite"] = SuiteJson(sys, out);
  passed = passed && sys.passed();
  report["passed"] = passed;
  if (!config.out.empty()) Emit(config, "verify", report, out);
  if (!passed) {
    err << "verification failed\n";
    return kCheckFailed;
  }
  return kOk;
}

void AddSystemOptions(CLI::App* cmd, Config& config) {
  cmd->add_option("--system,-s", config.system, "built-in name or TOML path")
      ->capture_default_str();
  cmd->add_option("--out,-o", config.out, "output directory");
  cmd->add_option("--seed", config.seed, "seed for randomized checks")
      ->capture_default_str();
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Config config;
  CLI::App app{"Traces and KMS data of self-similar maps"};
  app.name("fractrace");
  app.require_subcommand(1);

  CLI::App* analyze = app.add_subcommand("analyze", "branch data, assumption A, orbits");
  AddSystemOptions(analyze, config);
  analyze->add_option("--depth", config.depth, "orbit depth")->capture_default_str();

  CLI::App* hutch = app.add_subcommand("hutchinson", "Hutchinson measure estimate");
  AddSystemOptions(hutch, config);
  hutch->add_option("--iters,-n", config.iters, "G* iterations");
  hutch->add_flag("--sampled", config.sampled, "chaos game instead of exact iteration");
  hutch->add_option("--samples", config.samples, "chaos-game samples");
  hutch->add_option("--start", config.start, "base, generic or x[,y]")
      ->capture_default_str();

  CLI::App* trace = app.add_subcommand("trace", "model traces and classification");
  trace->require_subcommand(1);
  CLI::App* eval = trace->add_subcommand("eval", "level values of a model trace");
  AddSystemOptions(eval, config);
  eval->add_option("--kind", config.kind, "hutchinson or discrete:<b>:<r>")
      ->capture_default_str();
  eval->add_option("--fn", config.functions, "test functions (default: all)")
      ->delimiter(',');
  eval->add_option("--levels", config.levels, "deepest level")->capture_default_str();
  eval->add_option("--iters,-n", config.iters, "Hutchinson iterations");
  CLI::App* synth = trace->add_subcommand("synthesize", "coefficients to level measures");
  AddSystemOptions(synth, config);
  synth->add_option("--coeffs", config.coeffs, "trace coefficients JSON")->required();
  synth->add_option("--levels", config.levels, "deepest level")->capture_default_str();
  synth->add_option("--iters,-n", config.iters, "Hutchinson iterations");
  CLI::App* decomp = trace->add_subcommand("decompose", "level measures to coefficients");
  AddSystemOptions(decomp, config);
  decomp->add_option("--in", config.in, "level measure directory")->required();
  decomp->add_option("--rmax", config.r_max, "deepest orbit depth (default: levels)");
  decomp->add_option("--iters,-n", config.iters, "Hutchinson iterations");

  CLI::App* kms = app.add_subcommand("kms", "KMS mixtures of the discrete traces");
  AddSystemOptions(kms, config);
  kms->add_option("--b", config.b, "branch point: B<k> or x[,y]")->capture_default_str();
  kms->add_option("--beta", config.beta, "inverse temperature, or log:<e^beta>")
      ->capture_default_str();
  kms->add_option("--depth", config.kms_depth, "truncation depth")->capture_default_str();
  kms->add_option("--fn", config.functions, "test functions (default: all)")
      ->delimiter(',');

  CLI::App* verify = app.add_subcommand("verify", "acceptance and invariant suites");
  AddSystemOptions(verify, config);
  verify->add_option("--tolerance", config.tolerance, "override every tolerance");
  verify->add_flag("--system-only", config.system_only, "skip the fixed acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kIoError;
  }

  try {
    if (*analyze) return Analyze(config, out, err);
    if (*hutch) return Hutchinson(config, out, err);
    if (*eval) return TraceEval(config, out, err);
    if (*synth) return TraceSynthesize(config, out, err);
    if (*decomp) return TraceDecompose(config, out, err);
    if (*kms) return Kms(config, out, err);
    if (*verify) return Verify(config, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (e.code() == ErrorCode::kSupportExplosion) {
      err << "hint: lower --iters or use --sampled\n";
    }
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kIoError;
}

}  // namespace fractrace::cli
