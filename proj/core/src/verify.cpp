#include "fractrace/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <set>

#include "fractrace/branch.hpp"
#include "fractrace/dynamics.hpp"
#include "fractrace/error.hpp"
#include "fractrace/frame.hpp"
#include "fractrace/kms.hpp"
#include "fractrace/section.hpp"
#include "fractrace/test_functions.hpp"
#include "fractrace/trace.hpp"
#include "fractrace/transport.hpp"

namespace fractrace {

bool CriterionResult::passed() const {
  if (!error.empty()) return false;
  if (time_limit > 0.0 && seconds > time_limit) return false;
  return std::all_of(checks.begin(), checks.end(),
                     [](const SubCheck& c) { return c.passed(); });
}

const SubCheck* CriterionResult::worst() const {
  const SubCheck* out = nullptr;
  double worst_score = -1.0;
  for (const SubCheck& c : checks) {
    double score;
    if (c.lower_bound) {
      score = c.value > 0.0 ? c.tolerance / c.value : INFINITY;
    } else {
      score = c.tolerance > 0.0 ? c.value / c.tolerance
                                : (c.value > 0.0 ? INFINITY : 0.0);
    }
    if (!c.passed()) score = std::max(score, 1.0) + 1.0;
    if (score > worst_score) {
      worst_score = score;
      out = &c;
    }
  }
  return out;
}

bool SuiteReport::passed() const {
  return std::all_of(criteria.begin(), criteria.end(),
                     [](const CriterionResult& c) { return c.passed(); });
}

namespace {

using Clock = std::chrono::steady_clock;

template <typename Body>
CriterionResult RunCriterion(std::string id, std::string name, double time_limit,
                             const SuiteOptions& options, Body body) {
  CriterionResult result;
  result.id = std::move(id);
  result.name = std::move(name);
  result.time_limit = time_limit;
  const auto start = Clock::now();
  try {
    body(result.checks);
  } catch (const std::exception& e) {
    result.error = e.what();
  }
  result.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (options.tolerance_override) {
    for (SubCheck& c : result.checks) c.tolerance = *options.tolerance_override;
  }
  return result;
}

std::mt19937_64 Rng(const SuiteOptions& options, std::uint64_t stream) {
  std::seed_seq seq{options.seed, stream};
  return std::mt19937_64(seq);
}

DiscreteMeasure RandomLineMeasure(std::mt19937_64& rng, int max_atoms) {
  std::uniform_int_distribution<int> count(1, max_atoms);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = count(rng);
  std::vector<Atom> atoms;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = 0.05 + unit(rng);
    atoms.emplace_back();
    atoms.back().point.coords.x = unit(rng);
    atoms.back().weight = w;
    total += w;
  }
  for (Atom& a : atoms) a.weight /= total;
  return DiscreteMeasure(std::move(atoms), true);
}

DiscreteMeasure RandomPlaneMeasure(std::mt19937_64& rng, int max_atoms, double mass) {
  std::uniform_int_distribution<int> count(1, max_atoms);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = count(rng);
  std::vector<Atom> atoms;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = 0.05 + unit(rng);
    atoms.emplace_back();
    atoms.back().point.coords = Coord{unit(rng), unit(rng)};
    atoms.back().weight = w;
    total += w;
  }
  for (Atom& a : atoms) a.weight *= mass / total;
  return DiscreteMeasure(std::move(atoms), false);
}

TraceCoefficients RandomCoefficients(std::mt19937_64& rng, const BranchData& branch,
                                     int max_r) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> terms(1, 4);
  std::uniform_int_distribution<std::size_t> pick_b(0, branch.branch_set.size() - 1);
  std::uniform_int_distribution<int> pick_r(0, max_r);
  TraceCoefficients tc;
  std::set<std::pair<std::size_t, int>> used;
  const int k = terms(rng);
  for (int t = 0; t < k; ++t) {
    const std::size_t b = pick_b(rng);
    const int r = pick_r(rng);
    if (!used.insert({b, r}).second) continue;
    tc.discrete.push_back({branch.branch_set[b], r, 0.01 + unit(rng) * 0.2});
  }
  tc.c_inf = unit(rng);
  return tc;
}

// Largest n with N^n <= cap.
int IterationsWithin(const SelfSimilarSystem& system, double cap) {
  int n = 0;
  double size = 1.0;
  while (size * system.size() <= cap) {
    size *= system.size();
    ++n;
  }
  return std::max(n, 1);
}

struct OrbitSummary {
  double count_mismatches = 0.0;
  double collisions = 0.0;
};

OrbitSummary CheckOrbits(const SelfSimilarSystem& system, const BranchData& branch,
                         int max_r) {
  OrbitSummary out;
  std::vector<Coord> all;
  for (const Point& b : branch.branch_set) {
    double expected = 1.0;
    for (int r = 0; r <= max_r; ++r) {
      const std::vector<Point> orbit = Orbit(system, b, r);
      if (static_cast<double>(orbit.size()) != expected) out.count_mismatches += 1.0;
      for (const Point& x : orbit) all.push_back(x.coords);
      expected *= system.size();
    }
  }
  const std::vector<std::size_t> rep = ClusterNear(all, system.eps_geo());
  for (std::size_t i = 0; i < rep.size(); ++i) {
    if (rep[i] != i) out.collisions += 1.0;
  }
  return out;
}

struct AlgebraSummary {
  double adjoint = 0.0;
  double right_module = 0.0;
  double tensor = 0.0;
  double traciality = 0.0;
  int sections = 0;
};

AlgebraSummary CheckAlgebra(const SystemPtr& system, int min_sections,
                            std::mt19937_64& rng) {
  AlgebraSummary out;
  std::vector<Coord> grid = SamplePoints(*system, 2);
  std::shuffle(grid.begin(), grid.end(), rng);
  grid.resize(std::min<std::size_t>(grid.size(), 12));
  DiscreteMeasure mu;
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  for (Coord y : grid) mu.Add(Point(y), unit(rng));

  int trial = 0;
  while (out.sections < min_sections) {
    const int level = 1 + trial % 2;
    ++trial;
    const Section xi = RandomSection(system, level, rng);
    const Section eta = RandomSection(system, level, rng);
    const Section zeta = RandomSection(system, level, rng);
    const Section omega = RandomSection(system, level, rng);
    const Section x1 = RandomSection(system, 1, rng);
    const Section x2 = RandomSection(system, 1, rng);
    out.sections += 6;
    const ComplexFunction a = RandomFunction(rng);
    const ComplexFunction a_conj = [a](Coord y) { return std::conj(a(y)); };

    const ComplexFunction lhs_adj = InnerProduct(LeftAction(a, xi), eta);
    const ComplexFunction rhs_adj = InnerProduct(xi, LeftAction(a_conj, eta));
    const ComplexFunction lhs_right = InnerProduct(xi, RightAction(eta, a));
    const ComplexFunction base = InnerProduct(xi, eta);
    const ComplexFunction lhs_left = InnerProduct(RightAction(xi, a), eta);
    const ComplexFunction lhs_tensor = InnerProduct(Tensor(x1, xi), Tensor(x2, eta));
    const ComplexFunction rhs_tensor =
        InnerProduct(xi, LeftAction(InnerProduct(x1, x2), eta));
    for (Coord y : grid) {
      out.adjoint = std::max(out.adjoint, std::abs(lhs_adj(y) - rhs_adj(y)));
      out.right_module =
          std::max({out.right_module, std::abs(lhs_right(y) - base(y) * a(y)),
                    std::abs(lhs_left(y) - std::conj(a(y)) * base(y))});
      out.tensor = std::max(out.tensor, std::abs(lhs_tensor(y) - rhs_tensor(y)));
    }
    const RankOne s{xi, eta}, t{zeta, omega};
    const Complex st = RieffelPi(level, mu, Compose(s, t));
    const Complex ts = RieffelPi(level, mu, Compose(t, s));
    out.traciality = std::max(out.traciality, std::abs(st - ts));
  }
  return out;
}

struct CompatibilitySummary {
  double discrete_worst = 0.0;
  bool hutchinson_passed = false;
  double hutchinson_excess = 0.0;
  bool scaled_flagged = false;
};

CompatibilitySummary CheckModelCompatibility(const SystemPtr& system,
                                             const BranchData& branch,
                                             const HutchinsonEstimate& mu_h,
                                             int max_r) {
  CompatibilitySummary out;
  const std::vector<TestFunction> family = StandardFamily(*system, branch);
  for (const Point& b : branch.branch_set) {
    for (int r = 0; r <= max_r; ++r) {
      const ModelTrace t = ModelTrace::Discrete(system, b, r);
      const CompatibilityReport rep =
          CheckLevelCompatibility(*system, branch, t.Levels(r + 2), family);
      double worst = std::max({rep.worst_inequality, rep.worst_equality,
                               rep.worst_point_mass});
      if (!rep.passed()) worst = std::max(worst, 1.0);
      out.discrete_worst = std::max(out.discrete_worst, worst);
    }
  }
  const ModelTrace h = ModelTrace::Hutchinson(system, mu_h);
  const CompatibilityReport hrep =
      CheckLevelCompatibility(*system, branch, h.Levels(3), family);
  out.hutchinson_passed = hrep.passed();
  for (const RelationCheck& c : hrep.checks) {
    out.hutchinson_excess =
        std::max(out.hutchinson_excess, c.residual - c.tolerance);
  }

  LevelMeasures scaled =
      ModelTrace::Discrete(system, branch.branch_set.front(), 3).Levels(4);
  scaled.levels[1] = scaled.levels[1].Scaled(2.0);
  out.scaled_flagged =
      !CheckLevelCompatibility(*system, branch, scaled, family).passed();
  return out;
}

struct RoundtripSummary {
  double discrete_error = 0.0;
  // max |c_inf - c_inf'| - allowed.
  double c_inf_excess = -INFINITY;
  double c_inf_error = 0.0;
  bool all_passed = true;
};

RoundtripSummary CheckRoundtrips(const SelfSimilarSystem& system,
                                 const BranchData& branch,
                                 const HutchinsonEstimate& mu_h, int count,
                                 int max_r, std::mt19937_64& rng) {
  RoundtripSummary out;
  for (int k = 0; k < count; ++k) {
    const TraceCoefficients tc = RandomCoefficients(rng, branch, max_r);
    const LevelMeasures lm = SynthesizeTrace(system, tc, max_r, mu_h);
    const Decomposition d = DecomposeTrace(system, branch, lm, mu_h);
    out.all_passed = out.all_passed && d.passed();
    for (const DiscreteCoefficient& want : tc.discrete) {
      double got = 0.0;
      for (const DiscreteCoefficient& c : d.coefficients.discrete) {
        if (c.r == want.r && system.Same(c.b.coords, want.b.coords)) got = c.c;
      }
      out.discrete_error = std::max(out.discrete_error, std::abs(got - want.c));
    }
    if (d.coefficients.discrete.size() != tc.discrete.size()) {
      out.discrete_error = std::max(out.discrete_error, 1.0);
    }
    const double err = std::abs(d.coefficients.c_inf - tc.c_inf);
    const double allowed = tc.c_inf * mu_h.error_bound + 1e-12;
    out.c_inf_error = std::max(out.c_inf_error, err);
    out.c_inf_excess = std::max(out.c_inf_excess, err - allowed);
  }
  return out;
}

struct KmsSummary {
  double unit_error = 0.0;
  double refinement_excess = -INFINITY;
};

KmsSummary CheckKms(const SelfSimilarSystem& system, const BranchData& branch,
                    int max_depth) {
  KmsSummary out;
  const std::vector<TestFunction> family = StandardFamily(system, branch);
  const double log_n = std::log(static_cast<double>(system.size()));
  for (const Point& b : branch.branch_set) {
    for (double extra : {0.1, 0.7, 2.0}) {
      for (int depth = 0; depth < max_depth; ++depth) {
        const KmsSpec spec{b, log_n + extra, depth, std::nullopt};
        const KmsWeights w = ComputeKmsWeights(system.size(), spec);
        const KmsValue one = EvalKms(system, spec, FindFunction(family, "one"));
        out.unit_error = std::max(out.unit_error, std::abs(one.value - (1.0 - w.tail)));
        for (const TestFunction& f : family) {
          const KmsValue v = EvalKms(system, spec, f);
          KmsSpec deeper = spec;
          deeper.depth = depth + 1;
          const KmsValue v2 = EvalKms(system, deeper, f);
          out.refinement_excess =
              std::max(out.refinement_excess, std::abs(v2.value - v.value) - v.error_bound);
        }
      }
    }
  }
  return out;
}

LevelMeasures GStarSequence(const SelfSimilarSystem& system, DiscreteMeasure nu,
                            int levels) {
  std::vector<DiscreteMeasure> iterates{std::move(nu)};
  for (int k = 0; k < levels; ++k) iterates.push_back(DualG(system, iterates.back()));
  LevelMeasures lm;
  for (int n = 0; n <= levels; ++n) {
    lm.levels.push_back(iterates[static_cast<std::size_t>(levels - n)]);
  }
  return lm;
}

}  // namespace

SuiteReport RunAcceptanceSuite(const SuiteOptions& options) {
  SuiteReport report;
  const SystemPtr tent = BuiltinSystem("tent");
  const SystemPtr sierpinski = BuiltinSystem("sierpinski");

  report.criteria.push_back(RunCriterion(
      "1", "tent Hutchinson moments", 5.0, options, [&](std::vector<SubCheck>& c) {
        const HutchinsonEstimate est = EstimateHutchinson(*tent, 14);
        const double mean = Integrate(est.measure, [](Coord y) { return y.x; });
        const double second =
            Integrate(est.measure, [](Coord y) { return y.x * y.x; });
        c.push_back({"|mean - 1/2|", std::abs(mean - 0.5), std::ldexp(1.0, -12)});
        c.push_back({"|second moment - 1/3|", std::abs(second - 1.0 / 3.0),
                     std::ldexp(1.0, -10)});
      }));

  report.criteria.push_back(RunCriterion(
      "2", "contraction of G*", 1.0, options, [&](std::vector<SubCheck>& c) {
        std::mt19937_64 rng = Rng(options, 2);
        double worst = 0.0;
        for (int k = 0; k < 20; ++k) {
          const DiscreteMeasure mu = RandomLineMeasure(rng, 32);
          const DiscreteMeasure nu = RandomLineMeasure(rng, 32);
          worst = std::max(worst, ContractionRatio(*tent, mu, nu));
        }
        c.push_back({"max L(G*mu, G*nu) / L(mu, nu)", worst, 0.5 + 1e-9});
      }));

  report.criteria.push_back(RunCriterion(
      "3", "orbit counts and disjointness", 10.0, options,
      [&](std::vector<SubCheck>& c) {
        const OrbitSummary t = CheckOrbits(*tent, ComputeBranchData(*tent), 12);
        const OrbitSummary s =
            CheckOrbits(*sierpinski, ComputeBranchData(*sierpinski), 7);
        c.push_back({"tent count mismatches", t.count_mismatches, 0.0});
        c.push_back({"tent orbit collisions", t.collisions, 0.0});
        c.push_back({"sierpinski count mismatches", s.count_mismatches, 0.0});
        c.push_back({"sierpinski orbit collisions", s.collisions, 0.0});
      }));

  report.criteria.push_back(RunCriterion(
      "4", "classification roundtrip", 30.0, options, [&](std::vector<SubCheck>& c) {
        std::mt19937_64 rng = Rng(options, 4);
        for (const SystemPtr& s : {tent, sierpinski}) {
          const BranchData branch = ComputeBranchData(*s);
          const HutchinsonEstimate mu_h =
              GenericHutchinson(*s, s->size() == 2 ? 14 : 8);
          const RoundtripSummary r = CheckRoundtrips(*s, branch, mu_h, 10, 6, rng);
          c.push_back({s->name() + " max |c_br - c_br'|", r.discrete_error, 1e-12});
          c.push_back({s->name() + " max |c_inf - c_inf'| beyond certified",
                       std::max(r.c_inf_excess, 0.0), 0.0});
          c.push_back({s->name() + " residual reports failing",
                       r.all_passed ? 0.0 : 1.0, 0.0});
        }
      }));

  report.criteria.push_back(RunCriterion(
      "5", "level compatibility", 0.0, options, [&](std::vector<SubCheck>& c) {
        for (const SystemPtr& s : {tent, sierpinski}) {
          const BranchData branch = ComputeBranchData(*s);
          const HutchinsonEstimate mu_h =
              GenericHutchinson(*s, s->size() == 2 ? 14 : 8);
          const CompatibilitySummary r =
              CheckModelCompatibility(s, branch, mu_h, 4);
          c.push_back({s->name() + " discrete model residual", r.discrete_worst, 1e-10});
          c.push_back({s->name() + " hutchinson excess over certified slack",
                       std::max(r.hutchinson_excess, 0.0), 0.0});
          c.push_back({s->name() + " scaled level-1 measure unflagged",
                       r.scaled_flagged ? 0.0 : 1.0, 0.0});
        }
      }));

  report.criteria.push_back(RunCriterion(
      "6", "transport solver oracle", 0.0, options, [&](std::vector<SubCheck>& c) {
        std::mt19937_64 rng = Rng(options, 6);
        double lp_gap = 0.0;
        TransportOptions force;
        force.force_flow = true;
        for (int k = 0; k < 50; ++k) {
          const DiscreteMeasure mu = RandomPlaneMeasure(rng, 6, 1.0);
          const DiscreteMeasure nu = RandomPlaneMeasure(rng, 6, 1.0);
          lp_gap = std::max(lp_gap, std::abs(W1Flow(mu, nu, force).distance -
                                             SimplexW1(mu, nu)));
        }
        double line_gap = 0.0;
        for (int k = 0; k < 50; ++k) {
          const DiscreteMeasure mu = RandomLineMeasure(rng, 16);
          const DiscreteMeasure nu = RandomLineMeasure(rng, 16);
          line_gap = std::max(line_gap, std::abs(W1OneDim(mu, nu).distance -
                                                 W1Flow(mu, nu, force).distance));
        }
        c.push_back({"max |flow - LP| (<= 6 atoms)", lp_gap, 1e-9});
        c.push_back({"max |1D - flow|", line_gap, 1e-9});
      }));

  report.criteria.push_back(RunCriterion(
      "7", "frame identities", 0.0, options, [&](std::vector<SubCheck>& c) {
        const RealFunction one = [](Coord) { return 1.0; };
        const RealFunction x = [](Coord y) { return y.x; };
        const Frame base = BuildTruncatedFrame(tent, 1);
        c.push_back({"residual outside window at default M",
                     std::max(VerifyFrameIdentity(base, one, base.grid),
                              VerifyFrameIdentity(base, x, base.grid)),
                     1e-3});
        double prev = std::max(MeasuredWindow(base, one, base.grid, 1e-3),
                               MeasuredWindow(base, x, base.grid, 1e-3));
        double min_ratio = INFINITY;
        for (int k = 1; k <= 3; ++k) {
          const Frame f = BuildTruncatedFrame(tent, 1, base.requested_members << k);
          const double w = std::max(MeasuredWindow(f, one, f.grid, 1e-3),
                                    MeasuredWindow(f, x, f.grid, 1e-3));
          min_ratio = std::min(min_ratio, w > 0.0 ? prev / w : INFINITY);
          prev = w;
        }
        c.push_back({"min window shrink per doubling of M", min_ratio, 2.0, true});
        double excess = -INFINITY;
        const BranchData branch = ComputeBranchData(*tent);
        for (int r = 0; r <= 3; ++r) {
          for (const Point& p : Orbit(*tent, branch.branch_set.front(), r)) {
            for (const RealFunction& a : {one, x}) {
              const TransferCheck t =
                  FrameTransferCheck(base, DiscreteMeasure::Dirac(p), a);
              excess = std::max(excess, std::abs(t.lhs - t.rhs) - t.tolerance);
            }
          }
        }
        c.push_back({"transfer check excess over frame error",
                     std::max(excess, 0.0), 0.0});
      }));

  report.criteria.push_back(RunCriterion(
      "8", "module algebra", 0.0, options, [&](std::vector<SubCheck>& c) {
        std::mt19937_64 rng = Rng(options, 8);
        for (const SystemPtr& s : {tent, sierpinski}) {
          const AlgebraSummary a = CheckAlgebra(s, 100, rng);
          c.push_back({s->name() + " adjoint", a.adjoint, 1e-8});
          c.push_back({s->name() + " right module", a.right_module, 1e-8});
          c.push_back({s->name() + " tensor inner product", a.tensor, 1e-8});
          c.push_back({s->name() + " rank-one traciality", a.traciality, 1e-8});
        }
      }));

  report.criteria.push_back(RunCriterion(
      "9", "KMS weights", 0.0, options, [&](std::vector<SubCheck>& c) {
        double unit_error = 0.0, refinement = -INFINITY;
        for (const SystemPtr& s : {tent, sierpinski}) {
          const KmsSummary k = CheckKms(*s, ComputeBranchData(*s), 6);
          unit_error = std::max(unit_error, k.unit_error);
          refinement = std::max(refinement, k.refinement_excess);
        }
        const KmsWeights w = ComputeKmsWeights(2, KmsSpec{Point(0.5), 0.0, 12, 4.0});
        double mismatch = 0.0;
        for (std::size_t j = 0; j < w.weights.size(); ++j) {
          if (w.weights[j] != std::ldexp(1.0, -static_cast<int>(j) - 1)) mismatch += 1.0;
        }
        c.push_back({"|rho(1) - (1 - tail)|", unit_error, 1e-12});
        c.push_back({"tent log 4 weights differing from 2^-(j+1)", mismatch, 0.0});
        c.push_back({"depth refinement beyond prior tail",
                     std::max(refinement, 0.0), 0.0});
      }));

  report.criteria.push_back(RunCriterion(
      "10", "no point mass implies Hutchinson", 0.0, options,
      [&](std::vector<SubCheck>& c) {
        std::mt19937_64 rng = Rng(options, 10);
        const BranchData branch = ComputeBranchData(*tent);
        const LevelMeasures lm = GStarSequence(*tent, RandomLineMeasure(rng, 8), 10);
        const HutchinsonEstimate mu_h = GenericHutchinson(*tent, 16);
        const HutchinsonIdentification id =
            VerifyNoPointMassImpliesHutchinson(*tent, branch, lm, mu_h);
        c.push_back({"orbit point mass", id.orbit_point_mass, 1e-10});
        double step = 0.0;
        for (double r : id.step_residuals) step = std::max(step, r);
        c.push_back({"max L(mu_n, G* mu_n+1)", step, id.step_tolerance});
        c.push_back({"certified L(mu_0, mu_H)", id.distance, id.bound});
      }));
  return report;
}

SuiteReport RunSystemSuite(const SystemPtr& system, const SuiteOptions& options) {
  SuiteReport report;
  const std::string tag = system->name() + ".";
  BranchData branch;
  report.criteria.push_back(RunCriterion(
      tag + "assumption", "assumption A", 0.0, options, [&](std::vector<SubCheck>& c) {
        const AssumptionReport a = CheckAssumptionA(*system, 6);
        for (const CheckItem& item : a.items) {
          c.push_back({item.name, item.passed ? 0.0 : 1.0, 0.0});
        }
        branch = ComputeBranchData(*system);
      }));
  if (!report.criteria.back().passed()) return report;

  const int max_r = std::max(1, IterationsWithin(*system, 2200.0));
  const HutchinsonEstimate mu_h =
      GenericHutchinson(*system, IterationsWithin(*system, 2e4));

  report.criteria.push_back(RunCriterion(
      tag + "orbits", "orbit counts and disjointness", 0.0, options,
      [&](std::vector<SubCheck>& c) {
        const OrbitSummary o = CheckOrbits(*system, branch, max_r);
        c.push_back({"count mismatches", o.count_mismatches, 0.0});
        c.push_back({"collisions", o.collisions, 0.0});
      }));

  report.criteria.push_back(RunCriterion(
      tag + "compatibility", "model trace compatibility", 0.0, options,
      [&](std::vector<SubCheck>& c) {
        const CompatibilitySummary r =
            CheckModelCompatibility(system, branch, mu_h, std::min(max_r, 4));
        c.push_back({"discrete model residual", r.discrete_worst, 1e-10});
        c.push_back({"hutchinson excess over certified slack",
                     std::max(r.hutchinson_excess, 0.0), 0.0});
        c.push_back({"scaled level-1 measure unflagged", r.scaled_flagged ? 0.0 : 1.0,
                     0.0});
      }));

  report.criteria.push_back(RunCriterion(
      tag + "roundtrip", "classification roundtrip", 0.0, options,
      [&](std::vector<SubCheck>& c) {
        std::mt19937_64 rng = Rng(options, 104);
        const RoundtripSummary r =
            CheckRoundtrips(*system, branch, mu_h, 5, std::min(max_r, 5), rng);
        c.push_back({"max |c_br - c_br'|", r.discrete_error, 1e-12});
        c.push_back({"max |c_inf - c_inf'| beyond certified",
                     std::max(r.c_inf_excess, 0.0), 0.0});
        c.push_back({"residual reports failing", r.all_passed ? 0.0 : 1.0, 0.0});
      }));

  report.criteria.push_back(RunCriterion(
      tag + "algebra", "module algebra", 0.0, options, [&](std::vector<SubCheck>& c) {
        std::mt19937_64 rng = Rng(options, 108);
        const AlgebraSummary a = CheckAlgebra(system, 100, rng);
        c.push_back({"adjoint", a.adjoint, 1e-8});
        c.push_back({"right module", a.right_module, 1e-8});
        c.push_back({"tensor inner product", a.tensor, 1e-8});
        c.push_back({"rank-one traciality", a.traciality, 1e-8});
      }));

  report.criteria.push_back(RunCriterion(
      tag + "kms", "KMS weights", 0.0, options, [&](std::vector<SubCheck>& c) {
        const KmsSummary k = CheckKms(*system, branch, std::min(max_r, 6));
        c.push_back({"|rho(1) - (1 - tail)|", k.unit_error, 1e-12});
        c.push_back({"depth refinement beyond prior tail",
                     std::max(k.refinement_excess, 0.0), 0.0});
        bool rejected = false;
        try {
          ComputeKmsWeights(system->size(),
                            KmsSpec{branch.branch_set.front(),
                                    std::log(static_cast<double>(system->size())),
                                    2, std::nullopt});
        } catch (const Error& e) {
          rejected = e.code() == ErrorCode::kBetaTooSmall;
        }
        c.push_back({"beta = log N accepted", rejected ? 0.0 : 1.0, 0.0});
      }));

  report.criteria.push_back(RunCriterion(
      tag + "hutchinson", "no point mass implies Hutchinson", 0.0, options,
      [&](std::vector<SubCheck>& c) {
        std::mt19937_64 rng = Rng(options, 110);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const std::vector<Coord>& reg = system->region();
        // Exact transport in the plane needs small supports: two seed atoms
        // and a coarser estimate keep the flow graph near 2e4 pairs.
        const bool plane = system->dim() == 2;
        const int seeds = plane ? 2 : 4;
        DiscreteMeasure nu;
        nu.set_probability(true);
        for (int k = 0; k < seeds; ++k) {
          Coord p;
          if (plane) {
            double s = u(rng), t = u(rng);
            if (s + t > 1.0) {
              s = 1.0 - s;
              t = 1.0 - t;
            }
            p = reg[0] + s * (reg[1] - reg[0]) + t * (reg[2] - reg[0]);
          } else {
            p = reg[0] + u(rng) * (reg[1] - reg[0]);
          }
          nu.Add(Point(p), 1.0 / seeds);
        }
        const int levels = plane ? IterationsWithin(*system, 30.0)
                                 : std::min(10, IterationsWithin(*system, 4000.0));
        const HutchinsonEstimate estimate =
            plane ? GenericHutchinson(*system, IterationsWithin(*system, 800.0))
                  : mu_h;
        const LevelMeasures lm = GStarSequence(*system, nu, levels);
        const HutchinsonIdentification id =
            VerifyNoPointMassImpliesHutchinson(*system, branch, lm, estimate);
        double step = 0.0;
        for (double r : id.step_residuals) step = std::max(step, r);
        c.push_back({"orbit point mass", id.orbit_point_mass, 1e-10});
        c.push_back({"max L(mu_n, G* mu_n+1)", step, id.step_tolerance});
        c.push_back({"certified L(mu_0, mu_H)", id.distance, id.bound});
      }));
  return report;
}

}  // namespace fractrace
