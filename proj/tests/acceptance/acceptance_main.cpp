// Acceptance gate: ten fixed criteria on the tent map and the Sierpinski
// gasket, each checked against reference values computed in tests/support.
// Prints one PASS/FAIL line per criterion and exits nonzero on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fractrace/branch.hpp"
#include "fractrace/dynamics.hpp"
#include "fractrace/error.hpp"
#include "fractrace/frame.hpp"
#include "fractrace/kms.hpp"
#include "fractrace/section.hpp"
#include "fractrace/system.hpp"
#include "fractrace/test_functions.hpp"
#include "fractrace/trace.hpp"
#include "fractrace/transport.hpp"
#include "generators.hpp"
#include "oracles.hpp"

namespace fractrace {
namespace {

constexpr std::uint64_t kSeed = 7;

struct Check {
  std::string label;
  double value;
  double limit;
  bool at_least = false;

  bool ok() const { return at_least ? value >= limit : value <= limit; }
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds; zero for none
  std::function<void(std::vector<Check>&)> body;
};

bool Run(const Criterion& c) {
  std::vector<Check> checks;
  std::string error;
  const auto start = std::chrono::steady_clock::now();
  try {
    c.body(checks);
  } catch (const std::exception& e) {
    error = e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool ok = error.empty() && !checks.empty();
  for (const Check& k : checks) ok = ok && k.ok();
  if (c.time_limit > 0.0) {
    checks.push_back({"runtime seconds", seconds, c.time_limit});
    ok = ok && checks.back().ok();
  }
  std::printf("%s criterion %d: %s (%.2fs)\n", ok ? "PASS" : "FAIL", c.id, c.name.c_str(),
              seconds);
  for (const Check& k : checks) {
    std::printf("    %-4s %-58s %.6g %s %.6g\n", k.ok() ? "ok" : "BAD", k.label.c_str(),
                k.value, k.at_least ? ">=" : "<=", k.limit);
  }
  if (!error.empty()) std::printf("    error: %s\n", error.c_str());
  return ok;
}

// Largest weight discrepancy between two atomic measures, matching atoms
// within eps.
double AtomGap(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double eps) {
  auto mass_near = [eps](const DiscreteMeasure& m, Coord p) {
    double s = 0.0;
    for (const Atom& a : m.atoms()) {
      if (Distance(a.point.coords, p) <= eps) s += a.weight;
    }
    return s;
  };
  double gap = std::abs(mu.TotalMass() - nu.TotalMass());
  for (const DiscreteMeasure* m : {&mu, &nu}) {
    for (const Atom& a : m->atoms()) {
      gap = std::max(gap, std::abs(mass_near(mu, a.point.coords) -
                                   mass_near(nu, a.point.coords)));
    }
  }
  return gap;
}

// Largest distance from a point of `got` to the nearest point of `want`, and
// vice versa.
double SetGap(const std::vector<Coord>& got, const std::vector<Coord>& want) {
  auto one_way = [](const std::vector<Coord>& a, const std::vector<Coord>& b) {
    double worst = 0.0;
    for (Coord p : a) {
      double best = std::numeric_limits<double>::infinity();
      for (Coord q : b) best = std::min(best, Distance(p, q));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_way(got, want), one_way(want, got));
}

std::vector<Coord> Coords(const std::vector<Point>& pts) {
  std::vector<Coord> out;
  for (const Point& p : pts) out.push_back(p.coords);
  return out;
}

// ---------------------------------------------------------------- criteria

void TentMoments(std::vector<Check>& c) {
  const SystemPtr tent = BuiltinSystem("tent");
  const HutchinsonEstimate est = EstimateHutchinson(*tent, 14);
  const double mean = Integrate(est.measure, [](Coord y) { return y.x; });
  const double second = Integrate(est.measure, [](Coord y) { return y.x * y.x; });
  c.push_back({"|int x - 1/2|", std::abs(mean - 0.5), std::ldexp(1.0, -12)});
  c.push_back({"|int x^2 - 1/3|", std::abs(second - 1.0 / 3.0), std::ldexp(1.0, -10)});

  DiscreteMeasure ref = DiscreteMeasure::Dirac(Point(0.0));
  for (int k = 0; k < 14; ++k) ref = oracle::PushAverage(*tent, ref);
  const double ref_second = Integrate(ref, [](Coord y) { return y.x * y.x; });
  c.push_back({"|int x^2 - hand-iterated G* from delta_0|", std::abs(second - ref_second),
               1e-12});
}

void Contraction(std::vector<Check>& c) {
  const SystemPtr tent = BuiltinSystem("tent");
  std::mt19937_64 rng = gen::Rng(kSeed, 2);
  double worst = 0.0, worst_ref = 0.0, disagreement = 0.0;
  for (int k = 0; k < 20; ++k) {
    const DiscreteMeasure mu = gen::LineMeasure(rng, gen::Int(rng, 1, 32));
    const DiscreteMeasure nu = gen::LineMeasure(rng, gen::Int(rng, 1, 32));
    const double ratio = ContractionRatio(*tent, mu, nu);
    const double ref = oracle::LineW1(oracle::PushAverage(*tent, mu),
                                      oracle::PushAverage(*tent, nu)) /
                       oracle::LineW1(mu, nu);
    worst = std::max(worst, ratio);
    worst_ref = std::max(worst_ref, ref);
    disagreement = std::max(disagreement, std::abs(ratio - ref));
  }
  c.push_back({"max contraction ratio", worst, 0.5 + 1e-9});
  c.push_back({"max contraction ratio, CDF reference", worst_ref, 0.5 + 1e-9});
  c.push_back({"max |ratio - reference|", disagreement, 1e-9});
}

void OrbitCounts(std::vector<Check>& c) {
  const SystemPtr tent = BuiltinSystem("tent");
  const SystemPtr sierpinski = BuiltinSystem("sierpinski");

  {
    double count_errors = 0.0, closed_form_gap = 0.0;
    std::vector<Coord> pooled;
    for (int r = 0; r <= 12; ++r) {
      const std::vector<Point> orbit = Orbit(*tent, Point(0.5), r);
      if (orbit.size() != (std::size_t{1} << r)) count_errors += 1.0;
      std::vector<double> xs;
      for (const Point& p : orbit) {
        xs.push_back(p.coords.x);
        pooled.push_back(p.coords);
      }
      std::sort(xs.begin(), xs.end());
      const std::vector<double> want = oracle::TentOrbitClosedForm(r);
      if (xs.size() != want.size()) {
        count_errors += 1.0;
        continue;
      }
      for (std::size_t i = 0; i < xs.size(); ++i) {
        closed_form_gap = std::max(closed_form_gap, std::abs(xs[i] - want[i]));
      }
    }
    c.push_back({"tent |O_r| != 2^r, r <= 12", count_errors, 0.0});
    c.push_back({"tent max |orbit - (2k+1)/2^(r+1)|", closed_form_gap, 1e-15});
    c.push_back({"tent min distance between orbit points", oracle::MinPairDistance(pooled),
                 1e3 * tent->eps_geo(), true});
  }

  {
    const double s3 = std::sqrt(3.0);
    const std::vector<Coord> stu{{0.25, s3 / 4}, {0.5, 0.0}, {0.75, s3 / 4}};
    const BranchData branch = ComputeBranchData(*sierpinski);
    c.push_back({"sierpinski branch set vs {S, T, U}",
                 SetGap(Coords(branch.branch_set), stu), 1e-12});
    double count_errors = 0.0, brute_gap = 0.0;
    std::vector<Coord> pooled;
    for (Coord b : stu) {
      std::size_t expected = 1;
      for (int r = 0; r <= 7; ++r) {
        const std::vector<Point> orbit = Orbit(*sierpinski, Point(b), r);
        if (orbit.size() != expected) count_errors += 1.0;
        const std::vector<Coord> got = Coords(orbit);
        const std::vector<Coord> want =
            oracle::Distinct(oracle::WordImages(*sierpinski, b, r), sierpinski->eps_geo());
        if (want.size() != expected) count_errors += 1.0;
        if (r <= 5) brute_gap = std::max(brute_gap, SetGap(got, want));
        pooled.insert(pooled.end(), got.begin(), got.end());
        expected *= 3;
      }
    }
    c.push_back({"sierpinski |O_r| != 3^r, r <= 7", count_errors, 0.0});
    c.push_back({"sierpinski orbit vs brute-force preimages (r <= 5)", brute_gap, 1e-12});
    c.push_back({"sierpinski min distance between orbit points",
                 oracle::MinPairDistance(pooled), 1e3 * sierpinski->eps_geo(), true});
  }
}

void Roundtrip(std::vector<Check>& c) {
  std::mt19937_64 rng = gen::Rng(kSeed, 4);
  for (const char* name : {"tent", "sierpinski"}) {
    const SystemPtr s = BuiltinSystem(name);
    const BranchData branch = ComputeBranchData(*s);
    const HutchinsonEstimate mu_h = GenericHutchinson(*s, s->size() == 2 ? 14 : 8);
    double discrete_error = 0.0, c_inf_excess = 0.0, failed_reports = 0.0;
    for (int k = 0; k < 10; ++k) {
      const TraceCoefficients tc = gen::Coefficients(rng, branch, 6);
      const LevelMeasures lm = oracle::BuildLevels(*s, tc, 6, mu_h.measure);
      const Decomposition d = DecomposeTrace(*s, branch, lm, mu_h);
      if (!d.passed()) failed_reports += 1.0;
      // Every recovered coefficient must match the generating one (zero when
      // absent), and every generating one must be recovered.
      for (const DiscreteCoefficient& got : d.coefficients.discrete) {
        double want = 0.0;
        for (const DiscreteCoefficient& w : tc.discrete) {
          if (w.r == got.r && s->Same(w.b.coords, got.b.coords)) want = w.c;
        }
        discrete_error = std::max(discrete_error, std::abs(got.c - want));
      }
      for (const DiscreteCoefficient& want : tc.discrete) {
        double got = 0.0;
        for (const DiscreteCoefficient& g : d.coefficients.discrete) {
          if (g.r == want.r && s->Same(g.b.coords, want.b.coords)) got = g.c;
        }
        discrete_error = std::max(discrete_error, std::abs(got - want.c));
      }
      const double certified = tc.c_inf * mu_h.error_bound + 1e-12;
      c_inf_excess = std::max(c_inf_excess,
                              std::abs(d.coefficients.c_inf - tc.c_inf) - certified);
    }
    const std::string n(name);
    c.push_back({n + " max |c_br - recovered|", discrete_error, 1e-12});
    c.push_back({n + " max |c_inf - recovered| beyond certified", std::max(c_inf_excess, 0.0),
                 0.0});
    c.push_back({n + " residual reports failing", failed_reports, 0.0});
  }
}

void Compatibility(std::vector<Check>& c) {
  for (const char* name : {"tent", "sierpinski"}) {
    const SystemPtr s = BuiltinSystem(name);
    const std::string n(name);
    const BranchData branch = ComputeBranchData(*s);
    const std::vector<TestFunction> family = StandardFamily(*s, branch);

    double library_worst = 0.0, failures = 0.0, direct_worst = 0.0, model_gap = 0.0;
    for (const Point& b : branch.branch_set) {
      for (int r = 0; r <= 4; ++r) {
        LevelMeasures lm;
        for (int i = 0; i <= r + 2; ++i) {
          lm.levels.push_back(i <= r ? oracle::UniformOrbitMeasure(*s, b.coords, r - i)
                                     : DiscreteMeasure());
        }
        const CompatibilityReport rep = CheckLevelCompatibility(*s, branch, lm, family);
        if (!rep.passed()) failures += 1.0;
        for (const RelationCheck& k : rep.checks) {
          library_worst = std::max(library_worst, k.residual);
        }
        const ModelTrace model = ModelTrace::Discrete(s, b, r);
        for (int i = 0; i <= r + 2; ++i) {
          model_gap = std::max(model_gap,
                               AtomGap(model.LevelMeasure(i), lm.levels[i], s->eps_geo()));
        }
        // (1/N) F(mu_{i+1}) = mu_i below the top level, <= at the top.
        for (int i = 0; i <= r; ++i) {
          for (const TestFunction& f : family) {
            const double lhs = oracle::HalfTransfer(*s, lm.levels[i + 1], f.eval);
            const double rhs = Integrate(lm.levels[i], f.eval);
            if (i < r) {
              direct_worst = std::max(direct_worst, std::abs(lhs - rhs));
            } else if (f.nonnegative) {
              direct_worst = std::max(direct_worst, lhs - rhs);
            }
          }
        }
      }
    }
    c.push_back({n + " discrete models: worst reported residual", library_worst, 1e-10});
    c.push_back({n + " discrete models: failing reports", failures, 0.0});
    c.push_back({n + " discrete models: direct transfer residual", direct_worst, 1e-10});
    c.push_back({n + " model level measures vs orbit reference", model_gap, 1e-12});

    // Hutchinson kind: equality within (1 + c) * certified error * Lip(f).
    const HutchinsonEstimate mu_h = GenericHutchinson(*s, s->size() == 2 ? 14 : 8);
    const ModelTrace h = ModelTrace::Hutchinson(s, mu_h);
    const CompatibilityReport hrep = CheckLevelCompatibility(*s, branch, h.Levels(3), family);
    c.push_back({n + " hutchinson model: failing reports", hrep.passed() ? 0.0 : 1.0, 0.0});
    double excess = -std::numeric_limits<double>::infinity();
    const double slack = (1.0 + s->contraction_upper()) * mu_h.error_bound;
    for (const TestFunction& f : family) {
      if (!f.lipschitz) continue;
      const double gap = std::abs(oracle::HalfTransfer(*s, mu_h.measure, f.eval) -
                                  Integrate(mu_h.measure, f.eval));
      excess = std::max(excess, gap - slack * *f.lipschitz - 1e-12);
    }
    c.push_back({n + " hutchinson model: direct residual beyond certified",
                 std::max(excess, 0.0), 0.0});

    // A level sequence with mu_1 doubled must be flagged.
    LevelMeasures bad;
    const Point b0 = branch.branch_set.front();
    for (int i = 0; i <= 4; ++i) {
      bad.levels.push_back(i <= 3 ? oracle::UniformOrbitMeasure(*s, b0.coords, 3 - i)
                                  : DiscreteMeasure());
    }
    bad.levels[1] = bad.levels[1].Scaled(2.0);
    const bool flagged = !CheckLevelCompatibility(*s, branch, bad, family).passed();
    const double direct = oracle::HalfTransfer(*s, bad.levels[1], [](Coord) { return 1.0; }) -
                          bad.levels[0].TotalMass();
    c.push_back({n + " doubled mu_1 not flagged", flagged ? 0.0 : 1.0, 0.0});
    c.push_back({n + " doubled mu_1: direct inequality excess", direct, 0.5, true});
  }
}

void TransportOracle(std::vector<Check>& c) {
  std::mt19937_64 rng = gen::Rng(kSeed, 6);
  TransportOptions force;
  force.force_flow = true;
  double enumerated_gap = 0.0, permutation_gap = 0.0;
  int enumerated = 0, permuted = 0;
  for (int k = 0; k < 50; ++k) {
    if (k % 2 == 0) {
      const int n = gen::Int(rng, 1, 6);
      const int m = gen::Int(rng, 1, std::min(6, 20 / n));
      const DiscreteMeasure mu = gen::PlaneMeasure(rng, n);
      const DiscreteMeasure nu = gen::PlaneMeasure(rng, m);
      enumerated_gap = std::max(
          enumerated_gap,
          std::abs(W1Flow(mu, nu, force).distance - oracle::EnumeratedW1(mu, nu)));
      ++enumerated;
    } else {
      const int n = gen::Int(rng, 1, 6);
      const DiscreteMeasure mu = gen::UniformPlaneMeasure(rng, n);
      const DiscreteMeasure nu = gen::UniformPlaneMeasure(rng, n);
      std::vector<Coord> xs, ys;
      for (const Atom& a : mu.atoms()) xs.push_back(a.point.coords);
      for (const Atom& a : nu.atoms()) ys.push_back(a.point.coords);
      permutation_gap =
          std::max(permutation_gap,
                   std::abs(W1Flow(mu, nu, force).distance - oracle::PermutationW1(xs, ys)));
      ++permuted;
    }
  }
  c.push_back({"flow vs basis enumeration (" + std::to_string(enumerated) + " instances)",
               enumerated_gap, 1e-9});
  c.push_back({"flow vs permutation enumeration (" + std::to_string(permuted) +
                   " instances)",
               permutation_gap, 1e-9});

  double line_gap = 0.0, cdf_gap = 0.0;
  for (int k = 0; k < 50; ++k) {
    const DiscreteMeasure mu = gen::LineMeasure(rng, gen::Int(rng, 1, 16));
    const DiscreteMeasure nu = gen::LineMeasure(rng, gen::Int(rng, 1, 16));
    const double fast = W1OneDim(mu, nu).distance;
    line_gap = std::max(line_gap, std::abs(fast - W1Flow(mu, nu, force).distance));
    cdf_gap = std::max(cdf_gap, std::abs(fast - oracle::LineW1(mu, nu)));
  }
  c.push_back({"1D path vs flow (50 instances)", line_gap, 1e-9});
  c.push_back({"1D path vs CDF reference", cdf_gap, 1e-9});
}

// sum_i (u_i | phi(a) u_i)(y) evaluated from the members' components.
double FrameSum(const Frame& f, const RealFunction& a, Coord y) {
  const SelfSimilarSystem& s = *f.system;
  double total = 0.0;
  for (const Section& u : f.members) {
    for (const Word& w : u.words()) {
      const Complex v = u(w, y);
      total += std::norm(v) * a(ApplyWord(s, w, y));
    }
  }
  return total;
}

double TildeOracle(const SelfSimilarSystem& s, const RealFunction& a, Coord y) {
  std::vector<Coord> images;
  for (int j = 0; j < s.size(); ++j) images.push_back(s.map(j)(y));
  double total = 0.0;
  for (Coord x : oracle::Distinct(images, s.eps_geo())) total += a(x);
  return total;
}

void FrameIdentities(std::vector<Check>& c) {
  const SystemPtr tent = BuiltinSystem("tent");
  const RealFunction one = [](Coord) { return 1.0; };
  const RealFunction x = [](Coord y) { return y.x; };
  auto residual = [&](const Frame& f, Coord y) {
    return std::max(std::abs(FrameSum(f, one, y) - TildeOracle(*tent, one, y)),
                    std::abs(FrameSum(f, x, y) - TildeOracle(*tent, x, y)));
  };
  auto outside = [&](const Frame& f) {
    double worst = 0.0;
    for (Coord y : f.grid) {
      if (!f.InWindow(y)) worst = std::max(worst, residual(f, y));
    }
    return worst;
  };
  auto window = [&](const Frame& f) {
    double w = 0.0;
    for (Coord y : f.grid) {
      if (residual(f, y) > 1e-3) w = std::max(w, f.DistanceToDegenerate(y));
    }
    return w;
  };

  const Frame base = BuildTruncatedFrame(tent, 1);
  c.push_back({"residual outside window, default M", outside(base), 1e-3});
  double prev = window(base);
  double min_ratio = std::numeric_limits<double>::infinity();
  double growth = 0.0;
  for (int k = 1; k <= 3; ++k) {
    const Frame f = BuildTruncatedFrame(tent, 1, base.requested_members << k);
    const double w = window(f);
    min_ratio = std::min(min_ratio, w > 0.0 ? prev / w : std::numeric_limits<double>::infinity());
    growth = std::max(growth, w - prev);
    prev = w;
  }
  c.push_back({"window shrink factor per doubling of M (3 doublings)", min_ratio, 2.0, true});
  c.push_back({"window growth under doubling", growth, 0.0});

  const BranchData branch = ComputeBranchData(*tent);
  double excess = -std::numeric_limits<double>::infinity();
  double library_gap = 0.0;
  for (int r = 0; r <= 3; ++r) {
    for (const Point& p : Orbit(*tent, branch.branch_set.front(), r)) {
      for (const RealFunction& a : {one, x}) {
        const TransferCheck t = FrameTransferCheck(base, DiscreteMeasure::Dirac(p), a);
        const double lhs = FrameSum(base, a, p.coords);
        const double rhs = TildeOracle(*tent, a, p.coords);
        excess = std::max(excess, std::abs(lhs - rhs) - t.tolerance);
        library_gap = std::max({library_gap, std::abs(lhs - t.lhs), std::abs(rhs - t.rhs)});
      }
    }
  }
  c.push_back({"transfer identity beyond reported frame error", std::max(excess, 0.0), 0.0});
  c.push_back({"transfer check lhs/rhs vs direct evaluation", library_gap, 1e-12});
}

void ModuleAlgebra(std::vector<Check>& c) {
  std::mt19937_64 rng = gen::Rng(kSeed, 8);
  for (const char* name : {"tent", "sierpinski"}) {
    const SystemPtr s = BuiltinSystem(name);
    const std::string n(name);
    std::vector<Coord> grid;
    for (int k = 0; k < 12; ++k) grid.push_back(gen::PointOfK(rng, *s));
    DiscreteMeasure mu;
    for (Coord y : grid) mu.Add(Point(y), gen::Real(rng, 0.1, 1.0));

    auto inner = [&](const Section& a, const Section& b, Coord y) {
      Complex sum = 0.0;
      for (const Word& w : a.words()) sum += std::conj(a(w, y)) * b(w, y);
      return sum;
    };

    double adjoint = 0.0, right = 0.0, tensor = 0.0, trace = 0.0, reference = 0.0;
    int sections = 0, trial = 0;
    while (sections < 100) {
      const int level = 1 + trial++ % 2;
      const Section xi = RandomSection(s, level, rng);
      const Section eta = RandomSection(s, level, rng);
      const Section zeta = RandomSection(s, level, rng);
      const Section omega = RandomSection(s, level, rng);
      const Section x1 = RandomSection(s, 1, rng);
      const Section x2 = RandomSection(s, 1, rng);
      sections += 6;
      const ComplexFunction a = RandomFunction(rng);
      const ComplexFunction a_conj = [a](Coord y) { return std::conj(a(y)); };

      const ComplexFunction lib_inner = InnerProduct(xi, eta);
      const ComplexFunction adj_l = InnerProduct(LeftAction(a, xi), eta);
      const ComplexFunction adj_r = InnerProduct(xi, LeftAction(a_conj, eta));
      const ComplexFunction right_l = InnerProduct(RightAction(xi, a), eta);
      const Section t1 = Tensor(x1, xi);
      const Section t2 = Tensor(x2, eta);
      const ComplexFunction ten = InnerProduct(t1, t2);
      for (Coord y : grid) {
        Complex adj_ref = 0.0, ten_ref = 0.0;
        for (const Word& w : xi.words()) {
          const Coord top = ApplyWord(*s, w, y);
          adj_ref += std::conj(a(top) * xi(w, y)) * eta(w, y);
          ten_ref += std::conj(xi(w, y)) * inner(x1, x2, top) * eta(w, y);
        }
        const Complex base = inner(xi, eta, y);
        adjoint = std::max({adjoint, std::abs(adj_l(y) - adj_r(y)), std::abs(adj_l(y) - adj_ref)});
        right = std::max(right, std::abs(right_l(y) - std::conj(a(y)) * base));
        tensor = std::max(tensor, std::abs(ten(y) - ten_ref));
        reference = std::max(reference, std::abs(lib_inner(y) - base));
        // Components of x1 (x) xi against v w -> x1_v(gamma_w y) xi_w(y).
        for (const Word& v : x1.words()) {
          for (const Word& w : xi.words()) {
            const Complex want = x1(v, ApplyWord(*s, w, y)) * xi(w, y);
            reference = std::max(reference, std::abs(t1(v.Concat(w), y) - want));
          }
        }
      }

      // tau(ST) and tau(TS) from the pairing formula.
      const double scale = std::pow(static_cast<double>(s->size()), -level);
      Complex st_ref = 0.0, ts_ref = 0.0;
      for (const Atom& at : mu.atoms()) {
        const Coord y = at.point.coords;
        st_ref += at.weight * inner(omega, xi, y) * inner(eta, zeta, y);
        ts_ref += at.weight * inner(eta, zeta, y) * inner(omega, xi, y);
      }
      st_ref *= scale;
      ts_ref *= scale;
      const RankOne s_op{xi, eta}, t_op{zeta, omega};
      const Complex lib_st = RieffelPi(level, mu, Compose(s_op, t_op));
      const Complex lib_ts = RieffelPi(level, mu, Compose(t_op, s_op));
      trace = std::max({trace, std::abs(lib_st - lib_ts)});
      reference = std::max({reference, std::abs(lib_st - st_ref), std::abs(lib_ts - ts_ref)});
    }
    c.push_back({n + " adjoint (phi(a) xi | eta) = (xi | phi(a*) eta)", adjoint, 1e-8});
    c.push_back({n + " right module (xi.a | eta) = a* (xi | eta)", right, 1e-8});
    c.push_back({n + " tensor vs inner product", tensor, 1e-8});
    c.push_back({n + " rank-one traciality", trace, 1e-8});
    c.push_back({n + " library vs componentwise evaluation", reference, 1e-8});
    c.push_back({n + " sections drawn", static_cast<double>(sections), 100.0, true});
  }
}

void Kms(std::vector<Check>& c) {
  double unit_error = 0.0, refinement_excess = -1.0, value_gap = 0.0;
  for (const char* name : {"tent", "sierpinski"}) {
    const SystemPtr s = BuiltinSystem(name);
    const BranchData branch = ComputeBranchData(*s);
    const std::vector<TestFunction> family = StandardFamily(*s, branch);
    const int N = s->size();
    const double log_n = std::log(static_cast<double>(N));
    std::map<std::pair<std::size_t, std::pair<int, std::string>>, double> means;
    for (std::size_t bi = 0; bi < branch.branch_set.size(); ++bi) {
      const Point& b = branch.branch_set[bi];
      for (const TestFunction& f : family) {
        for (int j = 0; j <= 8; ++j) {
          means[{bi, {j, f.name}}] = oracle::OrbitMean(*s, b.coords, j, f.eval);
        }
      }
      for (double extra : {0.1, 0.7, 2.0}) {
        const double q = N * std::exp(-(log_n + extra));
        for (int depth = 0; depth < 8; ++depth) {
          const KmsSpec spec{b, log_n + extra, depth, std::nullopt};
          const KmsValue one = EvalKms(*s, spec, FindFunction(family, "one"));
          unit_error = std::max(unit_error, std::abs(one.value - (1.0 - std::pow(q, depth + 1))));
          for (const TestFunction& f : family) {
            const KmsValue v = EvalKms(*s, spec, f);
            KmsSpec deeper = spec;
            deeper.depth = depth + 1;
            const KmsValue v2 = EvalKms(*s, deeper, f);
            refinement_excess =
                std::max(refinement_excess, std::abs(v2.value - v.value) - v.error_bound);
            double ref = 0.0;
            for (int j = 0; j <= depth; ++j) {
              ref += (1.0 - q) * std::pow(q, j) * means[{bi, {j, f.name}}];
            }
            value_gap = std::max(value_gap, std::abs(v.value - ref));
          }
        }
      }
    }
  }
  c.push_back({"|rho(1) - (1 - (N e^-beta)^(depth+1))|", unit_error, 1e-12});
  c.push_back({"depth+1 change minus prior tail bound", std::max(refinement_excess, 0.0), 0.0});
  c.push_back({"evalKms vs orbit-mean reference", value_gap, 1e-12});

  const SystemPtr tent = BuiltinSystem("tent");
  KmsSpec spec{Point(0.5), std::log(4.0), 8, 4.0};
  const KmsWeights w = ComputeKmsWeights(2, spec);
  double weight_mismatch = 0.0;
  for (std::size_t j = 0; j < w.weights.size(); ++j) {
    if (w.weights[j] != std::ldexp(1.0, -static_cast<int>(j) - 1)) weight_mismatch += 1.0;
  }
  if (w.weights.size() != 9 || w.tail != std::ldexp(1.0, -9)) weight_mismatch += 1.0;
  c.push_back({"tent beta = log 4 weights != (1/2)^(j+1) exactly", weight_mismatch, 0.0});
  const TestFunction x{"x", [](Coord y) { return y.x; }, 1.0, 1.0, true};
  const KmsValue v = EvalKms(*tent, spec, x);
  c.push_back({"tent beta = log 4, a = x: |value - (1 - tail)/2|",
               std::abs(v.value - 0.5 * (1.0 - w.tail)), 1e-12});
}

void NoPointMass(std::vector<Check>& c) {
  const SystemPtr tent = BuiltinSystem("tent");
  const BranchData branch = ComputeBranchData(*tent);
  std::mt19937_64 rng = gen::Rng(kSeed, 10);
  const int R = 10;
  std::vector<DiscreteMeasure> iterates{gen::LineMeasure(rng, 5)};
  for (int k = 0; k < R; ++k) iterates.push_back(oracle::PushAverage(*tent, iterates.back()));
  LevelMeasures lm;
  for (int n = 0; n <= R; ++n) lm.levels.push_back(iterates[R - n]);
  const double bound = std::pow(tent->contraction_upper(), R) * tent->diam();

  c.push_back({"seed measure distance from mu_H (non-fixed)",
               oracle::W1ToLebesgue(iterates.front()), bound, true});
  c.push_back({"exact L(mu_0, Lebesgue)", oracle::W1ToLebesgue(lm.levels[0]), bound});
  const HutchinsonEstimate mu_h = GenericHutchinson(*tent, 16);
  const HutchinsonIdentification id = VerifyNoPointMassImpliesHutchinson(*tent, branch, lm, mu_h);
  c.push_back({"certified L(mu_0, mu_H) reported", id.distance, bound});
  c.push_back({"identification report failing", id.passed() ? 0.0 : 1.0, 0.0});
}

}  // namespace
}  // namespace fractrace

int main() {
  using fractrace::Criterion;
  const std::vector<Criterion> criteria{
      {1, "tent Hutchinson measure moments", 5.0, fractrace::TentMoments},
      {2, "contraction of G* on random pairs", 1.0, fractrace::Contraction},
      {3, "orbit counts and disjointness", 10.0, fractrace::OrbitCounts},
      {4, "classification roundtrip", 30.0, fractrace::Roundtrip},
      {5, "level compatibility of model traces", 0.0, fractrace::Compatibility},
      {6, "transport solver against LP enumeration", 0.0, fractrace::TransportOracle},
      {7, "frame identities", 0.0, fractrace::FrameIdentities},
      {8, "module algebra", 0.0, fractrace::ModuleAlgebra},
      {9, "KMS weights and values", 0.0, fractrace::Kms},
      {10, "no point mass implies Hutchinson", 0.0, fractrace::NoPointMass},
  };
  int failed = 0;
  for (const Criterion& c : criteria) failed += fractrace::Run(c) ? 0 : 1;
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
