#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fractrace/branch.hpp"
#include "fractrace/dynamics.hpp"
#include "fractrace/measure.hpp"
#include "fractrace/section.hpp"

namespace fractrace {

// A finite trace on the core, encoded by its level measures
// mu_n = psi_n(tau restricted to K(X^{(x)n})) for n = 0..R.
struct LevelMeasures {
  std::vector<DiscreteMeasure> levels;
  // Slack carried by a Hutchinson component that is only known through a
  // discrete estimate: an L-distance (scaled by a Lipschitz constant when
  // used) and the heaviest atom of the estimate.
  double metric_slack = 0.0;
  double atom_slack = 0.0;

  int max_level() const { return static_cast<int>(levels.size()) - 1; }
};

struct DiscreteCoefficient {
  Point b;
  int r = 0;
  double c = 0.0;
};

struct TraceCoefficients {
  std::vector<DiscreteCoefficient> discrete;
  double c_inf = 0.0;
  // tau(1) = mu_0(K).
  double unit_value = 0.0;

  // sum_{b,r} N^r c_{b,r} + c_inf.
  double Total(int alphabet_size) const;
};

// The extreme traces tau^{(b,r)} and tau^infinity.
class ModelTrace {
 public:
  enum class Kind { kDiscrete, kHutchinson };

  static ModelTrace Discrete(SystemPtr system, const Point& b, int r);
  static ModelTrace Hutchinson(SystemPtr system, HutchinsonEstimate estimate);

  Kind kind() const { return kind_; }
  const Point& branch_point() const { return b_; }
  int depth() const { return r_; }
  const SystemPtr& system() const { return system_; }
  // Certified L-error of the level measures (zero for discrete kinds).
  double certified_error() const;
  const std::optional<HutchinsonEstimate>& estimate() const { return estimate_; }

  DiscreteMeasure LevelMeasure(int i) const;
  LevelMeasures Levels(int max_level) const;
  // tau(theta) for a rank-one operator on the level-i tensor power.
  Complex Evaluate(const RankOne& theta) const;
  // tau on the coefficient algebra: the level-0 measure integrated.
  double EvaluateFunction(const RealFunction& a) const;

  std::string Label() const;

 private:
  ModelTrace(SystemPtr system, Kind kind) : system_(std::move(system)), kind_(kind) {}

  SystemPtr system_;
  Kind kind_;
  Point b_;
  int r_ = 0;
  std::optional<HutchinsonEstimate> estimate_;
};

using TraceOnCompacts = std::function<Complex(const RankOne&)>;

// pi_n(mu)(theta_{xi,eta}) = N^{-n} mu((eta | xi)). Throws LevelMismatch
// when theta is not at level n.
Complex RieffelPi(int level, const DiscreteMeasure& mu, const RankOne& theta);

struct TracialityOptions {
  int samples = 8;
  std::uint64_t seed = 1;
  double tolerance = 1e-8;
};

// psi_n(tau)(a) = N^n tau(theta_{y0^n a, y0^n}). Samples random rank-one
// pairs first and throws NotTracial if tau(ST) != tau(TS) on any of them.
std::function<double(const RealFunction&)> RieffelPsi(
    SystemPtr system, int level, TraceOnCompacts tau,
    const TracialityOptions& options = {});

struct RelationCheck {
  // "transfer-inequality", "transfer-equality", "point-mass-equality" or
  // "point-mass-inequality".
  std::string relation;
  int level = 0;
  std::string subject;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = true;
};

struct CompatibilityReport {
  std::vector<RelationCheck> checks;
  double worst_inequality = 0.0;
  double worst_equality = 0.0;
  double worst_point_mass = 0.0;

  bool passed() const;
  // The first failing check, if any.
  const RelationCheck* first_failure() const;
};

struct CompatibilityOptions {
  double tolerance = 1e-10;
  // Orbit points O_{b,k}, k <= orbit_depth, always get a point-mass check.
  int orbit_depth = 4;
};

// Checks (1/N) F(mu_{n+1}) <= mu_n on the nonnegative test family, equality
// on the part of the family vanishing on B, and the point-mass relations
// mu_{n+1}({h(x)}) = N mu_n({x}) (x not in B) or <= (x in B).
CompatibilityReport CheckLevelCompatibility(
    const SelfSimilarSystem& system, const BranchData& branch,
    const LevelMeasures& lm, const std::vector<TestFunction>& family,
    const CompatibilityOptions& options = {});

struct ResidualAtom {
  Point point;
  double mass = 0.0;
  // Steps k with h^k(point) in B; -1 when none was found.
  int depth = -1;
};

struct Decomposition {
  TraceCoefficients coefficients;
  int r_max = 0;
  // Largest |mu_0({x}) - mu_0({x'})| over x, x' in one orbit.
  double orbit_mass_spread = 0.0;
  // L(mu_0 - sum N^r c mu_0^{(b,r)}, c_inf mu_H-estimate).
  double residual_distance = 0.0;
  double residual_tolerance = 0.0;
  // Atoms of the leftover on orbits deeper than r_max.
  std::vector<ResidualAtom> unresolved;
  // Atoms of the leftover off every branch orbit.
  std::vector<ResidualAtom> off_orbit;

  bool passed() const;
};

struct DecomposeOptions {
  // Defaults to the deepest level available.
  std::optional<int> r_max;
  double equal_mass_tolerance = 1e-9;
  double negative_tolerance = 1e-9;
  // Steps of h used to place leftover atoms on an orbit.
  int search_depth = 64;
};

// Reads c_{b,r} off the point masses of mu_0. Throws UnequalOrbitMasses or
// NegativeResidual.
Decomposition DecomposeTrace(const SelfSimilarSystem& system,
                             const BranchData& branch, const LevelMeasures& lm,
                             const HutchinsonEstimate& mu_h,
                             const DecomposeOptions& options = {});

// mu_n = sum_{b, r >= n} N^r c_{b,r} mu_n^{(b,r)} + c_inf mu_H-estimate, for
// n = 0..max_level.
LevelMeasures SynthesizeTrace(const SelfSimilarSystem& system,
                              const TraceCoefficients& tc, int max_level,
                              const HutchinsonEstimate& mu_h);

struct HutchinsonIdentification {
  // Largest orbit point mass of mu_0 (orbits up to the deepest level).
  double orbit_point_mass = 0.0;
  bool precondition = false;
  // L(mu_n, G* mu_{n+1}) for n = 0..R-1.
  std::vector<double> step_residuals;
  double step_tolerance = 0.0;
  // Certified bound on L(mu_0, mu_H): L(mu_0, estimate) + estimate error.
  double distance = 0.0;
  // c^R diam(K).
  double bound = 0.0;

  bool passed() const;
};

// A level sequence without orbit point masses and with mu_n = G*(mu_{n+1})
// must sit within c^R diam(K) of mu_H at level 0.
HutchinsonIdentification VerifyNoPointMassImpliesHutchinson(
    const SelfSimilarSystem& system, const BranchData& branch,
    const LevelMeasures& lm, const HutchinsonEstimate& mu_h,
    double point_mass_tolerance = 1e-10);

}  // namespace fractrace
