#include "fractrace/trace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fractrace/error.hpp"
#include "fractrace/transport.hpp"

namespace fractrace {
namespace {

double MaxAtom(const DiscreteMeasure& mu) {
  double m = 0.0;
  for (const Atom& a : mu.atoms()) m = std::max(m, std::abs(a.weight));
  return m;
}

std::string FormatCoord(Coord c, int dim) {
  std::ostringstream os;
  os.precision(12);
  os << "(" << c.x;
  if (dim == 2) os << ", " << c.y;
  os << ")";
  return os.str();
}

// Largest k with N^k <= cap, capped at `depth`.
int AffordableDepth(int n, int depth, double cap) {
  int k = 0;
  double size = 1.0;
  while (k < depth && size * n <= cap) {
    size *= n;
    ++k;
  }
  return k;
}

}  // namespace

double TraceCoefficients::Total(int alphabet_size) const {
  double total = c_inf;
  for (const DiscreteCoefficient& d : discrete) {
    total += std::pow(static_cast<double>(alphabet_size), d.r) * d.c;
  }
  return total;
}

ModelTrace ModelTrace::Discrete(SystemPtr system, const Point& b, int r) {
  if (r < 0) throw Error(ErrorCode::kInput, "negative model trace depth");
  ModelTrace t(std::move(system), Kind::kDiscrete);
  t.b_ = b;
  t.r_ = r;
  // Surface orbit failures at construction.
  Orbit(*t.system_, b, r);
  return t;
}

ModelTrace ModelTrace::Hutchinson(SystemPtr system, HutchinsonEstimate estimate) {
  ModelTrace t(std::move(system), Kind::kHutchinson);
  t.estimate_ = std::move(estimate);
  return t;
}

double ModelTrace::certified_error() const {
  return kind_ == Kind::kHutchinson ? estimate_->error_bound : 0.0;
}

DiscreteMeasure ModelTrace::LevelMeasure(int i) const {
  if (i < 0) throw Error(ErrorCode::kInput, "negative level");
  if (kind_ == Kind::kHutchinson) return estimate_->measure;
  return ModelLevelMeasure(*system_, b_, r_, i);
}

LevelMeasures ModelTrace::Levels(int max_level) const {
  LevelMeasures lm;
  for (int i = 0; i <= max_level; ++i) lm.levels.push_back(LevelMeasure(i));
  if (kind_ == Kind::kHutchinson) {
    lm.metric_slack = (1.0 + system_->contraction_upper()) * estimate_->error_bound;
    lm.atom_slack = MaxAtom(estimate_->measure);
  }
  return lm;
}

Complex ModelTrace::Evaluate(const RankOne& theta) const {
  const int level = theta.left.level();
  if (kind_ == Kind::kDiscrete && level > r_) return 0.0;
  return RieffelPi(level, LevelMeasure(level), theta);
}

double ModelTrace::EvaluateFunction(const RealFunction& a) const {
  return Integrate(LevelMeasure(0), a);
}

std::string ModelTrace::Label() const {
  if (kind_ == Kind::kHutchinson) return "hutchinson";
  return "discrete" + FormatCoord(b_.coords, system_->dim()) + "^" +
         std::to_string(r_);
}

Complex RieffelPi(int level, const DiscreteMeasure& mu, const RankOne& theta) {
  if (theta.left.level() != level || theta.right.level() != level) {
    throw Error(ErrorCode::kLevelMismatch,
                "rank-one operator at level " + std::to_string(theta.left.level()) +
                    " evaluated at level " + std::to_string(level));
  }
  const double scale =
      std::pow(static_cast<double>(theta.left.system()->size()), -level);
  return scale * IntegrateComplex(mu, InnerProduct(theta.right, theta.left));
}

std::function<double(const RealFunction&)> RieffelPsi(
    SystemPtr system, int level, TraceOnCompacts tau,
    const TracialityOptions& options) {
  std::mt19937_64 rng(options.seed);
  for (int s = 0; s < options.samples; ++s) {
    const RankOne first{RandomSection(system, level, rng),
                        RandomSection(system, level, rng)};
    const RankOne second{RandomSection(system, level, rng),
                         RandomSection(system, level, rng)};
    const Complex st = tau(Compose(first, second));
    const Complex ts = tau(Compose(second, first));
    if (std::abs(st - ts) > options.tolerance) {
      std::ostringstream os;
      os << "tau(ST) - tau(TS) = " << std::abs(st - ts) << " on sample " << s;
      throw Error(ErrorCode::kNotTracial, os.str());
    }
  }
  const double scale = std::pow(static_cast<double>(system->size()), level);
  const Section unit = Section::Unit(system, level);
  return [scale, unit, tau = std::move(tau)](const RealFunction& a) {
    const ComplexFunction ac = [a](Coord y) { return Complex(a(y)); };
    return scale * tau(RankOne{RightAction(unit, ac), unit}).real();
  };
}

bool CompatibilityReport::passed() const { return first_failure() == nullptr; }

const RelationCheck* CompatibilityReport::first_failure() const {
  for (const RelationCheck& c : checks) {
    if (!c.passed) return &c;
  }
  return nullptr;
}

namespace {

void Record(std::vector<RelationCheck>& checks, RelationCheck candidate) {
  for (RelationCheck& c : checks) {
    if (c.relation == candidate.relation && c.level == candidate.level) {
      // Keep a failure over a pass, then the larger excess over tolerance.
      const double cur = c.residual - c.tolerance;
      const double cand = candidate.residual - candidate.tolerance;
      if ((c.passed && !candidate.passed) ||
          (c.passed == candidate.passed && cand > cur)) {
        c = std::move(candidate);
      }
      return;
    }
  }
  checks.push_back(std::move(candidate));
}

}  // namespace

CompatibilityReport CheckLevelCompatibility(
    const SelfSimilarSystem& system, const BranchData& branch,
    const LevelMeasures& lm, const std::vector<TestFunction>& family,
    const CompatibilityOptions& options) {
  CompatibilityReport report;
  const double n_maps = system.size();
  const double eps = system.eps_geo();
  const double mass_tol = options.tolerance + (n_maps + 1.0) * lm.atom_slack;
  const double heavy = options.tolerance + lm.atom_slack;

  std::vector<Point> orbit_points;
  for (const Point& b : branch.branch_set) {
    const int depth = AffordableDepth(system.size(), options.orbit_depth, 1e5);
    for (int k = 0; k <= depth; ++k) {
      for (const Point& x : Orbit(system, b, k)) orbit_points.push_back(x);
    }
  }

  for (int n = 0; n < lm.max_level(); ++n) {
    const DiscreteMeasure& lower = lm.levels[static_cast<std::size_t>(n)];
    const DiscreteMeasure& upper = lm.levels[static_cast<std::size_t>(n) + 1];
    const DiscreteMeasure pulled = TransferF(system, upper);

    for (const TestFunction& f : family) {
      const double lhs = Integrate(pulled, f.eval) / n_maps;
      const double rhs = Integrate(lower, f.eval);
      const double tol =
          options.tolerance + lm.metric_slack * f.lipschitz.value_or(0.0);
      if (f.nonnegative) {
        const double r = lhs - rhs;
        Record(report.checks,
               {"transfer-inequality", n, f.name, r, tol, r <= tol});
        report.worst_inequality = std::max(report.worst_inequality, r);
      }
      if (InJX(f.eval, branch)) {
        const double r = std::abs(lhs - rhs);
        Record(report.checks, {"transfer-equality", n, f.name, r, tol, r <= tol});
        report.worst_equality = std::max(report.worst_equality, r);
      }
    }

    std::vector<Coord> subjects;
    for (const Point& x : orbit_points) subjects.push_back(x.coords);
    for (const Atom& a : lower.atoms()) {
      if (std::abs(a.weight) > heavy) subjects.push_back(a.point.coords);
    }
    for (const Atom& a : upper.atoms()) {
      if (std::abs(a.weight) <= heavy) continue;
      for (const Point& x : Preimages(system, a.point)) subjects.push_back(x.coords);
    }
    const std::vector<std::size_t> rep = ClusterNear(subjects, eps);
    const AtomIndex lower_index(lower, eps);
    const AtomIndex upper_index(upper, eps);
    for (std::size_t i = 0; i < subjects.size(); ++i) {
      if (rep[i] != i) continue;
      const Coord x = subjects[i];
      Coord a;
      try {
        a = ApplyHOnce(system, x);
      } catch (const Error&) {
        continue;
      }
      const double up = upper_index.MassAt(a);
      const double down = n_maps * lower_index.MassAt(x);
      const std::string subject = FormatCoord(x, system.dim());
      if (Contains(system, branch.branch_set, x)) {
        const double r = up - down;
        Record(report.checks,
               {"point-mass-inequality", n, subject, r, mass_tol, r <= mass_tol});
        report.worst_point_mass = std::max(report.worst_point_mass, r);
      } else {
        const double r = std::abs(up - down);
        Record(report.checks,
               {"point-mass-equality", n, subject, r, mass_tol, r <= mass_tol});
        report.worst_point_mass = std::max(report.worst_point_mass, r);
      }
    }
  }
  return report;
}

bool Decomposition::passed() const {
  return unresolved.empty() && off_orbit.empty() &&
         residual_distance <= residual_tolerance;
}

Decomposition DecomposeTrace(const SelfSimilarSystem& system,
                             const BranchData& branch, const LevelMeasures& lm,
                             const HutchinsonEstimate& mu_h,
                             const DecomposeOptions& options) {
  if (lm.levels.empty()) throw Error(ErrorCode::kInput, "no level measures");
  Decomposition out;
  out.r_max = options.r_max.value_or(lm.max_level());
  if (out.r_max < 0) throw Error(ErrorCode::kInput, "negative r_max");
  const double eps = system.eps_geo();
  const DiscreteMeasure& mu0 = lm.levels.front();
  const AtomIndex index(mu0, eps);
  const double unit = mu0.TotalMass();
  out.coefficients.unit_value = unit;

  std::vector<double> weights(mu0.atoms().size());
  for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = mu0.atoms()[i].weight;

  double discrete_total = 0.0;
  for (const Point& b : branch.branch_set) {
    for (int r = 0; r <= out.r_max; ++r) {
      const std::vector<Point> orbit = Orbit(system, b, r);
      const double c = index.MassAt(orbit.front().coords);
      double lo = c, hi = c;
      for (const Point& x : orbit) {
        const double m = index.MassAt(x.coords);
        lo = std::min(lo, m);
        hi = std::max(hi, m);
      }
      out.orbit_mass_spread = std::max(out.orbit_mass_spread, hi - lo);
      if (hi - lo > options.equal_mass_tolerance) {
        std::ostringstream os;
        os << "orbit of " << FormatCoord(b.coords, system.dim()) << " at depth "
           << r << " carries masses in [" << lo << ", " << hi << "]";
        throw Error(ErrorCode::kUnequalOrbitMasses, os.str());
      }
      if (c == 0.0) continue;
      out.coefficients.discrete.push_back({b, r, c});
      discrete_total += std::pow(static_cast<double>(system.size()), r) * c;
      for (const Point& x : orbit) {
        for (std::size_t k : index.Near(x.coords)) weights[k] = 0.0;
      }
    }
  }

  double c_inf = unit - discrete_total;
  if (c_inf < -options.negative_tolerance) {
    std::ostringstream os;
    os << "mu_0(K) - sum N^r c_{b,r} = " << c_inf;
    throw Error(ErrorCode::kNegativeResidual, os.str());
  }
  c_inf = std::max(c_inf, 0.0);
  out.coefficients.c_inf = c_inf;

  DiscreteMeasure leftover;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) leftover.Add(mu0.atoms()[i].point, weights[i]);
  }

  const double heavy =
      std::max(lm.atom_slack, c_inf * MaxAtom(mu_h.measure)) + 1e-10;
  for (const Atom& a : leftover.atoms()) {
    if (a.weight <= heavy) continue;
    ResidualAtom ra{a.point, a.weight, -1};
    Coord x = a.point.coords;
    for (int k = 0; k <= options.search_depth; ++k) {
      if (Contains(system, branch.branch_set, x)) {
        ra.depth = k;
        break;
      }
      try {
        x = ApplyHOnce(system, x);
      } catch (const Error&) {
        break;
      }
    }
    (ra.depth >= 0 ? out.unresolved : out.off_orbit).push_back(ra);
  }

  out.residual_tolerance = lm.metric_slack + c_inf * mu_h.error_bound + 1e-12;
  if (c_inf > 1e-12 * std::max(1.0, unit)) {
    out.residual_distance =
        HutchinsonMetricOrBound(
            system, leftover,
            mu_h.measure.Scaled(leftover.TotalMass() / mu_h.measure.TotalMass()))
            .distance;
  } else {
    out.residual_distance = leftover.TotalMass() * system.diam();
  }
  return out;
}

LevelMeasures SynthesizeTrace(const SelfSimilarSystem& system,
                              const TraceCoefficients& tc, int max_level,
                              const HutchinsonEstimate& mu_h) {
  if (max_level < 0) throw Error(ErrorCode::kInput, "negative level count");
  LevelMeasures lm;
  const double n_maps = system.size();
  for (int n = 0; n <= max_level; ++n) {
    DiscreteMeasure mu;
    for (const DiscreteCoefficient& d : tc.discrete) {
      if (d.c < 0.0) throw Error(ErrorCode::kInput, "negative coefficient");
      if (d.r < n || d.c == 0.0) continue;
      mu.Append(ModelLevelMeasure(system, d.b, d.r, n), std::pow(n_maps, d.r) * d.c);
    }
    if (tc.c_inf > 0.0) mu.Append(mu_h.measure, tc.c_inf);
    mu.Merge(system.eps_geo());
    lm.levels.push_back(std::move(mu));
  }
  if (tc.c_inf > 0.0) {
    lm.metric_slack =
        tc.c_inf * (1.0 + system.contraction_upper()) * mu_h.error_bound;
    lm.atom_slack = tc.c_inf * MaxAtom(mu_h.measure);
  }
  return lm;
}

bool HutchinsonIdentification::passed() const {
  if (!precondition || distance > bound) return false;
  return std::all_of(step_residuals.begin(), step_residuals.end(),
                     [this](double r) { return r <= step_tolerance; });
}

HutchinsonIdentification VerifyNoPointMassImpliesHutchinson(
    const SelfSimilarSystem& system, const BranchData& branch,
    const LevelMeasures& lm, const HutchinsonEstimate& mu_h,
    double point_mass_tolerance) {
  if (lm.levels.empty()) throw Error(ErrorCode::kInput, "no level measures");
  HutchinsonIdentification out;
  const double eps = system.eps_geo();
  const int R = lm.max_level();
  const DiscreteMeasure& mu0 = lm.levels.front();
  const AtomIndex index(mu0, eps);
  const int depth = AffordableDepth(system.size(), R, 2e5);
  for (const Point& b : branch.branch_set) {
    for (int k = 0; k <= depth; ++k) {
      for (const Point& x : Orbit(system, b, k)) {
        out.orbit_point_mass = std::max(out.orbit_point_mass, index.MassAt(x.coords));
      }
    }
  }
  out.precondition = out.orbit_point_mass <= point_mass_tolerance;
  out.step_tolerance = 1e-10 + lm.metric_slack;
  for (int n = 0; n < R; ++n) {
    const DiscreteMeasure& level = lm.levels[static_cast<std::size_t>(n)];
    const DiscreteMeasure pushed =
        DualG(system, lm.levels[static_cast<std::size_t>(n) + 1]);
    const double m0 = level.TotalMass(), m1 = pushed.TotalMass();
    // Unequal masses cannot satisfy the step relation.
    if (std::abs(m0 - m1) > 1e-12 * std::max({1.0, m0, m1})) {
      out.step_residuals.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    out.step_residuals.push_back(
        HutchinsonMetricOrBound(system, level, pushed).distance);
  }
  const double mass = mu0.TotalMass();
  out.distance =
      HutchinsonMetricOrBound(system, mu0, mu_h.measure.Scaled(mass)).distance +
      mass * mu_h.error_bound;
  out.bound = std::pow(system.contraction_upper(), R) * system.diam();
  return out;
}

}  // namespace fractrace
