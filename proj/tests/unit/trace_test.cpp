#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fractrace/branch.hpp"
#include "fractrace/dynamics.hpp"
#include "fractrace/error.hpp"
#include "fractrace/test_functions.hpp"
#include "fractrace/trace.hpp"
#include "generators.hpp"
#include "oracles.hpp"

namespace fractrace {
namespace {

const RealFunction kX = [](Coord y) { return y.x; };
const RealFunction kOne = [](Coord) { return 1.0; };

struct Fixture {
  SystemPtr system;
  BranchData branch;
  HutchinsonEstimate mu_h;
};

const Fixture& Tent() {
  static const Fixture f = [] {
    Fixture out;
    out.system = BuiltinSystem("tent");
    out.branch = ComputeBranchData(*out.system);
    out.mu_h = GenericHutchinson(*out.system, 14);
    return out;
  }();
  return f;
}

const Fixture& Sierpinski() {
  static const Fixture f = [] {
    Fixture out;
    out.system = BuiltinSystem("sierpinski");
    out.branch = ComputeBranchData(*out.system);
    out.mu_h = GenericHutchinson(*out.system, 7);
    return out;
  }();
  return f;
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInput;
}

TEST(RieffelPi, UnitOnPointMass) {
  const SystemPtr tent = BuiltinSystem("tent");
  const Section u = Section::Unit(tent, 1);
  const Complex v = RieffelPi(1, DiscreteMeasure::Dirac(Point(0.0)), RankOne{u, u});
  EXPECT_NEAR(v.real(), 0.5, 1e-15);
  EXPECT_NEAR(v.imag(), 0.0, 1e-15);
}

TEST(RieffelPi, LevelZeroIsIntegration) {
  const SystemPtr tent = BuiltinSystem("tent");
  const Section a(tent, 0, [](const Word&, Coord y) { return Complex(y.x); });
  const Section one = Section::Unit(tent, 0);
  const DiscreteMeasure mu = DiscreteMeasure::Dirac(Point(0.25));
  EXPECT_NEAR(RieffelPi(0, mu, RankOne{a, one}).real(), 0.25, 1e-15);
}

TEST(RieffelPi, LevelMismatchRaises) {
  const SystemPtr tent = BuiltinSystem("tent");
  const Section u = Section::Unit(tent, 1);
  EXPECT_EQ(CodeOf([&] { RieffelPi(2, DiscreteMeasure::Dirac(Point(0.0)), RankOne{u, u}); }),
            ErrorCode::kLevelMismatch);
}

TEST(RieffelPiProperty, LinearAndPositive) {
  const SystemPtr s = BuiltinSystem("sierpinski");
  std::mt19937_64 rng = gen::Rng(61);
  for (int k = 0; k < 20; ++k) {
    DiscreteMeasure mu, nu;
    for (int i = 0; i < 4; ++i) mu.Add(Point(gen::PointOfK(rng, *s)), gen::Real(rng));
    for (int i = 0; i < 3; ++i) nu.Add(Point(gen::PointOfK(rng, *s)), gen::Real(rng));
    DiscreteMeasure sum = mu;
    sum.Append(nu, 2.0);
    const int n = 1 + k % 2;
    const Section xi = RandomSection(s, n, rng), eta = RandomSection(s, n, rng);
    const RankOne theta{xi, eta};
    const Complex lhs = RieffelPi(n, sum, theta);
    const Complex rhs = RieffelPi(n, mu, theta) + 2.0 * RieffelPi(n, nu, theta);
    EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-12);
    const Complex pos = RieffelPi(n, mu, RankOne{xi, xi});
    EXPECT_GE(pos.real(), 0.0);
    EXPECT_NEAR(pos.imag(), 0.0, 1e-14);
  }
}

TEST(RieffelPsi, InvertsPi) {
  const SystemPtr s = BuiltinSystem("sierpinski");
  std::mt19937_64 rng = gen::Rng(62);
  for (int n : {0, 1, 2}) {
    DiscreteMeasure mu;
    for (int i = 0; i < 5; ++i) mu.Add(Point(gen::PointOfK(rng, *s)), gen::Real(rng, 0.1, 1.0));
    const TraceOnCompacts tau = [&mu, n](const RankOne& t) { return RieffelPi(n, mu, t); };
    const auto psi = RieffelPsi(s, n, tau);
    for (const RealFunction& a : {kOne, kX, RealFunction([](Coord y) { return y.y * y.x; })}) {
      EXPECT_NEAR(psi(a), Integrate(mu, a), 1e-12) << "n=" << n;
    }
  }
}

TEST(RieffelPsi, ZeroTraceGivesZero) {
  const SystemPtr tent = BuiltinSystem("tent");
  const auto psi = RieffelPsi(tent, 2, [](const RankOne&) { return Complex(0.0); });
  EXPECT_EQ(psi(kX), 0.0);
}

TEST(RieffelPsi, NonTracialFunctionalIsRejected) {
  const SystemPtr tent = BuiltinSystem("tent");
  const TraceOnCompacts vector_state = [](const RankOne& t) {
    const Coord y{0.3, 0.0};
    return t.left(Word{0}, y) * std::conj(t.right(Word{1}, y));
  };
  EXPECT_EQ(CodeOf([&] { RieffelPsi(tent, 1, vector_state); }), ErrorCode::kNotTracial);
}

TEST(ModelTrace, DiscreteExamples) {
  const SystemPtr tent = BuiltinSystem("tent");
  const ModelTrace t0 = ModelTrace::Discrete(tent, Point(0.5), 0);
  EXPECT_NEAR(t0.EvaluateFunction(kX), 0.5, 1e-15);
  const DiscreteMeasure m0 = t0.LevelMeasure(0);
  ASSERT_EQ(m0.size(), 1u);
  EXPECT_DOUBLE_EQ(m0.atoms()[0].point.coords.x, 0.5);
  EXPECT_DOUBLE_EQ(m0.atoms()[0].weight, 1.0);
  EXPECT_EQ(t0.LevelMeasure(1).TotalMass(), 0.0);

  const ModelTrace t2 = ModelTrace::Discrete(tent, Point(0.5), 2);
  EXPECT_NEAR(t2.EvaluateFunction(kX), 0.5, 1e-15);
  EXPECT_NEAR(t2.EvaluateFunction(kOne), 1.0, 1e-15);
  EXPECT_EQ(t2.LevelMeasure(0).size(), 4u);
  EXPECT_EQ(t2.LevelMeasure(2).size(), 1u);
}

TEST(ModelTrace, EvaluateMatchesPi) {
  const SystemPtr tent = BuiltinSystem("tent");
  const ModelTrace t = ModelTrace::Discrete(tent, Point(0.5), 2);
  std::mt19937_64 rng = gen::Rng(63);
  const Section xi = RandomSection(tent, 1, rng), eta = RandomSection(tent, 1, rng);
  const Complex want = RieffelPi(1, t.LevelMeasure(1), RankOne{xi, eta});
  EXPECT_NEAR(std::abs(t.Evaluate(RankOne{xi, eta}) - want), 0.0, 1e-14);
}

TEST(ModelTrace, HutchinsonHasUnitMassAtEveryLevel) {
  const Fixture& f = Tent();
  const ModelTrace t = ModelTrace::Hutchinson(f.system, f.mu_h);
  for (int i = 0; i <= 3; ++i) EXPECT_NEAR(t.LevelMeasure(i).TotalMass(), 1.0, 1e-12);
  EXPECT_NEAR(t.EvaluateFunction(kX), 0.5, f.mu_h.error_bound);
  EXPECT_GT(t.certified_error(), 0.0);
}

TEST(Compatibility, ModelsPass) {
  for (const Fixture* f : {&Tent(), &Sierpinski()}) {
    const std::vector<TestFunction> family = StandardFamily(*f->system, f->branch);
    for (int r = 0; r <= 3; ++r) {
      const ModelTrace t = ModelTrace::Discrete(f->system, f->branch.branch_set[0], r);
      const CompatibilityReport rep =
          CheckLevelCompatibility(*f->system, f->branch, t.Levels(4), family);
      EXPECT_TRUE(rep.passed()) << f->system->name() << " r=" << r;
    }
  }
}

TEST(Compatibility, DoubledLevelIsFlagged) {
  const Fixture& f = Tent();
  const std::vector<TestFunction> family = StandardFamily(*f.system, f.branch);
  LevelMeasures lm = ModelTrace::Discrete(f.system, Point(0.5), 2).Levels(3);
  lm.levels[1] = lm.levels[1].Scaled(2.0);
  const CompatibilityReport rep = CheckLevelCompatibility(*f.system, f.branch, lm, family);
  EXPECT_FALSE(rep.passed());
  ASSERT_NE(rep.first_failure(), nullptr);
  EXPECT_EQ(rep.first_failure()->level, 0);
}

TraceCoefficients Example() {
  TraceCoefficients tc;
  tc.discrete = {{Point(0.5), 0, 0.1}, {Point(0.5), 2, 0.05}};
  tc.c_inf = 0.6;
  return tc;
}

TEST(Decompose, RecoversSynthesizedCoefficients) {
  const Fixture& f = Tent();
  const TraceCoefficients tc = Example();
  EXPECT_NEAR(tc.Total(2), 0.9, 1e-15);
  const LevelMeasures lm = SynthesizeTrace(*f.system, tc, 3, f.mu_h);
  const Decomposition d = DecomposeTrace(*f.system, f.branch, lm, f.mu_h);
  EXPECT_TRUE(d.passed());
  EXPECT_NEAR(d.coefficients.unit_value, 0.9, 1e-12);
  ASSERT_EQ(d.coefficients.discrete.size(), 2u);
  EXPECT_NEAR(d.coefficients.discrete[0].c, 0.1, 1e-12);
  EXPECT_EQ(d.coefficients.discrete[1].r, 2);
  EXPECT_NEAR(d.coefficients.discrete[1].c, 0.05, 1e-12);
  EXPECT_NEAR(d.coefficients.c_inf, 0.6, 0.6 * f.mu_h.error_bound + 1e-12);
}

TEST(Decompose, PureHutchinson) {
  const Fixture& f = Tent();
  const LevelMeasures lm = ModelTrace::Hutchinson(f.system, f.mu_h).Levels(3);
  const Decomposition d = DecomposeTrace(*f.system, f.branch, lm, f.mu_h);
  EXPECT_TRUE(d.coefficients.discrete.empty());
  EXPECT_NEAR(d.coefficients.c_inf, 1.0, 1e-12);
  EXPECT_TRUE(d.passed());
}

TEST(Decompose, PureOrbitTrace) {
  const Fixture& f = Sierpinski();
  const Point& b = f.branch.branch_set[1];
  const LevelMeasures lm = ModelTrace::Discrete(f.system, b, 2).Levels(3);
  const Decomposition d = DecomposeTrace(*f.system, f.branch, lm, f.mu_h);
  ASSERT_EQ(d.coefficients.discrete.size(), 1u);
  EXPECT_EQ(d.coefficients.discrete[0].r, 2);
  EXPECT_NEAR(d.coefficients.discrete[0].c, 1.0 / 9.0, 1e-12);
  EXPECT_NEAR(d.coefficients.c_inf, 0.0, 1e-12);
}

TEST(Decompose, UnequalOrbitMassesRaise) {
  const Fixture& f = Tent();
  LevelMeasures lm;
  DiscreteMeasure mu;
  mu.Add(Point(0.25), 0.6);
  mu.Add(Point(0.75), 0.4);
  lm.levels.push_back(mu);
  DecomposeOptions options;
  options.r_max = 1;
  EXPECT_EQ(CodeOf([&] { DecomposeTrace(*f.system, f.branch, lm, f.mu_h, options); }),
            ErrorCode::kUnequalOrbitMasses);
}

TEST(Decompose, NegativeResidualRaises) {
  const Fixture& f = Tent();
  LevelMeasures lm;
  DiscreteMeasure mu;
  mu.Add(Point(0.5), 0.5);
  mu.Add(Point(0.3), -0.2);
  lm.levels.push_back(mu);
  EXPECT_EQ(CodeOf([&] { DecomposeTrace(*f.system, f.branch, lm, f.mu_h); }),
            ErrorCode::kNegativeResidual);
}

// Decompose(Synthesize(c)) = c on random coefficient sets.
TEST(DecomposeProperty, RoundTrip) {
  for (const Fixture* f : {&Tent(), &Sierpinski()}) {
    std::mt19937_64 rng = gen::Rng(64);
    for (int k = 0; k < 10; ++k) {
      const TraceCoefficients tc = gen::Coefficients(rng, f->branch, 3);
      const LevelMeasures lm = SynthesizeTrace(*f->system, tc, 3, f->mu_h);
      const Decomposition d = DecomposeTrace(*f->system, f->branch, lm, f->mu_h);
      EXPECT_TRUE(d.passed()) << f->system->name();
      ASSERT_EQ(d.coefficients.discrete.size(), tc.discrete.size());
      for (const DiscreteCoefficient& want : tc.discrete) {
        bool found = false;
        for (const DiscreteCoefficient& got : d.coefficients.discrete) {
          if (got.r == want.r && Distance(got.b.coords, want.b.coords) < 1e-12) {
            EXPECT_NEAR(got.c, want.c, 1e-12);
            found = true;
          }
        }
        EXPECT_TRUE(found);
      }
      EXPECT_NEAR(d.coefficients.c_inf, tc.c_inf, tc.c_inf * f->mu_h.error_bound + 1e-12);
    }
  }
}

TEST(SynthesizeProperty, MatchesIndependentConstruction) {
  for (const Fixture* f : {&Tent(), &Sierpinski()}) {
    std::mt19937_64 rng = gen::Rng(65);
    for (int k = 0; k < 5; ++k) {
      const TraceCoefficients tc = gen::Coefficients(rng, f->branch, 3);
      const LevelMeasures lib = SynthesizeTrace(*f->system, tc, 3, f->mu_h);
      const LevelMeasures ref = oracle::BuildLevels(*f->system, tc, 3, f->mu_h.measure);
      ASSERT_EQ(lib.levels.size(), ref.levels.size());
      for (std::size_t i = 0; i < ref.levels.size(); ++i) {
        EXPECT_NEAR(lib.levels[i].TotalMass(), ref.levels[i].TotalMass(), 1e-12);
        EXPECT_NEAR(Integrate(lib.levels[i], kX), Integrate(ref.levels[i], kX), 1e-12);
        const AtomIndex lib_index(lib.levels[i], 1e-9), ref_index(ref.levels[i], 1e-9);
        for (const Atom& a : ref.levels[i].atoms()) {
          EXPECT_NEAR(lib_index.MassAt(a.point.coords), ref_index.MassAt(a.point.coords), 1e-12);
        }
      }
    }
  }
}

TEST(Identification, HutchinsonLevelsPass) {
  const Fixture& f = Tent();
  const HutchinsonEstimate deep = GenericHutchinson(*f.system, 12);
  const LevelMeasures lm = ModelTrace::Hutchinson(f.system, deep).Levels(4);
  const HutchinsonIdentification id =
      VerifyNoPointMassImpliesHutchinson(*f.system, f.branch, lm, f.mu_h);
  EXPECT_TRUE(id.precondition);
  EXPECT_TRUE(id.passed());
  EXPECT_LE(id.distance, id.bound);
  EXPECT_NEAR(id.bound, std::pow(0.5, 4), 1e-15);
}

TEST(Identification, OrbitTraceFailsPrecondition) {
  const Fixture& f = Tent();
  const LevelMeasures lm = ModelTrace::Discrete(f.system, Point(0.5), 2).Levels(3);
  const HutchinsonIdentification id =
      VerifyNoPointMassImpliesHutchinson(*f.system, f.branch, lm, f.mu_h);
  EXPECT_FALSE(id.precondition);
  EXPECT_FALSE(id.passed());
  EXPECT_NEAR(id.orbit_point_mass, 0.25, 1e-12);
}

}  // namespace
}  // namespace fractrace
