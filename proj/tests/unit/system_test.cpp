#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fractrace/branch.hpp"
#include "fractrace/error.hpp"
#include "fractrace/system.hpp"
#include "fractrace/system_io.hpp"
#include "generators.hpp"

namespace fractrace {
namespace {

const std::vector<std::string> kBuiltins = {"tent", "sierpinski", "koch", "plin:0.3,0.6"};

TEST(ApplyWord, TentExamples) {
  const SystemPtr tent = BuiltinSystem("tent");
  EXPECT_DOUBLE_EQ(ApplyWord(*tent, Word{0}, Point(1.0)).coords.x, 0.5);
  EXPECT_DOUBLE_EQ(ApplyWord(*tent, Word{1, 0}, Point(0.0)).coords.x, 1.0);
}

TEST(ApplyWord, EmptyWordIsIdentity) {
  for (const std::string& name : kBuiltins) {
    const SystemPtr s = BuiltinSystem(name);
    const Coord p = s->base_point().coords;
    EXPECT_EQ(ApplyWord(*s, Word{}, p), p) << name;
  }
}

TEST(ApplyWord, AddressIsWordThenInputAddress) {
  const SystemPtr tent = BuiltinSystem("tent");
  const Point p = ApplyWord(*tent, Word{1}, Point(0.25));
  const Point q = ApplyWord(*tent, Word{0, 0}, p);
  ASSERT_TRUE(q.address.has_value());
  EXPECT_EQ(q.address->word, (Word{0, 0, 1}));
  EXPECT_DOUBLE_EQ(q.address->anchor.x, 0.25);
}

TEST(ApplyH, TentExamples) {
  const SystemPtr tent = BuiltinSystem("tent");
  EXPECT_DOUBLE_EQ(ApplyH(*tent, Point(0.5), 1).coords.x, 1.0);
  EXPECT_DOUBLE_EQ(ApplyH(*tent, Point(1.0), 2).coords.x, 0.0);
  EXPECT_DOUBLE_EQ(ApplyH(*tent, Point(0.3), 0).coords.x, 0.3);
  EXPECT_DOUBLE_EQ(ApplyHOnce(*tent, Coord{0.3, 0.0}).x, 0.6);
  EXPECT_DOUBLE_EQ(ApplyHOnce(*tent, Coord{0.8, 0.0}).x, 0.4);
}

TEST(ApplyH, OutsideEveryCellIsInputError) {
  const SystemPtr tent = BuiltinSystem("tent");
  try {
    ApplyHOnce(*tent, Coord{1.5, 0.0});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInput);
  }
}

TEST(Preimages, TentExamples) {
  const SystemPtr tent = BuiltinSystem("tent");
  auto xs = [&](double y) {
    std::vector<double> out;
    for (const Point& p : Preimages(*tent, Point(y))) out.push_back(p.coords.x);
    return out;
  };
  EXPECT_EQ(xs(1.0), (std::vector<double>{0.5}));
  EXPECT_EQ(xs(0.5), (std::vector<double>{0.25, 0.75}));
  EXPECT_EQ(xs(0.0), (std::vector<double>{0.0, 1.0}));
}

TEST(BranchIndex, Examples) {
  const SystemPtr tent = BuiltinSystem("tent");
  EXPECT_EQ(BranchIndex(*tent, Coord{1.0, 0.0}, 0), 2);
  EXPECT_EQ(BranchIndex(*tent, Coord{0.3, 0.0}, 0), 1);
  const SystemPtr sierpinski = BuiltinSystem("sierpinski");
  const Coord p{0.5, std::sqrt(3.0) / 2};
  EXPECT_EQ(BranchIndex(*sierpinski, p, 0), 1);
  EXPECT_EQ(BranchIndex(*sierpinski, p, 1), 2);
  EXPECT_EQ(BranchIndex(*sierpinski, p, 2), 2);
}

// h o gamma_j = id on sampled points of K.
TEST(SystemProperty, SectionInvertsEveryMap) {
  for (const std::string& name : kBuiltins) {
    const SystemPtr s = BuiltinSystem(name);
    std::mt19937_64 rng = gen::Rng(11);
    for (int k = 0; k < 200; ++k) {
      const Coord x = gen::PointOfK(rng, *s);
      for (int j = 0; j < s->size(); ++j) {
        const Coord back = ApplyHOnce(*s, s->map(j)(x));
        EXPECT_LE(Distance(back, x), s->eps_geo()) << name << " j=" << j;
      }
    }
  }
}

TEST(SystemProperty, ContractionRatiosWithinDeclaredBounds) {
  for (const std::string& name : kBuiltins) {
    const SystemPtr s = BuiltinSystem(name);
    std::mt19937_64 rng = gen::Rng(12);
    for (int k = 0; k < 1000; ++k) {
      const Coord x = gen::PointOfK(rng, *s), y = gen::PointOfK(rng, *s);
      const double d = Distance(x, y);
      if (d < 1e-6) continue;
      for (int j = 0; j < s->size(); ++j) {
        const double ratio = Distance(s->map(j)(x), s->map(j)(y)) / d;
        EXPECT_LE(ratio, s->contraction_upper() + 1e-12) << name;
        EXPECT_GE(ratio, s->contraction_lower() - 1e-12) << name;
      }
    }
  }
}

TEST(SystemProperty, AddressReconstructsPoint) {
  for (const std::string& name : kBuiltins) {
    const SystemPtr s = BuiltinSystem(name);
    std::mt19937_64 rng = gen::Rng(13);
    for (int k = 0; k < 100; ++k) {
      std::vector<int> letters;
      const int len = gen::Int(rng, 0, 30);
      for (int i = 0; i < len; ++i) letters.push_back(gen::Int(rng, 0, s->size() - 1));
      const Point p = ApplyWord(*s, Word(letters), s->base_point());
      ASSERT_TRUE(p.address.has_value());
      const Coord again = ApplyWord(*s, p.address->word, p.address->anchor);
      EXPECT_LE(Distance(again, p.coords),
                std::pow(s->contraction_upper(), len) * s->diam() + s->eps_geo());
    }
  }
}

TEST(SystemProperty, ShiftUndoesWordApplication) {
  for (const std::string& name : kBuiltins) {
    const SystemPtr s = BuiltinSystem(name);
    std::mt19937_64 rng = gen::Rng(14);
    for (int k = 0; k < 50; ++k) {
      const Coord x = gen::PointOfK(rng, *s);
      std::vector<int> letters;
      for (int i = 0; i < 6; ++i) letters.push_back(gen::Int(rng, 0, s->size() - 1));
      const Point p = ApplyWord(*s, Word(letters), Point(x));
      EXPECT_LE(Distance(ApplyH(*s, p, 6).coords, x), s->eps_geo()) << name;
    }
  }
}

TEST(Word, OneBasedText) {
  EXPECT_EQ((Word{0, 1, 1}).ToString(), "1.2.2");
  EXPECT_EQ((Word{0, 1}).Concat(Word{1}), (Word{0, 1, 1}));
  EXPECT_EQ((Word{1}).Prepend(0), (Word{0, 1}));
  EXPECT_EQ((Word{0, 1, 1}).DropFront(2), (Word{1}));
  EXPECT_EQ(AllWords(3, 2).size(), 9u);
}

TEST(SystemToml, RoundTripsEveryBuiltin) {
  for (const std::string& name : kBuiltins) {
    const SystemPtr s = BuiltinSystem(name);
    const SystemPtr again = MakeSystem(ParseSystemToml(SystemToToml(s->definition())));
    EXPECT_EQ(again->DefinitionHash(), s->DefinitionHash()) << name;
  }
}

TEST(SystemToml, MalformedInputIsInputError) {
  for (const std::string text : {"dim = 1\n[[map]]\nlinear = [0.5]\n", "this is = = not toml",
                                 "name = \"x\"\ndim = 3\n"}) {
    try {
      ParseSystemToml(text);
      FAIL() << "accepted: " << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInput);
    }
  }
}

TEST(LoadSystem, UnknownNameIsInputError) {
  try {
    LoadSystem("no-such-system");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInput);
  }
}

TEST(Builtins, DiameterAndTolerance) {
  const SystemPtr tent = BuiltinSystem("tent");
  EXPECT_DOUBLE_EQ(tent->diam(), 1.0);
  EXPECT_DOUBLE_EQ(tent->eps_geo(), 1e-9);
  EXPECT_DOUBLE_EQ(tent->contraction_upper(), 0.5);
  const SystemPtr plin = BuiltinSystem("plin:0.3,0.6");
  EXPECT_EQ(plin->size(), 3);
  EXPECT_DOUBLE_EQ(plin->contraction_upper(), 0.4);
}

}  // namespace
}  // namespace fractrace
