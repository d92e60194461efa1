#include "generators.hpp"

#include <set>
#include <utility>

#include "fractrace/branch.hpp"

namespace fractrace::gen {

std::mt19937_64 Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{seed, stream, std::uint64_t{0x5eed}};
  return std::mt19937_64(seq);
}

int Int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double Real(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::vector<double> Weights(std::mt19937_64& rng, int count, double mass) {
  std::vector<double> w;
  double total = 0.0;
  for (int i = 0; i < count; ++i) {
    w.push_back(0.05 + Real(rng));
    total += w.back();
  }
  for (double& v : w) v *= mass / total;
  return w;
}

namespace {

DiscreteMeasure FromPoints(const std::vector<Coord>& points, const std::vector<double>& w) {
  std::vector<Atom> atoms(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    atoms[i].point = Point(points[i]);
    atoms[i].weight = w[i];
  }
  return DiscreteMeasure(std::move(atoms));
}

}  // namespace

DiscreteMeasure LineMeasure(std::mt19937_64& rng, int count, double mass) {
  std::vector<Coord> pts;
  for (int i = 0; i < count; ++i) pts.push_back({Real(rng), 0.0});
  return FromPoints(pts, Weights(rng, count, mass));
}

DiscreteMeasure PlaneMeasure(std::mt19937_64& rng, int count, double mass) {
  std::vector<Coord> pts;
  for (int i = 0; i < count; ++i) pts.push_back({Real(rng), Real(rng)});
  return FromPoints(pts, Weights(rng, count, mass));
}

DiscreteMeasure UniformPlaneMeasure(std::mt19937_64& rng, int count) {
  std::vector<Coord> pts;
  for (int i = 0; i < count; ++i) pts.push_back({Real(rng), Real(rng)});
  return FromPoints(pts, std::vector<double>(count, 1.0 / count));
}

Coord PointOfK(std::mt19937_64& rng, const SelfSimilarSystem& system, int depth) {
  std::vector<int> letters;
  for (int k = 0; k < depth; ++k) letters.push_back(Int(rng, 0, system.size() - 1));
  return ApplyWord(system, Word(letters), system.base_point().coords);
}

TraceCoefficients Coefficients(std::mt19937_64& rng, const BranchData& branch,
                               int max_r) {
  TraceCoefficients tc;
  std::set<std::pair<int, int>> used;
  const int terms = Int(rng, 1, 4);
  const int nb = static_cast<int>(branch.branch_set.size());
  for (int t = 0; t < terms; ++t) {
    const int b = Int(rng, 0, nb - 1);
    const int r = Int(rng, 0, max_r);
    if (!used.insert({b, r}).second) continue;
    tc.discrete.push_back({branch.branch_set[b], r, Real(rng, 0.01, 0.21)});
  }
  tc.c_inf = Real(rng);
  return tc;
}

}  // namespace fractrace::gen
