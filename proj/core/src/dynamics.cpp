#include "fractrace/dynamics.hpp"

#include <cmath>
#include <map>
#include <random>

#include "fractrace/branch.hpp"
#include "fractrace/error.hpp"
#include "fractrace/transport.hpp"

namespace fractrace {

DiscreteMeasure TransferF(const SelfSimilarSystem& system,
                          const DiscreteMeasure& mu) {
  DiscreteMeasure out;
  for (const Atom& a : mu.atoms()) {
    for (const Point& x : Preimages(system, a.point)) out.Add(x, a.weight);
  }
  out.Merge(system.eps_geo());
  return out;
}

DiscreteMeasure DualG(const SelfSimilarSystem& system,
                      const DiscreteMeasure& mu) {
  const int n = system.size();
  const double share = 1.0 / n;
  DiscreteMeasure out;
  out.set_probability(mu.probability());
  for (const Atom& a : mu.atoms()) {
    for (int j = 0; j < n; ++j) {
      Point p;
      p.coords = system.map(j)(a.point.coords);
      if (a.point.address) {
        p.address = Itinerary{a.point.address->word.Prepend(j),
                              a.point.address->anchor};
      } else {
        p.address = Itinerary{Word{j}, a.point.coords};
      }
      out.Add(p, a.weight * share);
    }
  }
  out.Merge(system.eps_geo());
  return out;
}

RealFunction AverageG(const SelfSimilarSystem& system, RealFunction f) {
  const SelfSimilarSystem* sys = &system;
  return [sys, f = std::move(f)](Coord y) {
    double sum = 0.0;
    for (int j = 0; j < sys->size(); ++j) sum += f(sys->map(j)(y));
    return sum / sys->size();
  };
}

DiscreteMeasure ModelLevelMeasure(const SelfSimilarSystem& system,
                                  const Point& b, int r, int i) {
  if (r < 0 || i < 0) throw Error(ErrorCode::kInput, "negative level or depth");
  if (i > r) return DiscreteMeasure();
  const std::vector<Point> orbit = Orbit(system, b, r - i);
  const double w = 1.0 / static_cast<double>(orbit.size());
  std::vector<Atom> atoms;
  atoms.reserve(orbit.size());
  for (const Point& x : orbit) atoms.push_back(Atom{x, w});
  return DiscreteMeasure(std::move(atoms), false);
}

HutchinsonEstimate EstimateHutchinson(const SelfSimilarSystem& system,
                                      int iterations,
                                      const HutchinsonOptions& options) {
  if (iterations < 1) throw Error(ErrorCode::kInput, "iterations must be >= 1");
  const Coord start = options.start.value_or(system.base_point().coords);
  if (!system.InRegion(start)) {
    throw Error(ErrorCode::kInput, "start point outside the bounding region");
  }
  HutchinsonEstimate est;
  est.iterations = iterations;
  est.error_bound = std::pow(system.contraction_upper(), iterations) * system.diam();
  const int n = system.size();
  if (options.strategy == HutchinsonStrategy::kDeterministic) {
    DiscreteMeasure mu = DiscreteMeasure::Dirac(Point(start));
    mu.set_probability(true);
    for (int k = 0; k < iterations; ++k) {
      if (mu.size() * static_cast<std::size_t>(n) > options.support_cap) {
        throw Error(ErrorCode::kSupportExplosion,
                    "deterministic support would exceed " +
                        std::to_string(options.support_cap) + " atoms at step " +
                        std::to_string(k + 1) +
                        "; lower the iteration count or use sampling");
      }
      mu = DualG(system, mu);
    }
    est.measure = std::move(mu);
    est.certified = true;
    return est;
  }
  if (options.samples < 1) throw Error(ErrorCode::kInput, "samples must be >= 1");
  if (static_cast<std::size_t>(options.samples) > options.support_cap) {
    throw Error(ErrorCode::kSupportExplosion,
                "sample count exceeds the support cap");
  }
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<int> pick(0, n - 1);
  DiscreteMeasure mu;
  mu.set_probability(true);
  const double w = 1.0 / static_cast<double>(options.samples);
  std::vector<int> letters(static_cast<std::size_t>(iterations));
  for (std::int64_t s = 0; s < options.samples; ++s) {
    for (int& l : letters) l = pick(rng);
    const Word word(letters);
    mu.Add(Point(ApplyWord(system, word, start), Itinerary{word, start}), w);
  }
  mu.Merge(system.eps_geo());
  est.measure = std::move(mu);
  est.certified = false;
  return est;
}

HutchinsonEstimate GenericHutchinson(const SelfSimilarSystem& system,
                                     int iterations) {
  HutchinsonOptions options;
  options.start = system.generic_point();
  return EstimateHutchinson(system, iterations, options);
}

double ContractionRatio(const SelfSimilarSystem& system,
                        const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const double before = HutchinsonMetric(mu, nu, system.eps_geo()).distance;
  if (before < 1e-12) {
    throw Error(ErrorCode::kDegenerateInput,
                "L(mu, nu) is below 1e-12; the ratio is undefined");
  }
  const double after =
      HutchinsonMetric(DualG(system, mu), DualG(system, nu), system.eps_geo())
          .distance;
  return after / before;
}

namespace {

struct TrieNode {
  double own_mu = 0.0;
  double own_nu = 0.0;
  std::map<int, std::size_t> children;
};

double RegionDiameter(const SelfSimilarSystem& system) {
  double d = 0.0;
  for (Coord a : system.region()) {
    for (Coord b : system.region()) d = std::max(d, Distance(a, b));
  }
  return d;
}

}  // namespace

double AddressTreeBound(const SelfSimilarSystem& system, const DiscreteMeasure& mu,
                        const DiscreteMeasure& nu) {
  std::vector<double> wmu, wnu;
  for (const Atom& a : mu.atoms()) wmu.push_back(a.weight);
  for (const Atom& a : nu.atoms()) wnu.push_back(a.weight);
  const AtomIndex index(nu, system.eps_geo());
  for (std::size_t i = 0; i < wmu.size(); ++i) {
    for (std::size_t j : index.Near(mu.atoms()[i].point.coords)) {
      const double c = std::min(wmu[i], wnu[j]);
      if (c <= 0.0) continue;
      wmu[i] -= c;
      wnu[j] -= c;
    }
  }

  std::vector<TrieNode> nodes(1);
  std::vector<double> diam{RegionDiameter(system)};
  auto insert = [&](const Point& p, double w, bool first) {
    if (w <= 0.0) return;
    if (!p.address || !system.InRegion(p.address->anchor)) {
      throw Error(ErrorCode::kInput,
                  "address-tree bound needs atoms addressed from the region");
    }
    std::size_t v = 0;
    for (int letter : p.address->word.letters()) {
      auto it = nodes[v].children.find(letter);
      if (it == nodes[v].children.end()) {
        const double d = diam[v] * system.map(letter).upper_bound();
        nodes.emplace_back();
        diam.push_back(d);
        it = nodes[v].children.emplace(letter, nodes.size() - 1).first;
      }
      v = it->second;
    }
    (first ? nodes[v].own_mu : nodes[v].own_nu) += w;
  };
  for (std::size_t i = 0; i < wmu.size(); ++i) insert(mu.atoms()[i].point, wmu[i], true);
  for (std::size_t j = 0; j < wnu.size(); ++j) insert(nu.atoms()[j].point, wnu[j], false);

  // Children are created after their parents, so a reverse sweep sees every
  // child's imbalance before the parent's.
  std::vector<double> imbalance(nodes.size(), 0.0);
  double bound = 0.0;
  for (std::size_t v = nodes.size(); v-- > 0;) {
    const TrieNode& node = nodes[v];
    double sum_abs = std::abs(node.own_mu - node.own_nu);
    double net = node.own_mu - node.own_nu;
    for (const auto& [letter, c] : node.children) {
      sum_abs += std::abs(imbalance[c]);
      net += imbalance[c];
    }
    imbalance[v] = net;
    const double moved =
        0.5 * (sum_abs - std::abs(net)) + std::min(node.own_mu, node.own_nu);
    bound += diam[v] * moved;
  }
  return bound;
}

MetricEstimate HutchinsonMetricOrBound(const SelfSimilarSystem& system,
                                       const DiscreteMeasure& mu,
                                       const DiscreteMeasure& nu) {
  try {
    return {HutchinsonMetric(mu, nu, system.eps_geo()).distance, true};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kSupportExplosion) throw;
  }
  return {AddressTreeBound(system, mu, nu), false};
}

}  // namespace fractrace
