#pragma once

#include <cstdint>
#include <optional>

#include "fractrace/measure.hpp"
#include "fractrace/system.hpp"

namespace fractrace {

// F(mu): each atom (y, w) becomes w at every distinct preimage gamma_j(y).
DiscreteMeasure TransferF(const SelfSimilarSystem& system,
                          const DiscreteMeasure& mu);

// G*(mu) = (1/N) sum_j (gamma_j)_# mu, counted with multiplicity.
DiscreteMeasure DualG(const SelfSimilarSystem& system,
                      const DiscreteMeasure& mu);

// G(f)(y) = (1/N) sum_j f(gamma_j(y)).
RealFunction AverageG(const SelfSimilarSystem& system, RealFunction f);

// mu_i^{(b,r)}: uniform probability on O_{b,r-i} for i <= r, zero for i > r.
DiscreteMeasure ModelLevelMeasure(const SelfSimilarSystem& system,
                                  const Point& b, int r, int i);

enum class HutchinsonStrategy { kDeterministic, kSampled };

struct HutchinsonOptions {
  HutchinsonStrategy strategy = HutchinsonStrategy::kDeterministic;
  // Chaos-game sample count.
  std::int64_t samples = 100000;
  std::uint64_t seed = 1;
  std::size_t support_cap = 1000000;
  // Defaults to the system's base point.
  std::optional<Coord> start;
};

struct HutchinsonEstimate {
  DiscreteMeasure measure;
  int iterations = 0;
  // c^n * diam(K); a rigorous L-bound in deterministic mode only.
  double error_bound = 0.0;
  bool certified = false;
};

// Throws SupportExplosion when the deterministic support would exceed the cap.
HutchinsonEstimate EstimateHutchinson(const SelfSimilarSystem& system,
                                      int iterations,
                                      const HutchinsonOptions& options = {});

// Estimate seeded at the generic point, so that it carries no atoms on the
// critical orbits or over the branch values.
HutchinsonEstimate GenericHutchinson(const SelfSimilarSystem& system,
                                     int iterations);

// L(G* mu, G* nu) / L(mu, nu). Throws DegenerateInput when L(mu, nu) < 1e-12.
double ContractionRatio(const SelfSimilarSystem& system,
                        const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// Upper bound on L(mu, nu) from the address tree: mass that must move between
// the children of a cell gamma_w(region) pays at most that cell's diameter.
// Every atom needs an address anchored in the bounding region. Shared atoms
// are cancelled first.
double AddressTreeBound(const SelfSimilarSystem& system, const DiscreteMeasure& mu,
                        const DiscreteMeasure& nu);

struct MetricEstimate {
  double distance = 0.0;
  // True when `distance` is the exact L (up to the solver's error bound),
  // false when it is the address-tree upper bound.
  bool exact = true;
};

// Exact L when the transport problem fits the solver caps, otherwise the
// address-tree upper bound.
MetricEstimate HutchinsonMetricOrBound(const SelfSimilarSystem& system,
                                       const DiscreteMeasure& mu,
                                       const DiscreteMeasure& nu);

}  // namespace fractrace
