#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fractrace/measure.hpp"

namespace fractrace {

struct FlowEntry {
  std::size_t source = 0;  // atom index in the first measure
  std::size_t target = 0;  // atom index in the second measure
  double mass = 0.0;
};

// Sparse coupling between two discrete measures.
struct TransportPlan {
  std::vector<FlowEntry> flow;
  double cost = 0.0;
};

struct TransportResult {
  double distance = 0.0;
  // Bound on |distance - W1| from integer scaling (zero for exact paths).
  double error_bound = 0.0;
  TransportPlan plan;
  std::string method;
};

struct TransportOptions {
  // Atoms of the two measures closer than this are cancelled before solving.
  double cancel_eps = 0.0;
  // Integer units for the total mass and for the largest distance.
  double mass_scale = 1e12;
  double cost_scale = 1e12;
  // Cap on source x target pairs in the flow graph.
  std::size_t max_pairs = 1000000;
  // Skip the one-dimensional fast path.
  bool force_flow = false;
};

// Exact W1 on the line (all atoms with y == 0) by CDF integration; the plan
// is the monotone coupling.
TransportResult W1OneDim(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// Min-cost flow on the bipartite atom graph with Euclidean costs, masses and
// costs scaled to integers and solved by successive shortest paths.
TransportResult W1Flow(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                       const TransportOptions& options = {});

// The Hutchinson metric L(mu, nu) = W1(mu, nu). Cancels shared atoms, then
// uses the 1D path when both measures live on the x-axis, else the flow.
// Throws MassMismatch when the total masses differ by more than 1e-12.
TransportResult HutchinsonMetric(const DiscreteMeasure& mu,
                                 const DiscreteMeasure& nu,
                                 double cancel_eps = 0.0,
                                 TransportOptions options = {});

// Dense two-phase simplex on the transport LP; reference solver for small
// instances (up to a few dozen atoms per side).
double SimplexW1(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

}  // namespace fractrace
