#include "fractrace/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/successive_shortest_path_nonnegative_weights.hpp>

#include "fractrace/error.hpp"

namespace fractrace {
namespace {

using FlowTraits =
    boost::adjacency_list_traits<boost::vecS, boost::vecS, boost::directedS>;
using FlowGraph = boost::adjacency_list<
    boost::vecS, boost::vecS, boost::directedS, boost::no_property,
    boost::property<
        boost::edge_capacity_t, long long,
        boost::property<
            boost::edge_residual_capacity_t, long long,
            boost::property<boost::edge_reverse_t, FlowTraits::edge_descriptor,
                            boost::property<boost::edge_weight_t, long long>>>>>;
using FlowEdge = FlowTraits::edge_descriptor;

void CheckMasses(double a, double b) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  if (std::abs(a - b) > 1e-12 * scale) {
    throw Error(ErrorCode::kMassMismatch,
                "total masses differ: " + std::to_string(a) + " vs " +
                    std::to_string(b));
  }
}

void CheckNonnegative(const DiscreteMeasure& mu) {
  for (const Atom& a : mu.atoms()) {
    if (a.weight < 0.0) {
      throw Error(ErrorCode::kInput, "transport needs nonnegative weights");
    }
  }
}

bool OnLine(const DiscreteMeasure& mu) {
  return std::all_of(mu.atoms().begin(), mu.atoms().end(),
                     [](const Atom& a) { return a.point.coords.y == 0.0; });
}

// Integer units summing exactly to `total`; rounding drift goes to the
// heaviest atom.
std::vector<long long> ScaleMasses(const std::vector<double>& w, double mass,
                                   long long total) {
  std::vector<long long> units(w.size());
  long long sum = 0;
  std::size_t heaviest = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    units[i] = std::llround(w[i] / mass * static_cast<double>(total));
    sum += units[i];
    if (w[i] > w[heaviest]) heaviest = i;
  }
  if (!w.empty()) units[heaviest] += total - sum;
  return units;
}

}  // namespace

TransportResult W1OneDim(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  CheckNonnegative(mu);
  CheckNonnegative(nu);
  CheckMasses(mu.TotalMass(), nu.TotalMass());
  TransportResult result;
  result.method = "1d-cdf";
  std::vector<std::size_t> ia(mu.size()), ib(nu.size());
  std::iota(ia.begin(), ia.end(), std::size_t{0});
  std::iota(ib.begin(), ib.end(), std::size_t{0});
  const auto& a = mu.atoms();
  const auto& b = nu.atoms();
  std::sort(ia.begin(), ia.end(), [&](std::size_t p, std::size_t q) {
    return a[p].point.coords.x < a[q].point.coords.x;
  });
  std::sort(ib.begin(), ib.end(), [&](std::size_t p, std::size_t q) {
    return b[p].point.coords.x < b[q].point.coords.x;
  });

  // Integral of |F_mu - F_nu| over the merged breakpoints.
  double distance = 0.0;
  double diff = 0.0;
  std::size_t p = 0, q = 0;
  double last = 0.0;
  bool started = false;
  while (p < ia.size() || q < ib.size()) {
    const double xa = p < ia.size() ? a[ia[p]].point.coords.x
                                    : std::numeric_limits<double>::infinity();
    const double xb = q < ib.size() ? b[ib[q]].point.coords.x
                                    : std::numeric_limits<double>::infinity();
    const double x = std::min(xa, xb);
    if (started) distance += std::abs(diff) * (x - last);
    started = true;
    last = x;
    while (p < ia.size() && a[ia[p]].point.coords.x == x) diff += a[ia[p++]].weight;
    while (q < ib.size() && b[ib[q]].point.coords.x == x) diff -= b[ib[q++]].weight;
  }
  result.distance = distance;

  // Monotone (north-west corner) coupling.
  std::size_t s = 0, t = 0;
  double ra = ia.empty() ? 0.0 : a[ia[0]].weight;
  double rb = ib.empty() ? 0.0 : b[ib[0]].weight;
  while (s < ia.size() && t < ib.size()) {
    const double m = std::min(ra, rb);
    if (m > 0.0) {
      result.plan.flow.push_back({ia[s], ib[t], m});
      result.plan.cost +=
          m * std::abs(a[ia[s]].point.coords.x - b[ib[t]].point.coords.x);
    }
    ra -= m;
    rb -= m;
    if (ra <= 0.0 && ++s < ia.size()) ra = a[ia[s]].weight;
    if (rb <= 0.0 && ++t < ib.size()) rb = b[ib[t]].weight;
  }
  return result;
}

TransportResult W1Flow(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                       const TransportOptions& options) {
  CheckNonnegative(mu);
  CheckNonnegative(nu);
  const double mass_a = mu.TotalMass();
  const double mass_b = nu.TotalMass();
  CheckMasses(mass_a, mass_b);
  TransportResult result;
  result.method = "min-cost-flow";
  const std::size_t n = mu.size(), m = nu.size();
  if (n == 0 || m == 0 || mass_a <= 0.0) return result;
  if (n * m > options.max_pairs) {
    throw Error(ErrorCode::kSupportExplosion,
                "transport graph with " + std::to_string(n) + " x " +
                    std::to_string(m) + " pairs exceeds the cap of " +
                    std::to_string(options.max_pairs));
  }
  const auto& a = mu.atoms();
  const auto& b = nu.atoms();
  double dmax = 0.0;
  for (const Atom& x : a) {
    for (const Atom& y : b) {
      dmax = std::max(dmax, Distance(x.point.coords, y.point.coords));
    }
  }
  if (dmax == 0.0) {
    // Everything sits at one point.
    for (std::size_t i = 0; i < n; ++i) result.plan.flow.push_back({i, 0, a[i].weight});
    return result;
  }

  const auto total = static_cast<long long>(options.mass_scale);
  std::vector<double> wa(n), wb(m);
  for (std::size_t i = 0; i < n; ++i) wa[i] = a[i].weight;
  for (std::size_t j = 0; j < m; ++j) wb[j] = b[j].weight;
  const std::vector<long long> ua = ScaleMasses(wa, mass_a, total);
  const std::vector<long long> ub = ScaleMasses(wb, mass_b, total);

  FlowGraph g(n + m + 2);
  const std::size_t source = n + m, sink = n + m + 1;
  auto capacity = boost::get(boost::edge_capacity, g);
  auto reverse = boost::get(boost::edge_reverse, g);
  auto weight = boost::get(boost::edge_weight, g);
  auto residual = boost::get(boost::edge_residual_capacity, g);
  auto add = [&](std::size_t u, std::size_t v, long long cap, long long cost) {
    const FlowEdge e = boost::add_edge(u, v, g).first;
    const FlowEdge r = boost::add_edge(v, u, g).first;
    capacity[e] = cap;
    capacity[r] = 0;
    weight[e] = cost;
    weight[r] = -cost;
    reverse[e] = r;
    reverse[r] = e;
    return e;
  };
  for (std::size_t i = 0; i < n; ++i) add(source, i, ua[i], 0);
  for (std::size_t j = 0; j < m; ++j) add(n + j, sink, ub[j], 0);
  std::vector<FlowEdge> pair_edges;
  pair_edges.reserve(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = Distance(a[i].point.coords, b[j].point.coords);
      const auto cost = std::llround(d / dmax * options.cost_scale);
      pair_edges.push_back(add(i, n + j, total, cost));
    }
  }
  boost::successive_shortest_path_nonnegative_weights(g, source, sink);

  const double unit = mass_a / static_cast<double>(total);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const FlowEdge e = pair_edges[i * m + j];
      const long long f = capacity[e] - residual[e];
      if (f <= 0) continue;
      const double mass = static_cast<double>(f) * unit;
      result.plan.flow.push_back({i, j, mass});
      result.plan.cost += mass * Distance(a[i].point.coords, b[j].point.coords);
    }
  }
  result.distance = result.plan.cost;
  result.error_bound =
      dmax * mass_a *
      (static_cast<double>(n + m) / options.mass_scale + 1.0 / options.cost_scale);
  return result;
}

TransportResult HutchinsonMetric(const DiscreteMeasure& mu,
                                 const DiscreteMeasure& nu, double cancel_eps,
                                 TransportOptions options) {
  CheckNonnegative(mu);
  CheckNonnegative(nu);
  CheckMasses(mu.TotalMass(), nu.TotalMass());
  options.cancel_eps = cancel_eps;
  // W1 depends on mu - nu only: cancel shared atoms first.
  std::vector<double> ra(mu.size()), rb(nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) ra[i] = mu.atoms()[i].weight;
  for (std::size_t j = 0; j < nu.size(); ++j) rb[j] = nu.atoms()[j].weight;
  std::vector<FlowEntry> cancelled;
  double moved = 0.0;
  {
    const AtomIndex index(nu, cancel_eps);
    for (std::size_t i = 0; i < mu.size(); ++i) {
      for (std::size_t j : index.Near(mu.atoms()[i].point.coords)) {
        const double c = std::min(ra[i], rb[j]);
        if (c <= 0.0) continue;
        ra[i] -= c;
        rb[j] -= c;
        cancelled.push_back({i, j, c});
        moved += c * Distance(mu.atoms()[i].point.coords, nu.atoms()[j].point.coords);
      }
    }
  }
  DiscreteMeasure left, right;
  std::vector<std::size_t> map_a, map_b;
  // Remainders below rounding noise of the cancelled mass are dropped.
  const double noise = 1e-15 * std::max(1.0, mu.TotalMass());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (ra[i] > noise) {
      left.Add(mu.atoms()[i].point, ra[i]);
      map_a.push_back(i);
    }
  }
  for (std::size_t j = 0; j < nu.size(); ++j) {
    if (rb[j] > noise) {
      right.Add(nu.atoms()[j].point, rb[j]);
      map_b.push_back(j);
    }
  }
  TransportResult inner;
  const double ml = left.TotalMass(), mr = right.TotalMass();
  if (left.empty() || right.empty()) {
    inner.method = "cancelled";
  } else {
    // Equalize the leftover masses (they agree up to rounding).
    if (ml != mr) right = right.Scaled(ml / mr);
    const bool line = OnLine(mu) && OnLine(nu) && !options.force_flow;
    inner = line ? W1OneDim(left, right) : W1Flow(left, right, options);
  }
  TransportResult result;
  result.method = inner.method;
  result.distance = inner.distance + moved;
  result.error_bound = inner.error_bound + moved;
  for (const FlowEntry& f : inner.plan.flow) {
    result.plan.flow.push_back({map_a[f.source], map_b[f.target], f.mass});
  }
  for (const FlowEntry& f : cancelled) result.plan.flow.push_back(f);
  result.plan.cost = inner.plan.cost + moved;
  return result;
}

double SimplexW1(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  CheckNonnegative(mu);
  CheckNonnegative(nu);
  CheckMasses(mu.TotalMass(), nu.TotalMass());
  const std::size_t n = mu.size(), m = nu.size();
  if (n == 0 || m == 0) return 0.0;
  // Rows: n supply equalities and m - 1 demand equalities (the last one is
  // implied). Columns: n*m flows, one artificial per row, then the rhs.
  const std::size_t rows = n + m - 1;
  const std::size_t vars = n * m;
  const std::size_t cols = vars + rows + 1;
  std::vector<std::vector<double>> t(rows + 1, std::vector<double>(cols, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) t[i][i * m + j] = 1.0;
    t[i][cols - 1] = mu.atoms()[i].weight;
  }
  for (std::size_t j = 0; j + 1 < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) t[n + j][i * m + j] = 1.0;
    t[n + j][cols - 1] = nu.atoms()[j].weight;
  }
  std::vector<std::size_t> basis(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    t[r][vars + r] = 1.0;
    basis[r] = vars + r;
  }
  const double tol = 1e-13;
  auto pivot = [&](std::size_t pr, std::size_t pc) {
    const double p = t[pr][pc];
    for (double& v : t[pr]) v /= p;
    for (std::size_t r = 0; r <= rows; ++r) {
      if (r == pr || t[r][pc] == 0.0) continue;
      const double f = t[r][pc];
      for (std::size_t c = 0; c < cols; ++c) t[r][c] -= f * t[pr][c];
    }
    basis[pr] = pc;
  };
  // Bland's rule; `limit` excludes artificial columns from entering.
  auto run = [&](std::size_t limit) {
    for (int guard = 0; guard < 100000; ++guard) {
      std::size_t enter = cols;
      for (std::size_t c = 0; c < limit; ++c) {
        if (t[rows][c] < -tol) {
          enter = c;
          break;
        }
      }
      if (enter == cols) return;
      std::size_t leave = rows;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < rows; ++r) {
        if (t[r][enter] > tol) {
          const double ratio = t[r][cols - 1] / t[r][enter];
          if (leave == rows || ratio < best - 1e-15 ||
              (std::abs(ratio - best) <= 1e-15 && basis[r] < basis[leave])) {
            best = ratio;
            leave = r;
          }
        }
      }
      if (leave == rows) throw Error(ErrorCode::kInput, "unbounded transport LP");
      pivot(leave, enter);
    }
    throw Error(ErrorCode::kInput, "simplex iteration limit reached");
  };
  // Phase one: minimize the artificial sum.
  for (std::size_t c = 0; c < cols; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < rows; ++r) s += t[r][c];
    t[rows][c] = (c >= vars && c < vars + rows) ? 0.0 : -s;
  }
  run(vars + rows);
  for (std::size_t r = 0; r < rows; ++r) {
    if (basis[r] < vars) continue;
    for (std::size_t c = 0; c < vars; ++c) {
      if (std::abs(t[r][c]) > 1e-9) {
        pivot(r, c);
        break;
      }
    }
  }
  // Phase two: transport cost.
  std::vector<double> cost(vars);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      cost[i * m + j] = Distance(mu.atoms()[i].point.coords, nu.atoms()[j].point.coords);
    }
  }
  std::fill(t[rows].begin(), t[rows].end(), 0.0);
  for (std::size_t c = 0; c < vars; ++c) t[rows][c] = cost[c];
  for (std::size_t r = 0; r < rows; ++r) {
    if (basis[r] >= vars) continue;
    const double f = t[rows][basis[r]];
    for (std::size_t c = 0; c < cols; ++c) t[rows][c] -= f * t[r][c];
  }
  run(vars);
  double value = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (basis[r] < vars) value += cost[basis[r]] * t[r][cols - 1];
  }
  return value;
}

}  // namespace fractrace
