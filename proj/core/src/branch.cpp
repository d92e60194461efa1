#include "fractrace/branch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "fractrace/error.hpp"

namespace fractrace {
namespace {

std::string Fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string Fmt(Coord c, int dim) {
  return dim == 1 ? Fmt(c.x) : "(" + Fmt(c.x) + ", " + Fmt(c.y) + ")";
}

bool InImage(const SelfSimilarSystem& system, Coord y,
             const std::vector<Coord>& shape) {
  if (system.dim() == 1) {
    const double lo = std::min(shape[0].x, shape[1].x);
    const double hi = std::max(shape[0].x, shape[1].x);
    return y.x >= lo - system.eps_geo() && y.x <= hi + system.eps_geo();
  }
  return InTriangle(y, {shape[0], shape[1], shape[2]}, system.eps_geo());
}

void SortByCoords(std::vector<Point>& points) {
  std::sort(points.begin(), points.end(),
            [](const Point& a, const Point& b) { return a.coords < b.coords; });
}

void AddUnique(const SelfSimilarSystem& system, std::vector<Point>& set,
               Point p) {
  if (!Contains(system, set, p.coords)) set.push_back(std::move(p));
}

// Solutions of gamma_i(y) = gamma_j(y) inside the bounding region. Throws
// BranchSetNotFinite when a continuum of solutions lies in K.
std::vector<Coord> SolvePair(const SelfSimilarSystem& system, int i, int j) {
  const ContractionMap& gi = system.map(i);
  const ContractionMap& gj = system.map(j);
  const Coord rhs = gj.offset() - gi.offset();
  const double tiny = 1e-14;
  std::vector<Coord> out;
  if (system.dim() == 1) {
    const double d = gi.linear()[0] - gj.linear()[0];
    if (std::abs(d) < tiny) {
      if (std::abs(rhs.x) <= system.eps_geo()) {
        throw Error(ErrorCode::kBranchSetNotFinite,
                    "maps " + std::to_string(i + 1) + " and " +
                        std::to_string(j + 1) + " coincide on K");
      }
      return out;
    }
    const Coord y{rhs.x / d, 0.0};
    if (system.InRegion(y)) out.push_back(y);
    return out;
  }
  const auto& a = gi.linear();
  const auto& b = gj.linear();
  const double m11 = a[0] - b[0], m12 = a[1] - b[1];
  const double m21 = a[2] - b[2], m22 = a[3] - b[3];
  const double det = m11 * m22 - m12 * m21;
  if (std::abs(det) > tiny) {
    const Coord y{(m22 * rhs.x - m12 * rhs.y) / det,
                  (-m21 * rhs.x + m11 * rhs.y) / det};
    if (system.InRegion(y)) out.push_back(y);
    return out;
  }
  // Singular difference: the solution set is empty, a line, or the plane.
  const double scale = std::max({std::abs(m11), std::abs(m12), std::abs(m21),
                                 std::abs(m22)});
  if (scale < tiny) {
    if (Norm(rhs) <= system.eps_geo()) {
      throw Error(ErrorCode::kBranchSetNotFinite,
                  "maps " + std::to_string(i + 1) + " and " +
                      std::to_string(j + 1) + " coincide on K");
    }
    return out;
  }
  // Pick the dominant row n . y = c; the other row must be consistent.
  Coord n{m11, m12};
  double c = rhs.x;
  Coord other{m21, m22};
  double c_other = rhs.y;
  if (Norm(other) > Norm(n)) {
    std::swap(n, other);
    std::swap(c, c_other);
  }
  const double ratio = (Norm(n) > 0) ? (other.x * n.x + other.y * n.y) /
                                           (n.x * n.x + n.y * n.y)
                                     : 0.0;
  if (std::abs(c_other - ratio * c) > system.eps_geo()) return out;
  // Clip the line n . y = c to the region triangle.
  const auto& tri = system.region();
  std::vector<Coord> hits;
  for (int k = 0; k < 3; ++k) {
    const Coord p = tri[k], q = tri[(k + 1) % 3];
    const double fp = n.x * p.x + n.y * p.y - c;
    const double fq = n.x * q.x + n.y * q.y - c;
    const double nn = Norm(n);
    if (std::abs(fp) / nn <= system.eps_geo()) hits.push_back(p);
    if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0)) {
      const double t = fp / (fp - fq);
      hits.push_back(p + t * (q - p));
    }
  }
  if (hits.empty()) return out;
  Coord lo = hits.front(), hi = hits.front();
  double best = 0.0;
  for (Coord u : hits) {
    for (Coord v : hits) {
      if (Distance(u, v) > best) {
        best = Distance(u, v);
        lo = u;
        hi = v;
      }
    }
  }
  if (best <= system.eps_geo()) {
    out.push_back(lo);
    return out;
  }
  // A segment: K may meet it in finitely many points only.
  const int samples = 257;
  int interior_hits = 0;
  for (int s = 1; s + 1 < samples; ++s) {
    const Coord y = lo + (static_cast<double>(s) / (samples - 1)) * (hi - lo);
    if (InAttractor(system, y, 24)) ++interior_hits;
  }
  if (interior_hits > 2) {
    throw Error(ErrorCode::kBranchSetNotFinite,
                "maps " + std::to_string(i + 1) + " and " +
                    std::to_string(j + 1) + " agree along a segment of K");
  }
  out.push_back(lo);
  out.push_back(hi);
  return out;
}

}  // namespace

bool InAttractor(const SelfSimilarSystem& system, Coord y, int depth) {
  if (!system.InRegion(y)) return false;
  const int n = system.size();
  const std::vector<Coord> base = system.region();
  // Depth-first search over words w with y in gamma_w(region); appending j
  // gives the nested shape gamma_w(gamma_j(region)).
  std::function<bool(const Word&, int)> by_word = [&](const Word& w, int level) {
    if (level == depth) return true;
    for (int j = 0; j < n; ++j) {
      std::vector<int> letters = w.letters();
      letters.push_back(j);
      const Word next(std::move(letters));
      std::vector<Coord> image;
      for (Coord v : base) image.push_back(ApplyWord(system, next, v));
      if (InImage(system, y, image) && by_word(next, level + 1)) return true;
    }
    return false;
  };
  return by_word(Word(), 0);
}

bool Contains(const SelfSimilarSystem& system, const std::vector<Point>& set,
              Coord p) {
  return std::any_of(set.begin(), set.end(), [&](const Point& q) {
    return system.Same(q.coords, p);
  });
}

BranchData ComputeBranchData(const SelfSimilarSystem& system, int depth_cap) {
  BranchData data;
  const int n = system.size();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (Coord a : SolvePair(system, i, j)) {
        if (!InAttractor(system, a)) continue;
        Point b;
        b.coords = system.map(i)(a);
        b.address = Itinerary{Word{i}, a};
        b.address2 = Itinerary{Word{j}, a};
        AddUnique(system, data.branch_set, std::move(b));
      }
    }
  }
  SortByCoords(data.branch_set);

  for (Coord d : system.definition().declared_branch_set) {
    if (!Contains(system, data.branch_set, d)) {
      data.declaration_mismatches.push_back("declared point " +
                                            Fmt(d, system.dim()) +
                                            " is not a branch point");
    }
  }
  if (!system.definition().declared_branch_set.empty()) {
    for (const Point& b : data.branch_set) {
      const auto& declared = system.definition().declared_branch_set;
      const bool found = std::any_of(declared.begin(), declared.end(),
                                     [&](Coord d) { return system.Same(d, b.coords); });
      if (!found) {
        data.declaration_mismatches.push_back(
            "branch point " + Fmt(b.coords, system.dim()) + " was not declared");
      }
    }
  }

  // C = h(B): the address shift gives h(gamma_i(a)) = a exactly.
  for (const Point& b : data.branch_set) {
    Point c;
    c.coords = b.address->anchor;
    AddUnique(system, data.branch_values, c);
  }
  SortByCoords(data.branch_values);

  std::vector<Point> frontier = data.branch_values;
  data.postcritical = data.branch_values;
  int steps = 0;
  while (!frontier.empty()) {
    if (steps >= depth_cap) {
      throw Error(ErrorCode::kPostcriticalNotFinite,
                  "forward orbit of the branch set did not close after " +
                      std::to_string(depth_cap) + " iterations");
    }
    std::vector<Point> next;
    for (const Point& p : frontier) {
      const Point q(ApplyHOnce(system, p.coords));
      if (!Contains(system, data.postcritical, q.coords)) {
        data.postcritical.push_back(q);
        next.push_back(q);
      }
    }
    frontier = std::move(next);
    ++steps;
  }
  data.closure_steps = steps;
  SortByCoords(data.postcritical);

  for (const Point& c : data.branch_values) {
    for (int j = 0; j < n; ++j) {
      data.index_table.push_back({c.coords, j, BranchIndex(system, c.coords, j)});
    }
  }
  return data;
}

std::vector<Point> Orbit(const SelfSimilarSystem& system, const Point& b,
                         int r) {
  if (r < 0) throw Error(ErrorCode::kInput, "negative orbit depth");
  const int n = system.size();
  std::vector<Point> level{Point(b.coords, Itinerary{Word(), b.coords})};
  for (int k = 1; k <= r; ++k) {
    std::vector<Point> next;
    next.reserve(level.size() * static_cast<std::size_t>(n));
    std::vector<Coord> coords;
    coords.reserve(next.capacity());
    for (const Point& p : level) {
      for (int j = 0; j < n; ++j) {
        Point q;
        q.coords = system.map(j)(p.coords);
        q.address = Itinerary{p.address->word.Prepend(j), b.coords};
        coords.push_back(q.coords);
        next.push_back(std::move(q));
      }
    }
    const auto rep = ClusterNear(coords, system.eps_geo());
    for (std::size_t i = 0; i < rep.size(); ++i) {
      if (rep[i] != i) {
        throw Error(ErrorCode::kOrbitMeetsBranchSet,
                    "h^-" + std::to_string(k) + "(" + Fmt(b.coords, system.dim()) +
                        ") has coinciding preimages at " +
                        Fmt(coords[i], system.dim()));
      }
    }
    level = std::move(next);
  }
  std::sort(level.begin(), level.end(), [](const Point& x, const Point& y) {
    return x.address->word < y.address->word;
  });
  return level;
}

bool AssumptionReport::passed() const {
  return std::all_of(items.begin(), items.end(),
                     [](const CheckItem& item) { return item.passed; });
}

std::string AssumptionReport::first_failure() const {
  for (const CheckItem& item : items) {
    if (!item.passed) return item.name;
  }
  return {};
}

std::vector<Coord> SamplePoints(const SelfSimilarSystem& system, int per_cell) {
  const int n = system.size();
  int length = 0;
  long long count = 1;
  while (count < static_cast<long long>(per_cell) * n && length < 16) {
    count *= n;
    ++length;
  }
  std::vector<Coord> out;
  const Coord seed = system.generic_point();
  for (const Word& w : AllWords(n, length)) out.push_back(ApplyWord(system, w, seed));
  return out;
}

AssumptionReport CheckAssumptionA(const SelfSimilarSystem& system, int depth) {
  if (depth < 1) throw Error(ErrorCode::kInput, "depth must be >= 1");
  AssumptionReport report;
  const int n = system.size();
  const double eps = system.eps_geo();
  const std::vector<Coord> samples = SamplePoints(system, 64);

  {
    CheckItem item{"contraction_bounds", true, "", 0.0};
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
      const ContractionMap& g = system.map(j);
      for (std::size_t s = 0; s + 1 < samples.size(); s += 7) {
        const Coord x = samples[s], y = samples[samples.size() - 1 - s];
        const double d = Distance(x, y);
        if (d <= eps) continue;
        const double ratio = Distance(g(x), g(y)) / d;
        const double excess = std::max(ratio - g.upper_bound(),
                                       g.lower_bound() - ratio);
        worst = std::max(worst, excess);
      }
    }
    item.value = worst;
    item.passed = worst <= 1e-12;
    item.detail = "largest violation of c' <= ratio <= c: " + Fmt(worst);
    report.items.push_back(item);
  }

  {
    CheckItem item{"h_inverts_gamma", true, "", 0.0};
    try {
      double worst = 0.0;
      for (Coord x : samples) {
        for (int j = 0; j < n; ++j) {
          const Coord back = ApplyHOnce(system, system.map(j)(x));
          worst = std::max(worst, Distance(back, x));
        }
      }
      item.value = worst;
      item.passed = worst <= eps;
      item.detail = "max |h(gamma_j(x)) - x| = " + Fmt(worst);
    } catch (const Error& e) {
      item.passed = false;
      item.detail = e.what();
    }
    report.items.push_back(item);
  }

  BranchData data;
  bool have_data = false;
  {
    CheckItem item{"finite_branch_data", true, "", 0.0};
    try {
      data = ComputeBranchData(system);
      have_data = true;
      item.detail = "|B| = " + std::to_string(data.branch_set.size()) +
                    ", |C| = " + std::to_string(data.branch_values.size()) +
                    ", |P| = " + std::to_string(data.postcritical.size()) +
                    ", closed after " + std::to_string(data.closure_steps) +
                    " steps";
      if (!data.declaration_mismatches.empty()) {
        item.passed = false;
        item.detail += "; " + data.declaration_mismatches.front();
      }
    } catch (const Error& e) {
      item.passed = false;
      item.detail = e.what();
    }
    report.items.push_back(item);
  }
  if (!have_data) {
    for (const char* name : {"branch_postcritical_disjoint",
                             "orbits_avoid_branch_set", "open_set_condition"}) {
      report.items.push_back({name, false, "branch data unavailable", 0.0});
    }
    return report;
  }

  {
    CheckItem item{"branch_postcritical_disjoint", true, "B and P are disjoint",
                   0.0};
    for (const Point& b : data.branch_set) {
      if (Contains(system, data.postcritical, b.coords)) {
        item.passed = false;
        item.detail = "branch point " + Fmt(b.coords, system.dim()) +
                      " is postcritical";
        break;
      }
    }
    report.items.push_back(item);
  }

  {
    CheckItem item{"orbits_avoid_branch_set", true, "", 0.0};
    // Keep the enumeration below about two million points per branch point.
    int reach = depth;
    double size = 1.0;
    for (int k = 1; k <= depth; ++k) {
      size *= n;
      if (size > 2e6) {
        reach = k - 1;
        break;
      }
    }
    try {
      for (const Point& b : data.branch_set) {
        for (int k = 1; k <= reach && item.passed; ++k) {
          for (const Point& x : Orbit(system, b, k)) {
            if (Contains(system, data.branch_set, x.coords)) {
              item.passed = false;
              item.detail = "h^-" + std::to_string(k) + "(" +
                            Fmt(b.coords, system.dim()) +
                            ") meets the branch set";
              break;
            }
          }
        }
      }
      if (item.passed) {
        item.detail = "checked to depth " + std::to_string(reach);
      }
      item.value = reach;
    } catch (const Error& e) {
      item.passed = false;
      item.detail = e.what();
    }
    report.items.push_back(item);
  }

  {
    CheckItem item{"open_set_condition", true, "", 0.0};
    int tested = 0;
    for (Coord x : samples) {
      bool near_p = false;
      for (const Point& p : data.postcritical) {
        if (Distance(p.coords, x) <= 1e3 * eps) near_p = true;
      }
      if (near_p) continue;
      ++tested;
      for (int j = 0; j < n && item.passed; ++j) {
        const Coord gj = system.map(j)(x);
        if (Contains(system, data.postcritical, gj)) {
          item.passed = false;
          item.detail = "gamma_" + std::to_string(j + 1) + "(" +
                        Fmt(x, system.dim()) + ") is postcritical";
        }
        for (int k = j + 1; k < n && item.passed; ++k) {
          if (system.Same(gj, system.map(k)(x))) {
            item.passed = false;
            item.detail = "gamma_" + std::to_string(j + 1) + " and gamma_" +
                          std::to_string(k + 1) + " agree at " +
                          Fmt(x, system.dim());
          }
        }
      }
      if (!item.passed) break;
    }
    if (item.passed) item.detail = std::to_string(tested) + " points of V tested";
    item.value = tested;
    report.items.push_back(item);
  }
  return report;
}

}  // namespace fractrace
