#include "fractrace/system.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>

#include "fractrace/error.hpp"

namespace fractrace {
namespace {

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string FormatCoord(Coord c) {
  return "(" + FormatDouble(c.x) + "," + FormatDouble(c.y) + ")";
}

}  // namespace

SelfSimilarSystem::SelfSimilarSystem(SystemDefinition def)
    : def_(std::move(def)) {
  if (def_.dim != 1 && def_.dim != 2) {
    throw Error(ErrorCode::kInput, "dimension must be 1 or 2");
  }
  if (def_.maps.size() < 2) {
    throw Error(ErrorCode::kInput, "a self-similar map needs N >= 2 maps");
  }
  if (def_.dim == 1 && def_.region.size() != 2) {
    throw Error(ErrorCode::kInput, "1D region must be an interval [lo, hi]");
  }
  if (def_.dim == 2 && def_.region.size() != 3) {
    throw Error(ErrorCode::kInput, "2D region must be a triangle");
  }
  for (const Cell& cell : def_.cells) {
    if (cell.branch < 0 || cell.branch >= static_cast<int>(def_.maps.size())) {
      throw Error(ErrorCode::kInput, "cell refers to an unknown branch");
    }
  }
  if (def_.diam) {
    diam_ = *def_.diam;
  } else if (def_.dim == 1) {
    diam_ = std::abs(def_.region[1].x - def_.region[0].x);
  } else {
    diam_ = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        diam_ = std::max(diam_, Distance(def_.region[i], def_.region[j]));
      }
    }
  }
  if (!(diam_ > 0.0)) throw Error(ErrorCode::kInput, "diam(K) must be > 0");
  eps_geo_ = 1e-9 * diam_;
  for (const ContractionMap& m : def_.maps) {
    c_upper_ = std::max(c_upper_, m.upper_bound());
    c_lower_ = std::min(c_lower_, m.lower_bound());
  }
  if (!(c_upper_ < 1.0) || !(c_lower_ > 0.0)) {
    throw Error(ErrorCode::kInput,
                "maps must be proper contractions (0 < c' <= c < 1)");
  }
}

Coord SelfSimilarSystem::generic_point() const {
  if (def_.generic_point) return *def_.generic_point;
  if (def_.dim == 1) {
    const double lo = def_.region[0].x, hi = def_.region[1].x;
    return {lo + (std::sqrt(2.0) - 1.0) * (hi - lo), 0.0};
  }
  return (1.0 / 3.0) * (def_.region[0] + def_.region[1] + def_.region[2]);
}

bool SelfSimilarSystem::InRegion(Coord p) const {
  if (def_.dim == 1) {
    const double lo = std::min(def_.region[0].x, def_.region[1].x);
    const double hi = std::max(def_.region[0].x, def_.region[1].x);
    return p.x >= lo - eps_geo_ && p.x <= hi + eps_geo_ &&
           std::abs(p.y) <= eps_geo_;
  }
  return InTriangle(p, {def_.region[0], def_.region[1], def_.region[2]},
                    eps_geo_);
}

std::string SelfSimilarSystem::CanonicalText() const {
  std::ostringstream out;
  out << "name=" << def_.name << ";dim=" << def_.dim << ";maps=";
  for (const ContractionMap& m : def_.maps) {
    out << "[";
    for (double v : m.linear()) out << FormatDouble(v) << ",";
    out << FormatCoord(m.offset()) << "]";
  }
  out << ";cells=";
  for (const Cell& c : def_.cells) {
    out << "[" << c.branch << ":";
    if (def_.dim == 1) {
      out << FormatDouble(c.lo) << "," << FormatDouble(c.hi);
    } else {
      for (Coord v : c.triangle) out << FormatCoord(v);
    }
    out << "]";
  }
  out << ";region=";
  for (Coord v : def_.region) out << FormatCoord(v);
  out << ";base=" << FormatCoord(def_.base_point);
  out << ";generic=" << FormatCoord(generic_point());
  out << ";diam=" << FormatDouble(diam_);
  out << ";branch=";
  for (Coord v : def_.declared_branch_set) out << FormatCoord(v);
  return out.str();
}

std::string SelfSimilarSystem::DefinitionHash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : CanonicalText()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Coord ApplyWord(const SelfSimilarSystem& system, const Word& w, Coord x) {
  for (std::size_t i = w.size(); i-- > 0;) {
    const int j = w[i];
    if (j < 0 || j >= system.size()) {
      throw Error(ErrorCode::kInput, "word letter outside the alphabet");
    }
    x = system.map(j)(x);
  }
  return x;
}

Point ApplyWord(const SelfSimilarSystem& system, const Word& w,
                const Point& x) {
  if (!system.InRegion(x.coords)) {
    throw Error(ErrorCode::kInput, "point outside the bounding region");
  }
  Point out;
  out.coords = ApplyWord(system, w, x.coords);
  if (x.address) {
    out.address = Itinerary{w.Concat(x.address->word), x.address->anchor};
  } else {
    out.address = Itinerary{w, x.coords};
  }
  return out;
}

Coord ApplyHOnce(const SelfSimilarSystem& system, Coord x) {
  const double eps = system.eps_geo();
  // Inverse branches expand distances by up to 1/c'.
  const double agree_tol = 4.0 * eps / system.contraction_lower();
  std::optional<Coord> chosen;
  for (const Cell& cell : system.cells()) {
    bool inside = false;
    if (system.dim() == 1) {
      inside = x.x >= std::min(cell.lo, cell.hi) - eps &&
               x.x <= std::max(cell.lo, cell.hi) + eps;
    } else {
      inside = InTriangle(x, cell.triangle, eps);
    }
    if (!inside) continue;
    const Coord candidate = system.map(cell.branch).Inverse(x);
    if (!chosen) {
      chosen = candidate;
    } else if (Distance(*chosen, candidate) > agree_tol) {
      throw Error(ErrorCode::kCellAmbiguity,
                  "cells overlapping at " + FormatCoord(x) +
                      " give different values of h");
    }
  }
  if (!chosen) {
    throw Error(ErrorCode::kInput,
                "point " + FormatCoord(x) + " lies in no cell of h");
  }
  return *chosen;
}

Point ApplyH(const SelfSimilarSystem& system, const Point& x, int k) {
  if (k < 0) throw Error(ErrorCode::kInput, "negative iterate of h");
  if (k == 0) return x;
  Point out;
  int remaining = k;
  Coord c = x.coords;
  if (x.address) {
    const std::size_t len = x.address->word.size();
    const std::size_t shift = std::min<std::size_t>(len, k);
    const Word rest = x.address->word.DropFront(shift);
    c = ApplyWord(system, rest, x.address->anchor);
    remaining -= static_cast<int>(shift);
    if (remaining == 0) {
      out.coords = c;
      out.address = Itinerary{rest, x.address->anchor};
      return out;
    }
  }
  for (int i = 0; i < remaining; ++i) c = ApplyHOnce(system, c);
  out.coords = c;
  return out;
}

std::vector<Point> Preimages(const SelfSimilarSystem& system, const Point& y) {
  std::vector<Point> out;
  for (int j = 0; j < system.size(); ++j) {
    const Coord c = system.map(j)(y.coords);
    bool seen = false;
    for (const Point& p : out) {
      if (system.Same(p.coords, c)) {
        seen = true;
        break;
      }
    }
    if (seen) continue;
    Point p;
    p.coords = c;
    if (y.address) {
      p.address = Itinerary{y.address->word.Prepend(j), y.address->anchor};
    } else {
      p.address = Itinerary{Word{j}, y.coords};
    }
    out.push_back(std::move(p));
  }
  return out;
}

int BranchIndex(const SelfSimilarSystem& system, Coord y, int j) {
  const Coord target = system.map(j)(y);
  int count = 0;
  for (int i = 0; i < system.size(); ++i) {
    if (system.Same(system.map(i)(y), target)) ++count;
  }
  return count;
}

SystemDefinition TentDefinition() {
  SystemDefinition def;
  def.name = "tent";
  def.dim = 1;
  def.maps = {ContractionMap::Affine1D(0.5, 0.0),
              ContractionMap::Affine1D(-0.5, 1.0)};
  def.cells = {Cell{0, 0.0, 0.5, {}}, Cell{1, 0.5, 1.0, {}}};
  def.region = {Coord{0.0, 0.0}, Coord{1.0, 0.0}};
  def.base_point = Coord{0.0, 0.0};
  def.generic_point = Coord{1.0 / 3.0, 0.0};
  return def;
}

SystemDefinition PiecewiseLinearDefinition(const std::vector<double>& breaks) {
  if (breaks.empty()) {
    throw Error(ErrorCode::kInput, "plin needs at least one interior break");
  }
  std::vector<double> t{0.0};
  t.insert(t.end(), breaks.begin(), breaks.end());
  t.push_back(1.0);
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) {
      throw Error(ErrorCode::kInput, "plin breaks must satisfy 0 < t_1 < ... < 1");
    }
  }
  SystemDefinition def;
  std::ostringstream name;
  name << "plin:";
  for (std::size_t i = 0; i < breaks.size(); ++i) {
    name << (i ? "," : "") << FormatDouble(breaks[i]);
  }
  def.name = name.str();
  def.dim = 1;
  // h rises 0 -> 1 on even-indexed pieces and falls 1 -> 0 on odd ones.
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double width = t[i + 1] - t[i];
    if (i % 2 == 0) {
      def.maps.push_back(ContractionMap::Affine1D(width, t[i]));
    } else {
      def.maps.push_back(ContractionMap::Affine1D(-width, t[i + 1]));
    }
    def.cells.push_back(Cell{static_cast<int>(i), t[i], t[i + 1], {}});
  }
  def.region = {Coord{0.0, 0.0}, Coord{1.0, 0.0}};
  def.base_point = Coord{0.0, 0.0};
  return def;
}

SystemDefinition KochDefinition() {
  const double a = 0.5, b = std::sqrt(3.0) / 6.0;  // omega = a + ib
  SystemDefinition def;
  def.name = "koch";
  def.dim = 2;
  // gamma_1(z) = omega * conj(z).
  def.maps.emplace_back(std::array<double, 4>{a, b, b, -a}, Coord{0.0, 0.0});
  // gamma_2 = (1 - omega)(conj(z) - 1) + 1 composed with z -> 1 - conj(z),
  // i.e. z -> 1 - (1 - omega) z.
  const double p = 1.0 - a, q = -b;
  def.maps.emplace_back(std::array<double, 4>{-p, q, -q, -p}, Coord{1.0, 0.0});
  def.region = {Coord{0.0, 0.0}, Coord{1.0, 0.0}, Coord{a, b}};
  for (int j = 0; j < 2; ++j) {
    Cell cell;
    cell.branch = j;
    for (int k = 0; k < 3; ++k) cell.triangle[k] = def.maps[j](def.region[k]);
    def.cells.push_back(cell);
  }
  def.base_point = Coord{0.0, 0.0};
  def.declared_branch_set = {Coord{a, b}};
  return def;
}

SystemDefinition SierpinskiDefinition() {
  const double s3 = std::sqrt(3.0);
  const Coord P{0.5, s3 / 2}, Q{0.0, 0.0}, R{1.0, 0.0};
  const Coord S{0.25, s3 / 4}, T{0.5, 0.0}, U{0.75, s3 / 4};
  SystemDefinition def;
  def.name = "sierpinski";
  def.dim = 2;
  // Each gamma_j is the similarity taking (P, Q, R) onto the listed vertex
  // triple; the rotations make h continuous across S, T, U.
  def.maps = {ContractionMap::FromTriangles({P, Q, R}, {P, S, U}),
              ContractionMap::FromTriangles({P, Q, R}, {T, S, Q}),
              ContractionMap::FromTriangles({P, Q, R}, {T, R, U})};
  def.cells = {Cell{0, 0, 0, {P, S, U}}, Cell{1, 0, 0, {T, S, Q}},
               Cell{2, 0, 0, {T, R, U}}};
  def.region = {P, Q, R};
  def.base_point = Q;
  def.generic_point = Coord{0.5, s3 / 6};
  def.declared_branch_set = {S, T, U};
  return def;
}

SystemPtr MakeSystem(SystemDefinition def) {
  return std::make_shared<const SelfSimilarSystem>(std::move(def));
}

SystemPtr BuiltinSystem(const std::string& name) {
  if (name == "tent") return MakeSystem(TentDefinition());
  if (name == "koch") return MakeSystem(KochDefinition());
  if (name == "sierpinski") return MakeSystem(SierpinskiDefinition());
  if (name.rfind("plin:", 0) == 0) {
    std::vector<double> breaks;
    std::string rest = name.substr(5);
    if (!rest.empty() && rest.front() == '<') rest = rest.substr(1);
    if (!rest.empty() && rest.back() == '>') rest.pop_back();
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        breaks.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw Error(ErrorCode::kInput, "bad plin break '" + item + "'");
      }
    }
    return MakeSystem(PiecewiseLinearDefinition(breaks));
  }
  return nullptr;
}

}  // namespace fractrace
