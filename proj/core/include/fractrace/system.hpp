#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fractrace/geometry.hpp"

namespace fractrace {

// Region of the ambient space on which the inverse branch `branch` of the
// expansive section h is used: an interval [lo, hi] in 1D, a triangle in 2D.
struct Cell {
  int branch = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::array<Coord, 3> triangle{};
};

struct SystemDefinition {
  std::string name;
  int dim = 1;
  std::vector<ContractionMap> maps;
  std::vector<Cell> cells;
  // 1D: region[0].x, region[1].x are the interval endpoints.
  // 2D: a triangle containing the attractor.
  std::vector<Coord> region;
  Coord base_point;
  // A point whose forward and backward orbits avoid the branch orbits;
  // used to seed Hutchinson estimates that must carry no orbit atoms.
  std::optional<Coord> generic_point;
  std::optional<double> diam;
  // Declared branch set (2D systems); verified, never trusted blindly.
  std::vector<Coord> declared_branch_set;
};

// Immutable description of a self-similar map (K, gamma) with its section h.
class SelfSimilarSystem {
 public:
  explicit SelfSimilarSystem(SystemDefinition def);

  const std::string& name() const { return def_.name; }
  int dim() const { return def_.dim; }
  int size() const { return static_cast<int>(def_.maps.size()); }
  const ContractionMap& map(int j) const { return def_.maps[j]; }
  const std::vector<ContractionMap>& maps() const { return def_.maps; }
  const std::vector<Cell>& cells() const { return def_.cells; }
  const std::vector<Coord>& region() const { return def_.region; }
  const SystemDefinition& definition() const { return def_; }

  Point base_point() const { return Point(def_.base_point); }
  Coord generic_point() const;
  double diam() const { return diam_; }
  // Geometric equality tolerance: 1e-9 * diam(K).
  double eps_geo() const { return eps_geo_; }
  // Largest and smallest contraction constants over all maps.
  double contraction_upper() const { return c_upper_; }
  double contraction_lower() const { return c_lower_; }

  bool Same(Coord a, Coord b) const { return Distance(a, b) <= eps_geo_; }
  bool InRegion(Coord p) const;

  // Canonical text of the definition; equal systems give equal text.
  std::string CanonicalText() const;
  // FNV-1a hash of CanonicalText(), hex encoded.
  std::string DefinitionHash() const;

 private:
  SystemDefinition def_;
  double diam_ = 1.0;
  double eps_geo_ = 1e-9;
  double c_upper_ = 0.0;
  double c_lower_ = 1.0;
};

using SystemPtr = std::shared_ptr<const SelfSimilarSystem>;

// gamma_{j_1} o ... o gamma_{j_k}(x). The result's address is w followed by
// x's address (anchored where x's address is anchored, or at x itself).
Point ApplyWord(const SelfSimilarSystem& system, const Word& w, const Point& x);
Coord ApplyWord(const SelfSimilarSystem& system, const Word& w, Coord x);

// h^k(x). Uses the address shift when x carries an address of length >= k,
// otherwise cell lookup plus inverse branch. Throws CellAmbiguity when
// overlapping cells disagree, and InputError when x is in no cell.
Point ApplyH(const SelfSimilarSystem& system, const Point& x, int k);
Coord ApplyHOnce(const SelfSimilarSystem& system, Coord x);

// {gamma_j(y)} without multiplicity, in ascending branch order of the first
// map producing each value.
std::vector<Point> Preimages(const SelfSimilarSystem& system, const Point& y);

// e_gamma(gamma_j(y), y) = #{i : gamma_i(y) = gamma_j(y)}.
int BranchIndex(const SelfSimilarSystem& system, Coord y, int j);

// Built-in systems: "tent", "plin:<t_1,...,t_{n-1}>", "koch", "sierpinski".
SystemDefinition TentDefinition();
SystemDefinition PiecewiseLinearDefinition(const std::vector<double>& breaks);
SystemDefinition KochDefinition();
SystemDefinition SierpinskiDefinition();

SystemPtr MakeSystem(SystemDefinition def);
SystemPtr BuiltinSystem(const std::string& name);

}  // namespace fractrace
