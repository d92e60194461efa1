#pragma once

#include <string>
#include <vector>

#include "fractrace/system.hpp"

namespace fractrace {

struct BranchIndexEntry {
  Coord y;
  int branch = 0;
  int index = 1;  // e_gamma(gamma_branch(y), y)
};

struct BranchData {
  // B_gamma: each point carries both expressions gamma_i(a) = gamma_j(a).
  std::vector<Point> branch_set;
  // C_gamma = h(B_gamma).
  std::vector<Point> branch_values;
  // P_gamma = union over k >= 1 of h^k(B_gamma).
  std::vector<Point> postcritical;
  // e_gamma over the fibres above C_gamma; every other fibre has index 1.
  std::vector<BranchIndexEntry> index_table;
  // Declared branch points that were not rediscovered, and vice versa.
  std::vector<std::string> declaration_mismatches;
  // Forward h-steps until P_gamma closed.
  int closure_steps = 0;
};

// Membership test for the attractor: y lies in gamma_w(region) for some word
// of every length up to `depth`.
bool InAttractor(const SelfSimilarSystem& system, Coord y, int depth = 30);

// Solves gamma_i(y) = gamma_j(y) in closed form for every pair of affine
// maps, keeps solutions in K, then closes B under forward h-iteration.
// Throws BranchSetNotFinite (coincident maps) or PostcriticalNotFinite.
BranchData ComputeBranchData(const SelfSimilarSystem& system,
                             int depth_cap = 64);

bool Contains(const SelfSimilarSystem& system, const std::vector<Point>& set,
              Coord p);

// O_{b,r} = h^{-r}(b), sorted by address. Each point's address is a word of
// length r anchored at b. Throws OrbitMeetsBranchSet if preimages coincide.
std::vector<Point> Orbit(const SelfSimilarSystem& system, const Point& b,
                         int r);

struct CheckItem {
  std::string name;
  bool passed = false;
  std::string detail;
  double value = 0.0;
};

struct AssumptionReport {
  std::vector<CheckItem> items;
  bool passed() const;
  // First failing item's name, empty when everything passes.
  std::string first_failure() const;
};

AssumptionReport CheckAssumptionA(const SelfSimilarSystem& system, int depth);

// Sample points of K used by the geometric checks.
std::vector<Coord> SamplePoints(const SelfSimilarSystem& system,
                                int per_cell = 64);

}  // namespace fractrace
