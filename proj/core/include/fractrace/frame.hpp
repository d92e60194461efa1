#pragma once

#include <vector>

#include "fractrace/measure.hpp"
#include "fractrace/section.hpp"

namespace fractrace {

// Truncated tight frame {u_1, ..., u_M} of the level-n tensor power.
//
// Away from the degenerate fibres (the points h^k(B), 1 <= k <= n, where
// distinct words give the same image) the frame operator is the identity.
// Near each degenerate point d the members are: class-symmetric vectors times
// a cutoff, and class-antisymmetric vectors carried on annuli
// r_{k+1} < |y - d| < r_k with r_k = r_0 / (k + 1)^2. With K annulus levels
// the frame is exact outside the punctured windows 0 < |y - d| < r_{K-1} and
// exact at d itself.
struct Frame {
  SystemPtr system;
  int level = 0;
  int requested_members = 0;
  std::vector<Section> members;
  std::vector<Coord> degenerate_points;
  // Members independent of the annulus count, and members per annulus level.
  int base_members = 0;
  int members_per_level = 0;
  int annulus_levels = 0;
  bool single_group = false;
  double outer_radius = 0.0;
  double exclusion_radius = 0.0;
  // Measured max-entry deviation of sum u u* from the projection onto the
  // admissible subspace, over the grid outside the windows.
  double reconstruction_error = 0.0;
  std::vector<Coord> grid;

  double DistanceToDegenerate(Coord y) const;
  // Inside a punctured exclusion window.
  bool InWindow(Coord y) const;
};

// M = 0 selects base_members + 10 * members_per_level. Throws
// InsufficientMembers when M < N^n.
Frame BuildTruncatedFrame(SystemPtr system, int level, int members = 0);

// Points h^k(B) for 1 <= k <= n.
std::vector<Coord> DegeneratePoints(const SelfSimilarSystem& system, int level);

// Uniform points per cell (1D) or word images (2D), refined geometrically
// towards each degenerate point.
std::vector<Coord> VerificationGrid(const SelfSimilarSystem& system,
                                    const std::vector<Coord>& degenerate,
                                    double outer_radius, int per_cell = 512);

// Max-entry |sum_i u_i u_i* - P_y| at one point.
double ReconstructionResidual(const Frame& frame, Coord y);

// a~(y) = sum of a over the distinct points of h^{-n}(y).
RealFunction TildeA(const SelfSimilarSystem& system, RealFunction a, int level);

// |sum_i (u_i | phi(a) u_i)(y) - a~(y)| at one point.
double FrameIdentityResidual(const Frame& frame, const RealFunction& a, Coord y);

// Max of FrameIdentityResidual over grid points outside the exclusion windows.
double VerifyFrameIdentity(const Frame& frame, const RealFunction& a,
                    const std::vector<Coord>& grid);

// Largest distance to the degenerate set among grid points whose frame identity
// residual exceeds `threshold`; zero when there are none.
double MeasuredWindow(const Frame& frame, const RealFunction& a,
                      const std::vector<Coord>& grid, double threshold);

struct TransferCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  // Allowed |lhs - rhs| from the reconstruction error.
  double tolerance = 0.0;
};

// lhs = sum_i mu((u_i | phi(a) u_i)), rhs = F^n(mu)(a). Throws
// AtomInExclusionWindow when an atom of mu lies in a window.
TransferCheck FrameTransferCheck(const Frame& frame, const DiscreteMeasure& mu,
                                 const RealFunction& a);

}  // namespace fractrace
