#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fractrace/geometry.hpp"

namespace fractrace {

class SelfSimilarSystem;

struct Atom {
  Point point;
  double weight = 0.0;
};

// Finitely supported measure on K. Weights are expected to be nonnegative;
// residual computations may briefly hold signed weights before clamping.
class DiscreteMeasure {
 public:
  // Atoms lighter than this fraction of the total mass are dropped in
  // probability mode.
  static constexpr double kPruneFraction = 1e-15;

  DiscreteMeasure() = default;
  explicit DiscreteMeasure(std::vector<Atom> atoms, bool probability = false)
      : atoms_(std::move(atoms)), probability_(probability) {}

  static DiscreteMeasure Dirac(const Point& p, double weight = 1.0);

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  bool probability() const { return probability_; }
  void set_probability(bool p) { probability_ = p; }

  double TotalMass() const;

  void Add(const Point& p, double weight);
  void Append(const DiscreteMeasure& other, double scale = 1.0);
  DiscreteMeasure Scaled(double s) const;

  // Merges atoms closer than eps (the merged atom keeps the least address),
  // drops zero weights, prunes in probability mode and sorts canonically.
  void Merge(double eps);

 private:
  std::vector<Atom> atoms_;
  bool probability_ = false;
};

// Canonical atom order: by address word when every atom has one, else by
// coordinates.
void SortCanonical(std::vector<Atom>& atoms);

using RealFunction = std::function<double(Coord)>;
using ComplexFunction = std::function<std::complex<double>(Coord)>;

struct TestFunction {
  std::string name;
  RealFunction eval;
  // Analytic Lipschitz constant when known.
  std::optional<double> lipschitz;
  std::optional<double> sup_norm;
  bool nonnegative = false;

  double operator()(Coord c) const { return eval(c); }
};

double Integrate(const DiscreteMeasure& mu, const RealFunction& f);
std::complex<double> IntegrateComplex(const DiscreteMeasure& mu,
                                      const ComplexFunction& f);

// Total weight of atoms within eps of x.
double PointMass(const DiscreteMeasure& mu, Coord x, double eps);

// Sorted lookup for repeated point-mass queries on a fixed measure.
class AtomIndex {
 public:
  AtomIndex(const DiscreteMeasure& mu, double eps);
  double MassAt(Coord x) const;
  // Indices of atoms within eps of x.
  std::vector<std::size_t> Near(Coord x) const;

 private:
  const DiscreteMeasure* mu_;
  double eps_;
  std::vector<std::size_t> order_;
  std::vector<double> xs_;
};

}  // namespace fractrace
