#include "fractrace/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fractrace {

DiscreteMeasure DiscreteMeasure::Dirac(const Point& p, double weight) {
  return DiscreteMeasure({Atom{p, weight}}, false);
}

double DiscreteMeasure::TotalMass() const {
  double total = 0.0;
  for (const Atom& a : atoms_) total += a.weight;
  return total;
}

void DiscreteMeasure::Add(const Point& p, double weight) {
  atoms_.push_back(Atom{p, weight});
}

void DiscreteMeasure::Append(const DiscreteMeasure& other, double scale) {
  atoms_.reserve(atoms_.size() + other.atoms_.size());
  for (const Atom& a : other.atoms_) atoms_.push_back(Atom{a.point, scale * a.weight});
}

DiscreteMeasure DiscreteMeasure::Scaled(double s) const {
  DiscreteMeasure out = *this;
  for (Atom& a : out.atoms_) a.weight *= s;
  return out;
}

namespace {

bool AddressLess(const Point& a, const Point& b) {
  if (a.address && b.address) {
    if (a.address->word != b.address->word) {
      return a.address->word < b.address->word;
    }
    return a.address->anchor < b.address->anchor;
  }
  if (a.address != b.address) return a.address.has_value();
  return false;
}

}  // namespace

void SortCanonical(std::vector<Atom>& atoms) {
  const bool all_addressed =
      std::all_of(atoms.begin(), atoms.end(),
                  [](const Atom& a) { return a.point.address.has_value(); });
  if (all_addressed) {
    std::stable_sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
      if (a.point.address->word != b.point.address->word) {
        return a.point.address->word < b.point.address->word;
      }
      return a.point.coords < b.point.coords;
    });
  } else {
    std::stable_sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
      return a.point.coords < b.point.coords;
    });
  }
}

void DiscreteMeasure::Merge(double eps) {
  const std::size_t n = atoms_.size();
  std::vector<Coord> coords(n);
  for (std::size_t i = 0; i < n; ++i) coords[i] = atoms_[i].point.coords;
  const std::vector<std::size_t> rep = ClusterNear(coords, eps);
  std::vector<Atom> merged;
  std::vector<std::size_t> slot(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = rep[i];
    if (slot[r] == n) {
      slot[r] = merged.size();
      merged.push_back(atoms_[r]);
      merged.back().weight = 0.0;
    }
    Atom& target = merged[slot[r]];
    target.weight += atoms_[i].weight;
    if (AddressLess(atoms_[i].point, target.point)) {
      target.point.address = atoms_[i].point.address;
      target.point.coords = atoms_[i].point.coords;
    }
  }
  double total = 0.0;
  for (const Atom& a : merged) total += a.weight;
  const double cut = probability_ ? kPruneFraction * std::abs(total) : 0.0;
  std::vector<Atom> kept;
  kept.reserve(merged.size());
  double kept_mass = 0.0;
  for (Atom& a : merged) {
    if (a.weight == 0.0 || std::abs(a.weight) < cut) continue;
    kept_mass += a.weight;
    kept.push_back(std::move(a));
  }
  if (probability_ && kept_mass > 0.0 && kept.size() != merged.size()) {
    for (Atom& a : kept) a.weight *= total / kept_mass;
  }
  SortCanonical(kept);
  atoms_ = std::move(kept);
}

double Integrate(const DiscreteMeasure& mu, const RealFunction& f) {
  double sum = 0.0;
  for (const Atom& a : mu.atoms()) sum += a.weight * f(a.point.coords);
  return sum;
}

std::complex<double> IntegrateComplex(const DiscreteMeasure& mu,
                                      const ComplexFunction& f) {
  std::complex<double> sum = 0.0;
  for (const Atom& a : mu.atoms()) sum += a.weight * f(a.point.coords);
  return sum;
}

double PointMass(const DiscreteMeasure& mu, Coord x, double eps) {
  double mass = 0.0;
  for (const Atom& a : mu.atoms()) {
    if (Distance(a.point.coords, x) <= eps) mass += a.weight;
  }
  return mass;
}

AtomIndex::AtomIndex(const DiscreteMeasure& mu, double eps)
    : mu_(&mu), eps_(eps), order_(mu.size()) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  const auto& atoms = mu.atoms();
  std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
    return atoms[a].point.coords.x < atoms[b].point.coords.x;
  });
  xs_.reserve(order_.size());
  for (std::size_t i : order_) xs_.push_back(atoms[i].point.coords.x);
}

std::vector<std::size_t> AtomIndex::Near(Coord x) const {
  std::vector<std::size_t> out;
  auto it = std::lower_bound(xs_.begin(), xs_.end(), x.x - eps_);
  const auto& atoms = mu_->atoms();
  for (auto k = static_cast<std::size_t>(it - xs_.begin()); k < xs_.size(); ++k) {
    if (xs_[k] > x.x + eps_) break;
    if (Distance(atoms[order_[k]].point.coords, x) <= eps_) out.push_back(order_[k]);
  }
  return out;
}

double AtomIndex::MassAt(Coord x) const {
  double mass = 0.0;
  for (std::size_t i : Near(x)) mass += mu_->atoms()[i].weight;
  return mass;
}

}  // namespace fractrace
