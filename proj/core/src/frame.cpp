#include "fractrace/frame.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fractrace/dynamics.hpp"
#include "fractrace/error.hpp"

namespace fractrace {
namespace {

std::size_t WordIndex(const Word& w, int alphabet) {
  std::size_t index = 0;
  for (int letter : w.letters()) index = index * alphabet + letter;
  return index;
}

// Class label (smallest member index) of each word under equality of images.
std::vector<std::size_t> ImageClasses(const SelfSimilarSystem& system,
                                      const std::vector<Word>& words, Coord y) {
  std::vector<Coord> images;
  images.reserve(words.size());
  for (const Word& w : words) images.push_back(ApplyWord(system, w, y));
  std::vector<std::size_t> label(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    label[i] = i;
    for (std::size_t j = 0; j < i; ++j) {
      if (system.Same(images[i], images[j])) {
        label[i] = label[j];
        break;
      }
    }
  }
  return label;
}

std::vector<std::vector<std::size_t>> Groups(const std::vector<std::size_t>& label) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> slot(label.size(), label.size());
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (slot[label[i]] == label.size()) {
      slot[label[i]] = out.size();
      out.emplace_back();
    }
    out[slot[label[i]]].push_back(i);
  }
  return out;
}

// Symmetric unit vector and an orthonormal basis of its complement inside
// one class of words.
std::vector<double> SymmetricVector(const std::vector<std::size_t>& cls,
                                    std::size_t dim) {
  std::vector<double> v(dim, 0.0);
  const double s = 1.0 / std::sqrt(static_cast<double>(cls.size()));
  for (std::size_t i : cls) v[i] = s;
  return v;
}

std::vector<std::vector<double>> AntisymmetricBasis(
    const std::vector<std::size_t>& cls, std::size_t dim) {
  std::vector<std::vector<double>> out;
  for (std::size_t l = 1; l < cls.size(); ++l) {
    std::vector<double> v(dim, 0.0);
    const double s = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
    for (std::size_t k = 0; k < l; ++k) v[cls[k]] = s;
    v[cls[l]] = -static_cast<double>(l) * s;
    out.push_back(std::move(v));
  }
  return out;
}

double Radius(double r0, int k) {
  const double d = static_cast<double>(k + 1);
  return r0 / (d * d);
}

// Linear ramp: 0 for rho <= r_{k+1}, 1 for rho >= r_k.
double Phi(double r0, int k, double rho) {
  if (k < 0) return 0.0;
  const double hi = Radius(r0, k), lo = Radius(r0, k + 1);
  if (rho >= hi) return 1.0;
  if (rho <= lo) return 0.0;
  return (rho - lo) / (hi - lo);
}

double Psi(double r0, int k, double rho) {
  return std::sqrt(std::max(0.0, Phi(r0, k, rho) - Phi(r0, k - 1, rho)));
}

// 1 inside radius R, 0 beyond 2R.
double Cutoff(double R, double rho) {
  if (rho <= R) return 1.0;
  if (rho >= 2.0 * R) return 0.0;
  return (2.0 * R - rho) / R;
}

Section ProfileSection(SystemPtr system, int level,
                       std::function<double(Coord)> profile,
                       std::vector<double> vec) {
  const int n = system->size();
  return Section(std::move(system), level,
                 [profile = std::move(profile), vec = std::move(vec), n](
                     const Word& w, Coord y) {
                   const double v = vec[WordIndex(w, n)];
                   if (v == 0.0) return Complex(0.0);
                   return Complex(profile(y) * v);
                 });
}

}  // namespace

double Frame::DistanceToDegenerate(Coord y) const {
  double best = std::numeric_limits<double>::infinity();
  for (Coord d : degenerate_points) best = std::min(best, Distance(d, y));
  return best;
}

bool Frame::InWindow(Coord y) const {
  const double rho = DistanceToDegenerate(y);
  return rho > system->eps_geo() && rho < exclusion_radius;
}

std::vector<Coord> DegeneratePoints(const SelfSimilarSystem& system, int level) {
  const BranchData data = ComputeBranchData(system);
  std::vector<Coord> out;
  std::vector<Coord> current;
  for (const Point& b : data.branch_set) current.push_back(b.coords);
  for (int k = 1; k <= level; ++k) {
    for (Coord& c : current) c = ApplyHOnce(system, c);
    for (Coord c : current) {
      const bool seen = std::any_of(out.begin(), out.end(),
                                    [&](Coord d) { return system.Same(c, d); });
      if (!seen) out.push_back(c);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Coord> VerificationGrid(const SelfSimilarSystem& system,
                                    const std::vector<Coord>& degenerate,
                                    double outer_radius, int per_cell) {
  std::vector<Coord> grid;
  const int refine = 200;
  if (system.dim() == 1) {
    for (const Cell& cell : system.cells()) {
      for (int i = 0; i < per_cell; ++i) {
        const double t = static_cast<double>(i) / (per_cell - 1);
        grid.push_back({cell.lo + t * (cell.hi - cell.lo), 0.0});
      }
    }
    for (Coord d : degenerate) {
      grid.push_back(d);
      for (int i = 0; i < refine; ++i) {
        const double rho = outer_radius * std::pow(10.0, -7.0 * i / (refine - 1));
        for (double sign : {-1.0, 1.0}) {
          const Coord y{d.x + sign * rho, 0.0};
          if (system.InRegion(y)) grid.push_back(y);
        }
      }
    }
    return grid;
  }
  grid = SamplePoints(system, per_cell);
  std::vector<Coord> anchors = system.region();
  anchors.push_back(system.generic_point());
  for (Coord d : degenerate) {
    grid.push_back(d);
    for (Coord x : anchors) {
      const double len = Distance(x, d);
      if (len <= system.eps_geo()) continue;
      for (int i = 0; i < refine / 2; ++i) {
        const double rho =
            outer_radius * std::pow(10.0, -7.0 * i / (refine / 2 - 1));
        if (rho >= len) continue;
        grid.push_back(d + (rho / len) * (x - d));
      }
    }
  }
  return grid;
}

Frame BuildTruncatedFrame(SystemPtr system, int level, int members) {
  if (level < 0) throw Error(ErrorCode::kInput, "negative frame level");
  const SelfSimilarSystem& sys = *system;
  const std::vector<Word> words = AllWords(sys.size(), level);
  const std::size_t dim = words.size();
  if (members != 0 && members < static_cast<int>(dim)) {
    throw Error(ErrorCode::kInsufficientMembers,
                "a frame of the level-" + std::to_string(level) +
                    " module needs at least " + std::to_string(dim) + " members");
  }
  Frame frame;
  frame.system = system;
  frame.level = level;
  frame.degenerate_points = DegeneratePoints(sys, level);
  const auto& D = frame.degenerate_points;

  if (D.empty()) {
    frame.base_members = static_cast<int>(dim);
    frame.requested_members = members == 0 ? static_cast<int>(dim) : members;
    for (std::size_t i = 0; i < dim; ++i) {
      std::vector<double> e(dim, 0.0);
      e[i] = 1.0;
      frame.members.push_back(
          ProfileSection(system, level, [](Coord) { return 1.0; }, e));
    }
    frame.grid = VerificationGrid(sys, D, 0.0);
  } else {
    std::vector<std::vector<std::vector<std::size_t>>> classes;
    for (Coord d : D) classes.push_back(Groups(ImageClasses(sys, words, d)));
    frame.single_group = std::all_of(classes.begin(), classes.end(),
                                     [&](const auto& c) { return c == classes[0]; });
    double sep = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < D.size(); ++i) {
      for (std::size_t j = i + 1; j < D.size(); ++j) sep = std::min(sep, Distance(D[i], D[j]));
    }
    const double R = D.size() > 1 ? sep / 4.0 : sys.diam() / 4.0;
    frame.outer_radius = R;
    const std::vector<Coord> pts = D;
    auto rho_set = [pts](Coord y) {
      double best = std::numeric_limits<double>::infinity();
      for (Coord d : pts) best = std::min(best, Distance(d, y));
      return best;
    };

    std::vector<Section> base;
    // Each entry: (profile factor, vector) for one annulus level.
    std::vector<std::pair<std::function<double(Coord, int)>, std::vector<double>>>
        annulus;
    if (frame.single_group) {
      for (const auto& cls : classes[0]) {
        base.push_back(ProfileSection(system, level, [](Coord) { return 1.0; },
                                      SymmetricVector(cls, dim)));
        for (auto& a : AntisymmetricBasis(cls, dim)) {
          annulus.emplace_back(
              [rho_set, R](Coord y, int k) { return Psi(R, k, rho_set(y)); }, a);
        }
      }
    } else {
      for (std::size_t p = 0; p < D.size(); ++p) {
        const Coord d = D[p];
        for (const auto& cls : classes[p]) {
          base.push_back(ProfileSection(
              system, level, [d, R](Coord y) { return Cutoff(R, Distance(d, y)); },
              SymmetricVector(cls, dim)));
          for (auto& a : AntisymmetricBasis(cls, dim)) {
            annulus.emplace_back(
                [d, R](Coord y, int k) {
                  const double rho = Distance(d, y);
                  return Cutoff(R, rho) * Psi(R, k, rho);
                },
                a);
          }
        }
      }
      auto away = [pts, R](Coord y) {
        double s = 0.0;
        for (Coord d : pts) {
          const double c = Cutoff(R, Distance(d, y));
          s += c * c;
        }
        return std::sqrt(std::max(0.0, 1.0 - s));
      };
      for (std::size_t i = 0; i < dim; ++i) {
        std::vector<double> e(dim, 0.0);
        e[i] = 1.0;
        base.push_back(ProfileSection(system, level, away, e));
      }
    }
    frame.base_members = static_cast<int>(base.size());
    frame.members_per_level = static_cast<int>(annulus.size());
    const int m = members == 0 ? frame.base_members + 10 * frame.members_per_level
                               : members;
    frame.requested_members = m;
    if (m < frame.base_members) {
      base.erase(base.begin() + m, base.end());
      frame.annulus_levels = 0;
    } else {
      frame.annulus_levels = (m - frame.base_members) / frame.members_per_level;
    }
    frame.members = std::move(base);
    for (int k = 0; k < frame.annulus_levels; ++k) {
      for (const auto& [factor, vec] : annulus) {
        frame.members.push_back(ProfileSection(
            system, level, [factor = factor, k](Coord y) { return factor(y, k); },
            vec));
      }
    }
    frame.exclusion_radius =
        frame.annulus_levels > 0 ? Radius(R, frame.annulus_levels - 1) : 0.0;
    frame.grid = VerificationGrid(sys, D, R);
  }

  double worst = 0.0;
  for (Coord y : frame.grid) {
    if (frame.InWindow(y)) continue;
    worst = std::max(worst, ReconstructionResidual(frame, y));
  }
  frame.reconstruction_error = worst;
  return frame;
}

double ReconstructionResidual(const Frame& frame, Coord y) {
  const SelfSimilarSystem& sys = *frame.system;
  const std::vector<Word> words = AllWords(sys.size(), frame.level);
  const std::size_t dim = words.size();
  std::vector<Complex> s(dim * dim, 0.0);
  for (const Section& u : frame.members) {
    const std::vector<Complex> c = u.Components(y);
    for (std::size_t i = 0; i < dim; ++i) {
      if (c[i] == 0.0) continue;
      for (std::size_t j = 0; j < dim; ++j) s[i * dim + j] += c[i] * std::conj(c[j]);
    }
  }
  const std::vector<std::size_t> label = ImageClasses(sys, words, y);
  std::vector<double> size(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) size[label[i]] += 1.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double p = label[i] == label[j] ? 1.0 / size[label[i]] : 0.0;
      worst = std::max(worst, std::abs(s[i * dim + j] - p));
    }
  }
  return worst;
}

RealFunction TildeA(const SelfSimilarSystem& system, RealFunction a, int level) {
  const SelfSimilarSystem* sys = &system;
  auto words = std::make_shared<const std::vector<Word>>(AllWords(system.size(), level));
  return [sys, a = std::move(a), words](Coord y) {
    std::vector<Coord> seen;
    double sum = 0.0;
    for (const Word& w : *words) {
      const Coord x = ApplyWord(*sys, w, y);
      const bool dup = std::any_of(seen.begin(), seen.end(),
                                   [&](Coord s) { return sys->Same(s, x); });
      if (dup) continue;
      seen.push_back(x);
      sum += a(x);
    }
    return sum;
  };
}

double FrameIdentityResidual(const Frame& frame, const RealFunction& a, Coord y) {
  const SelfSimilarSystem& sys = *frame.system;
  const std::vector<Word> words = AllWords(sys.size(), frame.level);
  std::vector<double> weight(words.size(), 0.0);
  for (const Section& u : frame.members) {
    const std::vector<Complex> c = u.Components(y);
    for (std::size_t i = 0; i < c.size(); ++i) weight[i] += std::norm(c[i]);
  }
  double lhs = 0.0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (weight[i] != 0.0) lhs += weight[i] * a(ApplyWord(sys, words[i], y));
  }
  return std::abs(lhs - TildeA(sys, a, frame.level)(y));
}

double VerifyFrameIdentity(const Frame& frame, const RealFunction& a,
                    const std::vector<Coord>& grid) {
  double worst = 0.0;
  for (Coord y : grid) {
    if (frame.InWindow(y)) continue;
    worst = std::max(worst, FrameIdentityResidual(frame, a, y));
  }
  return worst;
}

double MeasuredWindow(const Frame& frame, const RealFunction& a,
                      const std::vector<Coord>& grid, double threshold) {
  double window = 0.0;
  for (Coord y : grid) {
    if (FrameIdentityResidual(frame, a, y) > threshold) {
      window = std::max(window, frame.DistanceToDegenerate(y));
    }
  }
  return window;
}

TransferCheck FrameTransferCheck(const Frame& frame, const DiscreteMeasure& mu,
                                 const RealFunction& a) {
  const SelfSimilarSystem& sys = *frame.system;
  const std::vector<Word> words = AllWords(sys.size(), frame.level);
  TransferCheck check;
  for (const Atom& atom : mu.atoms()) {
    const Coord y = atom.point.coords;
    if (frame.InWindow(y)) {
      throw Error(ErrorCode::kAtomInExclusionWindow,
                  "atom at distance " +
                      std::to_string(frame.DistanceToDegenerate(y)) +
                      " from a degenerate point, inside the window of radius " +
                      std::to_string(frame.exclusion_radius));
    }
    double sum = 0.0;
    double sup = 0.0;
    std::vector<double> weight(words.size(), 0.0);
    for (const Section& u : frame.members) {
      const std::vector<Complex> c = u.Components(y);
      for (std::size_t i = 0; i < c.size(); ++i) weight[i] += std::norm(c[i]);
    }
    for (std::size_t i = 0; i < words.size(); ++i) {
      const double v = a(ApplyWord(sys, words[i], y));
      sup = std::max(sup, std::abs(v));
      sum += weight[i] * v;
    }
    check.lhs += atom.weight * sum;
    const double local =
        std::max(frame.reconstruction_error, ReconstructionResidual(frame, y));
    check.tolerance += std::abs(atom.weight) * static_cast<double>(words.size()) *
                       sup * local;
  }
  DiscreteMeasure pushed = mu;
  for (int k = 0; k < frame.level; ++k) pushed = TransferF(sys, pushed);
  check.rhs = Integrate(pushed, a);
  check.tolerance += 1e-12 * std::max(1.0, std::abs(check.rhs));
  return check;
}

}  // namespace fractrace
