#include "fractrace/section.hpp"

#include <cmath>

#include "fractrace/error.hpp"

namespace fractrace {
namespace {

void RequireSameLevel(const Section& a, const Section& b) {
  if (a.level() != b.level()) {
    throw Error(ErrorCode::kLevelMismatch,
                "sections at levels " + std::to_string(a.level()) + " and " +
                    std::to_string(b.level()));
  }
}

Word Slice(const Word& w, std::size_t from, std::size_t to) {
  return Word(std::vector<int>(w.letters().begin() + static_cast<long>(from),
                               w.letters().begin() + static_cast<long>(to)));
}

}  // namespace

Section::Section(SystemPtr system, int level, SectionEval eval)
    : system_(std::move(system)), level_(level), eval_(std::move(eval)) {
  if (!system_) throw Error(ErrorCode::kInput, "section without a system");
  if (level_ < 0) throw Error(ErrorCode::kInput, "negative section level");
  words_ = std::make_shared<const std::vector<Word>>(
      AllWords(system_->size(), level_));
}

Section Section::Zero(SystemPtr system, int level) {
  return Section(std::move(system), level,
                 [](const Word&, Coord) { return Complex(0.0); });
}

Section Section::Unit(SystemPtr system, int level) {
  const double v = std::pow(static_cast<double>(system->size()), -0.5 * level);
  return Section(std::move(system), level,
                 [v](const Word&, Coord) { return Complex(v); });
}

Section Section::FromGraph(SystemPtr system, int level,
                           std::function<Complex(Coord top, Coord y)> g) {
  const SelfSimilarSystem* sys = system.get();
  return Section(std::move(system), level,
                 [sys, g = std::move(g)](const Word& w, Coord y) {
                   return g(ApplyWord(*sys, w, y), y);
                 });
}

std::vector<Complex> Section::Components(Coord y) const {
  std::vector<Complex> out;
  out.reserve(words_->size());
  for (const Word& w : *words_) out.push_back(eval_(w, y));
  return out;
}

Section Section::Plus(const Section& other, Complex scale) const {
  RequireSameLevel(*this, other);
  SectionEval a = eval_, b = other.eval_;
  return Section(system_, level_, [a, b, scale](const Word& w, Coord y) {
    return a(w, y) + scale * b(w, y);
  });
}

ComplexFunction InnerProduct(const Section& xi, const Section& eta) {
  RequireSameLevel(xi, eta);
  return [xi, eta](Coord y) {
    Complex sum = 0.0;
    for (const Word& w : xi.words()) sum += std::conj(xi(w, y)) * eta(w, y);
    return sum;
  };
}

Section LeftAction(const ComplexFunction& a, const Section& xi) {
  const SelfSimilarSystem* sys = xi.system().get();
  return Section(xi.system(), xi.level(), [a, xi, sys](const Word& w, Coord y) {
    return a(ApplyWord(*sys, w, y)) * xi(w, y);
  });
}

Section RightAction(const Section& xi, const ComplexFunction& a) {
  return Section(xi.system(), xi.level(),
                 [a, xi](const Word& w, Coord y) { return xi(w, y) * a(y); });
}

Section Tensor(const Section& xi, const Section& eta) {
  if (xi.system() != eta.system()) {
    throw Error(ErrorCode::kInput, "tensor of sections over different systems");
  }
  const SelfSimilarSystem* sys = xi.system().get();
  const std::size_t m = static_cast<std::size_t>(xi.level());
  return Section(xi.system(), xi.level() + eta.level(),
                 [xi, eta, sys, m](const Word& vw, Coord y) {
                   const Word v = Slice(vw, 0, m);
                   const Word w = Slice(vw, m, vw.size());
                   return xi(v, ApplyWord(*sys, w, y)) * eta(w, y);
                 });
}

Section Apply(const RankOne& theta, const Section& zeta) {
  RequireSameLevel(theta.right, zeta);
  RequireSameLevel(theta.left, zeta);
  return RightAction(theta.left, InnerProduct(theta.right, zeta));
}

RankOne Compose(const RankOne& s, const RankOne& t) {
  RequireSameLevel(s.left, t.left);
  return RankOne{RightAction(s.left, InnerProduct(s.right, t.left)), t.right};
}

bool InJX(const RealFunction& a, const BranchData& branch, double tol) {
  for (const Point& b : branch.branch_set) {
    if (std::abs(a(b.coords)) > tol) return false;
  }
  return true;
}

RealFunction AlphaEndo(SystemPtr system, RealFunction a, int n) {
  if (n < 0) throw Error(ErrorCode::kInput, "negative power of alpha");
  if (n == 0) return a;
  return [system, a = std::move(a), n](Coord x) {
    return a(ApplyH(*system, Point(x), n).coords);
  };
}

ComplexFunction AlphaEndo(SystemPtr system, ComplexFunction a, int n) {
  if (n < 0) throw Error(ErrorCode::kInput, "negative power of alpha");
  if (n == 0) return a;
  return [system, a = std::move(a), n](Coord x) {
    return a(ApplyH(*system, Point(x), n).coords);
  };
}

double CompatibilityDefect(const Section& xi, const std::vector<Coord>& grid) {
  const SelfSimilarSystem& sys = *xi.system();
  const auto& words = xi.words();
  double worst = 0.0;
  for (Coord y : grid) {
    std::vector<Coord> images;
    images.reserve(words.size());
    for (const Word& w : words) images.push_back(ApplyWord(sys, w, y));
    for (std::size_t i = 0; i < words.size(); ++i) {
      for (std::size_t j = i + 1; j < words.size(); ++j) {
        if (sys.Same(images[i], images[j])) {
          worst = std::max(worst, std::abs(xi(words[i], y) - xi(words[j], y)));
        }
      }
    }
  }
  return worst;
}

namespace {

struct Mode {
  Complex coefficient;
  double px, py, qx, qy, phase;
};

std::vector<Mode> RandomModes(std::mt19937_64& rng, int count) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> freq(-3.0, 3.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::vector<Mode> modes;
  for (int k = 0; k < count; ++k) {
    Mode m;
    const double re = gauss(rng), im = gauss(rng);
    m.coefficient = Complex(re, im) / std::sqrt(2.0 * count);
    m.px = freq(rng);
    m.py = freq(rng);
    m.qx = freq(rng);
    m.qy = freq(rng);
    m.phase = angle(rng);
    modes.push_back(m);
  }
  return modes;
}

}  // namespace

Section RandomSection(SystemPtr system, int level, std::mt19937_64& rng) {
  const std::vector<Mode> modes = RandomModes(rng, 3);
  return Section::FromGraph(std::move(system), level,
                            [modes](Coord top, Coord y) {
                              Complex sum = 0.0;
                              for (const Mode& m : modes) {
                                const double t = m.px * top.x + m.py * top.y +
                                                 m.qx * y.x + m.qy * y.y + m.phase;
                                sum += m.coefficient * std::polar(1.0, t);
                              }
                              return sum;
                            });
}

ComplexFunction RandomFunction(std::mt19937_64& rng) {
  const std::vector<Mode> modes = RandomModes(rng, 3);
  return [modes](Coord y) {
    Complex sum = 0.0;
    for (const Mode& m : modes) {
      sum += m.coefficient * std::polar(1.0, m.px * y.x + m.py * y.y + m.phase);
    }
    return sum;
  };
}

}  // namespace fractrace
