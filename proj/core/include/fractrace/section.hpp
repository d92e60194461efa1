#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "fractrace/branch.hpp"
#include "fractrace/measure.hpp"
#include "fractrace/system.hpp"

namespace fractrace {

using Complex = std::complex<double>;
// Component f_w(y) of a level-n section for a word w of length n.
using SectionEval = std::function<Complex(const Word& w, Coord y)>;

// An element of the n-th tensor power of X = C(graph of gamma), stored as its
// N^n component functions y -> f(gamma_w(y), ..., y).
class Section {
 public:
  Section(SystemPtr system, int level, SectionEval eval);

  static Section Zero(SystemPtr system, int level);
  // y_0^n: every component equal to N^{-n/2}.
  static Section Unit(SystemPtr system, int level);
  // f_w(y) = g(gamma_w(y), y); compatible by construction.
  static Section FromGraph(SystemPtr system, int level,
                           std::function<Complex(Coord top, Coord y)> g);

  int level() const { return level_; }
  const SystemPtr& system() const { return system_; }
  // All words of length level(), lexicographic.
  const std::vector<Word>& words() const { return *words_; }

  Complex operator()(const Word& w, Coord y) const { return eval_(w, y); }
  // Components at y in the order of words().
  std::vector<Complex> Components(Coord y) const;

  Section Plus(const Section& other, Complex scale = 1.0) const;

 private:
  SystemPtr system_;
  int level_ = 0;
  SectionEval eval_;
  std::shared_ptr<const std::vector<Word>> words_;
};

// theta_{left, right}(zeta) = left . (right | zeta).
struct RankOne {
  Section left;
  Section right;
};

// (xi | eta)(y) = sum over all words, with multiplicity, of conj(xi_w) eta_w.
ComplexFunction InnerProduct(const Section& xi, const Section& eta);
// (phi(a) xi)_w(y) = a(gamma_w(y)) xi_w(y).
Section LeftAction(const ComplexFunction& a, const Section& xi);
// (xi . a)_w(y) = xi_w(y) a(y).
Section RightAction(const Section& xi, const ComplexFunction& a);
// (xi (x) eta)_{vw}(y) = xi_v(gamma_w(y)) eta_w(y).
Section Tensor(const Section& xi, const Section& eta);

Section Apply(const RankOne& theta, const Section& zeta);
// theta_{xi,eta} theta_{zeta,omega} = theta_{xi . (eta|zeta), omega}.
RankOne Compose(const RankOne& s, const RankOne& t);

// a vanishes on the branch set, up to tol.
bool InJX(const RealFunction& a, const BranchData& branch, double tol = 1e-9);

// alpha^n(a)(x) = a(h^n(x)).
RealFunction AlphaEndo(SystemPtr system, RealFunction a, int n);
ComplexFunction AlphaEndo(SystemPtr system, ComplexFunction a, int n);

// Largest |xi_w(y) - xi_w'(y)| over grid points where gamma_w(y) and
// gamma_w'(y) coincide.
double CompatibilityDefect(const Section& xi, const std::vector<Coord>& grid);

// Random smooth section built from a graph function with a few complex
// Fourier modes; deterministic in the generator state.
Section RandomSection(SystemPtr system, int level, std::mt19937_64& rng);
// Random smooth complex function on K.
ComplexFunction RandomFunction(std::mt19937_64& rng);

}  // namespace fractrace
