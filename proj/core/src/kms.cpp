#include "fractrace/kms.hpp"

#include <cmath>
#include <sstream>

#include "fractrace/branch.hpp"
#include "fractrace/error.hpp"

namespace fractrace {

KmsWeights ComputeKmsWeights(int alphabet_size, const KmsSpec& spec) {
  if (spec.depth < 0) throw Error(ErrorCode::kInput, "negative KMS depth");
  const double n = alphabet_size;
  const double beta = spec.exp_beta ? std::log(*spec.exp_beta) : spec.beta;
  if (spec.exp_beta && *spec.exp_beta <= 0.0) {
    throw Error(ErrorCode::kInput, "e^beta must be positive");
  }
  if (!(beta > std::log(n) + 1e-6)) {
    std::ostringstream os;
    os.precision(17);
    os << "beta = " << beta << " must exceed log N = " << std::log(n);
    throw Error(ErrorCode::kBetaTooSmall, os.str());
  }
  KmsWeights w;
  w.ratio = spec.exp_beta ? n / *spec.exp_beta : n * std::exp(-beta);
  w.normalizer = 1.0 - w.ratio;
  double power = 1.0;
  for (int j = 0; j <= spec.depth; ++j) {
    w.weights.push_back(w.normalizer * power);
    power *= w.ratio;
  }
  w.tail = power;
  return w;
}

KmsValue EvalKms(const SelfSimilarSystem& system, const KmsSpec& spec,
                 const TestFunction& a) {
  const KmsWeights w = ComputeKmsWeights(system.size(), spec);
  KmsValue out;
  double sup = a.sup_norm.value_or(0.0);
  for (int j = 0; j <= spec.depth; ++j) {
    const std::vector<Point> orbit = Orbit(system, spec.b, j);
    double sum = 0.0;
    for (const Point& x : orbit) {
      const double v = a(x.coords);
      sum += v;
      if (!a.sup_norm) sup = std::max(sup, std::abs(v));
    }
    out.value += w.weights[static_cast<std::size_t>(j)] * sum /
                 static_cast<double>(orbit.size());
  }
  out.error_bound = sup * w.tail;
  return out;
}

}  // namespace fractrace
