#pragma once

#include <optional>
#include <vector>

#include "fractrace/measure.hpp"
#include "fractrace/system.hpp"

namespace fractrace {

// rho^{(b,beta)} = C sum_j (N e^{-beta})^j tau^{(b,j)}, truncated at `depth`.
struct KmsSpec {
  Point b;
  double beta = 0.0;
  int depth = 8;
  // e^beta given exactly (e.g. 4 for beta = log 4); overrides beta when set.
  std::optional<double> exp_beta;
};

struct KmsWeights {
  // q = N e^{-beta}.
  double ratio = 0.0;
  // C = 1 - q.
  double normalizer = 0.0;
  // w_j = C q^j for j = 0..depth.
  std::vector<double> weights;
  // q^{depth+1}: the mass dropped by the truncation.
  double tail = 0.0;
};

// Throws BetaTooSmall unless beta > log N + 1e-6.
KmsWeights ComputeKmsWeights(int alphabet_size, const KmsSpec& spec);

struct KmsValue {
  double value = 0.0;
  // sup|a| * tail.
  double error_bound = 0.0;
};

// sum_{j <= depth} w_j tau^{(b,j)}(a), where tau^{(b,j)} restricted to C(K) is
// the uniform probability on the orbit O_{b,j}.
KmsValue EvalKms(const SelfSimilarSystem& system, const KmsSpec& spec,
                 const TestFunction& a);

}  // namespace fractrace
