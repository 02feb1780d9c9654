#pragma once

// Residual bookkeeping. A residual is a plain gradient-length vector: it
// accumulates every update that was not sent, and is zeroed wherever values
// were sent so that selected gradients contribute exactly once.

#include "sparsim/sparsifier.hpp"
#include "sparsim/tensor.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace sparsim {

// residual + eta * grad; the accumulator that selection operates on.
inline GradientVector accumulate(const ConstVecRef& residual, double eta, const ConstVecRef& grad) {
  if (residual.size() != grad.size())
    throw std::invalid_argument("accumulate: length mismatch (" + std::to_string(residual.size()) +
                                " vs " + std::to_string(grad.size()) + ")");
  if (!(eta > 0.0)) throw std::invalid_argument("accumulate: eta must be positive");
  return residual + eta * grad;
}

// Copy of acc with the given indices zeroed; unselected entries carry over
// unchanged. Pure index masking, no arithmetic.
inline GradientVector compensate(const ConstVecRef& acc, std::span<const Index> selected) {
  GradientVector next = acc;
  for (Index j : selected) {
    if (j < 0 || j >= next.size())
      throw std::invalid_argument("compensate: index " + std::to_string(j) + " out of range");
    next[j] = 0.0;
  }
  return next;
}

inline GradientVector compensate(const ConstVecRef& acc, const SparseSelection& selected) {
  return compensate(acc, std::span<const Index>(selected.indices));
}

// Mean of per-worker residual norms.
inline double error_metric(const std::vector<GradientVector>& residuals) {
  if (residuals.empty()) throw std::invalid_argument("error_metric: no workers");
  double sum = 0.0;
  for (const auto& e : residuals) sum += e.norm();
  return sum / static_cast<double>(residuals.size());
}

}  // namespace sparsim
