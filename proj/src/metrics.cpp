#include "sparsim/metrics.hpp"

#include <stdexcept>

namespace sparsim {

double actual_density(const AggregatedSelection& agg, Index n_g) {
  if (n_g < 1) throw std::invalid_argument("actual_density: n_g must be positive");
  return static_cast<double>(agg.indices.size()) / static_cast<double>(n_g);
}

std::optional<double> threshold_error_scaling(std::span<const double> deltas,
                                              std::span<const double> errors) {
  if (deltas.empty() || deltas.size() != errors.size())
    throw std::invalid_argument(
        "threshold_error_scaling: series must be nonempty and equal length");
  double delta_sum = 0.0, error_sum = 0.0;
  for (double d : deltas) delta_sum += d;
  for (double e : errors) error_sum += e;
  if (error_sum == 0.0) return std::nullopt;
  return delta_sum / error_sum;
}

}  // namespace sparsim
