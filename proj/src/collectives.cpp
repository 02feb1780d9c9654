#include "sparsim/collectives.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sparsim {

std::size_t AggregatedSelection::total_selected() const {
  return std::accumulate(per_worker_counts.begin(), per_worker_counts.end(), std::size_t{0});
}

AggregatedSelection all_gather_indices(const std::vector<SparseSelection>& selections) {
  AggregatedSelection agg;
  agg.per_worker_counts.reserve(selections.size());
  std::size_t total = 0;
  for (const auto& sel : selections) {
    agg.per_worker_counts.push_back(sel.count());
    total += sel.count();
  }
  agg.indices.reserve(total);
  for (const auto& sel : selections)
    agg.indices.insert(agg.indices.end(), sel.indices.begin(), sel.indices.end());
  std::sort(agg.indices.begin(), agg.indices.end());
  agg.indices.erase(std::unique(agg.indices.begin(), agg.indices.end()), agg.indices.end());
  return agg;
}

std::vector<double> all_reduce_sparse_values(const std::vector<GradientVector>& accumulators,
                                             const AggregatedSelection& agg) {
  if (accumulators.empty()) throw std::invalid_argument("all_reduce_sparse: no workers");
  const Index n_g = accumulators.front().size();
  for (const auto& acc : accumulators)
    if (acc.size() != n_g)
      throw std::invalid_argument("all_reduce_sparse: accumulator length mismatch");

  std::vector<double> out(agg.indices.size());
  for (std::size_t k = 0; k < agg.indices.size(); ++k) {
    const Index j = agg.indices[k];
    if (j < 0 || j >= n_g)
      throw std::invalid_argument("all_reduce_sparse: index " + std::to_string(j) +
                                  " out of range");
    double sum = 0.0;
    for (const auto& acc : accumulators) sum += acc[j];
    out[k] = sum;
  }
  return out;
}

GradientVector all_reduce_sparse(const std::vector<GradientVector>& accumulators,
                                 const AggregatedSelection& agg) {
  const auto values = all_reduce_sparse_values(accumulators, agg);
  GradientVector g = GradientVector::Zero(accumulators.front().size());
  for (std::size_t k = 0; k < agg.indices.size(); ++k) g[agg.indices[k]] = values[k];
  return g;
}

double buildup_factor(const AggregatedSelection& agg, std::size_t k_target_global) {
  if (agg.total_selected() == 0) return 0.0;
  if (k_target_global == 0) throw std::invalid_argument("buildup_factor: zero target count");
  return static_cast<double>(agg.indices.size()) / static_cast<double>(k_target_global);
}

double redundant_traffic_factor(const AggregatedSelection& agg) {
  const std::size_t total = agg.total_selected();
  if (total == 0) return 0.0;
  return static_cast<double>(total) / static_cast<double>(agg.indices.size());
}

double communication_cost(const AggregatedSelection& agg, const CostModelParams& params) {
  if (!(params.latency_per_collective > 0.0) || !(params.bytes_per_element > 0.0) ||
      !(params.bandwidth > 0.0))
    throw std::invalid_argument("communication_cost: cost-model parameters must be positive");

  const double gather_bytes =
      2.0 * static_cast<double>(agg.total_selected()) * params.bytes_per_element;
  const double reduce_bytes = static_cast<double>(agg.indices.size()) * params.bytes_per_element;
  return 2.0 * params.latency_per_collective + (gather_bytes + reduce_bytes) / params.bandwidth;
}

}  // namespace sparsim
