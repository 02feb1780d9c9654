#pragma once

// In-process stand-ins for the index AllGather and the sparse-sum AllReduce,
// plus a latency/bandwidth cost model backing the modeled time breakdown.
// Collectives are deterministic functions of their inputs; the simulator
// treats them as barriers.

#include "sparsim/sparsifier.hpp"

#include <cstddef>
#include <vector>

namespace sparsim {

struct AggregatedSelection {
  std::vector<Index> indices;                  // sorted unique union across workers
  std::vector<std::size_t> per_worker_counts;  // k_{i,t} per worker

  std::size_t total_selected() const;  // sum of per-worker counts
};

// Sorted union of all index sets plus per-worker counts, one selection per
// worker in worker order.
AggregatedSelection all_gather_indices(const std::vector<SparseSelection>& selections);

// Dense result: g[j] = sum_i acc_i[j] for aggregated j, zero elsewhere.
// Every worker contributes its accumulator value at every aggregated index,
// not only at the indices it selected itself.
GradientVector all_reduce_sparse(const std::vector<GradientVector>& accumulators,
                                 const AggregatedSelection& agg);

// The same sums, aligned with agg.indices instead of scattered into a dense
// vector; elementwise identical to all_reduce_sparse at the union indices.
std::vector<double> all_reduce_sparse_values(const std::vector<GradientVector>& accumulators,
                                             const AggregatedSelection& agg);

// |union| / k_target_global; 1.0 means the aggregate landed on the user
// target, n means worst-case build-up across n workers. 0 when nothing was
// selected.
double buildup_factor(const AggregatedSelection& agg, std::size_t k_target_global);

// total selected / |union|; 1.0 means selections were pairwise disjoint,
// larger values measure redundant index traffic. 0 when nothing was selected.
double redundant_traffic_factor(const AggregatedSelection& agg);

struct CostModelParams {
  double latency_per_collective = 25e-6;  // seconds
  double bytes_per_element = 8.0;
  double bandwidth = 1.25e9;  // bytes/second
};

// Two collectives' latency plus a bandwidth term: the gather moves an
// (index, value) pair per selected element, the reduce moves one value per
// aggregated index.
//   cost = 2 * latency + (2 * total_selected + |union|) * bytes_per_element / bandwidth
double communication_cost(const AggregatedSelection& agg, const CostModelParams& params);

}  // namespace sparsim
