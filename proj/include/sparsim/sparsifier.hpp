#pragma once

// The four gradient-selection strategies behind one value-level interface:
//   micro — threshold selection inside a cyclically assigned exclusive
//           partition, with multiplicative threshold adaptation driven by
//           the gap between selected and targeted counts;
//   topk  — per-worker top-k over the full vector;
//   cltk  — a rotating leader picks the global top-k indices for everyone;
//   hard_threshold — fixed magnitude threshold over the full vector.
// `dense` is the uncompressed baseline (select everything).

#include "sparsim/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace sparsim {

enum class SparsifierKind { micro, topk, cltk, hard_threshold, dense };

// How micro sizes its per-worker selection target: `split` aims the cluster
// aggregate at the user density (each worker targets d*n_g/n), `full` makes
// every worker target d*n_g inside its own partition.
enum class PerWorkerTarget { split, full };

struct SparseSelection {
  std::vector<Index> indices;  // strictly increasing global indices
  std::vector<double> values;  // accumulator values at those indices

  std::size_t count() const { return indices.size(); }
};

struct ThresholdState {
  double delta = 0.0;  // current magnitude threshold, >= 0 and finite
};

struct SparsifierConfig {
  SparsifierKind kind = SparsifierKind::micro;
  double density = 0.01;            // d in (0, 1]
  double initial_threshold = 0.01;  // delta_0; also the fixed hard threshold
  double scaling_factor = 0.01;     // alpha in (0, 1); micro only
  double min_threshold = 1e-12;     // floor used to escape delta == 0
  PerWorkerTarget target = PerWorkerTarget::split;
};

// Indices j in [range.start, range.end) with |acc[j]| > delta (strict).
SparseSelection select_by_threshold(const ConstVecRef& acc, const PartitionRange& range,
                                    double delta);

// The k largest-magnitude entries within range; ties go to the lower index.
SparseSelection select_topk(const ConstVecRef& acc, const PartitionRange& range, std::size_t k);

// One comparison and one multiply: delta grows by (1 + alpha) when too many
// gradients were selected, shrinks by (1 - alpha) when too few, and is left
// alone on an exact hit. A zero threshold that over-selects jumps to
// min_threshold so multiplicative scaling can take over.
ThresholdState micro_update_threshold(ThresholdState state, std::size_t k_target,
                                      std::size_t k_selected, double alpha,
                                      double min_threshold = 1e-12);

// Global top-k run by the cycling leader (t mod n); every worker reuses the
// returned index set, so the aggregate count is exactly k_total.
SparseSelection cltk_select(const ConstVecRef& acc_leader, std::size_t k_total, int leader,
                            std::int64_t t, int n);

// Fixed-threshold filter over the whole vector; the threshold never changes.
SparseSelection hard_threshold_select(const ConstVecRef& acc, double delta_fixed);

// Every index, including zeros; the uncompressed baseline.
SparseSelection select_all(const ConstVecRef& acc);

// max(1, round(density * n_g))
std::size_t global_target_count(double density, Index n_g);
std::size_t per_worker_target_count(double density, Index n_g, int n, PerWorkerTarget target);

std::string_view to_string(SparsifierKind kind);
SparsifierKind parse_sparsifier_kind(std::string_view name);
std::string_view to_string(PerWorkerTarget target);
PerWorkerTarget parse_per_worker_target(std::string_view name);

}  // namespace sparsim
