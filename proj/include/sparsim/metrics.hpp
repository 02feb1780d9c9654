#pragma once

// Per-iteration measurements of a run. Phase times are modeled from
// deterministic operation counts and the communication cost model, so records
// are byte-reproducible for a fixed seed.

#include "sparsim/collectives.hpp"

#include <cstdint>
#include <optional>
#include <span>

namespace sparsim {

struct IterationRecord {
  std::int64_t t = 0;
  double actual_density = 0.0;            // |union| / n_g
  double buildup_factor = 0.0;            // |union| / k_target_global
  double redundant_traffic_factor = 0.0;  // total selected / |union|
  double error_norm = 0.0;                // mean per-worker residual norm
  double threshold = 0.0;                 // mean threshold used this iteration
  double loss = 0.0;                      // mean worker mini-batch loss at x_t
  double time_grad = 0.0;                 // modeled seconds, per phase
  double time_select = 0.0;
  double time_comm = 0.0;
  double time_overhead = 0.0;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

double actual_density(const AggregatedSelection& agg, Index n_g);

// sum(deltas) / sum(errors): the single scalar used to overlay the threshold
// series on the error series. Absent when the error sum is zero.
std::optional<double> threshold_error_scaling(std::span<const double> deltas,
                                              std::span<const double> errors);

}  // namespace sparsim
