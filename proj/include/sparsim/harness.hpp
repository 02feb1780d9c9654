#pragma once

// Synchronous data-parallel SGD driver. One iteration is:
//   accumulate residual + eta*grad -> select -> all-gather indices ->
//   all-reduce values -> threshold estimate -> model update x - g/n ->
//   compensate residuals.
// Workers run in a fixed sequential order, so a run is bit-reproducible for
// a fixed seed; collectives act as barriers.

#include "sparsim/collectives.hpp"
#include "sparsim/error_feedback.hpp"
#include "sparsim/metrics.hpp"
#include "sparsim/sparsifier.hpp"
#include "sparsim/task.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <vector>

namespace sparsim {

struct LrSchedule {
  // Threshold selection plus error feedback revisits coordinates at a rate of
  // roughly initial/2 on smooth tasks, so keep initial below 2x the target
  // density for the realized density to settle on the target.
  double initial = 0.01;
  double decay_factor = 0.1;   // multiplier applied from decay_at onwards
  std::int64_t decay_at = -1;  // -1: resolved to 3/4 of the run
};

struct RunConfig {
  int workers = 4;
  std::int64_t iterations = 200;
  Index batch_size = 8;
  std::uint64_t seed = 42;
  TaskKind task = TaskKind::quadratic;
  Index dimension = 0;  // 0: task default
  Index samples = 0;    // 0: task default
  LrSchedule lr;
  SparsifierConfig sparsifier;
  CostModelParams cost_model;
  double compute_time_per_op = 1e-9;  // modeled seconds per scalar op
  bool error_feedback = true;         // false: residuals discarded (ablation)
};

struct WorkerState {
  GradientVector model;     // x_t; identical across workers after every iteration
  GradientVector residual;  // e_{i,t}
  ThresholdState threshold;
  std::mt19937_64 rng;
  std::vector<Index> shard;  // dataset rows owned by this worker
  std::vector<Index> order;  // per-epoch draw order over the shard
  std::size_t cursor = 0;
};

struct ClusterState {
  std::unique_ptr<Task> task;
  std::vector<WorkerState> workers;
  // Iteration scratch, kept out of WorkerState so collectives can take the
  // whole array. After an iteration accumulators[i] holds the previous
  // residual e_{i,t} (buffer swap), gradients[i] the iteration's gradient.
  std::vector<GradientVector> accumulators;
  std::vector<GradientVector> gradients;
  std::size_t k_global = 0;   // max(1, round(d * n_g))
  std::size_t k_worker = 0;   // micro per-worker target
  std::int64_t decay_at = 0;  // resolved schedule step
};

// Post-iteration snapshot handed to an observer: cluster.workers[i].residual
// is e_{i,t+1}, cluster.accumulators[i] is e_{i,t}, cluster.gradients[i] is
// G_{i,t}, and sent_values[i] is acc_i at the aggregated indices (what worker
// i contributed to the reduce). References are valid only during the call.
struct IterationView {
  std::int64_t t;
  double eta;
  const ClusterState& cluster;
  const std::vector<SparseSelection>& selections;
  const AggregatedSelection& aggregated;
  const std::vector<std::vector<double>>& sent_values;
  const IterationRecord& record;
};

using IterationObserver = std::function<void(const IterationView&)>;

ClusterState init_cluster(const RunConfig& config);
double learning_rate_at(const RunConfig& config, std::int64_t decay_at, std::int64_t t);

// Executes one synchronous iteration across all workers; aborts with a
// diagnostic if any gradient goes non-finite.
IterationRecord run_iteration(ClusterState& cluster, const RunConfig& config, std::int64_t t,
                              const IterationObserver& observer = {});

struct RunSummary {
  double final_loss = 0.0;  // full-dataset loss at the final model
  double mean_actual_density = 0.0;
  double mean_buildup_factor = 0.0;
  double mean_redundant_traffic = 0.0;
  double time_grad = 0.0;  // modeled seconds, summed over the run
  double time_select = 0.0;
  double time_comm = 0.0;
  double time_overhead = 0.0;
  std::optional<double> threshold_error_scaling;
};

struct RunResult {
  RunConfig config;  // resolved: actual dimension, samples and decay step
  std::vector<IterationRecord> records;
  RunSummary summary;
};

RunResult run_experiment(const RunConfig& config, const IterationObserver& observer = {});

}  // namespace sparsim
