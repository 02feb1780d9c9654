#include "sparsim/harness.hpp"

#include "sparsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace sparsim {

namespace {

constexpr std::uint64_t kModelStream = 13;
constexpr std::uint64_t kShardStream = 17;
constexpr std::uint64_t kWorkerStream = 1000;

void validate(const RunConfig& c) {
  if (c.workers < 1) throw std::invalid_argument("run config: workers must be >= 1");
  if (c.iterations < 1) throw std::invalid_argument("run config: iterations must be >= 1");
  if (c.batch_size < 1) throw std::invalid_argument("run config: batch_size must be >= 1");
  if (!(c.sparsifier.density > 0.0 && c.sparsifier.density <= 1.0))
    throw std::invalid_argument("run config: density must lie in (0, 1]");
  if (!(c.sparsifier.initial_threshold >= 0.0) ||
      !std::isfinite(c.sparsifier.initial_threshold))
    throw std::invalid_argument("run config: delta0 must be finite and nonnegative");
  if (!(c.sparsifier.scaling_factor > 0.0 && c.sparsifier.scaling_factor < 1.0))
    throw std::invalid_argument("run config: alpha must lie in (0, 1)");
  if (!(c.sparsifier.min_threshold > 0.0))
    throw std::invalid_argument("run config: eps-delta must be positive");
  if (!(c.lr.initial > 0.0)) throw std::invalid_argument("run config: lr must be positive");
  if (!(c.lr.decay_factor > 0.0))
    throw std::invalid_argument("run config: decay factor must be positive");
  if (!(c.compute_time_per_op >= 0.0))
    throw std::invalid_argument("run config: compute_time_per_op must be nonnegative");
}

// Next mini-batch for one worker: consume the shuffled shard order, reshuffle
// when fewer than a full batch remains (a new epoch; any tail is dropped so
// batches stay fixed-size).
std::span<const Index> next_batch(WorkerState& w, Index batch_size) {
  const auto b = static_cast<std::size_t>(batch_size);
  if (w.cursor + b > w.order.size()) {
    std::shuffle(w.order.begin(), w.order.end(), w.rng);
    w.cursor = 0;
  }
  const std::span<const Index> out(w.order.data() + w.cursor, b);
  w.cursor += b;
  return out;
}

double sort_select_ops(Index n_g, std::size_t k) {
  return static_cast<double>(n_g) *
         (1.0 + std::log2(static_cast<double>(std::max<std::size_t>(2, k))));
}

}  // namespace

double learning_rate_at(const RunConfig& config, std::int64_t decay_at, std::int64_t t) {
  return config.lr.initial * (t >= decay_at ? config.lr.decay_factor : 1.0);
}

ClusterState init_cluster(const RunConfig& config) {
  validate(config);

  ClusterState cs;
  cs.task = make_task(config.task, config.seed, config.dimension, config.samples);
  const Index n_g = cs.task->dimension();
  const int n = config.workers;
  if (n_g < n)
    throw std::invalid_argument("run config: gradient length " + std::to_string(n_g) +
                                " smaller than worker count " + std::to_string(n));
  const Index samples = cs.task->sample_count();
  if (samples < n)
    throw std::invalid_argument("run config: dataset smaller than worker count");
  if (config.batch_size > samples / n)
    throw std::invalid_argument("run config: batch_size " + std::to_string(config.batch_size) +
                                " exceeds the smallest worker shard (" +
                                std::to_string(samples / n) + ")");

  std::mt19937_64 model_rng(mix_seed(config.seed, kModelStream));
  const GradientVector x0 = cs.task->initial_model(model_rng);

  std::vector<Index> perm(static_cast<std::size_t>(samples));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 shard_rng(mix_seed(config.seed, kShardStream));
  std::shuffle(perm.begin(), perm.end(), shard_rng);

  cs.workers.reserve(n);
  for (int i = 0; i < n; ++i) {
    WorkerState w;
    w.model = x0;
    w.residual = GradientVector::Zero(n_g);
    w.threshold.delta = config.sparsifier.initial_threshold;
    w.rng.seed(mix_seed(config.seed, kWorkerStream + static_cast<std::uint64_t>(i)));
    const auto r = partition(samples, n, 0, i);
    w.shard.assign(perm.begin() + r.start, perm.begin() + r.end);
    w.order = w.shard;
    w.cursor = w.order.size();  // forces a shuffle on the first draw
    cs.workers.push_back(std::move(w));
  }
  cs.accumulators.assign(n, GradientVector::Zero(n_g));
  cs.gradients.assign(n, GradientVector::Zero(n_g));
  cs.k_global = global_target_count(config.sparsifier.density, n_g);
  cs.k_worker =
      per_worker_target_count(config.sparsifier.density, n_g, n, config.sparsifier.target);
  cs.decay_at =
      config.lr.decay_at >= 0 ? config.lr.decay_at : (3 * config.iterations) / 4;
  return cs;
}

IterationRecord run_iteration(ClusterState& cs, const RunConfig& config, std::int64_t t,
                              const IterationObserver& observer) {
  const int n = config.workers;
  const Index n_g = cs.task->dimension();
  const double eta = learning_rate_at(config, cs.decay_at, t);
  const auto kind = config.sparsifier.kind;

  // gradients and residual accumulation
  double loss_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    auto& w = cs.workers[static_cast<std::size_t>(i)];
    auto& grad = cs.gradients[static_cast<std::size_t>(i)];
    const auto batch = next_batch(w, config.batch_size);
    loss_sum += cs.task->batch_loss_gradient(w.model, batch, grad);
    if (!grad.allFinite())
      throw std::runtime_error("iteration " + std::to_string(t) +
                               ": non-finite gradient on worker " + std::to_string(i));
    cs.accumulators[static_cast<std::size_t>(i)] = w.residual + eta * grad;
  }

  // selection
  std::vector<SparseSelection> selections(static_cast<std::size_t>(n));
  double threshold_used = 0.0;
  double select_ops = 0.0;
  switch (kind) {
    case SparsifierKind::micro: {
      double delta_sum = 0.0;
      for (int i = 0; i < n; ++i) {
        const auto range = partition(n_g, n, t, i);
        const double delta = cs.workers[static_cast<std::size_t>(i)].threshold.delta;
        delta_sum += delta;
        selections[static_cast<std::size_t>(i)] =
            select_by_threshold(cs.accumulators[static_cast<std::size_t>(i)], range, delta);
        select_ops = std::max(select_ops, static_cast<double>(range.size()));
      }
      threshold_used = delta_sum / n;
      break;
    }
    case SparsifierKind::topk: {
      const PartitionRange whole{0, n_g, 0};
      for (int i = 0; i < n; ++i)
        selections[static_cast<std::size_t>(i)] =
            select_topk(cs.accumulators[static_cast<std::size_t>(i)], whole, cs.k_global);
      select_ops = sort_select_ops(n_g, cs.k_global);
      break;
    }
    case SparsifierKind::cltk: {
      const int leader = static_cast<int>(t % n);
      selections[static_cast<std::size_t>(leader)] = cltk_select(
          cs.accumulators[static_cast<std::size_t>(leader)], cs.k_global, leader, t, n);
      select_ops = sort_select_ops(n_g, cs.k_global);  // everyone else idles
      break;
    }
    case SparsifierKind::hard_threshold: {
      for (int i = 0; i < n; ++i)
        selections[static_cast<std::size_t>(i)] = hard_threshold_select(
            cs.accumulators[static_cast<std::size_t>(i)], config.sparsifier.initial_threshold);
      select_ops = static_cast<double>(n_g);
      threshold_used = config.sparsifier.initial_threshold;
      break;
    }
    case SparsifierKind::dense: {
      for (int i = 0; i < n; ++i)
        selections[static_cast<std::size_t>(i)] =
            select_all(cs.accumulators[static_cast<std::size_t>(i)]);
      select_ops = static_cast<double>(n_g);
      break;
    }
  }

  // collectives
  const AggregatedSelection agg = all_gather_indices(selections);
  const std::vector<double> summed = all_reduce_sparse_values(cs.accumulators, agg);

  // what each worker contributed to the reduce, captured before compensation
  std::vector<std::vector<double>> sent;
  if (observer) {
    sent.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      auto& out = sent[static_cast<std::size_t>(i)];
      out.resize(agg.indices.size());
      const auto& acc = cs.accumulators[static_cast<std::size_t>(i)];
      for (std::size_t k = 0; k < agg.indices.size(); ++k) out[k] = acc[agg.indices[k]];
    }
  }

  // threshold estimate for the next iteration
  if (kind == SparsifierKind::micro) {
    for (int i = 0; i < n; ++i) {
      auto& w = cs.workers[static_cast<std::size_t>(i)];
      w.threshold = micro_update_threshold(
          w.threshold, cs.k_worker, selections[static_cast<std::size_t>(i)].count(),
          config.sparsifier.scaling_factor, config.sparsifier.min_threshold);
    }
  }

  // model update x - g/n; g is zero outside the aggregated indices, so only
  // those entries can change
  for (int i = 0; i < n; ++i) {
    auto& x = cs.workers[static_cast<std::size_t>(i)].model;
    for (std::size_t k = 0; k < agg.indices.size(); ++k) x[agg.indices[k]] -= summed[k] / n;
  }

  // compensate: zero the sent entries, then the swap carries the accumulator
  // forward as e_{t+1} (and leaves e_t intact in the scratch buffer)
  for (int i = 0; i < n; ++i) {
    auto& acc = cs.accumulators[static_cast<std::size_t>(i)];
    for (Index j : agg.indices) acc[j] = 0.0;
    if (!config.error_feedback) acc.setZero();
    std::swap(cs.workers[static_cast<std::size_t>(i)].residual, acc);
  }

  IterationRecord rec;
  rec.t = t;
  rec.actual_density = actual_density(agg, n_g);
  rec.buildup_factor = buildup_factor(agg, cs.k_global);
  rec.redundant_traffic_factor = redundant_traffic_factor(agg);
  {
    double norm_sum = 0.0;
    for (const auto& w : cs.workers) norm_sum += w.residual.norm();
    rec.error_norm = norm_sum / n;
  }
  rec.threshold = threshold_used;
  rec.loss = loss_sum / n;
  rec.time_grad = cs.task->gradient_cost_ops(config.batch_size) * config.compute_time_per_op;
  rec.time_select = select_ops * config.compute_time_per_op;
  rec.time_comm = communication_cost(agg, config.cost_model);
  rec.time_overhead = (static_cast<double>(n_g) + 2.0 * static_cast<double>(agg.indices.size()) +
                       1.0) *
                      config.compute_time_per_op;

  if (observer) observer(IterationView{t, eta, cs, selections, agg, sent, rec});
  return rec;
}

RunResult run_experiment(const RunConfig& config, const IterationObserver& observer) {
  ClusterState cs = init_cluster(config);

  RunResult out;
  out.config = config;
  out.config.dimension = cs.task->dimension();
  out.config.samples = cs.task->sample_count();
  out.config.lr.decay_at = cs.decay_at;

  out.records.reserve(static_cast<std::size_t>(config.iterations));
  for (std::int64_t t = 0; t < config.iterations; ++t)
    out.records.push_back(run_iteration(cs, config, t, observer));

  RunSummary s;
  s.final_loss = cs.task->dataset_loss(cs.workers.front().model);
  std::vector<double> deltas, errors;
  deltas.reserve(out.records.size());
  errors.reserve(out.records.size());
  for (const auto& r : out.records) {
    s.mean_actual_density += r.actual_density;
    s.mean_buildup_factor += r.buildup_factor;
    s.mean_redundant_traffic += r.redundant_traffic_factor;
    s.time_grad += r.time_grad;
    s.time_select += r.time_select;
    s.time_comm += r.time_comm;
    s.time_overhead += r.time_overhead;
    deltas.push_back(r.threshold);
    errors.push_back(r.error_norm);
  }
  const auto count = static_cast<double>(out.records.size());
  s.mean_actual_density /= count;
  s.mean_buildup_factor /= count;
  s.mean_redundant_traffic /= count;
  s.threshold_error_scaling = threshold_error_scaling(deltas, errors);
  out.summary = s;
  return out;
}

}  // namespace sparsim
