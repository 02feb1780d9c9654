#pragma once

// Synthetic differentiable training tasks with analytic gradients and
// seed-deterministic datasets. These stand in for real model/dataset pairs
// at desk scale; each one is cheap enough to run for thousands of iterations.

#include "sparsim/tensor.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string_view>

namespace sparsim {

enum class TaskKind { quadratic, logistic_regression, mlp2 };

class Task {
 public:
  virtual ~Task() = default;

  virtual TaskKind kind() const = 0;
  virtual Index dimension() const = 0;     // n_g, the flat parameter count
  virtual Index sample_count() const = 0;  // dataset size

  // Fresh model draw; callers pass a dedicated stream so all workers can
  // start from the same point.
  virtual GradientVector initial_model(std::mt19937_64& rng) const = 0;

  // Mini-batch loss at x; fills grad with the analytic mini-batch gradient.
  virtual double batch_loss_gradient(const ConstVecRef& x, std::span<const Index> batch,
                                     GradientVector& grad) const = 0;

  // Loss only; the finite-difference oracle probes this.
  virtual double batch_loss(const ConstVecRef& x, std::span<const Index> batch) const = 0;

  // Mean loss over the entire dataset.
  virtual double dataset_loss(const ConstVecRef& x) const = 0;

  virtual std::optional<double> optimum_loss() const { return std::nullopt; }

  // Rough scalar-op count of one mini-batch gradient, for modeled timing.
  virtual double gradient_cost_ops(Index batch_size) const = 0;
};

// dimension/samples of 0 pick the per-kind defaults (quadratic 4096/512,
// logistic_regression 2048/512, mlp2 ~97k params/256). The mlp2 dimension is
// rounded to the nearest consistent two-layer architecture.
std::unique_ptr<Task> make_task(TaskKind kind, std::uint64_t seed, Index dimension = 0,
                                Index samples = 0);

std::string_view to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view name);

}  // namespace sparsim
