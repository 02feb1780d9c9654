#pragma once

// Flat dense gradient vectors and the cyclic balanced partition map that
// hands contiguous vector ranges to workers.

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace sparsim {

// Model-sized dense vector of doubles. Gradients, residuals and model
// parameters all use this representation; lengths are fixed for a run.
using GradientVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Read-only view that binds to vectors, maps and contiguous segments
// without copying.
using ConstVecRef = Eigen::Ref<const Eigen::VectorXd>;

// Contiguous half-open index range [start, end) owned by one worker.
struct PartitionRange {
  Index start = 0;
  Index end = 0;
  int owner = 0;

  Index size() const { return end - start; }
  bool operator==(const PartitionRange&) const = default;
};

// y + alpha * x as a new vector; inputs are never modified.
inline GradientVector axpy(const ConstVecRef& y, double alpha, const ConstVecRef& x) {
  if (y.size() != x.size())
    throw std::invalid_argument("axpy: length mismatch (" + std::to_string(y.size()) +
                                " vs " + std::to_string(x.size()) + ")");
  return y + alpha * x;
}

inline double l2_norm(const ConstVecRef& v) { return v.norm(); }

// Balanced contiguous split of [0, n_g) into n ranges; the first n_g % n
// ranges are one element longer. At iteration t worker i owns range
// (t % n + i) % n, so the assignment rotates and every worker sweeps the
// whole vector once per n iterations.
inline PartitionRange partition(Index n_g, int n, std::int64_t t, int worker) {
  if (n < 1) throw std::invalid_argument("partition: need at least one worker");
  if (n_g < n)
    throw std::invalid_argument("partition: vector length " + std::to_string(n_g) +
                                " smaller than worker count " + std::to_string(n));
  if (worker < 0 || worker >= n)
    throw std::invalid_argument("partition: worker id " + std::to_string(worker) + " out of range");
  if (t < 0) throw std::invalid_argument("partition: negative iteration");

  const auto cycle = static_cast<Index>((t % n + worker) % n);
  const Index base = n_g / n;
  const Index rem = n_g % n;
  const Index start = cycle * base + std::min(cycle, rem);
  const Index len = base + (cycle < rem ? 1 : 0);
  return PartitionRange{start, start + len, worker};
}

}  // namespace sparsim
