#include "sparsim/sparsifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sparsim {

namespace {

void check_range(const ConstVecRef& acc, const PartitionRange& range) {
  if (range.start < 0 || range.end < range.start || range.end > acc.size())
    throw std::invalid_argument("selection: range [" + std::to_string(range.start) + ", " +
                                std::to_string(range.end) + ") invalid for vector of length " +
                                std::to_string(acc.size()));
}

}  // namespace

SparseSelection select_by_threshold(const ConstVecRef& acc, const PartitionRange& range,
                                    double delta) {
  check_range(acc, range);
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw std::invalid_argument("selection: threshold must be finite and nonnegative");

  SparseSelection out;
  for (Index j = range.start; j < range.end; ++j) {
    const double v = acc[j];
    if (std::abs(v) > delta) {
      out.indices.push_back(j);
      out.values.push_back(v);
    }
  }
  return out;
}

SparseSelection select_topk(const ConstVecRef& acc, const PartitionRange& range, std::size_t k) {
  check_range(acc, range);
  const auto m = static_cast<std::size_t>(range.size());
  if (k > m)
    throw std::invalid_argument("select_topk: k=" + std::to_string(k) + " exceeds range size " +
                                std::to_string(m));

  SparseSelection out;
  if (k == 0) return out;

  std::vector<Index> idx(m);
  std::iota(idx.begin(), idx.end(), range.start);
  const auto larger = [&acc](Index a, Index b) {
    const double va = std::abs(acc[a]), vb = std::abs(acc[b]);
    if (va != vb) return va > vb;
    return a < b;  // tie rule: lower index wins
  };
  if (k < m) {
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k) - 1, idx.end(),
                     larger);
    idx.resize(k);
  }
  std::sort(idx.begin(), idx.end());

  out.indices = std::move(idx);
  out.values.reserve(k);
  for (Index j : out.indices) out.values.push_back(acc[j]);
  return out;
}

ThresholdState micro_update_threshold(ThresholdState state, std::size_t k_target,
                                      std::size_t k_selected, double alpha,
                                      double min_threshold) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("micro_update_threshold: alpha must lie in (0, 1)");
  if (!(state.delta >= 0.0))
    throw std::invalid_argument("micro_update_threshold: negative threshold");

  if (k_selected > k_target) {
    state.delta = state.delta == 0.0 ? min_threshold : state.delta * (1.0 + alpha);
  } else if (k_selected < k_target) {
    state.delta *= 1.0 - alpha;
  }
  return state;
}

SparseSelection cltk_select(const ConstVecRef& acc_leader, std::size_t k_total, int leader,
                            std::int64_t t, int n) {
  if (n < 1 || leader < 0 || leader >= n)
    throw std::invalid_argument("cltk_select: leader id out of range");
  if (t < 0 || t % n != leader)
    throw std::logic_error("cltk_select: worker " + std::to_string(leader) +
                           " is not the leader at iteration " + std::to_string(t) +
                           " (leader cycles as t mod n)");
  if (k_total > static_cast<std::size_t>(acc_leader.size()))
    throw std::invalid_argument("cltk_select: k exceeds gradient count");
  return select_topk(acc_leader, PartitionRange{0, acc_leader.size(), leader}, k_total);
}

SparseSelection hard_threshold_select(const ConstVecRef& acc, double delta_fixed) {
  return select_by_threshold(acc, PartitionRange{0, acc.size(), 0}, delta_fixed);
}

SparseSelection select_all(const ConstVecRef& acc) {
  SparseSelection out;
  out.indices.resize(static_cast<std::size_t>(acc.size()));
  std::iota(out.indices.begin(), out.indices.end(), Index{0});
  out.values.assign(acc.data(), acc.data() + acc.size());
  return out;
}

std::size_t global_target_count(double density, Index n_g) {
  if (!(density > 0.0 && density <= 1.0))
    throw std::invalid_argument("density must lie in (0, 1]");
  if (n_g < 1) throw std::invalid_argument("global_target_count: empty gradient vector");
  const long long k = std::llround(density * static_cast<double>(n_g));
  return static_cast<std::size_t>(std::max(1LL, k));
}

std::size_t per_worker_target_count(double density, Index n_g, int n, PerWorkerTarget target) {
  if (n < 1) throw std::invalid_argument("per_worker_target_count: need at least one worker");
  if (target == PerWorkerTarget::full) return global_target_count(density, n_g);
  if (!(density > 0.0 && density <= 1.0))
    throw std::invalid_argument("density must lie in (0, 1]");
  const long long k = std::llround(density * static_cast<double>(n_g) / n);
  return static_cast<std::size_t>(std::max(1LL, k));
}

std::string_view to_string(SparsifierKind kind) {
  switch (kind) {
    case SparsifierKind::micro: return "micro";
    case SparsifierKind::topk: return "topk";
    case SparsifierKind::cltk: return "cltk";
    case SparsifierKind::hard_threshold: return "hard";
    case SparsifierKind::dense: return "dense";
  }
  throw std::invalid_argument("unknown sparsifier kind");
}

SparsifierKind parse_sparsifier_kind(std::string_view name) {
  if (name == "micro") return SparsifierKind::micro;
  if (name == "topk") return SparsifierKind::topk;
  if (name == "cltk") return SparsifierKind::cltk;
  if (name == "hard" || name == "hard_threshold") return SparsifierKind::hard_threshold;
  if (name == "dense") return SparsifierKind::dense;
  throw std::invalid_argument("unknown sparsifier '" + std::string(name) +
                              "' (expected micro|topk|cltk|hard|dense)");
}

std::string_view to_string(PerWorkerTarget target) {
  return target == PerWorkerTarget::split ? "split" : "full";
}

PerWorkerTarget parse_per_worker_target(std::string_view name) {
  if (name == "split") return PerWorkerTarget::split;
  if (name == "full") return PerWorkerTarget::full;
  throw std::invalid_argument("unknown per-worker target '" + std::string(name) +
                              "' (expected split|full)");
}

}  // namespace sparsim
