#include "sparsim/task.hpp"

#include "sparsim/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <tuple>

namespace sparsim {

namespace {

constexpr std::uint64_t kDatasetStream = 11;

using Eigen::MatrixXd;
using Eigen::VectorXd;

void check_batch(std::span<const Index> batch, Index samples) {
  if (batch.empty()) throw std::invalid_argument("task: empty batch");
  for (Index s : batch)
    if (s < 0 || s >= samples) throw std::invalid_argument("task: sample id out of range");
}

// Least squares against per-sample targets scattered around a common centre.
// Mini-batch loss is mean_s 0.5*|x - c_s|^2, so the gradient is x minus the
// batch target mean and the optimum sits at the dataset mean.
class QuadraticTask final : public Task {
 public:
  static constexpr double kTargetSpread = 0.5;

  QuadraticTask(std::uint64_t seed, Index dim, Index samples)
      : dim_(dim), targets_(dim, samples) {
    if (dim < 1) throw std::invalid_argument("quadratic task: dimension must be >= 1");
    if (samples < 1) throw std::invalid_argument("quadratic task: need samples");

    std::mt19937_64 rng(mix_seed(seed, kDatasetStream));
    std::normal_distribution<double> unit(0.0, 1.0);
    VectorXd centre(dim);
    for (Index j = 0; j < dim; ++j) centre[j] = unit(rng);
    for (Index s = 0; s < samples; ++s)
      for (Index j = 0; j < dim; ++j) targets_(j, s) = centre[j] + kTargetSpread * unit(rng);

    mean_ = targets_.rowwise().mean();
    optimum_loss_ =
        0.5 * (targets_.colwise() - mean_).squaredNorm() / static_cast<double>(samples);
  }

  TaskKind kind() const override { return TaskKind::quadratic; }
  Index dimension() const override { return dim_; }
  Index sample_count() const override { return targets_.cols(); }

  GradientVector initial_model(std::mt19937_64& rng) const override {
    std::normal_distribution<double> unit(0.0, 1.0);
    GradientVector x(dim_);
    for (Index j = 0; j < dim_; ++j) x[j] = unit(rng);
    return x;
  }

  double batch_loss_gradient(const ConstVecRef& x, std::span<const Index> batch,
                             GradientVector& grad) const override {
    const double loss = batch_loss(x, batch);
    VectorXd mean = VectorXd::Zero(dim_);
    for (Index s : batch) mean += targets_.col(s);
    mean /= static_cast<double>(batch.size());
    grad = x - mean;
    return loss;
  }

  double batch_loss(const ConstVecRef& x, std::span<const Index> batch) const override {
    check_batch(batch, sample_count());
    double loss = 0.0;
    for (Index s : batch) loss += 0.5 * (x - targets_.col(s)).squaredNorm();
    return loss / static_cast<double>(batch.size());
  }

  double dataset_loss(const ConstVecRef& x) const override {
    // mean_s 0.5*|x - c_s|^2 == 0.5*|x - mean|^2 + optimum
    return 0.5 * (x - mean_).squaredNorm() + optimum_loss_;
  }

  std::optional<double> optimum_loss() const override { return optimum_loss_; }

  double gradient_cost_ops(Index batch_size) const override {
    return static_cast<double>(dim_) * static_cast<double>(batch_size + 2);
  }

 private:
  Index dim_;
  MatrixXd targets_;  // one column per sample
  VectorXd mean_;
  double optimum_loss_ = 0.0;
};

// Binary logistic regression on two Gaussian blobs, with a small ridge term
// so the optimum stays finite even when the blobs separate.
class LogisticTask final : public Task {
 public:
  static constexpr double kSeparation = 1.5;
  static constexpr double kRidge = 1e-3;

  LogisticTask(std::uint64_t seed, Index dim, Index samples)
      : dim_(dim), features_(dim, samples), labels_(samples) {
    if (dim < 2) throw std::invalid_argument("logistic task: dimension must be >= 2");
    if (samples < 2) throw std::invalid_argument("logistic task: need samples");

    std::mt19937_64 rng(mix_seed(seed, kDatasetStream));
    std::normal_distribution<double> unit(0.0, 1.0);
    VectorXd direction(dim);
    for (Index j = 0; j < dim; ++j) direction[j] = unit(rng);
    direction *= kSeparation / direction.norm();

    std::uniform_int_distribution<int> coin(0, 1);
    for (Index s = 0; s < samples; ++s) {
      const int y = coin(rng);
      labels_[s] = y;
      for (Index j = 0; j < dim; ++j)
        features_(j, s) = (y ? direction[j] : -direction[j]) + unit(rng);
    }
  }

  TaskKind kind() const override { return TaskKind::logistic_regression; }
  Index dimension() const override { return dim_; }
  Index sample_count() const override { return features_.cols(); }

  GradientVector initial_model(std::mt19937_64& rng) const override {
    std::normal_distribution<double> small(0.0, 0.1);
    GradientVector x(dim_);
    for (Index j = 0; j < dim_; ++j) x[j] = small(rng);
    return x;
  }

  double batch_loss_gradient(const ConstVecRef& x, std::span<const Index> batch,
                             GradientVector& grad) const override {
    check_batch(batch, sample_count());
    grad.setZero(dim_);
    double ce = 0.0;
    for (Index s : batch) {
      const double score = features_.col(s).dot(x);
      const double y = static_cast<double>(labels_[s]);
      ce += cross_entropy(score, y);
      grad += (sigmoid(score) - y) * features_.col(s);
    }
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    grad = inv_b * grad + kRidge * x;
    return ce * inv_b + 0.5 * kRidge * x.squaredNorm();
  }

  double batch_loss(const ConstVecRef& x, std::span<const Index> batch) const override {
    check_batch(batch, sample_count());
    double ce = 0.0;
    for (Index s : batch)
      ce += cross_entropy(features_.col(s).dot(x), static_cast<double>(labels_[s]));
    return ce / static_cast<double>(batch.size()) + 0.5 * kRidge * x.squaredNorm();
  }

  double dataset_loss(const ConstVecRef& x) const override {
    double ce = 0.0;
    for (Index s = 0; s < sample_count(); ++s)
      ce += cross_entropy(features_.col(s).dot(x), static_cast<double>(labels_[s]));
    return ce / static_cast<double>(sample_count()) + 0.5 * kRidge * x.squaredNorm();
  }

  double gradient_cost_ops(Index batch_size) const override {
    return 2.0 * static_cast<double>(batch_size) * static_cast<double>(dim_) +
           2.0 * static_cast<double>(dim_);
  }

 private:
  static double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }
  // numerically stable -[y log p + (1-y) log(1-p)]
  static double cross_entropy(double score, double y) {
    return std::max(score, 0.0) - score * y + std::log1p(std::exp(-std::abs(score)));
  }

  Index dim_;
  MatrixXd features_;  // one column per sample
  Eigen::VectorXi labels_;
};

// Two dense layers with a tanh in between, trained to regress targets that a
// fixed random teacher of the same shape produced. The two layers live on
// different weight scales, which gives the selection path the heavy-tailed
// magnitude spread it sees on real models.
class MlpTask final : public Task {
 public:
  static constexpr Index kIn = 128;
  static constexpr Index kOut = 10;
  static constexpr double kTargetNoise = 0.01;

  MlpTask(std::uint64_t seed, Index requested_dim, Index samples)
      : hidden_(hidden_for(requested_dim)),
        dim_(hidden_ * (kIn + 1) + kOut * (hidden_ + 1)),
        inputs_(kIn, samples),
        targets_(kOut, samples) {
    if (samples < 1) throw std::invalid_argument("mlp2 task: need samples");

    std::mt19937_64 rng(mix_seed(seed, kDatasetStream));
    std::normal_distribution<double> unit(0.0, 1.0);
    for (Index s = 0; s < samples; ++s)
      for (Index j = 0; j < kIn; ++j) inputs_(j, s) = unit(rng);

    // teacher weights, drawn once and discarded after producing targets
    const GradientVector teacher = draw_parameters(rng);
    targets_ = forward(teacher, inputs_);
    for (Index s = 0; s < samples; ++s)
      for (Index j = 0; j < kOut; ++j) targets_(j, s) += kTargetNoise * unit(rng);
  }

  TaskKind kind() const override { return TaskKind::mlp2; }
  Index dimension() const override { return dim_; }
  Index sample_count() const override { return inputs_.cols(); }

  GradientVector initial_model(std::mt19937_64& rng) const override {
    return draw_parameters(rng);
  }

  double batch_loss_gradient(const ConstVecRef& x, std::span<const Index> batch,
                             GradientVector& grad) const override {
    check_batch(batch, sample_count());
    const Index b = static_cast<Index>(batch.size());
    MatrixXd z(kIn, b), t(kOut, b);
    for (Index c = 0; c < b; ++c) {
      z.col(c) = inputs_.col(batch[static_cast<std::size_t>(c)]);
      t.col(c) = targets_.col(batch[static_cast<std::size_t>(c)]);
    }

    const auto [w1, b1, w2, b2] = views(x);
    const MatrixXd h = (((w1 * z).colwise() + b1).array().tanh()).matrix();
    const MatrixXd y = (w2 * h).colwise() + b2;
    const MatrixXd r = y - t;
    const double scale = 1.0 / (static_cast<double>(kOut) * static_cast<double>(b));
    const double loss = 0.5 * scale * r.squaredNorm();

    grad.resize(dim_);
    auto [gw1, gb1, gw2, gb2] = mutable_views(grad);
    const MatrixXd dy = scale * r;
    gw2 = dy * h.transpose();
    gb2 = dy.rowwise().sum();
    const MatrixXd dh =
        ((w2.transpose() * dy).array() * (1.0 - h.array().square())).matrix();
    gw1 = dh * z.transpose();
    gb1 = dh.rowwise().sum();
    return loss;
  }

  double batch_loss(const ConstVecRef& x, std::span<const Index> batch) const override {
    check_batch(batch, sample_count());
    const Index b = static_cast<Index>(batch.size());
    MatrixXd z(kIn, b), t(kOut, b);
    for (Index c = 0; c < b; ++c) {
      z.col(c) = inputs_.col(batch[static_cast<std::size_t>(c)]);
      t.col(c) = targets_.col(batch[static_cast<std::size_t>(c)]);
    }
    const double scale = 1.0 / (static_cast<double>(kOut) * static_cast<double>(b));
    return 0.5 * scale * (forward(x, z) - t).squaredNorm();
  }

  double dataset_loss(const ConstVecRef& x) const override {
    const double scale =
        1.0 / (static_cast<double>(kOut) * static_cast<double>(sample_count()));
    return 0.5 * scale * (forward(x, inputs_) - targets_).squaredNorm();
  }

  double gradient_cost_ops(Index batch_size) const override {
    return 6.0 * static_cast<double>(batch_size) *
           static_cast<double>(hidden_ * (kIn + kOut));
  }

 private:
  static Index hidden_for(Index requested_dim) {
    // n_g = h*(kIn+1) + kOut*(h+1); solve for the nearest integer h
    const double h = (static_cast<double>(requested_dim) - kOut) / (kIn + 1 + kOut);
    const Index hidden = static_cast<Index>(std::llround(h));
    if (hidden < 1)
      throw std::invalid_argument("mlp2 task: dimension too small for the architecture (min " +
                                  std::to_string(kIn + 1 + 2 * kOut) + ")");
    return hidden;
  }

  GradientVector draw_parameters(std::mt19937_64& rng) const {
    std::normal_distribution<double> unit(0.0, 1.0);
    GradientVector x(dim_);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(kIn));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
    Index j = 0;
    for (; j < hidden_ * kIn; ++j) x[j] = s1 * unit(rng);            // w1
    for (; j < hidden_ * (kIn + 1); ++j) x[j] = 0.1 * s1 * unit(rng);  // b1
    for (; j < hidden_ * (kIn + 1) + kOut * hidden_; ++j) x[j] = s2 * unit(rng);  // w2
    for (; j < dim_; ++j) x[j] = 0.1 * s2 * unit(rng);               // b2
    return x;
  }

  using ConstViews = std::tuple<Eigen::Map<const MatrixXd>, Eigen::Map<const VectorXd>,
                                Eigen::Map<const MatrixXd>, Eigen::Map<const VectorXd>>;
  using MutableViews = std::tuple<Eigen::Map<MatrixXd>, Eigen::Map<VectorXd>,
                                  Eigen::Map<MatrixXd>, Eigen::Map<VectorXd>>;

  // parameter layout: [w1 (h x in) | b1 (h) | w2 (out x h) | b2 (out)]
  ConstViews views(const ConstVecRef& x) const {
    const double* p = x.data();
    return {Eigen::Map<const MatrixXd>(p, hidden_, kIn),
            Eigen::Map<const VectorXd>(p + hidden_ * kIn, hidden_),
            Eigen::Map<const MatrixXd>(p + hidden_ * (kIn + 1), kOut, hidden_),
            Eigen::Map<const VectorXd>(p + hidden_ * (kIn + 1) + kOut * hidden_, kOut)};
  }

  MutableViews mutable_views(GradientVector& x) const {
    double* p = x.data();
    return {Eigen::Map<MatrixXd>(p, hidden_, kIn),
            Eigen::Map<VectorXd>(p + hidden_ * kIn, hidden_),
            Eigen::Map<MatrixXd>(p + hidden_ * (kIn + 1), kOut, hidden_),
            Eigen::Map<VectorXd>(p + hidden_ * (kIn + 1) + kOut * hidden_, kOut)};
  }

  MatrixXd forward(const ConstVecRef& x, const MatrixXd& z) const {
    const auto [w1, b1, w2, b2] = views(x);
    const MatrixXd h = (((w1 * z).colwise() + b1).array().tanh()).matrix();
    return (w2 * h).colwise() + b2;
  }

  Index hidden_;
  Index dim_;
  MatrixXd inputs_;   // one column per sample
  MatrixXd targets_;  // teacher outputs plus noise
};

}  // namespace

std::unique_ptr<Task> make_task(TaskKind kind, std::uint64_t seed, Index dimension,
                                Index samples) {
  switch (kind) {
    case TaskKind::quadratic:
      return std::make_unique<QuadraticTask>(seed, dimension > 0 ? dimension : 4096,
                                             samples > 0 ? samples : 512);
    case TaskKind::logistic_regression:
      return std::make_unique<LogisticTask>(seed, dimension > 0 ? dimension : 2048,
                                            samples > 0 ? samples : 512);
    case TaskKind::mlp2:
      return std::make_unique<MlpTask>(seed, dimension > 0 ? dimension : 97310,
                                       samples > 0 ? samples : 256);
  }
  throw std::invalid_argument("unknown task kind");
}

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::quadratic: return "quadratic";
    case TaskKind::logistic_regression: return "logreg";
    case TaskKind::mlp2: return "mlp2";
  }
  throw std::invalid_argument("unknown task kind");
}

TaskKind parse_task_kind(std::string_view name) {
  if (name == "quadratic") return TaskKind::quadratic;
  if (name == "logreg" || name == "logistic_regression") return TaskKind::logistic_regression;
  if (name == "mlp2") return TaskKind::mlp2;
  throw std::invalid_argument("unknown task '" + std::string(name) +
                              "' (expected quadratic|logreg|mlp2)");
}

}  // namespace sparsim
