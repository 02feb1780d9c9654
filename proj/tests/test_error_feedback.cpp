#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sparsim/error_feedback.hpp"

#include <random>
#include <vector>

using namespace sparsim;

namespace {

GradientVector vec(std::initializer_list<double> xs) {
  GradientVector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

bool same(const GradientVector& a, const GradientVector& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

}  // namespace

TEST_CASE("accumulate examples") {
  const GradientVector g = vec({3, -1, 2});
  CHECK(same(accumulate(GradientVector::Zero(3), 1.0, g), g));
  CHECK(same(accumulate(vec({1, 1}), 0.5, vec({2, 0})), vec({2, 1})));
  CHECK_THROWS_AS(accumulate(vec({1, 1}), 1.0, vec({1, 2, 3})), std::invalid_argument);
  CHECK_THROWS_AS(accumulate(vec({1, 1}), 0.0, vec({1, 2})), std::invalid_argument);
}

TEST_CASE("residual norm grows monotonically when nothing is selected") {
  const GradientVector g = vec({0.5, 1.0, 0.25, 2.0});
  GradientVector e = GradientVector::Zero(4);
  double prev = 0.0;
  for (int t = 0; t < 20; ++t) {
    e = accumulate(e, 0.1, g);
    const double now = e.norm();
    CHECK(now > prev);
    prev = now;
  }
}

TEST_CASE("compensate examples") {
  const GradientVector acc = vec({3, 4, 5});

  SparseSelection everything;
  everything.indices = {0, 1, 2};
  everything.values = {3, 4, 5};
  CHECK(compensate(acc, everything).isZero(0.0));

  CHECK(same(compensate(acc, SparseSelection{}), acc));

  SparseSelection one;
  one.indices = {1};
  one.values = {4};
  CHECK(same(compensate(acc, one), vec({3, 0, 5})));

  SparseSelection bad;
  bad.indices = {7};
  bad.values = {0};
  CHECK_THROWS_AS(compensate(acc, bad), std::invalid_argument);
}

TEST_CASE("conservation: residual_next + sent == residual + eta*grad exactly") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = 1 + static_cast<Index>(rng() % 200);
    GradientVector e(n), g(n);
    for (Index j = 0; j < n; ++j) {
      e[j] = unit(rng);
      g[j] = unit(rng);
    }
    const GradientVector acc = accumulate(e, 0.05, g);

    SparseSelection sel;
    for (Index j = 0; j < n; ++j) {
      if (rng() % 3 == 0) {
        sel.indices.push_back(j);
        sel.values.push_back(acc[j]);
      }
    }

    GradientVector sent = GradientVector::Zero(n);
    for (std::size_t i = 0; i < sel.indices.size(); ++i) sent[sel.indices[i]] = sel.values[i];

    const GradientVector next = compensate(acc, sel);
    CHECK(((next + sent).array() == acc.array()).all());
  }
}

TEST_CASE("error_metric examples") {
  std::vector<GradientVector> zeros{GradientVector::Zero(4), GradientVector::Zero(4)};
  CHECK(error_metric(zeros) == 0.0);

  std::vector<GradientVector> two{vec({3, 0}), vec({0, 5})};
  CHECK(error_metric(two) == doctest::Approx(4.0).epsilon(1e-15));

  std::vector<GradientVector> one{vec({3, 4})};
  CHECK(error_metric(one) == doctest::Approx(5.0).epsilon(1e-15));

  CHECK_THROWS_AS(error_metric({}), std::invalid_argument);
}
