#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "trimrank/hodge.hpp"
#include "trimrank/huber_lasso.hpp"
#include "trimrank/model.hpp"
#include "trimrank/rng.hpp"

using namespace trimrank;

namespace {

ComparisonRecord rec(int i, int j, double y, double w = 1.0) {
  ComparisonRecord r;
  r.item_i = i;
  r.item_j = j;
  r.y = y;
  r.weight = w;
  return r;
}

// profiling out the outlier variables leaves a robust loss: quadratic inside
// the threshold, linear outside
double robust_objective(const ComparisonDataset& data, const ScoreVector& s,
                        double lambda) {
  double total = 0.0;
  for (const ComparisonRecord& r : data.records) {
    const double res = residual(r, s);
    const double a = std::abs(res);
    total += r.weight * (a <= lambda ? 0.5 * res * res : lambda * a - 0.5 * lambda * lambda);
  }
  return total;
}

// independent reference: iteratively reweighted least squares on the same
// robust loss, solved by a minimum-norm pseudo-inverse each round
ScoreVector irls_reference(const ComparisonDataset& data, double lambda) {
  const int n = data.n_items;
  Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
  for (int it = 0; it < 5000; ++it) {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    for (const ComparisonRecord& r : data.records) {
      const double res = s(r.item_i) - s(r.item_j) - r.y;
      const double a = std::abs(res);
      const double w = r.weight * (a <= lambda ? 1.0 : lambda / a);
      L(r.item_i, r.item_i) += w;
      L(r.item_j, r.item_j) += w;
      L(r.item_i, r.item_j) -= w;
      L(r.item_j, r.item_i) -= w;
      b(r.item_i) += w * r.y;
      b(r.item_j) -= w * r.y;
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(L, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    Eigen::VectorXd next = svd.solve(b);
    const double gap = (next - s).lpNorm<Eigen::Infinity>();
    s = next;
    if (gap < 1e-12) break;
  }
  ScoreVector out;
  out.values.assign(s.data(), s.data() + n);
  return out;
}

ComparisonDataset random_dataset(Rng& rng, int n, int m) {
  ComparisonDataset data;
  data.n_items = n;
  for (int k = 0; k < m; ++k) {
    const int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
    if (j >= i) ++j;
    data.records.push_back(rec(i, j, rng.below(2) == 0 ? 1.0 : -1.0));
  }
  return data;
}

ComparisonDataset chain_with_reversal() {
  ComparisonDataset data;
  data.n_items = 3;
  data.records = {rec(0, 1, 1.0), rec(0, 1, 1.0), rec(0, 1, 1.0),
                  rec(1, 2, 1.0), rec(1, 2, 1.0), rec(1, 2, 1.0), rec(1, 0, 1.0)};
  return data;
}

}  // namespace

TEST_SUITE("huber_lasso") {
  TEST_CASE("large threshold reduces to plain least squares") {
    ComparisonDataset data = chain_with_reversal();
    HuberFit fit = huber_fit(data, 10.0);
    TrimmedLsResult plain =
        trimmed_least_squares(data, OutlierMask::all_keep(data.records.size()));
    for (int i = 0; i < 3; ++i) CHECK(fit.scores[i] == doctest::Approx(plain.scores[i]));
    for (bool flag : fit.outlier_flags) CHECK_FALSE(flag);
    CHECK(fit.alternations >= 1);
  }

  TEST_CASE("symmetric cycle keeps flat scores at every threshold") {
    ComparisonDataset data;
    data.n_items = 3;
    data.records = {rec(0, 1, 1.0), rec(1, 2, 1.0), rec(2, 0, 1.0)};
    for (double lambda : {0.0, 0.5}) {
      HuberFit fit = huber_fit(data, lambda);
      for (int i = 0; i < 3; ++i) CHECK(fit.scores[i] == doctest::Approx(0.0));
      for (bool flag : fit.outlier_flags) CHECK(flag);
    }
    HuberFit relaxed = huber_fit(data, 2.0);
    for (bool flag : relaxed.outlier_flags) CHECK_FALSE(flag);
  }

  TEST_CASE("negative threshold is rejected") {
    ComparisonDataset data = chain_with_reversal();
    CHECK_THROWS_AS(huber_fit(data, -0.1), std::invalid_argument);
  }

  TEST_CASE("fixed point matches the reweighted reference objective") {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 3 + static_cast<int>(rng.below(4));
      const int m = 5 + static_cast<int>(rng.below(11));
      ComparisonDataset data = random_dataset(rng, n, m);
      for (double lambda : {0.3, 0.8, 2.0}) {
        HuberFit fit = huber_fit(data, lambda);
        ScoreVector ref = irls_reference(data, lambda);
        const double ours = robust_objective(data, fit.scores, lambda);
        const double want = robust_objective(data, ref, lambda);
        CHECK(ours <= want + 1e-6 * (1.0 + std::abs(want)));
        CHECK(want <= ours + 1e-6 * (1.0 + std::abs(ours)));
        for (std::size_t r = 0; r < data.records.size(); ++r) {
          const double res = residual(data.records[r], fit.scores);
          CHECK(fit.outlier_flags[r] == (std::abs(res) > lambda));
        }
      }
    }
  }

  TEST_CASE("warm start lands on the same fixed point") {
    ComparisonDataset data = chain_with_reversal();
    HuberFit cold = huber_fit(data, 0.7);
    ScoreVector start{{5.0, -1.0, 2.0}};
    HuberFit warm = huber_fit(data, 0.7, &start);
    CHECK(robust_objective(data, warm.scores, 0.7) ==
          doctest::Approx(robust_objective(data, cold.scores, 0.7)).epsilon(1e-8));
  }

  TEST_CASE("path grid is geometric from the top residual to the floor") {
    ComparisonDataset data = chain_with_reversal();
    LassoPath path = lasso_path(data, 5);
    REQUIRE(path.lambdas.size() == 5);
    for (std::size_t g = 1; g < path.lambdas.size(); ++g)
      CHECK(path.lambdas[g] < path.lambdas[g - 1]);
    CHECK(path.lambdas.back() == doctest::Approx(1e-3));
    const double ratio0 = path.lambdas[1] / path.lambdas[0];
    const double ratio1 = path.lambdas[2] / path.lambdas[1];
    CHECK(ratio0 == doctest::Approx(ratio1));

    // one giant lambda jump leaves the alternation crawling: documented cap
    CHECK_THROWS_AS(lasso_path(data, 2), SolverError);
    CHECK_THROWS_AS(lasso_path(data, 1), std::invalid_argument);

    ComparisonDataset clean;
    clean.n_items = 3;
    clean.records = {rec(0, 1, 1.0), rec(1, 2, 1.0)};
    LassoPath tiny = lasso_path(clean, 2);
    REQUIRE(tiny.lambdas.size() == 2);
    CHECK(tiny.lambdas.front() == doctest::Approx(1e-2));
    CHECK(tiny.lambdas.back() == doctest::Approx(1e-3));
  }

  TEST_CASE("clean consistent data never activates anything") {
    ComparisonDataset data;
    data.n_items = 3;
    data.records = {rec(0, 1, 1.0), rec(1, 2, 1.0)};
    LassoPath path = lasso_path(data, 4);
    CHECK(path.activation_order.empty());
    for (double lambda : path.activation_lambda) CHECK(std::isnan(lambda));
    // degenerate grid still spans a decade above the floor
    CHECK(path.lambdas.front() == doctest::Approx(1e-2));
    OutlierMask mask = lasso_select(path, 1);
    CHECK(mask.outlier_count() == 1);
    CHECK_FALSE(mask.keep[0]);
  }

  TEST_CASE("the reversed record activates first and is selected") {
    ComparisonDataset data = chain_with_reversal();
    LassoPath path = lasso_path(data, 50);
    REQUIRE_FALSE(path.activation_order.empty());
    CHECK(path.activation_order.front() == 6);
    CHECK_FALSE(std::isnan(path.activation_lambda[6]));
    OutlierMask mask = lasso_select(path, 1);
    CHECK(mask.keep == std::vector<bool>{true, true, true, true, true, true, false});
    OutlierMask none = lasso_select(path, 0);
    CHECK(none.outlier_count() == 0);
    CHECK_THROWS_AS(lasso_select(path, data.records.size() + 1), std::invalid_argument);
  }

  TEST_CASE("activation bookkeeping stays internally consistent") {
    Rng rng(15);
    ComparisonDataset data = random_dataset(rng, 5, 20);
    LassoPath path = lasso_path(data, 30, true);
    CHECK(path.scores_per_lambda.size() == path.lambdas.size());
    std::vector<bool> seen(data.records.size(), false);
    for (std::size_t idx : path.activation_order) {
      CHECK_FALSE(seen[idx]);
      seen[idx] = true;
      CHECK_FALSE(std::isnan(path.activation_lambda[idx]));
    }
    for (std::size_t r = 0; r < data.records.size(); ++r)
      if (!seen[r]) CHECK(std::isnan(path.activation_lambda[r]));
    CHECK(path.nonmonotone_events >= 0);
    CHECK(path.final_abs_residual.size() == data.records.size());
  }
}
