#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "trimrank/hodge.hpp"
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

// independent construction straight from the definition
void oracle_system(const ComparisonDataset& data, const OutlierMask& mask,
                   Eigen::MatrixXd& L, Eigen::VectorXd& b) {
  const int n = data.n_items;
  L = Eigen::MatrixXd::Zero(n, n);
  b = Eigen::VectorXd::Zero(n);
  for (std::size_t r = 0; r < data.records.size(); ++r) {
    if (!mask.keep[r]) continue;
    const ComparisonRecord& c = data.records[r];
    L(c.item_i, c.item_i) += c.weight;
    L(c.item_j, c.item_j) += c.weight;
    L(c.item_i, c.item_j) -= c.weight;
    L(c.item_j, c.item_i) -= c.weight;
    b(c.item_i) += c.weight * c.y;
    b(c.item_j) -= c.weight * c.y;
  }
}

Eigen::VectorXd oracle_minnorm(const Eigen::MatrixXd& L, const Eigen::VectorXd& b) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(L, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  return svd.solve(b);
}

ComparisonDataset random_dataset(Rng& rng, int n, int m) {
  ComparisonDataset data;
  data.n_items = n;
  for (int k = 0; k < m; ++k) {
    const int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
    if (j >= i) ++j;
    const double y = rng.below(2) == 0 ? 1.0 : -1.0;
    const double w = 0.5 + 0.25 * static_cast<double>(rng.below(9));
    data.records.push_back(rec(i, j, y, w));
  }
  return data;
}

double max_abs_diff(const ScoreVector& got, const Eigen::VectorXd& want) {
  double worst = 0.0;
  for (int i = 0; i < want.size(); ++i)
    worst = std::max(worst, std::abs(got[i] - want(i)));
  return worst;
}

void check_residual_bound(const LaplacianSystem& sys, const ScoreVector& s) {
  std::vector<double> ls;
  sys.apply(s.values, ls);
  double err = 0.0, bnorm = 0.0;
  for (int i = 0; i < sys.n; ++i) {
    err += (ls[static_cast<std::size_t>(i)] - sys.divergence[static_cast<std::size_t>(i)]) *
           (ls[static_cast<std::size_t>(i)] - sys.divergence[static_cast<std::size_t>(i)]);
    bnorm += sys.divergence[static_cast<std::size_t>(i)] *
             sys.divergence[static_cast<std::size_t>(i)];
  }
  CHECK(std::sqrt(err) <= 1e-8 * (1.0 + std::sqrt(bnorm)));
}

}  // namespace

TEST_SUITE("hodge") {
  TEST_CASE("single comparison splits the unit difference") {
    ComparisonDataset data;
    data.n_items = 2;
    data.records = {rec(0, 1, 1.0)};
    LaplacianSystem sys = assemble(data, OutlierMask::all_keep(1));
    CHECK(sys.dense);
    CHECK(sys.kept_edges == 1);
    CHECK(sys.entry(0, 0) == doctest::Approx(1.0));
    CHECK(sys.entry(0, 1) == doctest::Approx(-1.0));
    CHECK(sys.divergence[0] == doctest::Approx(1.0));
    CHECK(sys.divergence[1] == doctest::Approx(-1.0));
    ScoreVector s = solve_scores(sys);
    CHECK(s[0] == doctest::Approx(0.5));
    CHECK(s[1] == doctest::Approx(-0.5));
  }

  TEST_CASE("repeated records add their weights") {
    ComparisonDataset data;
    data.n_items = 2;
    data.records = {rec(0, 1, 1.0, 2.0), rec(0, 1, -1.0, 1.0), rec(1, 0, 1.0, 0.5)};
    LaplacianSystem sys = assemble(data, OutlierMask::all_keep(3));
    CHECK(sys.entry(0, 0) == doctest::Approx(3.5));
    CHECK(sys.entry(0, 1) == doctest::Approx(-3.5));
    // net flow 2 - 1 - 0.5 toward item 0
    CHECK(sys.divergence[0] == doctest::Approx(0.5));
  }

  TEST_CASE("a pure cycle carries no gradient component") {
    ComparisonDataset data;
    data.n_items = 3;
    data.records = {rec(0, 1, 1.0), rec(1, 2, 1.0), rec(2, 0, 1.0)};
    ScoreVector s = solve_scores(assemble(data, OutlierMask::all_keep(3)));
    for (int i = 0; i < 3; ++i) CHECK(s[i] == doctest::Approx(0.0));
  }

  TEST_CASE("path graph reproduces the exact chain solution") {
    ComparisonDataset data;
    data.n_items = 3;
    data.records = {rec(0, 1, 1.0), rec(1, 2, 1.0)};
    ScoreVector s = solve_scores(assemble(data, OutlierMask::all_keep(2)));
    CHECK(s[0] == doctest::Approx(1.0));
    CHECK(s[1] == doctest::Approx(0.0));
    CHECK(s[2] == doctest::Approx(-1.0));
  }

  TEST_CASE("each component is gauged to mean zero") {
    ComparisonDataset data;
    data.n_items = 5;
    data.records = {rec(0, 1, 1.0), rec(2, 3, -1.0, 2.0)};
    ScoreVector s = solve_scores(assemble(data, OutlierMask::all_keep(2)));
    CHECK(s[0] + s[1] == doctest::Approx(0.0));
    CHECK(s[2] + s[3] == doctest::Approx(0.0));
    CHECK(s[4] == doctest::Approx(0.0));
    CHECK(s[0] == doctest::Approx(0.5));
    CHECK(s[2] == doctest::Approx(-0.5));

    auto comps = connected_components(data, OutlierMask::all_keep(2));
    REQUIRE(comps.size() == 3);
    CHECK(comps[0] == std::vector<int>{0, 1});
    CHECK(comps[1] == std::vector<int>{2, 3});
    CHECK(comps[2] == std::vector<int>{4});
  }

  TEST_CASE("masking a record removes it from the system") {
    ComparisonDataset data;
    data.n_items = 3;
    data.records = {rec(0, 1, 1.0), rec(1, 2, 1.0), rec(2, 0, 1.0)};
    OutlierMask mask = OutlierMask::all_keep(3);
    mask.keep[2] = false;
    LaplacianSystem sys = assemble(data, mask);
    CHECK(sys.kept_edges == 2);
    CHECK(sys.entry(2, 0) == doctest::Approx(0.0));
    ScoreVector s = solve_scores(sys);
    CHECK(s[0] == doctest::Approx(1.0));
    CHECK(s[1] == doctest::Approx(0.0));
    CHECK(s[2] == doctest::Approx(-1.0));

    auto comps = connected_components(data, mask);
    REQUIRE(comps.size() == 1);

    mask.keep[1] = false;
    comps = connected_components(data, mask);
    REQUIRE(comps.size() == 2);
    CHECK(comps[0] == std::vector<int>{0, 1});
    CHECK(comps[1] == std::vector<int>{2});
  }

  TEST_CASE("random graphs match the pseudo-inverse on both solver routes") {
    Rng rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 2 + static_cast<int>(rng.below(11));
      const int m = 1 + static_cast<int>(rng.below(30));
      ComparisonDataset data = random_dataset(rng, n, m);
      OutlierMask mask = OutlierMask::all_keep(data.records.size());
      for (std::size_t r = 0; r < mask.keep.size(); ++r)
        if (rng.below(5) == 0) mask.keep[r] = false;

      Eigen::MatrixXd L;
      Eigen::VectorXd b;
      oracle_system(data, mask, L, b);
      const Eigen::VectorXd want = oracle_minnorm(L, b);

      LaplacianSystem sys = assemble(data, mask);
      ScoreVector direct = solve_scores(sys);
      CHECK(max_abs_diff(direct, want) < 1e-6);
      check_residual_bound(sys, direct);

      SolveOptions cg;
      cg.force_cg = true;
      ScoreVector iterative = solve_scores(sys, cg);
      CHECK(max_abs_diff(iterative, want) < 1e-6);

      SolveOptions warm;
      warm.force_cg = true;
      warm.warm_start = &direct;
      ScoreVector warmed = solve_scores(sys, warm);
      CHECK(max_abs_diff(warmed, want) < 1e-6);
    }
  }

  TEST_CASE("large item counts switch to sparse storage and still match") {
    Rng rng(7);
    const int n = kDenseLimit + 8;
    ComparisonDataset data = random_dataset(rng, n, 3000);
    OutlierMask mask = OutlierMask::all_keep(data.records.size());
    LaplacianSystem sys = assemble(data, mask);
    CHECK_FALSE(sys.dense);
    ScoreVector s = solve_scores(sys);
    check_residual_bound(sys, s);

    Eigen::MatrixXd L;
    Eigen::VectorXd b;
    oracle_system(data, mask, L, b);
    const Eigen::VectorXd want = oracle_minnorm(L, b);
    CHECK(max_abs_diff(s, want) < 1e-6);
  }

  TEST_CASE("trimmed least squares reports the objective of its own scores") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 3 + static_cast<int>(rng.below(6));
      ComparisonDataset data = random_dataset(rng, n, 12);
      OutlierMask mask = OutlierMask::all_keep(data.records.size());
      for (std::size_t r = 0; r < mask.keep.size(); ++r)
        if (rng.below(4) == 0) mask.keep[r] = false;
      TrimmedLsResult fit = trimmed_least_squares(data, mask);
      CHECK(fit.objective ==
            doctest::Approx(masked_objective(data, mask, fit.scores)).epsilon(1e-9));
    }
  }

  TEST_CASE("empty kept set yields all-zero scores") {
    ComparisonDataset data;
    data.n_items = 3;
    data.records = {rec(0, 1, 1.0)};
    OutlierMask mask = OutlierMask::all_keep(1);
    mask.keep[0] = false;
    ScoreVector s = solve_scores(assemble(data, mask));
    for (int i = 0; i < 3; ++i) CHECK(s[i] == doctest::Approx(0.0));
  }
}
