#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "trimrank/hodge.hpp"
#include "trimrank/simulate.hpp"

using namespace trimrank;

TEST_SUITE("simulate") {
  TEST_CASE("planned outlier counts truncate the product") {
    CHECK(planned_outliers(0.35, 1000) == 350);
    CHECK(planned_outliers(0.05, 1000) == 50);
    CHECK(planned_outliers(0.0, 1234) == 0);
    CHECK(planned_outliers(0.5, 9) == 4);
    CHECK(planned_outliers(1.0, 7) == 7);
    CHECK(planned_outliers(0.45, 2000) == 900);
  }

  TEST_CASE("generation is deterministic per seed") {
    SimulationSpec spec;
    spec.n_items = 6;
    spec.sample_count = 50;
    spec.outlier_percentage = 0.2;
    spec.seed = 5;
    SimulatedDataset a = generate(spec);
    SimulatedDataset b = generate(spec);
    CHECK(a.ground_truth_order == b.ground_truth_order);
    CHECK(a.true_outliers.keep == b.true_outliers.keep);
    REQUIRE(a.dataset.records.size() == b.dataset.records.size());
    for (std::size_t r = 0; r < a.dataset.records.size(); ++r) {
      CHECK(a.dataset.records[r].item_i == b.dataset.records[r].item_i);
      CHECK(a.dataset.records[r].item_j == b.dataset.records[r].item_j);
      CHECK(a.dataset.records[r].y == b.dataset.records[r].y);
    }
    spec.seed = 6;
    SimulatedDataset c = generate(spec);
    bool any_difference = a.ground_truth_order != c.ground_truth_order;
    for (std::size_t r = 0; !any_difference && r < a.dataset.records.size(); ++r)
      any_difference = a.dataset.records[r].item_i != c.dataset.records[r].item_i ||
                       a.dataset.records[r].item_j != c.dataset.records[r].item_j ||
                       a.dataset.records[r].y != c.dataset.records[r].y;
    CHECK(any_difference);
  }

  TEST_CASE("every record points toward the better item and flips mark outliers") {
    SimulationSpec spec;
    spec.n_items = 10;
    spec.sample_count = 400;
    spec.outlier_percentage = 0.25;
    spec.seed = 17;
    SimulatedDataset sim = generate(spec);
    CHECK_NOTHROW(validate(sim.dataset));
    CHECK(sim.injected_outliers == 100);
    CHECK(sim.true_outliers.outlier_count() == 100);

    std::vector<int> rank(10);
    for (int p = 0; p < 10; ++p) rank[static_cast<std::size_t>(sim.ground_truth_order[p])] = p;
    long flipped = 0;
    for (std::size_t r = 0; r < sim.dataset.records.size(); ++r) {
      const ComparisonRecord& rec = sim.dataset.records[r];
      CHECK(rank[static_cast<std::size_t>(rec.item_i)] <
            rank[static_cast<std::size_t>(rec.item_j)]);
      if (rec.y < 0) {
        ++flipped;
        CHECK_FALSE(sim.true_outliers.keep[r]);
      } else {
        CHECK(sim.true_outliers.keep[r]);
      }
    }
    CHECK(flipped == 100);
  }

  TEST_CASE("clean data lets least squares recover the hidden order") {
    SimulationSpec spec;
    spec.n_items = 8;
    spec.sample_count = 2000;
    spec.outlier_percentage = 0.0;
    spec.seed = 11;
    SimulatedDataset sim = generate(spec);
    TrimmedLsResult fit = trimmed_least_squares(
        sim.dataset, OutlierMask::all_keep(sim.dataset.records.size()));
    std::vector<int> order(8);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return fit.scores[a] > fit.scores[b]; });
    CHECK(order == sim.ground_truth_order);
  }

  TEST_CASE("complete design covers every pair the same number of times") {
    SimulationSpec spec;
    spec.n_items = 4;
    spec.complete_rounds = 3;
    spec.outlier_percentage = 0.5;
    spec.seed = 2;
    SimulatedDataset sim = generate(spec);
    REQUIRE(sim.dataset.records.size() == 18);
    CHECK(sim.injected_outliers == 9);
    std::map<std::pair<int, int>, int> pair_counts;
    for (const ComparisonRecord& rec : sim.dataset.records) {
      const int lo = std::min(rec.item_i, rec.item_j);
      const int hi = std::max(rec.item_i, rec.item_j);
      ++pair_counts[{lo, hi}];
    }
    CHECK(pair_counts.size() == 6);
    for (const auto& [pair, count] : pair_counts) CHECK(count == 3);
  }

  TEST_CASE("fixed seed reproduces the frozen stream") {
    SimulationSpec spec;
    spec.n_items = 5;
    spec.sample_count = 6;
    spec.outlier_percentage = 0.34;
    spec.seed = 42;
    SimulatedDataset sim = generate(spec);
    CHECK(sim.ground_truth_order == std::vector<int>{2, 3, 4, 0, 1});
    CHECK(sim.injected_outliers == 2);
    const int want_i[] = {0, 0, 2, 3, 2, 4};
    const int want_j[] = {1, 1, 0, 0, 3, 0};
    const double want_y[] = {-1, -1, 1, 1, 1, 1};
    REQUIRE(sim.dataset.records.size() == 6);
    for (std::size_t r = 0; r < 6; ++r) {
      CHECK(sim.dataset.records[r].item_i == want_i[r]);
      CHECK(sim.dataset.records[r].item_j == want_j[r]);
      CHECK(sim.dataset.records[r].y == want_y[r]);
      CHECK(sim.true_outliers.keep[r] == (want_y[r] > 0));
    }
  }

  TEST_CASE("invalid specifications are rejected") {
    SimulationSpec spec;
    spec.n_items = 1;
    CHECK_THROWS_AS(generate(spec), std::invalid_argument);
    spec = SimulationSpec{};
    spec.outlier_percentage = 1.5;
    CHECK_THROWS_AS(generate(spec), std::invalid_argument);
    spec = SimulationSpec{};
    spec.sample_count = 0;
    CHECK_THROWS_AS(generate(spec), std::invalid_argument);
    spec = SimulationSpec{};
    spec.complete_rounds = -1;
    CHECK_THROWS_AS(generate(spec), std::invalid_argument);
  }

  TEST_CASE("full flip percentage reverses everything") {
    SimulationSpec spec;
    spec.n_items = 4;
    spec.sample_count = 30;
    spec.outlier_percentage = 1.0;
    spec.seed = 8;
    SimulatedDataset sim = generate(spec);
    CHECK(sim.injected_outliers == 30);
    for (const ComparisonRecord& rec : sim.dataset.records) CHECK(rec.y == -1.0);
    CHECK(sim.true_outliers.outlier_count() == 30);
  }
}
