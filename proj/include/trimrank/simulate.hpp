#pragma once

#include <cstdint>
#include <vector>

#include "trimrank/model.hpp"

namespace trimrank {

struct SimulationSpec {
  int n_items = 16;
  long sample_count = 1000;        // SN, pairs drawn uniformly with replacement
  double outlier_percentage = 0.0;  // OP in [0, 1]; ON = floor(OP * SN)
  std::uint64_t seed = 0;
  // when positive, every unordered pair appears exactly this many times and
  // the sample count becomes rounds * C(n, 2) (the shape of the benchmark
  // corpora); zero keeps independent uniform pair sampling
  int complete_rounds = 0;
};

struct SimulatedDataset {
  ComparisonDataset dataset;
  std::vector<int> ground_truth_order;  // items, best first
  OutlierMask true_outliers;            // false marks an injected outlier
  long injected_outliers = 0;           // ON
};

long planned_outliers(double outlier_percentage, long sample_count);

// ground-truth total order, directed records, then a uniformly chosen
// subset of size ON gets its direction reversed; deterministic per seed
SimulatedDataset generate(const SimulationSpec& spec);

}  // namespace trimrank
