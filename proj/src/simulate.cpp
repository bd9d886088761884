#include "trimrank/simulate.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "trimrank/rng.hpp"

namespace trimrank {

long planned_outliers(double outlier_percentage, long sample_count) {
  // the epsilon keeps exact rational products like 0.35 * 1000 from
  // landing a hair below their integer value
  return static_cast<long>(
      std::floor(outlier_percentage * static_cast<double>(sample_count) + 1e-9));
}

SimulatedDataset generate(const SimulationSpec& spec) {
  if (spec.n_items < 2) throw std::invalid_argument("need at least two items to compare");
  if (spec.outlier_percentage < 0.0 || spec.outlier_percentage > 1.0)
    throw std::invalid_argument("outlier percentage must lie in [0, 1]");
  if (spec.complete_rounds < 0) throw std::invalid_argument("complete_rounds must be non-negative");
  const long n = spec.n_items;
  const long sn = (spec.complete_rounds > 0)
                      ? spec.complete_rounds * (n * (n - 1) / 2)
                      : spec.sample_count;
  if (sn < 1) throw std::invalid_argument("sample count must be positive");

  Rng rng(spec.seed);
  SimulatedDataset out;
  out.dataset.n_items = spec.n_items;
  out.dataset.records.reserve(static_cast<std::size_t>(sn));

  out.ground_truth_order.resize(static_cast<std::size_t>(n));
  std::iota(out.ground_truth_order.begin(), out.ground_truth_order.end(), 0);
  rng.shuffle(out.ground_truth_order);
  std::vector<int> rank(static_cast<std::size_t>(n));
  for (long p = 0; p < n; ++p) rank[static_cast<std::size_t>(out.ground_truth_order[p])] = static_cast<int>(p);

  const auto push_pair = [&](int a, int b) {
    const bool a_better = rank[static_cast<std::size_t>(a)] < rank[static_cast<std::size_t>(b)];
    ComparisonRecord rec;
    rec.rater = static_cast<int>(out.dataset.records.size());
    rec.item_i = a_better ? a : b;
    rec.item_j = a_better ? b : a;
    rec.y = 1.0;
    out.dataset.records.push_back(rec);
  };

  if (spec.complete_rounds > 0) {
    std::vector<std::size_t> slots(static_cast<std::size_t>(sn));
    std::iota(slots.begin(), slots.end(), std::size_t{0});
    rng.shuffle(slots);
    out.dataset.records.resize(static_cast<std::size_t>(sn));
    std::size_t next = 0;
    for (int a = 0; a < spec.n_items; ++a)
      for (int b = a + 1; b < spec.n_items; ++b)
        for (int round = 0; round < spec.complete_rounds; ++round) {
          const bool a_better = rank[static_cast<std::size_t>(a)] < rank[static_cast<std::size_t>(b)];
          ComparisonRecord rec;
          rec.item_i = a_better ? a : b;
          rec.item_j = a_better ? b : a;
          rec.y = 1.0;
          const std::size_t slot = slots[next++];
          rec.rater = static_cast<int>(slot);
          out.dataset.records[slot] = rec;
        }
  } else {
    for (long t = 0; t < sn; ++t) {
      const int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      int b = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
      if (b >= a) ++b;
      push_pair(a, b);
    }
  }

  out.injected_outliers = planned_outliers(spec.outlier_percentage, sn);
  out.true_outliers = OutlierMask::all_keep(static_cast<std::size_t>(sn));
  std::vector<std::size_t> indices(static_cast<std::size_t>(sn));
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  for (long t = 0; t < out.injected_outliers; ++t) {
    const std::size_t j =
        static_cast<std::size_t>(t) +
        static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(sn - t)));
    std::swap(indices[static_cast<std::size_t>(t)], indices[j]);
    const std::size_t chosen = indices[static_cast<std::size_t>(t)];
    out.dataset.records[chosen].y = -1.0;
    out.true_outliers.keep[chosen] = false;
  }
  return out;
}

}  // namespace trimrank
