#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace trimrank {

// One rater's dichotomous preference on an item pair.
// y = +1 means item_i is preferred over item_j, y = -1 the opposite.
struct ComparisonRecord {
  int rater = 0;
  int item_i = 0;
  int item_j = 0;
  double y = 1.0;
  double weight = 1.0;
};

struct ComparisonDataset {
  int n_items = 0;
  std::vector<ComparisonRecord> records;
};

// throws std::invalid_argument on violated invariants
void validate(const ComparisonDataset& data);

struct ScoreVector {
  std::vector<double> values;

  int size() const { return static_cast<int>(values.size()); }
  double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
};

// keep[r] == false marks record r as an outlier
struct OutlierMask {
  std::vector<bool> keep;

  std::size_t size() const { return keep.size(); }
  std::size_t outlier_count() const;

  static OutlierMask all_keep(std::size_t n_records);
};

struct TrimmedSolution {
  ScoreVector scores;
  OutlierMask mask;
  double objective = 0.0;
  int iterations = 0;
  long estimated_k = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

struct EvalMetrics {
  long true_positives = 0;
  long false_positives = 0;
  long false_negatives = 0;
  long true_negatives = 0;
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 0.0;
};

// precision/recall default to 1 on an empty denominator, f1 to 0 when both
// precision and recall are 0
EvalMetrics metrics_from_counts(long tp, long fp, long fn, long tn);

// s_i - s_j - y; throws std::out_of_range on bad indices
double residual(const ComparisonRecord& record, const ScoreVector& scores);

// number of records whose direction disagrees with sign(s_i - s_j);
// a tie (s_i == s_j) counts as a mismatch
long mismatch_count(const ComparisonDataset& data, const ScoreVector& scores);

// sum over kept records of weight * residual^2
double masked_objective(const ComparisonDataset& data, const OutlierMask& mask,
                        const ScoreVector& scores);

}  // namespace trimrank
