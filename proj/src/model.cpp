#include "trimrank/model.hpp"

#include <cmath>
#include <stdexcept>

namespace trimrank {

void validate(const ComparisonDataset& data) {
  if (data.n_items < 1) throw std::invalid_argument("dataset needs at least one item");
  for (std::size_t r = 0; r < data.records.size(); ++r) {
    const ComparisonRecord& rec = data.records[r];
    const auto bad = [&](const std::string& why) {
      throw std::invalid_argument("record " + std::to_string(r) + ": " + why);
    };
    if (rec.item_i < 0 || rec.item_i >= data.n_items) bad("item_i out of range");
    if (rec.item_j < 0 || rec.item_j >= data.n_items) bad("item_j out of range");
    if (rec.item_i == rec.item_j) bad("self comparison");
    if (rec.y != 1.0 && rec.y != -1.0) bad("y must be +1 or -1");
    if (!(rec.weight > 0.0) || !std::isfinite(rec.weight)) bad("weight must be positive");
  }
}

std::size_t OutlierMask::outlier_count() const {
  std::size_t n = 0;
  for (bool k : keep)
    if (!k) ++n;
  return n;
}

OutlierMask OutlierMask::all_keep(std::size_t n_records) {
  OutlierMask m;
  m.keep.assign(n_records, true);
  return m;
}

EvalMetrics metrics_from_counts(long tp, long fp, long fn, long tn) {
  if (tp < 0 || fp < 0 || fn < 0 || tn < 0)
    throw std::invalid_argument("confusion counts must be non-negative");
  EvalMetrics m;
  m.true_positives = tp;
  m.false_positives = fp;
  m.false_negatives = fn;
  m.true_negatives = tn;
  m.precision = (tp + fp > 0) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 1.0;
  m.recall = (tp + fn > 0) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 1.0;
  const double pr = m.precision + m.recall;
  m.f1 = (pr > 0.0) ? 2.0 * m.precision * m.recall / pr : 0.0;
  return m;
}

double residual(const ComparisonRecord& record, const ScoreVector& scores) {
  const int n = scores.size();
  if (record.item_i < 0 || record.item_i >= n || record.item_j < 0 || record.item_j >= n)
    throw std::out_of_range("record indices out of range for score vector");
  return scores[record.item_i] - scores[record.item_j] - record.y;
}

long mismatch_count(const ComparisonDataset& data, const ScoreVector& scores) {
  if (scores.size() != data.n_items)
    throw std::out_of_range("score vector length does not match item count");
  long count = 0;
  for (const ComparisonRecord& rec : data.records) {
    const double gap = scores[rec.item_i] - scores[rec.item_j];
    const double dir = (gap > 0.0) ? 1.0 : (gap < 0.0 ? -1.0 : 0.0);
    if (dir != rec.y) ++count;
  }
  return count;
}

double masked_objective(const ComparisonDataset& data, const OutlierMask& mask,
                        const ScoreVector& scores) {
  if (mask.size() != data.records.size())
    throw std::invalid_argument("mask length does not match record count");
  double sum = 0.0;
  for (std::size_t r = 0; r < data.records.size(); ++r) {
    if (!mask.keep[r]) continue;
    const double res = residual(data.records[r], scores);
    sum += data.records[r].weight * res * res;
  }
  return sum;
}

}  // namespace trimrank
