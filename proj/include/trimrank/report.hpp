#pragma once

#include <string>
#include <vector>

#include "trimrank/csvio.hpp"
#include "trimrank/model.hpp"

namespace trimrank {

struct PairCell {
  long count = 0;     // records where the row item was preferred over the column item
  long outliers = 0;  // flagged records among them
};

struct DetectReport {
  std::vector<int> order;  // item ids, best score first
  ScoreVector scores;      // indexed by item id
  OutlierMask mask;        // indexed by record
  long estimated_k = 0;
  int iterations = 0;
  bool converged = true;
  std::vector<std::vector<PairCell>> matrix;  // matrix[r][c] follows order
  std::vector<std::string> warnings;
};

DetectReport build_detect_report(const ComparisonDataset& data,
                                 const TrimmedSolution& solution);

std::string detect_report_json(const DetectReport& report, const LabelMap& items,
                               const EvalMetrics* metrics = nullptr);
std::string detect_report_table(const DetectReport& report, const LabelMap& items,
                                const EvalMetrics* metrics = nullptr);
// per-record flags, same shape as the truth sidecar
std::string detect_report_csv(const DetectReport& report);

std::string ranking_json(const DetectReport& report, const LabelMap& items);
std::string ranking_table(const DetectReport& report, const LabelMap& items);
std::string ranking_csv(const DetectReport& report, const LabelMap& items);

}  // namespace trimrank
