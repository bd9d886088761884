#include "trimrank/report.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace trimrank {

namespace {

std::vector<int> ranked_order(const ScoreVector& scores) {
  std::vector<int> order(scores.values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores.values[static_cast<std::size_t>(a)] !=
        scores.values[static_cast<std::size_t>(b)])
      return scores.values[static_cast<std::size_t>(a)] >
             scores.values[static_cast<std::size_t>(b)];
    return a < b;
  });
  return order;
}

nlohmann::json ranking_entries(const DetectReport& report, const LabelMap& items) {
  nlohmann::json ranking = nlohmann::json::array();
  for (std::size_t r = 0; r < report.order.size(); ++r) {
    const int item = report.order[r];
    ranking.push_back({
        {"rank", r + 1},
        {"item", item},
        {"label", items.labels.at(static_cast<std::size_t>(item))},
        {"score", report.scores.values[static_cast<std::size_t>(item)]},
    });
  }
  return ranking;
}

}  // namespace

DetectReport build_detect_report(const ComparisonDataset& data,
                                 const TrimmedSolution& solution) {
  if (solution.scores.size() != data.n_items)
    throw std::invalid_argument("solution scores do not cover the item count");
  if (solution.mask.size() != data.records.size())
    throw std::invalid_argument("solution mask does not cover the record count");

  DetectReport report;
  report.order = ranked_order(solution.scores);
  report.scores = solution.scores;
  report.mask = solution.mask;
  report.estimated_k = solution.estimated_k;
  report.iterations = solution.iterations;
  report.converged = solution.converged;
  report.warnings = solution.warnings;

  const std::size_t n = report.order.size();
  std::vector<int> pos(n, 0);
  for (std::size_t r = 0; r < n; ++r) pos[static_cast<std::size_t>(report.order[r])] =
      static_cast<int>(r);
  report.matrix.assign(n, std::vector<PairCell>(n));
  for (std::size_t r = 0; r < data.records.size(); ++r) {
    const ComparisonRecord& rec = data.records[r];
    const int winner = rec.y > 0 ? rec.item_i : rec.item_j;
    const int loser = rec.y > 0 ? rec.item_j : rec.item_i;
    PairCell& cell = report.matrix[static_cast<std::size_t>(pos[static_cast<std::size_t>(
        winner)])][static_cast<std::size_t>(pos[static_cast<std::size_t>(loser)])];
    ++cell.count;
    if (!report.mask.keep[r]) ++cell.outliers;
  }
  return report;
}

std::string detect_report_json(const DetectReport& report, const LabelMap& items,
                               const EvalMetrics* metrics) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["n_items"] = report.order.size();
  j["estimated_k"] = report.estimated_k;
  j["iterations"] = report.iterations;
  j["converged"] = report.converged;
  j["ranking"] = ranking_entries(report, items);
  nlohmann::json flagged = nlohmann::json::array();
  for (std::size_t r = 0; r < report.mask.keep.size(); ++r)
    if (!report.mask.keep[r]) flagged.push_back(r);
  j["flagged_records"] = flagged;
  nlohmann::json order_labels = nlohmann::json::array();
  for (int item : report.order)
    order_labels.push_back(items.labels.at(static_cast<std::size_t>(item)));
  nlohmann::json counts = nlohmann::json::array();
  nlohmann::json outliers = nlohmann::json::array();
  for (const auto& row : report.matrix) {
    nlohmann::json crow = nlohmann::json::array();
    nlohmann::json orow = nlohmann::json::array();
    for (const PairCell& cell : row) {
      crow.push_back(cell.count);
      orow.push_back(cell.outliers);
    }
    counts.push_back(crow);
    outliers.push_back(orow);
  }
  j["matrix"] = {{"order", order_labels}, {"counts", counts}, {"outliers", outliers}};
  if (metrics) {
    j["metrics"] = {{"true_positives", metrics->true_positives},
                    {"false_positives", metrics->false_positives},
                    {"false_negatives", metrics->false_negatives},
                    {"true_negatives", metrics->true_negatives},
                    {"precision", metrics->precision},
                    {"recall", metrics->recall},
                    {"f1", metrics->f1}};
  }
  j["warnings"] = report.warnings;
  return j.dump(2);
}

std::string detect_report_table(const DetectReport& report, const LabelMap& items,
                                const EvalMetrics* metrics) {
  std::ostringstream os;
  os << ranking_table(report, items);
  os << "\nflagged " << report.mask.outlier_count() << " of " << report.mask.size()
     << " records (estimated k " << report.estimated_k << ", "
     << (report.converged ? "converged" : "not converged") << " after "
     << report.iterations << " iterations)\n\n";

  const std::size_t n = report.order.size();
  std::vector<std::string> cells(n * n);
  std::size_t width = 4;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const PairCell& cell = report.matrix[r][c];
      std::string text;
      if (r == c) text = ".";
      else if (cell.outliers > 0)
        text = std::to_string(cell.count) + "[" + std::to_string(cell.outliers) + "]";
      else text = std::to_string(cell.count);
      width = std::max(width, text.size());
      cells[r * n + c] = std::move(text);
    }
  }
  for (int item : report.order)
    width = std::max(width, items.labels.at(static_cast<std::size_t>(item)).size());
  const auto pad = [&](const std::string& s) {
    os << std::setw(static_cast<int>(width + 2)) << s;
  };
  os << "preferred over (row beats column, [n] flagged):\n";
  pad("");
  for (int item : report.order) pad(items.labels.at(static_cast<std::size_t>(item)));
  os << "\n";
  for (std::size_t r = 0; r < n; ++r) {
    pad(items.labels.at(static_cast<std::size_t>(report.order[r])));
    for (std::size_t c = 0; c < n; ++c) pad(cells[r * n + c]);
    os << "\n";
  }
  if (metrics) {
    os << "\nagainst truth: precision " << std::fixed << std::setprecision(3)
       << metrics->precision << ", recall " << metrics->recall << ", f1 " << metrics->f1
       << "\n";
  }
  for (const std::string& warning : report.warnings) os << "warning: " << warning << "\n";
  return os.str();
}

std::string detect_report_csv(const DetectReport& report) { return truth_csv(report.mask); }

std::string ranking_json(const DetectReport& report, const LabelMap& items) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["ranking"] = ranking_entries(report, items);
  j["warnings"] = report.warnings;
  return j.dump(2);
}

std::string ranking_table(const DetectReport& report, const LabelMap& items) {
  std::ostringstream os;
  std::size_t width = 4;
  for (const std::string& label : items.labels) width = std::max(width, label.size());
  os << std::setw(4) << "rank" << "  " << std::setw(static_cast<int>(width)) << "item"
     << "  " << "score\n";
  for (std::size_t r = 0; r < report.order.size(); ++r) {
    const int item = report.order[r];
    os << std::setw(4) << r + 1 << "  " << std::setw(static_cast<int>(width))
       << items.labels.at(static_cast<std::size_t>(item)) << "  " << std::fixed
       << std::setprecision(6) << report.scores.values[static_cast<std::size_t>(item)]
       << "\n";
  }
  return os.str();
}

std::string ranking_csv(const DetectReport& report, const LabelMap& items) {
  std::ostringstream os;
  os << "rank,item,score\n";
  os << std::setprecision(17);
  for (std::size_t r = 0; r < report.order.size(); ++r) {
    const int item = report.order[r];
    os << r + 1 << "," << items.labels.at(static_cast<std::size_t>(item)) << ","
       << report.scores.values[static_cast<std::size_t>(item)] << "\n";
  }
  return os.str();
}

}  // namespace trimrank
