#pragma once

#include <istream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "trimrank/model.hpp"

namespace trimrank {

class ParseError : public std::runtime_error {
 public:
  ParseError(long line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

struct LabelMap {
  std::vector<std::string> labels;
  std::unordered_map<std::string, int> index;

  int intern(const std::string& label);
  int lookup(const std::string& label) const;  // -1 when absent
  int size() const { return static_cast<int>(labels.size()); }
  static LabelMap numeric(int n);
};

struct IngestResult {
  ComparisonDataset dataset;
  LabelMap items;
  LabelMap raters;
};

// header: rater,item_i,item_j,choice  with choice in {i,j}
// labels are interned in first-occurrence order unless pinned_items is given,
// in which case unknown item labels are rejected
IngestResult ingest_csv(std::istream& in, const LabelMap* pinned_items = nullptr);

std::string dataset_csv(const ComparisonDataset& data, const LabelMap& items,
                        const LabelMap& raters);

// header: record_index,is_outlier  with is_outlier in {0,1}; absent rows keep
OutlierMask read_truth_csv(std::istream& in, std::size_t record_count);
std::string truth_csv(const OutlierMask& mask);

LabelMap read_label_map_json(std::istream& in);
std::string label_map_json(const LabelMap& map);

}  // namespace trimrank
