#include "trimrank/csvio.hpp"

#include <sstream>

#include <json.hpp>

namespace trimrank {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(trim(line.substr(start)));
      return fields;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

bool blank(const std::string& line) { return trim(line).empty(); }

}  // namespace

int LabelMap::intern(const std::string& label) {
  auto it = index.find(label);
  if (it != index.end()) return it->second;
  int id = static_cast<int>(labels.size());
  labels.push_back(label);
  index.emplace(label, id);
  return id;
}

int LabelMap::lookup(const std::string& label) const {
  auto it = index.find(label);
  return it == index.end() ? -1 : it->second;
}

LabelMap LabelMap::numeric(int n) {
  LabelMap map;
  for (int i = 0; i < n; ++i) map.intern(std::to_string(i));
  return map;
}

IngestResult ingest_csv(std::istream& in, const LabelMap* pinned_items) {
  IngestResult out;
  if (pinned_items) out.items = *pinned_items;

  std::string line;
  long line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    std::vector<std::string> fields = split_fields(line);
    if (!saw_header) {
      if (fields != std::vector<std::string>{"rater", "item_i", "item_j", "choice"})
        throw ParseError(line_no, "expected header rater,item_i,item_j,choice");
      saw_header = true;
      continue;
    }
    if (fields.size() != 4)
      throw ParseError(line_no, "expected 4 fields, got " + std::to_string(fields.size()));
    const std::string& rater = fields[0];
    const std::string& label_i = fields[1];
    const std::string& label_j = fields[2];
    const std::string& choice = fields[3];
    if (label_i.empty() || label_j.empty()) throw ParseError(line_no, "empty item label");
    if (label_i == label_j)
      throw ParseError(line_no, "item compared against itself: " + label_i);
    ComparisonRecord rec;
    if (pinned_items) {
      rec.item_i = out.items.lookup(label_i);
      rec.item_j = out.items.lookup(label_j);
      if (rec.item_i < 0) throw ParseError(line_no, "unknown item label: " + label_i);
      if (rec.item_j < 0) throw ParseError(line_no, "unknown item label: " + label_j);
    } else {
      rec.item_i = out.items.intern(label_i);
      rec.item_j = out.items.intern(label_j);
    }
    if (choice == "i") rec.y = 1.0;
    else if (choice == "j") rec.y = -1.0;
    else throw ParseError(line_no, "choice must be i or j, got: " + choice);
    rec.rater = out.raters.intern(rater);
    out.dataset.records.push_back(rec);
  }
  if (!saw_header) throw ParseError(line_no == 0 ? 1 : line_no, "empty input, missing header");
  out.dataset.n_items = out.items.size();
  validate(out.dataset);
  return out;
}

std::string dataset_csv(const ComparisonDataset& data, const LabelMap& items,
                        const LabelMap& raters) {
  std::ostringstream os;
  os << "rater,item_i,item_j,choice\n";
  for (const ComparisonRecord& rec : data.records) {
    os << raters.labels.at(static_cast<std::size_t>(rec.rater)) << ","
       << items.labels.at(static_cast<std::size_t>(rec.item_i)) << ","
       << items.labels.at(static_cast<std::size_t>(rec.item_j)) << ","
       << (rec.y > 0 ? "i" : "j") << "\n";
  }
  return os.str();
}

OutlierMask read_truth_csv(std::istream& in, std::size_t record_count) {
  OutlierMask mask = OutlierMask::all_keep(record_count);
  std::vector<bool> seen(record_count, false);
  std::string line;
  long line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    std::vector<std::string> fields = split_fields(line);
    if (!saw_header) {
      if (fields != std::vector<std::string>{"record_index", "is_outlier"})
        throw ParseError(line_no, "expected header record_index,is_outlier");
      saw_header = true;
      continue;
    }
    if (fields.size() != 2)
      throw ParseError(line_no, "expected 2 fields, got " + std::to_string(fields.size()));
    long idx = 0;
    try {
      std::size_t pos = 0;
      idx = std::stol(fields[0], &pos);
      if (pos != fields[0].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ParseError(line_no, "bad record index: " + fields[0]);
    }
    if (idx < 0 || idx >= static_cast<long>(record_count))
      throw ParseError(line_no, "record index out of range: " + fields[0]);
    if (seen[static_cast<std::size_t>(idx)])
      throw ParseError(line_no, "duplicate record index: " + fields[0]);
    seen[static_cast<std::size_t>(idx)] = true;
    if (fields[1] == "1") mask.keep[static_cast<std::size_t>(idx)] = false;
    else if (fields[1] != "0")
      throw ParseError(line_no, "is_outlier must be 0 or 1, got: " + fields[1]);
  }
  if (!saw_header) throw ParseError(line_no == 0 ? 1 : line_no, "empty input, missing header");
  return mask;
}

std::string truth_csv(const OutlierMask& mask) {
  std::ostringstream os;
  os << "record_index,is_outlier\n";
  for (std::size_t r = 0; r < mask.keep.size(); ++r)
    os << r << "," << (mask.keep[r] ? 0 : 1) << "\n";
  return os.str();
}

LabelMap read_label_map_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(1, std::string("bad label map json: ") + e.what());
  }
  if (!j.is_object() || !j.contains("items") || !j["items"].is_array())
    throw ParseError(1, "label map json needs an \"items\" array");
  LabelMap map;
  for (const auto& entry : j["items"]) {
    if (!entry.is_string()) throw ParseError(1, "label map items must be strings");
    const std::string label = entry.get<std::string>();
    if (map.lookup(label) >= 0) throw ParseError(1, "duplicate item label: " + label);
    map.intern(label);
  }
  return map;
}

std::string label_map_json(const LabelMap& map) {
  nlohmann::json j;
  j["items"] = map.labels;
  return j.dump(2);
}

}  // namespace trimrank
