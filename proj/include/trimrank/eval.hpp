#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trimrank/ilts.hpp"
#include "trimrank/model.hpp"

namespace trimrank {

enum class Method { ilts_adaptive, ilts_fixed_k, lasso };

std::string method_name(Method method);
Method method_from_name(const std::string& name);

struct SweepSpec {
  int n_items = 16;
  std::vector<int> sn_values = {1000, 2000, 3000, 4000, 5000};
  std::vector<double> op_values = {0.05, 0.10, 0.15, 0.20, 0.25,
                                   0.30, 0.35, 0.40, 0.45, 0.50};
  int repeats = 100;
  std::uint64_t base_seed = 1;
  IltsConfig ilts;
  bool apply_correction = true;  // adaptive runs only
  int lasso_grid = 100;
  bool keep_raw = false;
};

struct MethodCellStats {
  Method method = Method::ilts_adaptive;
  double mean_precision = 0.0, sd_precision = 0.0;
  double mean_recall = 0.0, sd_recall = 0.0;
  double mean_f1 = 0.0, sd_f1 = 0.0;
  double mean_estimated_k = 0.0;
  double wall_seconds = 0.0;
  int failures = 0;
};

struct SweepCell {
  int sn = 0;
  double op = 0.0;
  long on = 0;
  bool no_outliers = false;  // empty-truth cell: aggregate f1 reported as 0
  std::vector<MethodCellStats> per_method;
};

struct RawRun {
  int sn = 0;
  double op = 0.0;
  int repeat = 0;
  Method method = Method::ilts_adaptive;
  bool failed = false;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  long estimated_k = 0;
  double seconds = 0.0;
};

struct SweepReport {
  SweepSpec spec;
  std::vector<Method> methods;
  std::vector<SweepCell> cells;
  std::vector<double> method_total_seconds;  // parallel to methods
  std::vector<RawRun> raw;                   // only when spec.keep_raw
  int threads_used = 1;
  bool timings_comparable = true;
};

// confusion counts with outlier as the positive class
EvalMetrics score_detection(const OutlierMask& predicted, const OutlierMask& truth);

// threads <= 0 picks the logical core count, capped by TRIMRANK_THREADS;
// metric fields are deterministic for a fixed spec regardless of threads
SweepReport run_sweep(const SweepSpec& spec, const std::vector<Method>& methods,
                      int threads = 1);

std::string sweep_report_json(const SweepReport& report);
std::string sweep_report_table(const SweepReport& report);
std::string sweep_report_csv(const SweepReport& report);
std::string raw_runs_csv(const SweepReport& report);

}  // namespace trimrank
