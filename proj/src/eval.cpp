#include "trimrank/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "trimrank/hodge.hpp"
#include "trimrank/huber_lasso.hpp"
#include "trimrank/rng.hpp"
#include "trimrank/simulate.hpp"

namespace trimrank {

namespace {

struct RunOutcome {
  bool failed = false;
  EvalMetrics metrics;
  long estimated_k = 0;
  double seconds = 0.0;
};

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  long threads = hw == 0 ? 1 : static_cast<long>(hw);
  if (const char* env = std::getenv("TRIMRANK_THREADS")) {
    char* end = nullptr;
    long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) threads = std::min(threads, cap);
  }
  return static_cast<int>(std::max(1L, threads));
}

void validate_spec(const SweepSpec& spec) {
  if (spec.n_items < 2) throw std::invalid_argument("sweep needs at least two items");
  if (spec.repeats < 1) throw std::invalid_argument("sweep needs at least one repeat");
  if (spec.sn_values.empty() || spec.op_values.empty())
    throw std::invalid_argument("sweep needs sample counts and outlier fractions");
  for (int sn : spec.sn_values)
    if (sn < 1) throw std::invalid_argument("sample count must be positive");
  for (double op : spec.op_values)
    if (!(op >= 0.0 && op <= 1.0))
      throw std::invalid_argument("outlier fraction must lie in [0, 1]");
  if (spec.lasso_grid < 2) throw std::invalid_argument("lasso grid needs at least two points");
  validate(spec.ilts);
}

RunOutcome run_one(const SweepSpec& spec, Method method, const SimulatedDataset& sim) {
  RunOutcome out;
  const long on = sim.true_outliers.outlier_count();
  auto start = std::chrono::steady_clock::now();
  try {
    OutlierMask predicted;
    switch (method) {
      case Method::ilts_adaptive: {
        TrimmedSolution sol = adaptive_ilts(sim.dataset, spec.ilts);
        if (spec.apply_correction) sol = adjacent_pair_correction(sim.dataset, sol);
        predicted = sol.mask;
        out.estimated_k = sol.estimated_k;
        break;
      }
      case Method::ilts_fixed_k: {
        TrimmedSolution sol = ilts_with_k(sim.dataset, on, spec.ilts);
        predicted = sol.mask;
        out.estimated_k = sol.estimated_k;
        break;
      }
      case Method::lasso: {
        LassoPath path = lasso_path(sim.dataset, spec.lasso_grid);
        predicted = lasso_select(path, on);
        out.estimated_k = on;
        break;
      }
    }
    out.metrics = score_detection(predicted, sim.true_outliers);
  } catch (const SolverError&) {
    out.failed = true;
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

double sample_sd(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::string format_cell(double mean, double sd) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << mean << "(" << sd << ")";
  return os.str();
}

}  // namespace

std::string method_name(Method method) {
  switch (method) {
    case Method::ilts_adaptive: return "ilts";
    case Method::ilts_fixed_k: return "ilts-k";
    case Method::lasso: return "lasso";
  }
  throw std::invalid_argument("unknown method");
}

Method method_from_name(const std::string& name) {
  if (name == "ilts") return Method::ilts_adaptive;
  if (name == "ilts-k") return Method::ilts_fixed_k;
  if (name == "lasso") return Method::lasso;
  throw std::invalid_argument("unknown method: " + name);
}

EvalMetrics score_detection(const OutlierMask& predicted, const OutlierMask& truth) {
  if (predicted.size() != truth.size())
    throw std::invalid_argument("prediction and truth cover different record counts");
  long tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t r = 0; r < predicted.keep.size(); ++r) {
    const bool pred_out = !predicted.keep[r];
    const bool true_out = !truth.keep[r];
    if (pred_out && true_out) ++tp;
    else if (pred_out) ++fp;
    else if (true_out) ++fn;
    else ++tn;
  }
  return metrics_from_counts(tp, fp, fn, tn);
}

SweepReport run_sweep(const SweepSpec& spec, const std::vector<Method>& methods, int threads) {
  validate_spec(spec);
  if (methods.empty()) throw std::invalid_argument("sweep needs at least one method");

  SweepReport report;
  report.spec = spec;
  report.methods = methods;
  report.threads_used = resolve_threads(threads);
  report.timings_comparable = report.threads_used == 1;
  report.method_total_seconds.assign(methods.size(), 0.0);

  const long cell_count =
      static_cast<long>(spec.sn_values.size()) * static_cast<long>(spec.op_values.size());
  long cell_index = 0;
  for (std::size_t si = 0; si < spec.sn_values.size(); ++si) {
    for (std::size_t oi = 0; oi < spec.op_values.size(); ++oi, ++cell_index) {
      const int sn = spec.sn_values[si];
      const double op = spec.op_values[oi];

      std::vector<std::vector<RunOutcome>> slots(
          spec.repeats, std::vector<RunOutcome>(methods.size()));
      std::atomic<int> next{0};
      auto worker = [&]() {
        for (;;) {
          const int r = next.fetch_add(1);
          if (r >= spec.repeats) return;
          SimulationSpec sim_spec;
          sim_spec.n_items = spec.n_items;
          sim_spec.sample_count = sn;
          sim_spec.outlier_percentage = op;
          sim_spec.seed = derive_seed(
              spec.base_seed, static_cast<std::uint64_t>(cell_index) *
                                  static_cast<std::uint64_t>(spec.repeats) +
                              static_cast<std::uint64_t>(r));
          const SimulatedDataset sim = generate(sim_spec);
          for (std::size_t mi = 0; mi < methods.size(); ++mi)
            slots[r][mi] = run_one(spec, methods[mi], sim);
        }
      };
      const int pool = std::min(report.threads_used, spec.repeats);
      if (pool <= 1) {
        worker();
      } else {
        std::vector<std::thread> crew;
        crew.reserve(pool);
        for (int t = 0; t < pool; ++t) crew.emplace_back(worker);
        for (auto& t : crew) t.join();
      }

      SweepCell cell;
      cell.sn = sn;
      cell.op = op;
      cell.on = planned_outliers(op, sn);
      cell.no_outliers = cell.on == 0;
      for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        MethodCellStats stats;
        stats.method = methods[mi];
        std::vector<double> ps, rs, fs;
        double k_sum = 0.0;
        for (int r = 0; r < spec.repeats; ++r) {
          const RunOutcome& out = slots[r][mi];
          stats.wall_seconds += out.seconds;
          if (out.failed) {
            ++stats.failures;
            continue;
          }
          ps.push_back(out.metrics.precision);
          rs.push_back(out.metrics.recall);
          fs.push_back(out.metrics.f1);
          k_sum += static_cast<double>(out.estimated_k);
        }
        const double n_ok = static_cast<double>(ps.size());
        if (n_ok > 0) {
          for (double p : ps) stats.mean_precision += p;
          for (double r2 : rs) stats.mean_recall += r2;
          for (double f : fs) stats.mean_f1 += f;
          stats.mean_precision /= n_ok;
          stats.mean_recall /= n_ok;
          stats.mean_f1 /= n_ok;
          stats.sd_precision = sample_sd(ps, stats.mean_precision);
          stats.sd_recall = sample_sd(rs, stats.mean_recall);
          stats.sd_f1 = sample_sd(fs, stats.mean_f1);
          stats.mean_estimated_k = k_sum / n_ok;
        }
        if (cell.no_outliers) {
          stats.mean_f1 = 0.0;
          stats.sd_f1 = 0.0;
        }
        report.method_total_seconds[mi] += stats.wall_seconds;
        cell.per_method.push_back(stats);

        if (spec.keep_raw) {
          for (int r = 0; r < spec.repeats; ++r) {
            const RunOutcome& out = slots[r][mi];
            RawRun raw;
            raw.sn = sn;
            raw.op = op;
            raw.repeat = r;
            raw.method = methods[mi];
            raw.failed = out.failed;
            raw.precision = out.metrics.precision;
            raw.recall = out.metrics.recall;
            raw.f1 = out.metrics.f1;
            raw.estimated_k = out.estimated_k;
            raw.seconds = out.seconds;
            report.raw.push_back(raw);
          }
        }
      }
      report.cells.push_back(std::move(cell));
    }
  }
  (void)cell_count;
  return report;
}

std::string sweep_report_json(const SweepReport& report) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["spec"] = {
      {"n_items", report.spec.n_items},
      {"sn_values", report.spec.sn_values},
      {"op_values", report.spec.op_values},
      {"repeats", report.spec.repeats},
      {"base_seed", report.spec.base_seed},
      {"beta1", report.spec.ilts.beta1},
      {"beta2", report.spec.ilts.beta2},
      {"max_iter", report.spec.ilts.max_iter},
      {"growth_rule",
       report.spec.ilts.growth_rule == GrowthRule::paper_floor ? "paper" : "strict"},
      {"apply_correction", report.spec.apply_correction},
      {"lasso_grid", report.spec.lasso_grid},
  };
  j["threads_used"] = report.threads_used;
  j["timings_comparable"] = report.timings_comparable;
  nlohmann::json names = nlohmann::json::array();
  for (Method m : report.methods) names.push_back(method_name(m));
  j["methods"] = names;
  j["method_total_seconds"] = report.method_total_seconds;
  nlohmann::json cells = nlohmann::json::array();
  for (const SweepCell& cell : report.cells) {
    nlohmann::json jc;
    jc["sn"] = cell.sn;
    jc["op"] = cell.op;
    jc["on"] = cell.on;
    jc["no_outliers"] = cell.no_outliers;
    nlohmann::json per;
    for (const MethodCellStats& s : cell.per_method) {
      per[method_name(s.method)] = {
          {"mean_precision", s.mean_precision}, {"sd_precision", s.sd_precision},
          {"mean_recall", s.mean_recall},       {"sd_recall", s.sd_recall},
          {"mean_f1", s.mean_f1},               {"sd_f1", s.sd_f1},
          {"mean_estimated_k", s.mean_estimated_k},
          {"wall_seconds", s.wall_seconds},     {"failures", s.failures},
      };
    }
    jc["methods"] = per;
    cells.push_back(jc);
  }
  j["cells"] = cells;
  if (!report.raw.empty()) {
    nlohmann::json raws = nlohmann::json::array();
    for (const RawRun& r : report.raw) {
      raws.push_back({
          {"sn", r.sn},
          {"op", r.op},
          {"repeat", r.repeat},
          {"method", method_name(r.method)},
          {"failed", r.failed},
          {"precision", r.precision},
          {"recall", r.recall},
          {"f1", r.f1},
          {"estimated_k", r.estimated_k},
          {"seconds", r.seconds},
      });
    }
    j["raw"] = raws;
  }
  return j.dump(2);
}

std::string sweep_report_table(const SweepReport& report) {
  std::ostringstream os;
  struct Field {
    const char* label;
    double MethodCellStats::*mean;
    double MethodCellStats::*sd;
  };
  const Field fields[] = {
      {"precision", &MethodCellStats::mean_precision, &MethodCellStats::sd_precision},
      {"recall", &MethodCellStats::mean_recall, &MethodCellStats::sd_recall},
      {"f1", &MethodCellStats::mean_f1, &MethodCellStats::sd_f1},
  };
  const std::size_t op_count = report.spec.op_values.size();
  for (std::size_t mi = 0; mi < report.methods.size(); ++mi) {
    for (const Field& field : fields) {
      os << "== " << field.label << " : " << method_name(report.methods[mi]) << " ==\n";
      os << std::setw(8) << "SN\\OP";
      for (double op : report.spec.op_values) {
        std::ostringstream head;
        head << std::fixed << std::setprecision(0) << op * 100.0 << "%";
        os << std::setw(14) << head.str();
      }
      os << "\n";
      for (std::size_t si = 0; si < report.spec.sn_values.size(); ++si) {
        os << std::setw(8) << report.spec.sn_values[si];
        for (std::size_t oi = 0; oi < op_count; ++oi) {
          const SweepCell& cell = report.cells[si * op_count + oi];
          const MethodCellStats& s = cell.per_method[mi];
          os << std::setw(14) << format_cell(s.*(field.mean), s.*(field.sd));
        }
        os << "\n";
      }
      os << "\n";
    }
  }
  os << "== wall seconds per method ==\n";
  for (std::size_t mi = 0; mi < report.methods.size(); ++mi) {
    os << std::setw(8) << method_name(report.methods[mi]) << "  " << std::fixed
       << std::setprecision(3) << report.method_total_seconds[mi] << "\n";
  }
  os << "threads: " << report.threads_used
     << (report.timings_comparable ? "" : " (timings not comparable)") << "\n";
  return os.str();
}

std::string sweep_report_csv(const SweepReport& report) {
  std::ostringstream os;
  os << "sn,op,on,method,mean_precision,sd_precision,mean_recall,sd_recall,"
        "mean_f1,sd_f1,mean_estimated_k,wall_seconds,failures\n";
  os << std::setprecision(17);
  for (const SweepCell& cell : report.cells) {
    for (const MethodCellStats& s : cell.per_method) {
      os << cell.sn << "," << cell.op << "," << cell.on << "," << method_name(s.method)
         << "," << s.mean_precision << "," << s.sd_precision << "," << s.mean_recall
         << "," << s.sd_recall << "," << s.mean_f1 << "," << s.sd_f1 << ","
         << s.mean_estimated_k << "," << s.wall_seconds << "," << s.failures << "\n";
    }
  }
  return os.str();
}

std::string raw_runs_csv(const SweepReport& report) {
  std::ostringstream os;
  os << "sn,op,repeat,method,failed,precision,recall,f1,estimated_k,seconds\n";
  os << std::setprecision(17);
  for (const RawRun& r : report.raw) {
    os << r.sn << "," << r.op << "," << r.repeat << "," << method_name(r.method) << ","
       << (r.failed ? 1 : 0) << "," << r.precision << "," << r.recall << "," << r.f1
       << "," << r.estimated_k << "," << r.seconds << "\n";
  }
  return os.str();
}

}  // namespace trimrank
