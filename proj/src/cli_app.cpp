#include "trimrank/cli_app.hpp"

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trimrank/csvio.hpp"
#include "trimrank/eval.hpp"
#include "trimrank/hodge.hpp"
#include "trimrank/huber_lasso.hpp"
#include "trimrank/ilts.hpp"
#include "trimrank/report.hpp"
#include "trimrank/simulate.hpp"

namespace trimrank {

namespace {

IngestResult load_dataset(const std::string& in_path, const std::string& labels_path) {
  LabelMap pinned;
  bool has_pinned = false;
  if (!labels_path.empty()) {
    std::ifstream f(labels_path);
    if (!f) throw std::runtime_error("cannot open label map: " + labels_path);
    pinned = read_label_map_json(f);
    has_pinned = true;
  }
  if (in_path.empty() || in_path == "-")
    return ingest_csv(std::cin, has_pinned ? &pinned : nullptr);
  std::ifstream f(in_path);
  if (!f) throw std::runtime_error("cannot open input: " + in_path);
  return ingest_csv(f, has_pinned ? &pinned : nullptr);
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output: " + path);
  f << content;
  if (!f) throw std::runtime_error("failed writing output: " + path);
}

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
}

struct IltsFlags {
  double beta1 = 0.75;
  double beta2 = 1.03;
  int max_iter = 30;
  std::string growth = "strict";
  bool no_correction = false;

  IltsConfig config() const {
    IltsConfig cfg;
    cfg.beta1 = beta1;
    cfg.beta2 = beta2;
    cfg.max_iter = max_iter;
    cfg.growth_rule =
        growth == "paper" ? GrowthRule::paper_floor : GrowthRule::strict_progress;
    return cfg;
  }
};

void add_ilts_flags(CLI::App* cmd, IltsFlags& flags) {
  cmd->add_option("--beta1", flags.beta1, "initial underestimate fraction");
  cmd->add_option("--beta2", flags.beta2, "per-iteration growth factor");
  cmd->add_option("--max-iter", flags.max_iter, "outer iteration cap");
  cmd->add_option("--growth", flags.growth, "growth rule")
      ->check(CLI::IsMember({"paper", "strict"}));
  cmd->add_flag("--no-correction", flags.no_correction,
                "skip the adjacent-pair post check");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) parts.push_back(part);
  return parts;
}

int cmd_simulate(int items, int samples, int rounds, double op, std::uint64_t seed,
                 bool seed_given, const std::string& out_path,
                 const std::string& truth_path, const std::string& labels_path) {
  if (!seed_given) {
    seed = entropy_seed();
    std::cerr << "seed: " << seed << "\n";
  }
  SimulationSpec spec;
  spec.n_items = items;
  spec.outlier_percentage = op;
  spec.seed = seed;
  if (rounds > 0) {
    spec.complete_rounds = rounds;
    spec.sample_count =
        static_cast<int>(static_cast<long>(items) * (items - 1) / 2 * rounds);
  } else {
    spec.sample_count = samples;
  }
  SimulatedDataset sim = generate(spec);
  LabelMap item_labels = LabelMap::numeric(items);
  LabelMap rater_labels = LabelMap::numeric(static_cast<int>(sim.dataset.records.size()));
  write_output(out_path, dataset_csv(sim.dataset, item_labels, rater_labels));
  if (!truth_path.empty()) write_output(truth_path, truth_csv(sim.true_outliers));
  if (!labels_path.empty()) write_output(labels_path, label_map_json(item_labels));
  std::cerr << "items " << items << ", records " << sim.dataset.records.size()
            << ", outliers " << sim.injected_outliers << "\n";
  return 0;
}

int cmd_rank(const std::string& in_path, const std::string& labels_path,
             const std::string& format, const std::string& out_path) {
  IngestResult in = load_dataset(in_path, labels_path);
  OutlierMask keep_all = OutlierMask::all_keep(in.dataset.records.size());
  TrimmedLsResult fit = trimmed_least_squares(in.dataset, keep_all);
  TrimmedSolution solution;
  solution.scores = fit.scores;
  solution.mask = keep_all;
  solution.objective = fit.objective;
  solution.iterations = 1;
  solution.estimated_k = 0;
  solution.converged = true;
  const auto comps = connected_components(in.dataset, keep_all);
  if (comps.size() > 1)
    solution.warnings.push_back(
        "comparison graph has " + std::to_string(comps.size()) +
        " connected components; scores are only comparable within a component");
  DetectReport report = build_detect_report(in.dataset, solution);
  std::string text;
  if (format == "json") text = ranking_json(report, in.items);
  else if (format == "csv") text = ranking_csv(report, in.items);
  else text = ranking_table(report, in.items);
  write_output(out_path, text);
  for (const std::string& warning : solution.warnings)
    std::cerr << "warning: " << warning << "\n";
  return 0;
}

int cmd_detect(const std::string& in_path, const std::string& labels_path,
               const std::string& method_name_str, long k, bool k_given,
               const IltsFlags& flags, int lasso_grid, const std::string& truth_path,
               const std::string& format, const std::string& out_path) {
  IngestResult in = load_dataset(in_path, labels_path);
  const Method method = method_from_name(method_name_str);
  if (method == Method::ilts_adaptive && k_given)
    throw std::runtime_error("--k only applies to methods ilts-k and lasso");
  if (method != Method::ilts_adaptive && !k_given)
    throw std::runtime_error("--k is required for method " + method_name_str);

  TrimmedSolution solution;
  switch (method) {
    case Method::ilts_adaptive:
      solution = adaptive_ilts(in.dataset, flags.config());
      if (!flags.no_correction)
        solution = adjacent_pair_correction(in.dataset, solution);
      break;
    case Method::ilts_fixed_k:
      solution = ilts_with_k(in.dataset, k, flags.config());
      break;
    case Method::lasso: {
      LassoPath path = lasso_path(in.dataset, lasso_grid);
      OutlierMask mask = lasso_select(path, k);
      TrimmedLsResult fit = trimmed_least_squares(in.dataset, mask);
      solution.scores = fit.scores;
      solution.mask = mask;
      solution.objective = fit.objective;
      solution.iterations = static_cast<int>(path.lambdas.size());
      solution.estimated_k = k;
      solution.converged = true;
      break;
    }
  }

  EvalMetrics metrics;
  bool have_metrics = false;
  if (!truth_path.empty()) {
    std::ifstream f(truth_path);
    if (!f) throw std::runtime_error("cannot open truth sidecar: " + truth_path);
    OutlierMask truth = read_truth_csv(f, in.dataset.records.size());
    metrics = score_detection(solution.mask, truth);
    have_metrics = true;
    std::cerr << "precision " << metrics.precision << ", recall " << metrics.recall
              << ", f1 " << metrics.f1 << "\n";
  }

  DetectReport report = build_detect_report(in.dataset, solution);
  std::string text;
  if (format == "json")
    text = detect_report_json(report, in.items, have_metrics ? &metrics : nullptr);
  else if (format == "csv") text = detect_report_csv(report);
  else text = detect_report_table(report, in.items, have_metrics ? &metrics : nullptr);
  write_output(out_path, text);
  for (const std::string& warning : solution.warnings)
    std::cerr << "warning: " << warning << "\n";
  return 0;
}

int cmd_sweep(const std::string& sn_list, const std::string& op_list, int items,
              int repeats, std::uint64_t base_seed, const std::string& methods_list,
              const IltsFlags& flags, int lasso_grid, int threads,
              bool single_thread_timing, const std::string& raw_csv_path,
              const std::string& format, const std::string& out_path) {
  SweepSpec spec;
  spec.n_items = items;
  spec.repeats = repeats;
  spec.base_seed = base_seed;
  spec.ilts = flags.config();
  spec.apply_correction = !flags.no_correction;
  spec.lasso_grid = lasso_grid;
  spec.keep_raw = !raw_csv_path.empty();
  if (!sn_list.empty()) {
    spec.sn_values.clear();
    for (const std::string& part : split_list(sn_list))
      spec.sn_values.push_back(std::stoi(part));
  }
  if (!op_list.empty()) {
    spec.op_values.clear();
    for (const std::string& part : split_list(op_list))
      spec.op_values.push_back(std::stod(part));
  }
  std::vector<Method> methods;
  for (const std::string& part : split_list(methods_list))
    methods.push_back(method_from_name(part));
  if (single_thread_timing) threads = 1;

  SweepReport report = run_sweep(spec, methods, threads);
  std::string text;
  if (format == "json") text = sweep_report_json(report);
  else if (format == "csv") text = sweep_report_csv(report);
  else text = sweep_report_table(report);
  write_output(out_path, text);
  if (!raw_csv_path.empty()) write_output(raw_csv_path, raw_runs_csv(report));
  if (!report.timings_comparable)
    std::cerr << "warning: ran on " << report.threads_used
              << " threads; wall times are not comparable across methods\n";
  return 0;
}

int cmd_path(const std::string& in_path, const std::string& labels_path, int grid,
             const std::string& format, const std::string& out_path) {
  IngestResult in = load_dataset(in_path, labels_path);
  LassoPath path = lasso_path(in.dataset, grid);
  std::string text;
  if (format == "json") {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["lambdas"] = path.lambdas;
    j["activation_order"] = path.activation_order;
    nlohmann::json act = nlohmann::json::array();
    for (double lambda : path.activation_lambda) {
      if (std::isnan(lambda)) act.push_back(nullptr);
      else act.push_back(lambda);
    }
    j["activation_lambda"] = act;
    j["nonmonotone_events"] = path.nonmonotone_events;
    text = j.dump(2);
  } else if (format == "csv") {
    std::ostringstream os;
    os << "position,record_index,lambda\n";
    os << std::setprecision(17);
    for (std::size_t p = 0; p < path.activation_order.size(); ++p) {
      const long rec = path.activation_order[p];
      os << p << "," << rec << ","
         << path.activation_lambda[static_cast<std::size_t>(rec)] << "\n";
    }
    text = os.str();
  } else {
    std::ostringstream os;
    os << "grid of " << path.lambdas.size() << " lambdas from " << path.lambdas.front()
       << " down to " << path.lambdas.back() << "\n";
    os << "activation order (record @ lambda):\n";
    for (std::size_t p = 0; p < path.activation_order.size(); ++p) {
      const long rec = path.activation_order[p];
      os << "  " << p << ": record " << rec << " @ "
         << path.activation_lambda[static_cast<std::size_t>(rec)] << "\n";
    }
    if (path.nonmonotone_events > 0)
      os << "note: " << path.nonmonotone_events
         << " records left the active set while lambda decreased\n";
    text = os.str();
  }
  write_output(out_path, text);
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"robust ranking and outlier trimming for pairwise comparisons"};
  app.require_subcommand(1);
  const std::vector<std::string> formats = {"json", "table", "csv"};

  auto* sim = app.add_subcommand("simulate", "generate a synthetic comparison dataset");
  int sim_items = 16, sim_samples = 1000, sim_rounds = 0;
  double sim_op = 0.0;
  std::uint64_t sim_seed = 0;
  std::string sim_out, sim_truth, sim_labels;
  sim->add_option("--items", sim_items, "number of items");
  auto* sim_samples_opt = sim->add_option("--samples", sim_samples, "number of records");
  sim->add_option("--rounds", sim_rounds, "complete design: records per unordered pair")
      ->excludes(sim_samples_opt);
  sim->add_option("--op", sim_op, "fraction of records flipped into outliers")
      ->check(CLI::Range(0.0, 1.0));
  auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "rng seed");
  sim->add_option("--out", sim_out, "dataset csv path (default stdout)");
  sim->add_option("--truth", sim_truth, "write outlier sidecar csv here");
  sim->add_option("--labels", sim_labels, "write item label map json here");

  auto* rank = app.add_subcommand("rank", "least squares ranking without trimming");
  std::string rank_in, rank_labels, rank_format = "table", rank_out;
  rank->add_option("--in", rank_in, "dataset csv (default stdin)");
  rank->add_option("--labels", rank_labels, "pinned item label map json");
  rank->add_option("--format", rank_format)->check(CLI::IsMember(formats));
  rank->add_option("--out", rank_out, "output path (default stdout)");

  auto* detect = app.add_subcommand("detect", "rank and flag outlier comparisons");
  std::string det_in, det_labels, det_method = "ilts", det_truth;
  std::string det_format = "table", det_out;
  long det_k = 0;
  IltsFlags det_flags;
  int det_grid = 100;
  detect->add_option("--in", det_in, "dataset csv (default stdin)");
  detect->add_option("--labels", det_labels, "pinned item label map json");
  detect->add_option("--method", det_method)
      ->check(CLI::IsMember({"ilts", "ilts-k", "lasso"}));
  auto* det_k_opt = detect->add_option("--k", det_k, "outlier count for ilts-k/lasso");
  add_ilts_flags(detect, det_flags);
  detect->add_option("--lasso-grid", det_grid, "lambda grid size");
  detect->add_option("--truth", det_truth, "outlier sidecar csv to score against");
  detect->add_option("--format", det_format)->check(CLI::IsMember(formats));
  detect->add_option("--out", det_out, "output path (default stdout)");

  auto* sweep = app.add_subcommand("sweep", "simulation benchmark over sn/op grid");
  std::string sw_sn, sw_op, sw_methods = "ilts";
  int sw_items = 16, sw_repeats = 100, sw_grid = 100, sw_threads = 1;
  std::uint64_t sw_seed = 1;
  bool sw_single = false;
  std::string sw_raw, sw_format = "table", sw_out;
  sweep->add_option("--items", sw_items, "number of items");
  sweep->add_option("--sn", sw_sn, "comma list of record counts");
  sweep->add_option("--op", sw_op, "comma list of outlier fractions");
  sweep->add_option("--repeats", sw_repeats, "repeats per cell");
  sweep->add_option("--seed", sw_seed, "base seed");
  sweep->add_option("--methods", sw_methods, "comma list from ilts,ilts-k,lasso");
  IltsFlags sw_flags;
  add_ilts_flags(sweep, sw_flags);
  sweep->add_option("--lasso-grid", sw_grid, "lambda grid size");
  sweep->add_option("--threads", sw_threads,
                    "worker threads; 0 = all cores (capped by TRIMRANK_THREADS)");
  sweep->add_flag("--single-thread-timing", sw_single,
                  "force one thread so method wall times are comparable");
  sweep->add_option("--raw-csv", sw_raw, "write per-repeat metrics csv here");
  sweep->add_option("--format", sw_format)->check(CLI::IsMember(formats));
  sweep->add_option("--out", sw_out, "output path (default stdout)");

  auto* path_cmd = app.add_subcommand("path", "regularization path of the lasso baseline");
  std::string pa_in, pa_labels, pa_format = "table", pa_out;
  int pa_grid = 100;
  path_cmd->add_option("--in", pa_in, "dataset csv (default stdin)");
  path_cmd->add_option("--labels", pa_labels, "pinned item label map json");
  path_cmd->add_option("--grid", pa_grid, "lambda grid size");
  path_cmd->add_option("--format", pa_format)->check(CLI::IsMember(formats));
  path_cmd->add_option("--out", pa_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
    if (sim->parsed())
      return cmd_simulate(sim_items, sim_samples, sim_rounds, sim_op, sim_seed,
                          sim_seed_opt->count() > 0, sim_out, sim_truth, sim_labels);
    if (rank->parsed()) return cmd_rank(rank_in, rank_labels, rank_format, rank_out);
    if (detect->parsed())
      return cmd_detect(det_in, det_labels, det_method, det_k, det_k_opt->count() > 0,
                        det_flags, det_grid, det_truth, det_format, det_out);
    if (sweep->parsed())
      return cmd_sweep(sw_sn, sw_op, sw_items, sw_repeats, sw_seed, sw_methods, sw_flags,
                       sw_grid, sw_threads, sw_single, sw_raw, sw_format, sw_out);
    if (path_cmd->parsed()) return cmd_path(pa_in, pa_labels, pa_grid, pa_format, pa_out);
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace trimrank
