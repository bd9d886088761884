#include "trimrank/huber_lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "trimrank/hodge.hpp"

namespace trimrank {
namespace {

constexpr double kScoreGap = 1e-8;
constexpr int kAlternationCap = 500;
constexpr double kLambdaFloor = 1e-3;

struct DenseCholesky {
  int size = 0;
  std::vector<double> f;

  void factor_from(const LaplacianSystem& sys, const std::vector<int>& comp) {
    size = static_cast<int>(comp.size()) - 1;  // ground the last vertex
    f.assign(static_cast<std::size_t>(size) * size, 0.0);
    for (int i = 0; i < size; ++i)
      for (int j = 0; j <= i; ++j)
        f[static_cast<std::size_t>(i) * size + j] = sys.entry(comp[i], comp[j]);
    for (int k = 0; k < size; ++k) {
      double d = f[static_cast<std::size_t>(k) * size + k];
      for (int p = 0; p < k; ++p) {
        const double v = f[static_cast<std::size_t>(k) * size + p];
        d -= v * v;
      }
      if (!(d > 0.0))
        throw SolverError("grounded laplacian lost positive definiteness",
                          std::sqrt(std::abs(d)));
      const double lkk = std::sqrt(d);
      f[static_cast<std::size_t>(k) * size + k] = lkk;
      for (int i = k + 1; i < size; ++i) {
        double v = f[static_cast<std::size_t>(i) * size + k];
        for (int p = 0; p < k; ++p)
          v -= f[static_cast<std::size_t>(i) * size + p] * f[static_cast<std::size_t>(k) * size + p];
        f[static_cast<std::size_t>(i) * size + k] = v / lkk;
      }
    }
  }

  void solve(std::vector<double>& x) const {
    for (int i = 0; i < size; ++i) {
      double v = x[i];
      for (int p = 0; p < i; ++p) v -= f[static_cast<std::size_t>(i) * size + p] * x[p];
      x[i] = v / f[static_cast<std::size_t>(i) * size + i];
    }
    for (int i = size - 1; i >= 0; --i) {
      double v = x[i];
      for (int p = i + 1; p < size; ++p) v -= f[static_cast<std::size_t>(p) * size + i] * x[p];
      x[i] = v / f[static_cast<std::size_t>(i) * size + i];
    }
  }
};

// the graph never changes along the alternation, only the adjusted
// responses do, so the factorization is built once and reused
class AdjustedSolver {
 public:
  explicit AdjustedSolver(const ComparisonDataset& data)
      : data_(data), sys_(assemble(data, OutlierMask::all_keep(data.records.size()))) {
    comps_ = sys_.components();
    factors_.resize(comps_.size());
    for (std::size_t c = 0; c < comps_.size(); ++c) {
      if (comps_[c].size() <= 1) continue;
      if (comps_[c].size() <= 64)
        factors_[c].factor_from(sys_, comps_[c]);
      else
        large_components_ = true;
    }
  }

  void solve(const std::vector<double>& adjusted_y, ScoreVector& s) {
    const int n = sys_.n;
    b_.assign(static_cast<std::size_t>(n), 0.0);
    for (std::size_t r = 0; r < data_.records.size(); ++r) {
      const ComparisonRecord& rec = data_.records[r];
      const double wy = rec.weight * adjusted_y[r];
      b_[static_cast<std::size_t>(rec.item_i)] += wy;
      b_[static_cast<std::size_t>(rec.item_j)] -= wy;
    }

    if (large_components_) {
      LaplacianSystem scratch = sys_;
      scratch.divergence = b_;
      SolveOptions opt;
      opt.warm_start = (s.size() == n) ? &s : nullptr;
      s = solve_scores(scratch, opt);
      return;
    }

    if (s.size() != n) s.values.assign(static_cast<std::size_t>(n), 0.0);
    for (std::size_t c = 0; c < comps_.size(); ++c) {
      const std::vector<int>& comp = comps_[c];
      if (comp.size() == 1) {
        s.values[static_cast<std::size_t>(comp[0])] = 0.0;
        continue;
      }
      x_.assign(comp.size() - 1, 0.0);
      for (std::size_t t = 0; t + 1 < comp.size(); ++t)
        x_[t] = b_[static_cast<std::size_t>(comp[t])];
      factors_[c].solve(x_);
      double mean = 0.0;
      for (double v : x_) mean += v;
      mean /= static_cast<double>(comp.size());
      for (std::size_t t = 0; t + 1 < comp.size(); ++t)
        s.values[static_cast<std::size_t>(comp[t])] = x_[t] - mean;
      s.values[static_cast<std::size_t>(comp.back())] = -mean;
    }
  }

  const LaplacianSystem& system() const { return sys_; }

 private:
  const ComparisonDataset& data_;
  LaplacianSystem sys_;
  std::vector<std::vector<int>> comps_;
  std::vector<DenseCholesky> factors_;
  bool large_components_ = false;
  std::vector<double> b_;
  std::vector<double> x_;
};

struct AlternationResult {
  ScoreVector scores;
  std::vector<bool> flags;
  int alternations = 0;
};

AlternationResult alternate(const ComparisonDataset& data, AdjustedSolver& solver,
                            double lambda, const ScoreVector& start) {
  const std::size_t m = data.records.size();
  AlternationResult out;
  out.scores = start;
  std::vector<double> adjusted(m);
  ScoreVector next = start;
  double gap = std::numeric_limits<double>::infinity();
  for (int alt = 1; alt <= kAlternationCap; ++alt) {
    for (std::size_t r = 0; r < m; ++r) {
      const ComparisonRecord& rec = data.records[r];
      const double res = residual(rec, out.scores);
      const double excess = std::max(std::abs(res) - lambda, 0.0);
      adjusted[r] = rec.y + (res > 0.0 ? excess : -excess);
    }
    solver.solve(adjusted, next);
    gap = 0.0;
    for (int i = 0; i < next.size(); ++i)
      gap = std::max(gap, std::abs(next[i] - out.scores[i]));
    out.scores = next;
    out.alternations = alt;
    if (gap < kScoreGap) {
      out.flags.assign(m, false);
      for (std::size_t r = 0; r < m; ++r)
        if (std::abs(residual(data.records[r], out.scores)) > lambda) out.flags[r] = true;
      return out;
    }
  }
  throw SolverError("outlier-variable alternation did not converge", gap);
}

}  // namespace

HuberFit huber_fit(const ComparisonDataset& data, double lambda, const ScoreVector* warm_start) {
  validate(data);
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  AdjustedSolver solver(data);
  ScoreVector start;
  if (warm_start && warm_start->size() == data.n_items) {
    start = *warm_start;
  } else {
    std::vector<double> plain(data.records.size());
    for (std::size_t r = 0; r < data.records.size(); ++r) plain[r] = data.records[r].y;
    solver.solve(plain, start);
  }
  AlternationResult res = alternate(data, solver, lambda, start);
  HuberFit fit;
  fit.scores = std::move(res.scores);
  fit.outlier_flags = std::move(res.flags);
  fit.alternations = res.alternations;
  return fit;
}

LassoPath lasso_path(const ComparisonDataset& data, int grid_size, bool keep_scores) {
  validate(data);
  if (grid_size < 2) throw std::invalid_argument("grid size must be at least 2");
  const std::size_t m = data.records.size();

  AdjustedSolver solver(data);
  ScoreVector s;
  {
    std::vector<double> plain(m);
    for (std::size_t r = 0; r < m; ++r) plain[r] = data.records[r].y;
    solver.solve(plain, s);
  }
  double top = 0.0;
  for (std::size_t r = 0; r < m; ++r)
    top = std::max(top, std::abs(residual(data.records[r], s)));
  if (top <= kLambdaFloor) top = 10.0 * kLambdaFloor;  // nothing will activate

  LassoPath path;
  path.lambdas.resize(static_cast<std::size_t>(grid_size));
  const double ratio = kLambdaFloor / top;
  for (int t = 0; t < grid_size; ++t)
    path.lambdas[static_cast<std::size_t>(t)] =
        top * std::pow(ratio, static_cast<double>(t) / static_cast<double>(grid_size - 1));
  path.activation_lambda.assign(m, std::numeric_limits<double>::quiet_NaN());
  path.final_abs_residual.assign(m, 0.0);

  std::vector<bool> previous_flags(m, false);
  std::vector<std::pair<double, std::size_t>> fresh;  // |residual|, record
  for (int t = 0; t < grid_size; ++t) {
    const double lambda = path.lambdas[static_cast<std::size_t>(t)];
    const AlternationResult fit = alternate(data, solver, lambda, s);
    s = fit.scores;
    if (keep_scores) path.scores_per_lambda.push_back(s);

    fresh.clear();
    for (std::size_t r = 0; r < m; ++r) {
      if (fit.flags[r] && std::isnan(path.activation_lambda[r]))
        fresh.emplace_back(std::abs(residual(data.records[r], s)), r);
      if (previous_flags[r] && !fit.flags[r]) ++path.nonmonotone_events;
    }
    std::sort(fresh.begin(), fresh.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    for (const auto& [res, r] : fresh) {
      path.activation_order.push_back(r);
      path.activation_lambda[r] = lambda;
    }
    previous_flags = fit.flags;

    if (t == grid_size - 1)
      for (std::size_t r = 0; r < m; ++r)
        path.final_abs_residual[r] = std::abs(residual(data.records[r], s));
  }
  return path;
}

OutlierMask lasso_select(const LassoPath& path, std::size_t k) {
  const std::size_t m = path.final_abs_residual.size();
  if (k > m) throw std::invalid_argument("cannot select more outliers than records");
  OutlierMask mask = OutlierMask::all_keep(m);
  const std::size_t take = std::min(k, path.activation_order.size());
  for (std::size_t t = 0; t < take; ++t) mask.keep[path.activation_order[t]] = false;
  if (take < k) {
    std::vector<std::size_t> rest;
    for (std::size_t r = 0; r < m; ++r)
      if (mask.keep[r] && std::isnan(path.activation_lambda[r])) rest.push_back(r);
    std::sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
      if (path.final_abs_residual[a] != path.final_abs_residual[b])
        return path.final_abs_residual[a] > path.final_abs_residual[b];
      return a < b;
    });
    for (std::size_t t = 0; t < k - take && t < rest.size(); ++t) mask.keep[rest[t]] = false;
  }
  return mask;
}

}  // namespace trimrank
