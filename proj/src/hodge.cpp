#include "trimrank/hodge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

namespace trimrank {
namespace {

struct UnionFind {
  std::vector<int> parent;

  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

  int find(int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }

  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::vector<std::vector<int>> groups_from(UnionFind& uf, int n) {
  std::unordered_map<int, std::vector<int>> by_root;
  for (int i = 0; i < n; ++i) by_root[uf.find(i)].push_back(i);
  std::vector<std::vector<int>> out;
  out.reserve(by_root.size());
  for (int i = 0; i < n; ++i) {
    auto it = by_root.find(i);
    if (it != by_root.end()) out.push_back(std::move(it->second));
  }
  return out;
}

double mean_over(const std::vector<double>& v, const std::vector<int>& idx) {
  double sum = 0.0;
  for (int i : idx) sum += v[i];
  return sum / static_cast<double>(idx.size());
}

// grounded SPD system for one component: fix the last vertex at zero
void cholesky_component(const LaplacianSystem& sys, const std::vector<int>& comp,
                        std::vector<double>& s) {
  const int c = static_cast<int>(comp.size());
  const int r = c - 1;
  std::vector<double> a(static_cast<std::size_t>(r) * r);
  std::vector<double> x(r);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) a[static_cast<std::size_t>(i) * r + j] = sys.entry(comp[i], comp[j]);
    x[i] = sys.divergence[comp[i]];
  }
  // in-place LL^T
  for (int k = 0; k < r; ++k) {
    double d = a[static_cast<std::size_t>(k) * r + k];
    for (int p = 0; p < k; ++p) {
      const double v = a[static_cast<std::size_t>(k) * r + p];
      d -= v * v;
    }
    if (!(d > 0.0))
      throw SolverError("grounded laplacian lost positive definiteness", std::sqrt(std::abs(d)));
    const double lkk = std::sqrt(d);
    a[static_cast<std::size_t>(k) * r + k] = lkk;
    for (int i = k + 1; i < r; ++i) {
      double v = a[static_cast<std::size_t>(i) * r + k];
      for (int p = 0; p < k; ++p)
        v -= a[static_cast<std::size_t>(i) * r + p] * a[static_cast<std::size_t>(k) * r + p];
      a[static_cast<std::size_t>(i) * r + k] = v / lkk;
    }
  }
  // forward then backward substitution
  for (int i = 0; i < r; ++i) {
    double v = x[i];
    for (int p = 0; p < i; ++p) v -= a[static_cast<std::size_t>(i) * r + p] * x[p];
    x[i] = v / a[static_cast<std::size_t>(i) * r + i];
  }
  for (int i = r - 1; i >= 0; --i) {
    double v = x[i];
    for (int p = i + 1; p < r; ++p) v -= a[static_cast<std::size_t>(p) * r + i] * x[p];
    x[i] = v / a[static_cast<std::size_t>(i) * r + i];
  }
  for (int i = 0; i < r; ++i) s[comp[i]] = x[i];
  s[comp[r]] = 0.0;
}

void matvec_component(const LaplacianSystem& sys, const std::vector<int>& comp,
                      const std::vector<double>& x, std::vector<double>& out,
                      const std::vector<int>& local_of) {
  const int c = static_cast<int>(comp.size());
  if (sys.dense) {
    for (int li = 0; li < c; ++li) {
      const double* row = sys.mat.data() + static_cast<std::size_t>(comp[li]) * sys.n;
      double acc = 0.0;
      for (int lj = 0; lj < c; ++lj) acc += row[comp[lj]] * x[lj];
      out[li] = acc;
    }
  } else {
    for (int li = 0; li < c; ++li) {
      const int gi = comp[li];
      double acc = sys.diag[gi] * x[li];
      for (const auto& [gj, w] : sys.adj[gi]) acc -= w * x[local_of[gj]];
      out[li] = acc;
    }
  }
}

void center(std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  for (double& x : v) x -= mean;
}

void cg_component(const LaplacianSystem& sys, const std::vector<int>& comp,
                  const SolveOptions& options, std::vector<double>& s,
                  std::vector<int>& local_of) {
  const int c = static_cast<int>(comp.size());
  for (int li = 0; li < c; ++li) local_of[comp[li]] = li;

  std::vector<double> b(c), x(c, 0.0);
  for (int li = 0; li < c; ++li) b[li] = sys.divergence[comp[li]];
  const double bnorm = std::sqrt(std::inner_product(b.begin(), b.end(), b.begin(), 0.0));
  if (bnorm == 0.0) {
    for (int gi : comp) s[gi] = 0.0;
    return;
  }
  if (options.warm_start && options.warm_start->size() == sys.n) {
    for (int li = 0; li < c; ++li) x[li] = options.warm_start->values[comp[li]];
    center(x);
  }

  std::vector<double> r(c), p(c), ap(c);
  matvec_component(sys, comp, x, ap, local_of);
  for (int li = 0; li < c; ++li) r[li] = b[li] - ap[li];
  p = r;
  double rr = std::inner_product(r.begin(), r.end(), r.begin(), 0.0);
  const double tol = 1e-10 * bnorm;
  const long cap = 10L * std::max(sys.n, 8);
  for (long it = 0; it < cap; ++it) {
    if (std::sqrt(rr) <= tol) break;
    matvec_component(sys, comp, p, ap, local_of);
    const double pap = std::inner_product(p.begin(), p.end(), ap.begin(), 0.0);
    if (!(pap > 0.0)) throw SolverError("conjugate gradient hit a non-positive curvature", std::sqrt(rr));
    const double alpha = rr / pap;
    for (int li = 0; li < c; ++li) {
      x[li] += alpha * p[li];
      r[li] -= alpha * ap[li];
    }
    center(x);  // keep iterates in the sum-zero gauge
    const double rr_next = std::inner_product(r.begin(), r.end(), r.begin(), 0.0);
    const double beta = rr_next / rr;
    rr = rr_next;
    for (int li = 0; li < c; ++li) p[li] = r[li] + beta * p[li];
  }
  if (std::sqrt(rr) > tol)
    throw SolverError("conjugate gradient did not converge within the iteration cap",
                      std::sqrt(rr));
  for (int li = 0; li < c; ++li) s[comp[li]] = x[li];
}

}  // namespace

double LaplacianSystem::entry(int r, int c) const {
  if (dense) return mat[static_cast<std::size_t>(r) * n + c];
  if (r == c) return diag[r];
  for (const auto& [col, w] : adj[r])
    if (col == c) return -w;
  return 0.0;
}

void LaplacianSystem::apply(const std::vector<double>& x, std::vector<double>& out) const {
  out.assign(n, 0.0);
  if (dense) {
    for (int i = 0; i < n; ++i) {
      const double* row = mat.data() + static_cast<std::size_t>(i) * n;
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += row[j] * x[j];
      out[i] = acc;
    }
  } else {
    for (int i = 0; i < n; ++i) {
      double acc = diag[i] * x[i];
      for (const auto& [j, w] : adj[i]) acc -= w * x[j];
      out[i] = acc;
    }
  }
}

std::vector<std::vector<int>> LaplacianSystem::components() const {
  UnionFind uf(n);
  if (dense) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (mat[static_cast<std::size_t>(i) * n + j] != 0.0) uf.unite(i, j);
  } else {
    for (int i = 0; i < n; ++i)
      for (const auto& [j, w] : adj[i])
        if (w != 0.0) uf.unite(i, j);
  }
  return groups_from(uf, n);
}

LaplacianSystem assemble(const ComparisonDataset& data, const OutlierMask& mask) {
  if (mask.size() != data.records.size())
    throw std::invalid_argument("mask length does not match record count");
  LaplacianSystem sys;
  sys.n = data.n_items;
  sys.dense = data.n_items <= kDenseLimit;
  sys.divergence.assign(sys.n, 0.0);
  if (sys.dense) {
    sys.mat.assign(static_cast<std::size_t>(sys.n) * sys.n, 0.0);
    for (std::size_t r = 0; r < data.records.size(); ++r) {
      if (!mask.keep[r]) continue;
      const ComparisonRecord& rec = data.records[r];
      const double w = rec.weight;
      const std::size_t i = static_cast<std::size_t>(rec.item_i);
      const std::size_t j = static_cast<std::size_t>(rec.item_j);
      sys.mat[i * sys.n + i] += w;
      sys.mat[j * sys.n + j] += w;
      sys.mat[i * sys.n + j] -= w;
      sys.mat[j * sys.n + i] -= w;
      sys.divergence[i] += w * rec.y;
      sys.divergence[j] -= w * rec.y;
      ++sys.kept_edges;
    }
  } else {
    sys.diag.assign(sys.n, 0.0);
    std::vector<std::unordered_map<int, double>> rows(sys.n);
    for (std::size_t r = 0; r < data.records.size(); ++r) {
      if (!mask.keep[r]) continue;
      const ComparisonRecord& rec = data.records[r];
      const double w = rec.weight;
      sys.diag[rec.item_i] += w;
      sys.diag[rec.item_j] += w;
      rows[rec.item_i][rec.item_j] += w;
      rows[rec.item_j][rec.item_i] += w;
      sys.divergence[rec.item_i] += w * rec.y;
      sys.divergence[rec.item_j] -= w * rec.y;
      ++sys.kept_edges;
    }
    sys.adj.resize(sys.n);
    for (int i = 0; i < sys.n; ++i) {
      sys.adj[i].assign(rows[i].begin(), rows[i].end());
      std::sort(sys.adj[i].begin(), sys.adj[i].end());
    }
  }
  return sys;
}

ScoreVector solve_scores(const LaplacianSystem& system, const SolveOptions& options) {
  ScoreVector s;
  s.values.assign(system.n, 0.0);
  std::vector<int> local_of(system.n, -1);
  for (const std::vector<int>& comp : system.components()) {
    if (comp.size() == 1) continue;
    if (!options.force_cg && comp.size() <= 64)
      cholesky_component(system, comp, s.values);
    else
      cg_component(system, comp, options, s.values, local_of);
    const double mean = mean_over(s.values, comp);
    for (int gi : comp) s.values[gi] -= mean;
  }

  std::vector<double> ls;
  system.apply(s.values, ls);
  double rnorm = 0.0, bnorm = 0.0;
  for (int i = 0; i < system.n; ++i) {
    const double d = ls[i] - system.divergence[i];
    rnorm += d * d;
    bnorm += system.divergence[i] * system.divergence[i];
  }
  rnorm = std::sqrt(rnorm);
  bnorm = std::sqrt(bnorm);
  if (rnorm > 1e-8 * (1.0 + bnorm))
    throw SolverError("normal equation residual above tolerance", rnorm);
  return s;
}

TrimmedLsResult trimmed_least_squares(const ComparisonDataset& data, const OutlierMask& mask,
                                      const SolveOptions& options) {
  const LaplacianSystem sys = assemble(data, mask);
  TrimmedLsResult out;
  out.scores = solve_scores(sys, options);
  out.objective = masked_objective(data, mask, out.scores);
  return out;
}

std::vector<std::vector<int>> connected_components(const ComparisonDataset& data,
                                                   const OutlierMask& mask) {
  if (mask.size() != data.records.size())
    throw std::invalid_argument("mask length does not match record count");
  UnionFind uf(data.n_items);
  for (std::size_t r = 0; r < data.records.size(); ++r)
    if (mask.keep[r]) uf.unite(data.records[r].item_i, data.records[r].item_j);
  return groups_from(uf, data.n_items);
}

}  // namespace trimrank
