#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "trimrank/model.hpp"

namespace trimrank {

// dense symmetric storage up to this many items, adjacency lists above
inline constexpr int kDenseLimit = 512;

// L = D - A over the kept records, b the divergence of the kept flow
struct LaplacianSystem {
  int n = 0;
  long kept_edges = 0;
  bool dense = true;
  std::vector<double> mat;  // n*n row-major when dense
  std::vector<double> diag;  // sparse mode
  std::vector<std::vector<std::pair<int, double>>> adj;  // sparse mode, A_ij per row
  std::vector<double> divergence;

  double entry(int r, int c) const;
  void apply(const std::vector<double>& x, std::vector<double>& out) const;
  std::vector<std::vector<int>> components() const;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual_norm)
      : std::runtime_error(what), residual_norm_(residual_norm) {}
  double residual_norm() const { return residual_norm_; }

 private:
  double residual_norm_;
};

struct SolveOptions {
  const ScoreVector* warm_start = nullptr;
  bool force_cg = false;  // conjugate gradient even for small components
};

LaplacianSystem assemble(const ComparisonDataset& data, const OutlierMask& mask);

// minimum-norm solution of L s = b; each connected component is gauged to
// mean zero, so the whole vector sums to zero
ScoreVector solve_scores(const LaplacianSystem& system, const SolveOptions& options = {});

struct TrimmedLsResult {
  ScoreVector scores;
  double objective = 0.0;
};

TrimmedLsResult trimmed_least_squares(const ComparisonDataset& data, const OutlierMask& mask,
                                      const SolveOptions& options = {});

// partition of [0, n_items) induced by the kept records
std::vector<std::vector<int>> connected_components(const ComparisonDataset& data,
                                                   const OutlierMask& mask);

}  // namespace trimrank
