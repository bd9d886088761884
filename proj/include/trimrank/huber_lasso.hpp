#pragma once

#include <cstddef>
#include <vector>

#include "trimrank/model.hpp"

namespace trimrank {

struct HuberFit {
  ScoreVector scores;
  std::vector<bool> outlier_flags;  // |residual| > lambda at the fixed point
  int alternations = 0;
};

// alternating minimization of the joint score/outlier objective; records
// whose residual exceeds lambda carry a nonzero outlier variable and get
// their effective residual clamped to the threshold
HuberFit huber_fit(const ComparisonDataset& data, double lambda,
                   const ScoreVector* warm_start = nullptr);

struct LassoPath {
  std::vector<double> lambdas;  // strictly decreasing
  std::vector<std::size_t> activation_order;
  std::vector<double> activation_lambda;   // per record, NaN when never active
  std::vector<double> final_abs_residual;  // per record at the smallest lambda
  std::vector<ScoreVector> scores_per_lambda;  // filled when requested
  long nonmonotone_events = 0;  // grid artifacts where a record deactivated
};

// geometric lambda grid from the largest initial residual down to 1e-3,
// warm-started; orders records by the lambda at which they first activate
LassoPath lasso_path(const ComparisonDataset& data, int grid_size = 100,
                     bool keep_scores = false);

// first k activations become outliers; if fewer ever activate, pad by
// descending final residual magnitude
OutlierMask lasso_select(const LassoPath& path, std::size_t k);

}  // namespace trimrank
