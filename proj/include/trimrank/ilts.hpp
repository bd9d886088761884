#pragma once

#include <cstddef>

#include "trimrank/model.hpp"

namespace trimrank {

// floor(beta2 * x) stalls for x <= 33 when beta2 = 1.03, so the default
// growth rule forces at least one step of progress
enum class GrowthRule { paper_floor, strict_progress };

struct IltsConfig {
  double beta1 = 0.75;
  double beta2 = 1.03;
  int max_iter = 30;
  GrowthRule growth_rule = GrowthRule::strict_progress;
};

void validate(const IltsConfig& config);

long initial_underestimate(long mismatches, double beta1);
long grow_underestimate(long previous, double beta2, GrowthRule rule);

// marks the k records with the largest weighted squared residuals as
// outliers; ties broken by descending squared residual then record index
OutlierMask update_mask(const ComparisonDataset& data, const ScoreVector& scores, std::size_t k);

// alternating trimmed least squares with a fixed trim count
TrimmedSolution ilts_with_k(const ComparisonDataset& data, std::size_t k,
                            const IltsConfig& config = {});

// trim-count schedule: start at floor(beta1 * mismatches), grow by beta2,
// stop once the estimate agrees with the current mismatch count
TrimmedSolution adaptive_ilts(const ComparisonDataset& data, const IltsConfig& config = {});

// majority check over pairs adjacent in the final ranking; when the fitted
// order contradicts the vote count, the minority records become the outliers
TrimmedSolution adjacent_pair_correction(const ComparisonDataset& data,
                                         const TrimmedSolution& solution);

}  // namespace trimrank
