#include "trimrank/ilts.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "trimrank/hodge.hpp"

namespace trimrank {
namespace {

constexpr double kChainTolerance = 1e-9;
constexpr double kStallTolerance = 1e-12;
constexpr int kSafetyCap = 1000;
constexpr int kTieAlternativeCap = 128;

std::string mask_key(const OutlierMask& mask) {
  std::string key((mask.size() + 7) / 8, '\0');
  for (std::size_t r = 0; r < mask.size(); ++r)
    if (!mask.keep[r]) key[r / 8] |= static_cast<char>(1u << (r % 8));
  return key;
}

std::vector<double> weighted_sq_residuals(const ComparisonDataset& data,
                                          const ScoreVector& scores) {
  std::vector<double> wr2(data.records.size());
  for (std::size_t r = 0; r < data.records.size(); ++r) {
    const double res = residual(data.records[r], scores);
    wr2[r] = data.records[r].weight * res * res;
  }
  return wr2;
}

std::vector<std::size_t> trim_order(const std::vector<double>& wr2) {
  std::vector<std::size_t> order(wr2.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (wr2[a] != wr2[b]) return wr2[a] > wr2[b];
    return a < b;
  });
  return order;
}

OutlierMask mask_from_trimmed(std::size_t n_records, const std::vector<std::size_t>& trimmed) {
  OutlierMask mask = OutlierMask::all_keep(n_records);
  for (std::size_t r : trimmed) mask.keep[r] = false;
  return mask;
}

// canonical trim plus up to kTieAlternativeCap re-pickings of the records
// tied at the threshold; returns the first mask not yet visited
bool next_unvisited_mask(const std::vector<double>& wr2, std::size_t k,
                         const std::unordered_set<std::string>& visited, OutlierMask& out) {
  const std::vector<std::size_t> order = trim_order(wr2);
  std::vector<std::size_t> trimmed(order.begin(), order.begin() + static_cast<long>(k));
  out = mask_from_trimmed(wr2.size(), trimmed);
  if (!visited.count(mask_key(out))) return true;
  if (k == 0) return false;

  const double tau = wr2[order[k - 1]];
  std::vector<std::size_t> fixed;  // strictly above the threshold, always trimmed
  std::vector<std::size_t> tied;
  for (std::size_t r : order) {
    if (wr2[r] > tau)
      fixed.push_back(r);
    else if (wr2[r] == tau)
      tied.push_back(r);
  }
  const std::size_t pick = k - fixed.size();
  if (pick == 0 || pick > tied.size()) return false;

  // lexicographic combinations over the tied set, first one is canonical
  std::vector<std::size_t> comb(pick);
  std::iota(comb.begin(), comb.end(), std::size_t{0});
  for (int tried = 0; tried < kTieAlternativeCap; ++tried) {
    // advance to the next combination
    long pos = static_cast<long>(pick) - 1;
    while (pos >= 0 && comb[static_cast<std::size_t>(pos)] ==
                           tied.size() - pick + static_cast<std::size_t>(pos))
      --pos;
    if (pos < 0) return false;
    ++comb[static_cast<std::size_t>(pos)];
    for (std::size_t q = static_cast<std::size_t>(pos) + 1; q < pick; ++q)
      comb[q] = comb[q - 1] + 1;

    trimmed = fixed;
    for (std::size_t q : comb) trimmed.push_back(tied[q]);
    out = mask_from_trimmed(wr2.size(), trimmed);
    if (!visited.count(mask_key(out))) return true;
  }
  return false;
}

double kept_sum(const std::vector<double>& wr2, const OutlierMask& mask) {
  double sum = 0.0;
  for (std::size_t r = 0; r < wr2.size(); ++r)
    if (mask.keep[r]) sum += wr2[r];
  return sum;
}

void attach_disconnection_warning(const ComparisonDataset& data, TrimmedSolution& solution) {
  const auto comps = connected_components(data, solution.mask);
  if (comps.size() > 1)
    solution.warnings.push_back("kept graph splits into " + std::to_string(comps.size()) +
                                " components; cross-component order is undefined");
}

}  // namespace

void validate(const IltsConfig& config) {
  if (!(config.beta1 > 0.0 && config.beta1 < 1.0))
    throw std::invalid_argument("beta1 must lie in (0, 1)");
  if (!(config.beta2 > 1.0)) throw std::invalid_argument("beta2 must be greater than 1");
  if (config.max_iter < 1) throw std::invalid_argument("max_iter must be positive");
}

long initial_underestimate(long mismatches, double beta1) {
  return static_cast<long>(std::floor(beta1 * static_cast<double>(mismatches) + 1e-9));
}

long grow_underestimate(long previous, double beta2, GrowthRule rule) {
  const long grown = static_cast<long>(std::floor(beta2 * static_cast<double>(previous) + 1e-9));
  if (rule == GrowthRule::strict_progress) return std::max(grown, previous + 1);
  return grown;
}

OutlierMask update_mask(const ComparisonDataset& data, const ScoreVector& scores, std::size_t k) {
  if (k > data.records.size())
    throw std::invalid_argument("cannot trim more records than the dataset holds");
  const std::vector<double> wr2 = weighted_sq_residuals(data, scores);
  const std::vector<std::size_t> order = trim_order(wr2);
  return mask_from_trimmed(wr2.size(), {order.begin(), order.begin() + static_cast<long>(k)});
}

TrimmedSolution ilts_with_k(const ComparisonDataset& data, std::size_t k,
                            const IltsConfig& config) {
  validate(data);
  validate(config);
  if (k >= data.records.size() && !(k == 0 && data.records.empty()))
    throw std::invalid_argument("trim count must be smaller than the record count");

  TrimmedSolution sol;
  sol.mask = OutlierMask::all_keep(data.records.size());
  TrimmedLsResult fit = trimmed_least_squares(data, sol.mask);
  sol.scores = fit.scores;
  sol.objective = fit.objective;
  sol.estimated_k = static_cast<long>(k);

  std::unordered_set<std::string> visited;
  for (int iter = 1; iter <= kSafetyCap; ++iter) {
    sol.iterations = iter;
    const std::vector<double> wr2 = weighted_sq_residuals(data, sol.scores);
    OutlierMask next;
    if (!next_unvisited_mask(wr2, k, visited, next)) {
      sol.converged = true;  // every admissible trim already tried
      break;
    }
    const double current_under_s = kept_sum(wr2, sol.mask);
    const double next_under_s = kept_sum(wr2, next);
    if (next_under_s > current_under_s + kChainTolerance)
      throw std::logic_error("mask update increased the trimmed objective");

    SolveOptions opt;
    opt.warm_start = &sol.scores;
    fit = trimmed_least_squares(data, next, opt);
    if (fit.objective > next_under_s + kChainTolerance)
      throw std::logic_error("score update increased the trimmed objective");

    visited.insert(mask_key(next));
    const double previous = sol.objective;
    sol.mask = std::move(next);
    sol.scores = fit.scores;
    sol.objective = fit.objective;
    if (previous - sol.objective < kStallTolerance) {
      sol.converged = true;
      break;
    }
  }
  attach_disconnection_warning(data, sol);
  return sol;
}

TrimmedSolution adaptive_ilts(const ComparisonDataset& data, const IltsConfig& config) {
  validate(data);
  validate(config);
  if (data.records.empty()) throw std::invalid_argument("dataset has no records");

  OutlierMask mask = OutlierMask::all_keep(data.records.size());
  ScoreVector scores;
  long under = 0;
  long mismatches = 0;
  TrimmedSolution sol;

  for (int k = 1; k <= config.max_iter; ++k) {
    SolveOptions opt;
    opt.warm_start = (k > 1) ? &scores : nullptr;
    TrimmedLsResult fit = trimmed_least_squares(data, mask, opt);
    scores = fit.scores;
    mismatches = mismatch_count(data, scores);
    under = (k == 1) ? initial_underestimate(mismatches, config.beta1)
                     : std::min(grow_underestimate(under, config.beta2, config.growth_rule),
                                mismatches);
    mask = update_mask(data, scores, static_cast<std::size_t>(under));
    if (under == mismatches) {
      SolveOptions refit_opt;
      refit_opt.warm_start = &scores;
      fit = trimmed_least_squares(data, mask, refit_opt);
      sol.scores = fit.scores;
      sol.mask = mask;
      sol.objective = fit.objective;
      sol.iterations = k;
      sol.estimated_k = mismatches;
      sol.converged = true;
      attach_disconnection_warning(data, sol);
      return sol;
    }
  }

  SolveOptions refit_opt;
  refit_opt.warm_start = &scores;
  const TrimmedLsResult fit = trimmed_least_squares(data, mask, refit_opt);
  sol.scores = fit.scores;
  sol.mask = mask;
  sol.objective = fit.objective;
  sol.iterations = config.max_iter;
  sol.estimated_k = mismatches;
  sol.converged = false;
  attach_disconnection_warning(data, sol);
  return sol;
}

TrimmedSolution adjacent_pair_correction(const ComparisonDataset& data,
                                         const TrimmedSolution& solution) {
  validate(data);
  const int n = data.n_items;
  if (solution.scores.size() != n || solution.mask.size() != data.records.size())
    throw std::invalid_argument("solution does not match the dataset");

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (solution.scores[a] != solution.scores[b]) return solution.scores[a] > solution.scores[b];
    return a < b;
  });
  std::vector<int> pos(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) pos[static_cast<std::size_t>(order[t])] = t;

  // votes per pair adjacent in the ranking: [t] covers (order[t], order[t+1])
  std::vector<long> upper_votes(static_cast<std::size_t>(n), 0);
  std::vector<long> lower_votes(static_cast<std::size_t>(n), 0);
  for (const ComparisonRecord& rec : data.records) {
    const int pi = pos[static_cast<std::size_t>(rec.item_i)];
    const int pj = pos[static_cast<std::size_t>(rec.item_j)];
    if (std::abs(pi - pj) != 1) continue;
    const int t = std::min(pi, pj);
    const int preferred_pos = (rec.y > 0.0) ? pi : pj;
    if (preferred_pos == t)
      ++upper_votes[static_cast<std::size_t>(t)];
    else
      ++lower_votes[static_cast<std::size_t>(t)];
  }

  bool any_swap = false;
  for (int t = 0; t + 1 < n; ++t)
    if (upper_votes[static_cast<std::size_t>(t)] < lower_votes[static_cast<std::size_t>(t)])
      any_swap = true;
  if (!any_swap) return solution;

  OutlierMask mask = solution.mask;
  for (std::size_t r = 0; r < data.records.size(); ++r) {
    const ComparisonRecord& rec = data.records[r];
    const int pi = pos[static_cast<std::size_t>(rec.item_i)];
    const int pj = pos[static_cast<std::size_t>(rec.item_j)];
    if (std::abs(pi - pj) != 1) continue;
    const int t = std::min(pi, pj);
    if (upper_votes[static_cast<std::size_t>(t)] >= lower_votes[static_cast<std::size_t>(t)])
      continue;
    const int preferred_pos = (rec.y > 0.0) ? pi : pj;
    mask.keep[r] = (preferred_pos != t);  // minority direction becomes the outlier
  }

  SolveOptions opt;
  opt.warm_start = &solution.scores;
  const TrimmedLsResult fit = trimmed_least_squares(data, mask, opt);
  TrimmedSolution out;
  out.scores = fit.scores;
  out.mask = std::move(mask);
  out.objective = fit.objective;
  out.iterations = solution.iterations;
  out.estimated_k = static_cast<long>(out.mask.outlier_count());
  out.converged = solution.converged;
  attach_disconnection_warning(data, out);
  return out;
}

}  // namespace trimrank
