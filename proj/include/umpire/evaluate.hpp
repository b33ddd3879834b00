#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "umpire/errors.hpp"

namespace umpire {

struct EvalConfig {
  int cpc_bins = 50;
  int ece_bins = 15;
  double dev_fraction = 0.05;
  std::vector<double> fpr_levels = {0.10, 0.01};
  std::array<double, 3> combined_weights = {1.0, 1.0, 1.0};
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct ReliabilityBin {
  double v;  // highest metric value in the bin
  double r;  // mean error rate in the bin
  long n;    // bin size
};

struct ReliabilityCurve {
  std::vector<ReliabilityBin> bins;
};

struct LrtResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool separation = false;  // some |beta| diverged past 30 during fitting
};

struct EvalReport {
  double auroc = 0.0;
  std::map<double, double> tpr_at_fpr;
  double ece = 0.0;
  std::optional<double> cpc;       // undefined when a bin series is constant
  double aurac = 0.0;
  std::optional<double> pearson_quality;
  std::optional<double> combined;  // needs a defined cpc
  ReliabilityCurve curve;
  std::optional<LrtResult> lrt;
};

// Labels are {0,1} with 1 = correct; the positive class for ranking metrics
// is "wrong" (label 0), so a good uncertainty score ranks wrong instances
// above correct ones.

// Mann-Whitney statistic: fraction of (wrong, correct) pairs with
// score_wrong > score_correct, ties counted 1/2.
double auroc(const std::vector<double>& scores, const std::vector<int>& labels);

// Maximal TPR over thresholds with FPR <= level, on the piecewise-linear
// empirical ROC (randomized-threshold convention, so an all-ties score gives
// TPR = level on the chance diagonal).
double tpr_at_fpr(const std::vector<double>& scores,
                  const std::vector<int>& labels, double level);

// Sort by score ascending, split into equal-count contiguous bins (remainder
// spread over the leading bins), record each bin's top score and error rate.
ReliabilityCurve reliability_curve(const std::vector<double>& scores,
                                   const std::vector<int>& labels, int bins);

// Pearson correlation of (v_j, r_j) over bins; nullopt when either series
// has zero variance (never silently 0).
std::optional<double> cpc(const ReliabilityCurve& curve);

// Expected calibration error after min-max scaling by the unlabeled dev
// scores (clamped to [0,1]), over equal-count bins of the evaluation set.
double ece_minmax(const std::vector<double>& scores,
                  const std::vector<int>& labels,
                  const std::vector<double>& dev_scores, int bins);

// Area under the accuracy-vs-rejection curve, rejecting highest scores
// first (stable ties), trapezoid rule, with accuracy at full rejection
// pinned to the last retained-set value.
double aurac(const std::vector<double>& scores, const std::vector<int>& labels);

// Pearson correlation between scores and negated quality values.
std::optional<double> pearson_quality(const std::vector<double>& scores,
                                      const std::vector<double>& qualities);

// w1 * auroc + w2 * cpc - w3 * ece.
double combined_score(double auroc_value, double cpc_value, double ece_value,
                      const std::array<double, 3>& weights);

// Upper tail of the chi-square distribution with one degree of freedom:
// P(X > x) = erfc(sqrt(x/2)) = 2 (1 - Phi(sqrt(x))).
double chi_square_1_upper_tail(double x);

/**
 * Likelihood-ratio test of whether the semantic-volume term adds signal on
 * top of incoherence: fits a = sigmoid(b0 + b1 q) against
 * a = sigmoid(b0 + b1 q + b2 u) by damped Newton iteration and returns
 * Lambda = -2 (loglik_restricted - loglik_full) with its chi-square(1)
 * upper-tail p-value. Coefficients diverging past |beta| = 30 mark the fit
 * as separated (flag, not an error); failure to converge otherwise is a
 * NumericError.
 */
LrtResult lrt_q_vs_qu(const std::vector<double>& q_values,
                      const std::vector<double>& u_values,
                      const std::vector<int>& labels);

/**
 * Assemble the full report for one metric column. `scores`/`labels` (and the
 * optional parallel arrays) are the evaluation split; `dev_scores` is the
 * unlabeled development split used only for min-max scaling.
 */
EvalReport evaluate_scores(
    const std::vector<double>& scores, const std::vector<int>& labels,
    const std::vector<double>& dev_scores, const EvalConfig& config,
    const std::optional<std::vector<double>>& qualities = std::nullopt,
    const std::optional<std::pair<std::vector<double>, std::vector<double>>>&
        q_and_u = std::nullopt);

}  // namespace umpire
