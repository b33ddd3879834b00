#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "umpire/errors.hpp"
#include "umpire/types.hpp"

namespace umpire {

// Names of all shipped baseline scores, in the alphabetical order used for
// score-file columns.
const std::set<std::string>& known_baselines();

struct BaselineSelection {
  std::set<std::string> enabled;
  double eigen_jitter = 1e-8;

  void validate() const;
};

// Monte Carlo length-normalized entropy: -(1/k) sum_i seq_logprob_i / N_i.
// Requires a trustworthy token count on every sample.
double ln_entropy(const std::vector<ResponseSample>& samples);

// Mean log eigenvalue of the row-centered Gram Z Z^T / k (jittered), the
// covariance log-determinant reading of embedding spread.
double eigenscore(const std::vector<ResponseSample>& samples, double jitter);

// Shannon entropy of the empirical cluster-frequency distribution,
// -sum_c (n_c/k) ln(n_c/k). Clustering itself happens upstream.
double semantic_entropy_discrete(const std::vector<ResponseSample>& samples);

/**
 * Scores derivable from the single greedy response: seq_prob (negative
 * log-probability), perplexity exp(-logprob/tokens), and, when per-token
 * log-probs are supplied, mean_token_entropy as the mean negative realized
 * token log-probability. The last is a surrogate: true token entropy needs
 * full next-token distributions, which instance files do not carry.
 */
std::map<std::string, double> single_sample_scores(
    const ResponseSample& greedy,
    const std::optional<std::vector<double>>& token_logprobs);

/**
 * Evaluate every enabled baseline on one record. Baselines whose inputs the
 * record does not carry (no greedy response, no cluster ids, too few
 * samples, untrusted token counts) come back disengaged (nullopt) with a
 * note appended to `warnings`; direct calls to the per-baseline functions
 * above throw instead.
 */
std::map<std::string, std::optional<double>> compute_baselines(
    const InstanceRecord& record, const BaselineSelection& selection,
    std::vector<std::string>* warnings = nullptr);

}  // namespace umpire
