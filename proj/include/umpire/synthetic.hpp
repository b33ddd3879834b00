#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "umpire/errors.hpp"
#include "umpire/kernel.hpp"
#include "umpire/types.hpp"

namespace umpire {

// Discrete response distribution over an indexed outcome set, optionally
// carrying a partition of outcomes into semantic modes for coarsening checks.
struct DiscreteDist {
  std::vector<double> probs;
  std::optional<std::vector<int>> partition;  // outcome index -> cell id

  void validate() const;
};

/**
 * Mixture-of-modes embedding model: a response picks mode j with weight
 * w_j, its embedding is the unit normalization of mu_j plus isotropic
 * Gaussian noise of scale within_sigma, and its sequence probability is
 * drawn from the mode's discrete profile.
 */
struct MixtureSpec {
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> mode_directions;
  double within_sigma = 0.0;
  std::vector<DiscreteDist> prob_profiles;  // one per mode

  void validate() const;
  Eigen::Index dim() const;
};

// Quadratic entropy 1 - sum p^2 of the outcome distribution.
double h2_exact(const DiscreteDist& dist);

// Quadratic entropy of the partition-coarsened distribution; never exceeds
// h2_exact (merging outcomes concentrates mass).
double h2_coarsened(const DiscreteDist& dist);

struct DominantModeBound {
  double w_max;        // largest cell mass
  double lower_bound;  // 1 - h2_exact, always <= w_max
};
DominantModeBound dominant_mode_bound(const DiscreteDist& dist);

// Minimal coarsened quadratic entropy of any distribution with at least r
// cells of mass >= beta: 1 - (1-(r-1)beta)^2 - (r-1)beta^2.
double many_modes_bound(long r, double beta);

// Mean of (1 - p_outcome) over k seeded draws; unbiased for h2_exact.
double h2_monte_carlo(const DiscreteDist& dist, long k, std::uint64_t seed);

// Draw one instance of k responses from the mixture; deterministic in seed.
// Embeddings are stored on the unit sphere, seq_logprob = ln(profile mass),
// cluster_id = mode index. An empty id defaults to "synth-<seed>".
InstanceRecord sample_instance(const MixtureSpec& spec, long k,
                               std::uint64_t seed, std::string id = "");

// Analytic mixture covariance sigma^2 I + sum_j w_j (mu_j-mu)(mu_j-mu)^T,
// taken before the renormalization-to-sphere step.
Eigen::MatrixXd mixture_covariance(const MixtureSpec& spec);

struct VolumePair {
  double det_a;
  double det_b;
};

// Determinants det(Sigma_mix + eps I) of both specs' analytic covariances.
// Requires the difference Sigma_mix(b) - Sigma_mix(a) to be PSD (checked by
// eigenvalues), which forces det_b >= det_a.
VolumePair population_volume_monotonicity(const MixtureSpec& spec_a,
                                          const MixtureSpec& spec_b,
                                          double epsilon);

struct ConcentrationResult {
  double empirical_tail;  // fraction of trials with |V - mean| > eta
  double bound;           // 2 exp(-2 k eta^2 / L^2)
  double mean_v;
};

// Estimates the deviation tail of V over seeded trials and compares it with
// the bounded-difference bound; violation beyond 3-sigma binomial slack is a
// NumericError.
ConcentrationResult concentration_experiment(const MixtureSpec& spec, long k,
                                             long trials, double eta,
                                             const KernelConfig& config,
                                             std::uint64_t seed);

struct MisrankingResult {
  double empirical_rate;  // fraction of paired trials with V_high <= V_low
  double bound;           // 4 exp(-k gap^2 / (2 L^2))
  double gap;             // estimated E[V_high] - E[V_low]
};

// Paired-trial misranking estimate for two specs whose mean volumes differ.
MisrankingResult misranking_experiment(const MixtureSpec& spec_high,
                                       const MixtureSpec& spec_low, long k,
                                       long trials, const KernelConfig& config,
                                       std::uint64_t seed);

/**
 * Labeled benchmark with planted structure: correct instances come from one
 * tight mode with near-point-mass response probabilities; wrong instances
 * split between a two-mode spec (semantic spread) and a single-mode spec
 * with dispersed probabilities (lexical variance only). Records are shuffled
 * deterministically. Zero counts are allowed.
 */
std::vector<InstanceRecord> planted_benchmark(long n_correct, long n_wrong,
                                              std::uint64_t seed);

// Only the lexical-variance wrong subset plus correct instances, for
// exercising the volume-vs-incoherence interplay in isolation.
std::vector<InstanceRecord> lexical_variance_benchmark(long n_correct,
                                                       long n_wrong,
                                                       std::uint64_t seed);

// Three fixed mixture specs of increasing spread used by the concentration
// experiments and the synth command.
std::vector<MixtureSpec> concentration_specs();

}  // namespace umpire
