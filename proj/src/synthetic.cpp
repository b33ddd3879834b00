#include "umpire/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "umpire/rng.hpp"

namespace umpire {

namespace {

void check_probability_vector(const std::vector<double>& probs,
                              const char* what) {
  if (probs.empty()) {
    throw ValidationError(std::string(what) + " must be nonempty");
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ValidationError(std::string(what) +
                            " entries must be finite and nonnegative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ValidationError(std::string(what) + " must sum to 1 within 1e-12");
  }
}

std::vector<double> cell_masses(const DiscreteDist& dist) {
  if (!dist.partition.has_value()) {
    throw ValidationError("distribution carries no partition");
  }
  const auto& part = *dist.partition;
  if (part.size() != dist.probs.size()) {
    throw ValidationError("partition does not cover all outcomes");
  }
  int max_cell = -1;
  for (int cell : part) {
    if (cell < 0) throw ValidationError("partition cell ids must be >= 0");
    max_cell = std::max(max_cell, cell);
  }
  std::vector<double> mass(std::size_t(max_cell) + 1, 0.0);
  for (std::size_t i = 0; i < part.size(); ++i) {
    mass[std::size_t(part[i])] += dist.probs[i];
  }
  return mass;
}

double one_minus_sum_squares(const std::vector<double>& probs) {
  double s = 0.0;
  for (double p : probs) s += p * p;
  return 1.0 - s;
}

// Unit-sphere embedding of one response from mode j. Zero noise returns the
// mode direction bit for bit.
Eigen::VectorXd draw_embedding(const MixtureSpec& spec, std::size_t mode,
                               Rng& rng) {
  if (spec.within_sigma == 0.0) return spec.mode_directions[mode];
  Eigen::VectorXd v = spec.mode_directions[mode];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) += spec.within_sigma * rng.normal();
  }
  return v.normalized();
}

MixtureSpec single_mode_spec(Eigen::Index d, Eigen::Index axis, double sigma,
                             DiscreteDist profile) {
  MixtureSpec spec;
  spec.weights = {1.0};
  spec.mode_directions = {Eigen::VectorXd::Unit(d, axis)};
  spec.within_sigma = sigma;
  spec.prob_profiles = {std::move(profile)};
  return spec;
}

std::string formatted_id(const char* prefix, long i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s-%04ld", prefix, i);
  return buf;
}

}  // namespace

void DiscreteDist::validate() const {
  check_probability_vector(probs, "outcome probabilities");
  for (double p : probs) {
    if (!(p > 0.0)) {
      throw ValidationError("outcome probabilities must be positive");
    }
  }
  if (partition.has_value() && partition->size() != probs.size()) {
    throw ValidationError("partition does not cover all outcomes");
  }
}

void MixtureSpec::validate() const {
  check_probability_vector(weights, "mixture weights");
  if (mode_directions.size() != weights.size()) {
    throw ValidationError("one mode direction required per weight");
  }
  if (prob_profiles.size() != weights.size()) {
    throw ValidationError("one probability profile required per mode");
  }
  if (!(within_sigma >= 0.0) || !std::isfinite(within_sigma)) {
    throw ValidationError("within_sigma must be finite and nonnegative");
  }
  const Eigen::Index d = mode_directions.empty() ? 0 : mode_directions[0].size();
  if (d < 1) throw ValidationError("mode directions must be nonempty vectors");
  for (const auto& mu : mode_directions) {
    if (mu.size() != d) {
      throw ValidationError("mode directions must share one dimension");
    }
    if (std::abs(mu.norm() - 1.0) > 1e-9) {
      throw ValidationError("mode directions must be unit vectors");
    }
  }
  for (const auto& profile : prob_profiles) profile.validate();
}

Eigen::Index MixtureSpec::dim() const {
  return mode_directions.empty() ? 0 : mode_directions[0].size();
}

double h2_exact(const DiscreteDist& dist) {
  dist.validate();
  return one_minus_sum_squares(dist.probs);
}

double h2_coarsened(const DiscreteDist& dist) {
  dist.validate();
  return one_minus_sum_squares(cell_masses(dist));
}

DominantModeBound dominant_mode_bound(const DiscreteDist& dist) {
  dist.validate();
  const auto mass = cell_masses(dist);
  DominantModeBound out;
  out.w_max = *std::max_element(mass.begin(), mass.end());
  out.lower_bound = 1.0 - h2_exact(dist);
  if (out.w_max < out.lower_bound - 1e-12) {
    throw NumericError("dominant-mode bound violated");
  }
  return out;
}

double many_modes_bound(long r, double beta) {
  if (r < 2) throw ValidationError("mode count r must be >= 2");
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw ValidationError("beta must be finite and nonnegative");
  }
  if (double(r) * beta > 1.0 + 1e-12) {
    throw ValidationError("r * beta must not exceed 1");
  }
  const double rest = 1.0 - double(r - 1) * beta;
  return 1.0 - rest * rest - double(r - 1) * beta * beta;
}

double h2_monte_carlo(const DiscreteDist& dist, long k, std::uint64_t seed) {
  dist.validate();
  if (k < 1) throw ValidationError("sample count must be >= 1");
  Rng rng(seed);
  double acc = 0.0;
  for (long i = 0; i < k; ++i) {
    acc += 1.0 - dist.probs[rng.categorical(dist.probs)];
  }
  return acc / double(k);
}

InstanceRecord sample_instance(const MixtureSpec& spec, long k,
                               std::uint64_t seed, std::string id) {
  spec.validate();
  if (k < 1) throw ValidationError("sample count must be >= 1");
  Rng rng(seed);
  InstanceRecord record;
  record.id = id.empty() ? "synth-" + std::to_string(seed) : std::move(id);
  record.samples.reserve(std::size_t(k));
  for (long i = 0; i < k; ++i) {
    const std::size_t mode = rng.categorical(spec.weights);
    ResponseSample sample;
    sample.embedding = draw_embedding(spec, mode, rng);
    const auto& profile = spec.prob_profiles[mode];
    const std::size_t outcome = rng.categorical(profile.probs);
    sample.seq_logprob = std::log(profile.probs[outcome]);
    sample.token_count = 1;
    sample.token_count_known = true;
    sample.cluster_id = long(mode);
    record.samples.push_back(std::move(sample));
  }
  return record;
}

Eigen::MatrixXd mixture_covariance(const MixtureSpec& spec) {
  spec.validate();
  const Eigen::Index d = spec.dim();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (std::size_t j = 0; j < spec.weights.size(); ++j) {
    mean += spec.weights[j] * spec.mode_directions[j];
  }
  Eigen::MatrixXd sigma =
      spec.within_sigma * spec.within_sigma *
      Eigen::MatrixXd::Identity(d, d);
  for (std::size_t j = 0; j < spec.weights.size(); ++j) {
    const Eigen::VectorXd c = spec.mode_directions[j] - mean;
    sigma += spec.weights[j] * c * c.transpose();
  }
  return sigma;
}

VolumePair population_volume_monotonicity(const MixtureSpec& spec_a,
                                          const MixtureSpec& spec_b,
                                          double epsilon) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  const Eigen::MatrixXd sigma_a = mixture_covariance(spec_a);
  const Eigen::MatrixXd sigma_b = mixture_covariance(spec_b);
  if (sigma_a.rows() != sigma_b.rows()) {
    throw ValidationError("specs must share one embedding dimension");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> diff_eigs(
      sigma_b - sigma_a, Eigen::EigenvaluesOnly);
  if (diff_eigs.eigenvalues().minCoeff() < -1e-10) {
    throw ValidationError(
        "second spec's covariance does not dominate the first");
  }
  const auto jittered_det = [epsilon](const Eigen::MatrixXd& sigma) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(
        sigma, Eigen::EigenvaluesOnly);
    double det = 1.0;
    for (Eigen::Index i = 0; i < eigs.eigenvalues().size(); ++i) {
      det *= eigs.eigenvalues()(i) + epsilon;
    }
    return det;
  };
  VolumePair out{jittered_det(sigma_a), jittered_det(sigma_b)};
  if (out.det_b < out.det_a - 1e-12) {
    throw NumericError("volume monotonicity violated");
  }
  return out;
}

ConcentrationResult concentration_experiment(const MixtureSpec& spec, long k,
                                             long trials, double eta,
                                             const KernelConfig& config,
                                             std::uint64_t seed) {
  spec.validate();
  config.validate();
  if (trials < 100) throw ValidationError("need at least 100 trials");
  if (!(eta > 0.0)) throw ValidationError("eta must be positive");
  std::vector<double> volumes(static_cast<std::size_t>(trials));
  for (long t = 0; t < trials; ++t) {
    const InstanceRecord record =
        sample_instance(spec, k, Rng::derive_seed(seed, std::uint64_t(t)));
    volumes[std::size_t(t)] = umpire_score(record.samples, config).v;
  }
  const double mean =
      std::accumulate(volumes.begin(), volumes.end(), 0.0) / double(trials);
  long exceed = 0;
  for (double v : volumes) exceed += (std::abs(v - mean) > eta);
  const double ell = bounded_difference_constant(config);
  ConcentrationResult out;
  out.mean_v = mean;
  out.empirical_tail = double(exceed) / double(trials);
  out.bound = 2.0 * std::exp(-2.0 * double(k) * eta * eta / (ell * ell));
  const double capped = std::min(out.bound, 1.0);
  const double slack = 3.0 * std::sqrt(capped * (1.0 - capped) / double(trials));
  if (out.empirical_tail > out.bound + slack) {
    throw NumericError("concentration bound violated beyond binomial slack");
  }
  return out;
}

MisrankingResult misranking_experiment(const MixtureSpec& spec_high,
                                       const MixtureSpec& spec_low, long k,
                                       long trials, const KernelConfig& config,
                                       std::uint64_t seed) {
  spec_high.validate();
  spec_low.validate();
  config.validate();
  if (trials < 100) throw ValidationError("need at least 100 trials");
  std::vector<double> high(static_cast<std::size_t>(trials));
  std::vector<double> low(static_cast<std::size_t>(trials));
  for (long t = 0; t < trials; ++t) {
    const auto th = std::uint64_t(2 * t);
    const auto tl = std::uint64_t(2 * t + 1);
    high[std::size_t(t)] =
        umpire_score(sample_instance(spec_high, k, Rng::derive_seed(seed, th))
                         .samples,
                     config)
            .v;
    low[std::size_t(t)] =
        umpire_score(sample_instance(spec_low, k, Rng::derive_seed(seed, tl))
                         .samples,
                     config)
            .v;
  }
  const double mean_high =
      std::accumulate(high.begin(), high.end(), 0.0) / double(trials);
  const double mean_low =
      std::accumulate(low.begin(), low.end(), 0.0) / double(trials);
  MisrankingResult out;
  out.gap = mean_high - mean_low;
  if (!(out.gap > 0.0)) {
    throw ValidationError("specs do not produce a positive mean-volume gap");
  }
  long misranked = 0;
  for (long t = 0; t < trials; ++t) {
    misranked += (high[std::size_t(t)] <= low[std::size_t(t)]);
  }
  out.empirical_rate = double(misranked) / double(trials);
  const double ell = bounded_difference_constant(config);
  out.bound =
      4.0 * std::exp(-double(k) * out.gap * out.gap / (2.0 * ell * ell));
  return out;
}

std::vector<InstanceRecord> planted_benchmark(long n_correct, long n_wrong,
                                              std::uint64_t seed) {
  if (n_correct < 0 || n_wrong < 0 || n_correct + n_wrong == 0) {
    throw ValidationError("need a positive total instance count");
  }
  const Eigen::Index d = 16;
  const long k = 12;
  const double sigma = 0.01;
  const DiscreteDist point_mass{{1.0}, std::nullopt};
  const DiscreteDist uniform4{{0.25, 0.25, 0.25, 0.25}, std::nullopt};

  const MixtureSpec correct = single_mode_spec(d, 0, sigma, point_mass);
  MixtureSpec wrong_multi;
  wrong_multi.weights = {0.5, 0.5};
  wrong_multi.mode_directions = {Eigen::VectorXd::Unit(d, 0),
                                 Eigen::VectorXd::Unit(d, 1)};
  wrong_multi.within_sigma = sigma;
  wrong_multi.prob_profiles = {uniform4, uniform4};
  const MixtureSpec wrong_lex = single_mode_spec(d, 0, sigma, uniform4);

  std::vector<InstanceRecord> records;
  records.reserve(std::size_t(n_correct + n_wrong));
  for (long i = 0; i < n_correct; ++i) {
    InstanceRecord r = sample_instance(
        correct, k, Rng::derive_seed(seed, std::uint64_t(i)),
        formatted_id("correct", i));
    r.label = 1;
    records.push_back(std::move(r));
  }
  const long n_lex = n_wrong / 2;
  for (long i = 0; i < n_wrong; ++i) {
    const bool lex = i < n_lex;
    InstanceRecord r = sample_instance(
        lex ? wrong_lex : wrong_multi, k,
        Rng::derive_seed(seed, std::uint64_t(n_correct + i)),
        lex ? formatted_id("wrong-lex", i) : formatted_id("wrong-multi", i));
    r.label = 0;
    records.push_back(std::move(r));
  }
  Rng shuffle_rng(Rng::derive_seed(seed, 0xfffffffful));
  const auto perm = shuffle_rng.permutation(records.size());
  std::vector<InstanceRecord> shuffled;
  shuffled.reserve(records.size());
  for (std::size_t p : perm) shuffled.push_back(std::move(records[p]));
  return shuffled;
}

std::vector<InstanceRecord> lexical_variance_benchmark(long n_correct,
                                                       long n_wrong,
                                                       std::uint64_t seed) {
  if (n_correct < 0 || n_wrong < 0 || n_correct + n_wrong == 0) {
    throw ValidationError("need a positive total instance count");
  }
  const Eigen::Index d = 16;
  const long k = 12;
  const double sigma = 0.01;
  const MixtureSpec correct =
      single_mode_spec(d, 0, sigma, DiscreteDist{{1.0}, std::nullopt});
  const MixtureSpec wrong_lex = single_mode_spec(
      d, 0, sigma, DiscreteDist{{0.25, 0.25, 0.25, 0.25}, std::nullopt});
  std::vector<InstanceRecord> records;
  records.reserve(std::size_t(n_correct + n_wrong));
  for (long i = 0; i < n_correct; ++i) {
    InstanceRecord r = sample_instance(
        correct, k, Rng::derive_seed(seed, std::uint64_t(i)),
        formatted_id("correct", i));
    r.label = 1;
    records.push_back(std::move(r));
  }
  for (long i = 0; i < n_wrong; ++i) {
    InstanceRecord r = sample_instance(
        wrong_lex, k, Rng::derive_seed(seed, std::uint64_t(n_correct + i)),
        formatted_id("wrong-lex", i));
    r.label = 0;
    records.push_back(std::move(r));
  }
  Rng shuffle_rng(Rng::derive_seed(seed, 0xfffffffful));
  const auto perm = shuffle_rng.permutation(records.size());
  std::vector<InstanceRecord> shuffled;
  shuffled.reserve(records.size());
  for (std::size_t p : perm) shuffled.push_back(std::move(records[p]));
  return shuffled;
}

std::vector<MixtureSpec> concentration_specs() {
  const Eigen::Index d = 16;
  std::vector<MixtureSpec> specs;

  specs.push_back(single_mode_spec(
      d, 0, 0.05, DiscreteDist{{0.7, 0.2, 0.1}, std::nullopt}));

  MixtureSpec two;
  two.weights = {0.5, 0.5};
  two.mode_directions = {Eigen::VectorXd::Unit(d, 0),
                         Eigen::VectorXd::Unit(d, 1)};
  two.within_sigma = 0.1;
  two.prob_profiles = {DiscreteDist{{0.5, 0.5}, std::nullopt},
                       DiscreteDist{{0.5, 0.5}, std::nullopt}};
  specs.push_back(std::move(two));

  MixtureSpec three;
  three.weights = {0.6, 0.3, 0.1};
  three.mode_directions = {Eigen::VectorXd::Unit(d, 0),
                           Eigen::VectorXd::Unit(d, 1),
                           Eigen::VectorXd::Unit(d, 2)};
  three.within_sigma = 0.2;
  three.prob_profiles = {DiscreteDist{{0.5, 0.3, 0.2}, std::nullopt},
                         DiscreteDist{{0.5, 0.3, 0.2}, std::nullopt},
                         DiscreteDist{{0.5, 0.3, 0.2}, std::nullopt}};
  specs.push_back(std::move(three));

  return specs;
}

}  // namespace umpire
