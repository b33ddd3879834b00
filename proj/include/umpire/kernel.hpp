#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "umpire/errors.hpp"
#include "umpire/linalg.hpp"
#include "umpire/types.hpp"

namespace umpire {

struct KernelConfig {
  double epsilon = 1e-8;  // jitter on the Gram diagonal
  double alpha = 0.0;     // incoherence weight
  bool length_normalized = false;  // p_i = exp(logprob / token_count)

  void validate() const {
    if (!(epsilon > 0.0))
      throw ValidationError("KernelConfig: epsilon must be positive");
    if (!(alpha >= 0.0))
      throw ValidationError("KernelConfig: alpha must be nonnegative");
  }
};

// Per-instance scores: v = u + alpha * q (exact decomposition of the
// quality-diversity kernel determinant), with u the unadjusted semantic
// volume and q the mean incoherence in [0, 1]. Baseline scores are filled
// in by callers that want them; scoring itself leaves the map empty.
struct ScoreBundle {
  double v = 0.0;
  double u = 0.0;
  double q = 0.0;
  std::map<std::string, double> baselines;
};

// Median as the mean of the central order statistics (even length averages
// the two central values). Input is taken by value and sorted.
inline double median(std::vector<double> v) {
  if (v.empty()) throw ValidationError("median: empty input");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/**
 * Incoherence scores f_i = 1 - p_i with p_i = exp(seq_logprob), or
 * exp(seq_logprob / token_count) under length normalization. Values land in
 * [0, 1] because seq_logprob <= 0.
 */
inline std::vector<double> incoherence_scores(
    const std::vector<ResponseSample>& samples, const KernelConfig& config) {
  config.validate();
  std::vector<double> f;
  f.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const ResponseSample& s = samples[i];
    if (s.seq_logprob > 0.0)
      throw ValidationError("incoherence_scores: sample " + std::to_string(i) +
                            " has positive seq_logprob");
    if (s.token_count < 1)
      throw ValidationError("incoherence_scores: sample " + std::to_string(i) +
                            " has token_count < 1");
    double lp = config.length_normalized
                    ? s.seq_logprob / static_cast<double>(s.token_count)
                    : s.seq_logprob;
    f.push_back(1.0 - std::exp(lp));
  }
  return f;
}

// Stack the sample embeddings into a validated unit-row matrix.
inline EmbeddingMatrix embedding_matrix(
    const std::vector<ResponseSample>& samples, int* renormalized = nullptr) {
  if (samples.empty())
    throw ValidationError("embedding_matrix: need at least one sample");
  std::vector<Eigen::VectorXd> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) rows.push_back(s.embedding);
  return EmbeddingMatrix::from_rows(rows, renormalized);
}

/**
 * Unadjusted semantic volume
 *   U = (1 / 2k) log det(Phi Phi^T + eps I_k).
 * Evaluated through the k x k Gram path when k <= d and through the d x d
 * second-moment path otherwise; the two agree within 1e-8 relative. The
 * result is checked against the Gershgorin/trace window
 * [k ln eps, k ln(k + eps)] that unit rows guarantee for the log-det.
 */
inline double semantic_volume(const std::vector<ResponseSample>& samples,
                              const KernelConfig& config) {
  config.validate();
  EmbeddingMatrix phi = embedding_matrix(samples);
  const double k = static_cast<double>(phi.k());
  double logdet = phi.k() <= phi.d()
                      ? logdet_jittered(gram(phi), config.epsilon)
                      : logdet_second_moment(phi, config.epsilon);
  const double lo = k * std::log(config.epsilon);
  const double hi = k * std::log(k + config.epsilon);
  if (logdet < lo - 1e-6 || logdet > hi + 1e-6)
    throw NumericError("semantic_volume: log-det outside the eigenvalue bound");
  return logdet / (2.0 * k);
}

/**
 * Reference evaluation of the quality-diversity kernel determinant,
 *   V = (1 / 2k) log det(C (Phi Phi^T + eps I) C),  C = diag(exp(alpha f_i)),
 * with the scaled matrix formed explicitly. This path exists as an oracle to
 * cross-check the decomposed computation in umpire_score; exponents are
 * clamped at 700 and clamp activation is an error, since overflow here would
 * silently corrupt the cross-check.
 */
inline double umpire_direct(const std::vector<ResponseSample>& samples,
                            const KernelConfig& config) {
  config.validate();
  EmbeddingMatrix phi = embedding_matrix(samples);
  std::vector<double> f = incoherence_scores(samples, config);
  const Eigen::Index k = phi.k();
  Eigen::VectorXd c(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    double e = config.alpha * f[static_cast<std::size_t>(i)];
    if (e > 700.0)
      throw NumericError("umpire_direct: exponent overflow at sample " +
                         std::to_string(i));
    c(i) = std::exp(e);
  }
  Eigen::MatrixXd m = gram(phi).matrix();
  m.diagonal().array() += config.epsilon;
  m = c.asDiagonal() * m * c.asDiagonal();
  // The jitter already sits inside the scaled matrix, so factor it as-is
  // (the Cholesky reads only the lower triangle, which is well defined even
  // if the two-sided scaling rounds the halves apart by an ulp).
  double logdet = detail::cholesky_logdet_in_place(m);
  return logdet / (2.0 * static_cast<double>(k));
}

/**
 * The production scoring path, via the exact decomposition
 *   V = U + alpha * Q,
 * where U is the unadjusted semantic volume and Q the mean incoherence.
 * Equal to umpire_direct within 1e-9 relative, without ever forming the
 * scaled kernel (no overflow for any alpha).
 */
inline ScoreBundle umpire_score(const std::vector<ResponseSample>& samples,
                                const KernelConfig& config) {
  ScoreBundle b;
  b.u = semantic_volume(samples, config);
  std::vector<double> f = incoherence_scores(samples, config);
  double sum = 0.0;
  for (double x : f) sum += x;
  b.q = sum / static_cast<double>(f.size());
  b.v = b.u + config.alpha * b.q;
  return b;
}

struct AdaptiveAlphaDetail {
  double alpha = 0.0;
  double median_u = 0.0;
  double median_q = 0.0;
  std::size_t subset_size = 0;
};

/**
 * Label-free alpha selection: |median(u_t)| / median(q_t) over an unlabeled
 * subset of instances. The subset is chosen by deterministic striding over
 * the input order (indices floor(j*n/m), j < m, m = round(fraction*n)
 * clamped to [1, n]), which is label-free, seed-free and representative even
 * when the file happens to be sorted by class. Returns 0 when median(q) is
 * at most 1e-12: every response is certain and the metric degrades to the
 * plain semantic volume. The absolute value on median(u) reflects that u is
 * typically negative under a small jitter while alpha must be nonnegative.
 */
inline AdaptiveAlphaDetail adaptive_alpha_detail(
    const std::vector<InstanceRecord>& instances, const KernelConfig& config,
    double subset_fraction) {
  config.validate();
  if (!(subset_fraction > 0.0) || subset_fraction > 1.0)
    throw ValidationError("adaptive_alpha: subset_fraction must be in (0,1]");
  const std::size_t n = instances.size();
  if (n == 0) throw ValidationError("adaptive_alpha: empty subset");
  auto m = static_cast<std::size_t>(
      std::llround(subset_fraction * static_cast<double>(n)));
  m = std::max<std::size_t>(1, std::min(n, m));
  std::vector<double> us, qs;
  us.reserve(m);
  qs.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    const InstanceRecord& rec = instances[j * n / m];
    ScoreBundle b = umpire_score(rec.samples, config);
    us.push_back(b.u);
    qs.push_back(b.q);
  }
  AdaptiveAlphaDetail out;
  out.subset_size = m;
  out.median_u = median(us);
  out.median_q = median(qs);
  out.alpha = out.median_q <= 1e-12 ? 0.0
                                    : std::abs(out.median_u) / out.median_q;
  return out;
}

inline double adaptive_alpha(const std::vector<InstanceRecord>& instances,
                             const KernelConfig& config,
                             double subset_fraction) {
  return adaptive_alpha_detail(instances, config, subset_fraction).alpha;
}

// Bounded-difference constant of the score under a single-sample swap:
//   L = alpha + (1/2) ln(1 + 1/eps).
// Feeds the McDiarmid tail bound 2 exp(-2 k eta^2 / L^2).
inline double bounded_difference_constant(const KernelConfig& config) {
  config.validate();
  return config.alpha + 0.5 * std::log1p(1.0 / config.epsilon);
}

}  // namespace umpire
