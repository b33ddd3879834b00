#include "umpire/evaluate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

namespace umpire {

namespace {

void check_scores_labels(const std::vector<double>& scores,
                         const std::vector<int>& labels,
                         bool need_both_classes) {
  if (scores.size() != labels.size()) {
    throw ValidationError("scores and labels differ in length");
  }
  if (scores.empty()) throw ValidationError("empty score list");
  long n_wrong = 0, n_correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw ValidationError("score " + std::to_string(i) + " is not finite");
    }
    if (labels[i] == 0) {
      ++n_wrong;
    } else if (labels[i] == 1) {
      ++n_correct;
    } else {
      throw ValidationError("label " + std::to_string(i) +
                            " is not in {0,1}");
    }
  }
  if (need_both_classes && (n_wrong == 0 || n_correct == 0)) {
    throw ValidationError("both classes must be present");
  }
}

std::vector<std::size_t> sorted_indices_ascending(
    const std::vector<double>& scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  return idx;
}

std::optional<double> pearson(const std::vector<double>& x,
                              const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

// ROC vertices for the "classify positive when score >= threshold" sweep,
// from (0,0) at threshold +inf to (1,1). Positive class is label 0.
std::vector<std::pair<double, double>> roc_vertices(
    const std::vector<double>& scores, const std::vector<int>& labels) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  long total_pos = 0, total_neg = 0;
  for (int l : labels) (l == 0 ? total_pos : total_neg)++;
  std::vector<std::pair<double, double>> vertices;
  vertices.emplace_back(0.0, 0.0);
  long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] == 0 ? tp : fp)++;
      ++j;
    }
    vertices.emplace_back(double(fp) / double(total_neg),
                          double(tp) / double(total_pos));
    i = j;
  }
  return vertices;
}

struct LogisticFit {
  Eigen::VectorXd beta;
  double loglik;
  bool separation;
};

double logistic_loglik(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta) {
  double ll = 0.0;
  const Eigen::VectorXd z = x * beta;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    // log(1 + e^z) computed stably as max(z,0) + log1p(e^{-|z|}).
    ll += y(i) * z(i) -
          (std::max(z(i), 0.0) + std::log1p(std::exp(-std::abs(z(i)))));
  }
  return ll;
}

// Damped Newton ascent of the logistic log-likelihood. Converges on a small
// gradient or on a Newton decrement predicting a log-likelihood gain below
// 1e-10*(1+|ll|); past that point further likelihood movement is below the
// spacing of doubles at |ll|, so iterating cannot improve the fitted value
// and the gradient alone may never cross its tolerance. Flags separation
// once any coefficient passes |30|, and throws NumericError if 100
// iterations pass without a verdict.
LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         Eigen::VectorXd beta) {
  const double grad_tol = 1e-8;
  const double beta_cap = 30.0;
  const int max_iter = 100;
  double ll = logistic_loglik(x, y, beta);
  for (int iter = 0; iter < max_iter; ++iter) {
    const Eigen::VectorXd z = x * beta;
    Eigen::VectorXd mu(z.size());
    Eigen::VectorXd w(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      mu(i) = 1.0 / (1.0 + std::exp(-z(i)));
      w(i) = mu(i) * (1.0 - mu(i));
    }
    const Eigen::VectorXd grad = x.transpose() * (y - mu);
    if (grad.norm() <= grad_tol) return {beta, ll, false};
    Eigen::MatrixXd hess = x.transpose() * w.asDiagonal() * x;
    // Tiny ridge keeps the solve defined when columns are collinear or
    // constant; the zero-gradient directions then take a zero step.
    hess.diagonal().array() += 1e-12 * (hess.trace() + 1.0);
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    if (!step.allFinite()) throw NumericError("logistic fit: singular step");
    if (grad.dot(step) <= 1e-10 * (1.0 + std::abs(ll)))
      return {beta, ll, false};
    double t = 1.0;
    bool moved = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      const Eigen::VectorXd candidate = beta + t * step;
      const double candidate_ll = logistic_loglik(x, y, candidate);
      if (candidate_ll >= ll) {
        beta = candidate;
        ll = candidate_ll;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      throw NumericError("logistic fit: line search failed to improve");
    }
    if (beta.cwiseAbs().maxCoeff() > beta_cap) return {beta, ll, true};
  }
  throw NumericError("logistic fit did not converge in 100 iterations");
}

}  // namespace

void EvalConfig::validate() const {
  if (cpc_bins < 2) throw ValidationError("cpc_bins must be >= 2");
  if (ece_bins < 1) throw ValidationError("ece_bins must be >= 1");
  if (!(dev_fraction > 0.0 && dev_fraction < 1.0)) {
    throw ValidationError("dev_fraction must lie in (0,1)");
  }
  for (double level : fpr_levels) {
    if (!(level > 0.0 && level < 1.0)) {
      throw ValidationError("fpr level must lie in (0,1)");
    }
  }
  for (double w : combined_weights) {
    if (!(w >= 0.0)) {
      throw ValidationError("combined weights must be nonnegative");
    }
  }
}

double auroc(const std::vector<double>& scores,
             const std::vector<int>& labels) {
  check_scores_labels(scores, labels, true);
  const auto idx = sorted_indices_ascending(scores);
  long total_pos = 0, total_neg = 0;
  for (int l : labels) (l == 0 ? total_pos : total_neg)++;
  // Walk tie groups in ascending score order; every increment below is a
  // multiple of 1/2, so the accumulated numerator is exact and matches a
  // pairwise count bit for bit.
  double acc = 0.0;
  long neg_below = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    long pos_here = 0, neg_here = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] == 0 ? pos_here : neg_here)++;
      ++j;
    }
    acc += double(pos_here) * double(neg_below) +
           0.5 * double(pos_here) * double(neg_here);
    neg_below += neg_here;
    i = j;
  }
  return acc / (double(total_pos) * double(total_neg));
}

double tpr_at_fpr(const std::vector<double>& scores,
                  const std::vector<int>& labels, double level) {
  check_scores_labels(scores, labels, true);
  if (!(level > 0.0 && level < 1.0)) {
    throw ValidationError("fpr level must lie in (0,1)");
  }
  const auto vertices = roc_vertices(scores, labels);
  // Vertices are nondecreasing in both coordinates; randomized thresholds
  // make every point on the segments between them achievable.
  double best = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (vertices[i].first <= level) {
      best = std::max(best, vertices[i].second);
    } else {
      const auto& lo = vertices[i - 1];
      const auto& hi = vertices[i];
      const double t = (level - lo.first) / (hi.first - lo.first);
      best = std::max(best, lo.second + t * (hi.second - lo.second));
      break;
    }
  }
  return best;
}

ReliabilityCurve reliability_curve(const std::vector<double>& scores,
                                   const std::vector<int>& labels, int bins) {
  check_scores_labels(scores, labels, false);
  if (bins < 1) throw ValidationError("bin count must be >= 1");
  const long n = long(scores.size());
  if (n < bins) {
    throw ValidationError("dataset smaller than requested bin count");
  }
  const auto idx = sorted_indices_ascending(scores);
  const long base = n / bins;
  const long rem = n % bins;
  ReliabilityCurve curve;
  std::size_t cursor = 0;
  for (long b = 0; b < bins; ++b) {
    const long size = base + (b < rem ? 1 : 0);
    double vmax = scores[idx[cursor]];
    long wrong = 0;
    for (long t = 0; t < size; ++t) {
      const std::size_t k = idx[cursor + std::size_t(t)];
      vmax = std::max(vmax, scores[k]);
      if (labels[k] == 0) ++wrong;
    }
    curve.bins.push_back({vmax, double(wrong) / double(size), size});
    cursor += std::size_t(size);
  }
  return curve;
}

std::optional<double> cpc(const ReliabilityCurve& curve) {
  std::vector<double> v, r;
  v.reserve(curve.bins.size());
  r.reserve(curve.bins.size());
  for (const auto& bin : curve.bins) {
    v.push_back(bin.v);
    r.push_back(bin.r);
  }
  return pearson(v, r);
}

double ece_minmax(const std::vector<double>& scores,
                  const std::vector<int>& labels,
                  const std::vector<double>& dev_scores, int bins) {
  check_scores_labels(scores, labels, true);
  if (bins < 1) throw ValidationError("bin count must be >= 1");
  if (dev_scores.empty()) throw ValidationError("empty dev score list");
  double mn = dev_scores[0], mx = dev_scores[0];
  for (double s : dev_scores) {
    if (!std::isfinite(s)) throw ValidationError("dev score is not finite");
    mn = std::min(mn, s);
    mx = std::max(mx, s);
  }
  if (mx == mn) {
    throw ValidationError("degenerate dev set: all scores equal");
  }
  std::vector<double> scaled(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scaled[i] = std::clamp((scores[i] - mn) / (mx - mn), 0.0, 1.0);
  }
  const auto idx = sorted_indices_ascending(scaled);
  const long n = long(scores.size());
  const long base = n / bins;
  const long rem = n % bins;
  double ece = 0.0;
  std::size_t cursor = 0;
  for (long b = 0; b < bins; ++b) {
    const long size = base + (b < rem ? 1 : 0);
    if (size == 0) continue;
    double sum_scaled = 0.0;
    long wrong = 0;
    for (long t = 0; t < size; ++t) {
      const std::size_t k = idx[cursor + std::size_t(t)];
      sum_scaled += scaled[k];
      if (labels[k] == 0) ++wrong;
    }
    const double err = double(wrong) / double(size);
    const double conf = sum_scaled / double(size);
    ece += (double(size) / double(n)) * std::abs(err - conf);
    cursor += std::size_t(size);
  }
  return ece;
}

double aurac(const std::vector<double>& scores,
             const std::vector<int>& labels) {
  check_scores_labels(scores, labels, false);
  const long n = long(scores.size());
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  long correct_total = 0;
  for (int l : labels) correct_total += (l == 1);
  // acc[m]: accuracy after rejecting the m highest-score instances.
  std::vector<double> acc(idx.size());
  long correct_rejected = 0;
  for (long m = 0; m < n; ++m) {
    acc[std::size_t(m)] =
        double(correct_total - correct_rejected) / double(n - m);
    correct_rejected += (labels[idx[std::size_t(m)]] == 1);
  }
  // Accuracy at full rejection is pinned to the last retained-set value,
  // then the trapezoid rule runs over the n+1 equally spaced levels.
  double area = 0.0;
  for (long m = 0; m + 1 < n; ++m) {
    area += 0.5 * (acc[std::size_t(m)] + acc[std::size_t(m + 1)]);
  }
  area += acc[std::size_t(n - 1)];
  return area / double(n);
}

std::optional<double> pearson_quality(const std::vector<double>& scores,
                                      const std::vector<double>& qualities) {
  if (scores.size() != qualities.size()) {
    throw ValidationError("scores and qualities differ in length");
  }
  std::vector<double> neg(qualities.size());
  for (std::size_t i = 0; i < qualities.size(); ++i) {
    if (!std::isfinite(scores[i]) || !std::isfinite(qualities[i])) {
      throw ValidationError("non-finite value in quality correlation");
    }
    neg[i] = -qualities[i];
  }
  return pearson(scores, neg);
}

double combined_score(double auroc_value, double cpc_value, double ece_value,
                      const std::array<double, 3>& weights) {
  return weights[0] * auroc_value + weights[1] * cpc_value -
         weights[2] * ece_value;
}

double chi_square_1_upper_tail(double x) {
  if (!(x >= 0.0)) {
    if (x > -1e-9) {
      x = 0.0;  // tolerate roundoff from a clamped test statistic
    } else {
      throw ValidationError("chi-square tail requires x >= 0");
    }
  }
  return std::erfc(std::sqrt(x / 2.0));
}

LrtResult lrt_q_vs_qu(const std::vector<double>& q_values,
                      const std::vector<double>& u_values,
                      const std::vector<int>& labels) {
  const std::size_t n = q_values.size();
  if (u_values.size() != n || labels.size() != n) {
    throw ValidationError("q, u, and labels differ in length");
  }
  if (n < 10) throw ValidationError("likelihood-ratio test needs >= 10 points");
  long n_wrong = 0, n_correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(q_values[i]) || !std::isfinite(u_values[i])) {
      throw ValidationError("non-finite regressor in likelihood-ratio test");
    }
    if (labels[i] == 0) {
      ++n_wrong;
    } else if (labels[i] == 1) {
      ++n_correct;
    } else {
      throw ValidationError("label " + std::to_string(i) +
                            " is not in {0,1}");
    }
  }
  if (n_wrong == 0 || n_correct == 0) {
    throw ValidationError("both classes must be present");
  }
  const auto rows = Eigen::Index(n);
  Eigen::VectorXd y(rows);
  Eigen::MatrixXd x_restricted(rows, 2);
  Eigen::MatrixXd x_full(rows, 3);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = Eigen::Index(i);
    y(row) = double(labels[i]);
    x_restricted(row, 0) = 1.0;
    x_restricted(row, 1) = q_values[i];
    x_full(row, 0) = 1.0;
    x_full(row, 1) = q_values[i];
    x_full(row, 2) = u_values[i];
  }
  const LogisticFit restricted =
      fit_logistic(x_restricted, y, Eigen::VectorXd::Zero(2));
  // Warm-starting the full fit at the restricted optimum plus a zero
  // coefficient keeps the ascent monotone, so the statistic is nonnegative
  // up to roundoff by construction.
  Eigen::VectorXd start = Eigen::VectorXd::Zero(3);
  start.head(2) = restricted.beta;
  const LogisticFit full = fit_logistic(x_full, y, start);
  LrtResult result;
  result.statistic = std::max(0.0, -2.0 * (restricted.loglik - full.loglik));
  result.p_value = chi_square_1_upper_tail(result.statistic);
  result.separation = restricted.separation || full.separation;
  return result;
}

EvalReport evaluate_scores(
    const std::vector<double>& scores, const std::vector<int>& labels,
    const std::vector<double>& dev_scores, const EvalConfig& config,
    const std::optional<std::vector<double>>& qualities,
    const std::optional<std::pair<std::vector<double>, std::vector<double>>>&
        q_and_u) {
  config.validate();
  EvalReport report;
  report.auroc = auroc(scores, labels);
  for (double level : config.fpr_levels) {
    report.tpr_at_fpr[level] = tpr_at_fpr(scores, labels, level);
  }
  report.curve = reliability_curve(scores, labels, config.cpc_bins);
  report.cpc = cpc(report.curve);
  report.ece = ece_minmax(scores, labels, dev_scores, config.ece_bins);
  report.aurac = aurac(scores, labels);
  if (qualities.has_value()) {
    report.pearson_quality = pearson_quality(scores, *qualities);
  }
  if (report.cpc.has_value()) {
    report.combined = combined_score(report.auroc, *report.cpc, report.ece,
                                     config.combined_weights);
  }
  if (q_and_u.has_value()) {
    report.lrt = lrt_q_vs_qu(q_and_u->first, q_and_u->second, labels);
  }
  return report;
}

}  // namespace umpire
