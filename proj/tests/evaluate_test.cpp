#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "umpire/evaluate.hpp"
#include "umpire/rng.hpp"

using namespace umpire;

namespace {

// Quantized scores guarantee ties while keeping values exactly representable,
// so rank-only invariance checks can demand bitwise equality.
std::vector<double> quantized_scores(std::size_t n, Rng& rng) {
  std::vector<double> s(n);
  for (auto& v : s) v = double(rng.index(64)) / 64.0;
  return s;
}

std::vector<int> random_labels(std::size_t n, Rng& rng) {
  std::vector<int> l(n);
  for (auto& v : l) v = rng.uniform() < 0.5 ? 1 : 0;
  return l;
}

// Ensure both classes appear.
void force_both_classes(std::vector<int>& labels) {
  labels.front() = 0;
  labels.back() = 1;
}

}  // namespace

TEST_CASE("auroc: separations, ties, and pairwise oracle equality") {
  CHECK(auroc({0.9, 0.8, 0.2, 0.1}, {0, 0, 1, 1}) == 1.0);
  CHECK(auroc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}) == 0.0);
  CHECK(auroc({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}) == 0.5);
  CHECK(auroc({0.3, 0.7}, {1, 0}) == 1.0);

  Rng rng(501);
  for (int trial = 0; trial < 50; ++trial) {
    auto scores = quantized_scores(200, rng);
    auto labels = random_labels(200, rng);
    force_both_classes(labels);
    CHECK(auroc(scores, labels) == oracles::auroc_pairs(scores, labels));
  }
}

TEST_CASE("auroc: exact invariance under monotone transforms") {
  Rng rng(502);
  auto scores = quantized_scores(150, rng);
  auto labels = random_labels(150, rng);
  force_both_classes(labels);
  const double base = auroc(scores, labels);

  std::vector<double> affine(scores.size()), expd(scores.size()),
      cubed(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    affine[i] = 2.5 * scores[i] + 7.0;
    expd[i] = std::exp(scores[i]);
    cubed[i] = scores[i] * scores[i] * scores[i];
  }
  CHECK(auroc(affine, labels) == base);
  CHECK(auroc(expd, labels) == base);
  CHECK(auroc(cubed, labels) == base);

  std::vector<int> flipped(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) flipped[i] = 1 - labels[i];
  CHECK(std::abs(auroc(scores, flipped) - (1.0 - base)) <= 1e-12);
}

TEST_CASE("auroc: input validation") {
  CHECK_THROWS_AS(auroc({0.1, 0.2}, {0}), ValidationError);
  CHECK_THROWS_AS(auroc({0.1, 0.2}, {0, 0}), ValidationError);
  CHECK_THROWS_AS(auroc({0.1, 0.2}, {0, 2}), ValidationError);
  CHECK_THROWS_AS(auroc({}, {}), ValidationError);
}

TEST_CASE("tpr_at_fpr: closed forms and enumeration oracle") {
  // Perfect separation reaches full TPR within any budget.
  CHECK(tpr_at_fpr({0.9, 0.8, 0.2, 0.1}, {0, 0, 1, 1}, 0.10) == 1.0);
  // An uninformative all-ties score sits on the chance diagonal.
  CHECK(tpr_at_fpr({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}, 0.10) == 0.10);

  Rng rng(503);
  for (int trial = 0; trial < 20; ++trial) {
    auto scores = quantized_scores(100, rng);
    auto labels = random_labels(100, rng);
    force_both_classes(labels);
    for (double level : {0.10, 0.01, 0.5}) {
      CHECK(std::abs(tpr_at_fpr(scores, labels, level) -
                     oracles::tpr_at_fpr_enumerate(scores, labels, level)) <=
            1e-12);
    }
  }

  CHECK_THROWS_AS(tpr_at_fpr({0.1, 0.9}, {1, 0}, 0.0), ValidationError);
  CHECK_THROWS_AS(tpr_at_fpr({0.1, 0.9}, {1, 0}, 1.0), ValidationError);
  CHECK_THROWS_AS(tpr_at_fpr({0.1, 0.9}, {1, 1}, 0.1), ValidationError);
}

TEST_CASE("reliability_curve: bin layout and direct oracle") {
  // Two bins of three: errors 2/3 then 0.
  auto curve = reliability_curve({1, 2, 3, 4, 5, 6}, {0, 1, 0, 1, 1, 1}, 2);
  REQUIRE(curve.bins.size() == 2);
  CHECK(curve.bins[0].v == 3.0);
  CHECK(curve.bins[0].r == 2.0 / 3.0);
  CHECK(curve.bins[0].n == 3);
  CHECK(curve.bins[1].v == 6.0);
  CHECK(curve.bins[1].r == 0.0);
  CHECK(curve.bins[1].n == 3);

  // Remainder goes to the leading bins: 7 points in 3 bins -> 3,2,2.
  auto uneven =
      reliability_curve({1, 2, 3, 4, 5, 6, 7}, {1, 1, 1, 1, 1, 1, 1}, 3);
  REQUIRE(uneven.bins.size() == 3);
  CHECK(uneven.bins[0].n == 3);
  CHECK(uneven.bins[1].n == 2);
  CHECK(uneven.bins[2].n == 2);

  Rng rng(504);
  std::vector<double> scores;
  const auto perm = rng.permutation(500);
  for (auto p : perm) scores.push_back(double(p) / 500.0);
  auto labels = random_labels(500, rng);
  auto got = reliability_curve(scores, labels, 50);
  auto want = oracles::reliability_direct(scores, labels, 50);
  REQUIRE(got.bins.size() == want.size());
  for (std::size_t b = 0; b < want.size(); ++b) {
    CHECK(got.bins[b].v == want[b].v);
    CHECK(got.bins[b].r == want[b].r);
    CHECK(got.bins[b].n == want[b].n);
  }

  CHECK_THROWS_AS(reliability_curve({1, 2}, {1, 1}, 3), ValidationError);
  CHECK_THROWS_AS(reliability_curve({1, 2}, {1, 1}, 0), ValidationError);
}

TEST_CASE("cpc: sign, oracle, and undefined cases") {
  ReliabilityCurve up{{{1.0, 0.2, 5}, {2.0, 0.4, 5}, {3.0, 0.6, 5}}};
  CHECK(std::abs(*cpc(up) - 1.0) <= 1e-15);
  ReliabilityCurve down{{{1.0, 0.6, 5}, {2.0, 0.4, 5}, {3.0, 0.2, 5}}};
  CHECK(std::abs(*cpc(down) + 1.0) <= 1e-15);

  ReliabilityCurve flat{{{1.0, 0.5, 5}, {2.0, 0.5, 5}, {3.0, 0.5, 5}}};
  CHECK_FALSE(cpc(flat).has_value());
  ReliabilityCurve samev{{{1.0, 0.2, 5}, {1.0, 0.4, 5}}};
  CHECK_FALSE(cpc(samev).has_value());
  ReliabilityCurve lone{{{1.0, 0.2, 5}}};
  CHECK_FALSE(cpc(lone).has_value());

  Rng rng(505);
  ReliabilityCurve noisy;
  std::vector<double> v, r;
  for (int b = 0; b < 50; ++b) {
    double vb = double(b) + rng.uniform();
    double rb = rng.uniform();
    noisy.bins.push_back({vb, rb, 10});
    v.push_back(vb);
    r.push_back(rb);
  }
  CHECK(std::abs(*cpc(noisy) - oracles::pearson_direct(v, r)) <= 1e-12);
}

TEST_CASE("ece_minmax: extremes, clamping, oracle, validation") {
  // Scaled scores match the error indicator exactly: zero ECE.
  CHECK(ece_minmax({0.0, 0.0, 0.0, 1.0}, {1, 1, 1, 0},
                   {0.0, 1.0}, 4) == 0.0);
  // One confident-of-error score lands on a correct answer: exactly one of
  // the four singleton bins is off, by 1, so ECE = 1/4.
  CHECK(ece_minmax({0.0, 0.0, 1.0, 1.0}, {1, 1, 1, 0},
                   {0.0, 1.0}, 4) == 0.25);
  // Certain-of-wrong scores, half of them actually right.
  CHECK(ece_minmax({1.0, 1.0}, {1, 0}, {0.0, 1.0}, 2) == 0.5);
  // Clamped out-of-range scores that agree with their labels.
  CHECK(ece_minmax({-5.0, 7.0}, {1, 0}, {0.0, 1.0}, 15) == 0.0);

  Rng rng(506);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> scores, dev;
    const auto perm = rng.permutation(200);
    for (auto p : perm) scores.push_back(double(p) / 200.0);
    for (int i = 0; i < 40; ++i) dev.push_back(rng.uniform());
    auto labels = random_labels(200, rng);
    force_both_classes(labels);
    const double got = ece_minmax(scores, labels, dev, 15);
    CHECK(std::abs(got - oracles::ece_direct(scores, labels, dev, 15)) <=
          1e-12);
    CHECK(got >= 0.0);
    CHECK(got <= 1.0);
  }

  CHECK_THROWS_AS(ece_minmax({0.1, 0.9}, {1, 0}, {0.5, 0.5}, 2),
                  ValidationError);
  CHECK_THROWS_AS(ece_minmax({0.1, 0.9}, {1, 0}, {}, 2), ValidationError);
}

TEST_CASE("aurac: staircases, ties, and direct oracle") {
  // All correct: accuracy 1 at every rejection level.
  CHECK(aurac({0.4, 0.3, 0.2, 0.1}, {1, 1, 1, 1}) == 1.0);

  // Errors carry the highest scores (ideal ranking) and lowest (worst).
  CHECK(std::abs(aurac({4, 3, 2, 1}, {0, 0, 1, 1}) -
                 oracles::aurac_staircase(2, 2, true)) <= 1e-12);
  CHECK(std::abs(aurac({1, 2, 3, 4}, {0, 0, 1, 1}) -
                 oracles::aurac_staircase(2, 2, false)) <= 1e-12);
  CHECK(std::abs(aurac({9, 8, 7, 6, 5, 4, 3, 2, 1, 0},
                       {0, 0, 0, 1, 1, 1, 1, 1, 1, 1}) -
                 oracles::aurac_staircase(3, 7, true)) <= 1e-12);

  // All-ties rejection follows input order (stable sort).
  const double tied = aurac({5, 5, 5, 5}, {1, 0, 1, 0});
  const double expected =
      (0.5 * (0.5 + 1.0 / 3) + 0.5 * (1.0 / 3 + 0.5) + 0.5 * (0.5 + 0.0) +
       0.0) /
      4.0;
  CHECK(std::abs(tied - expected) <= 1e-15);

  Rng rng(507);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> scores;
    const auto perm = rng.permutation(120);
    for (auto p : perm) scores.push_back(double(p));
    auto labels = random_labels(120, rng);
    CHECK(std::abs(aurac(scores, labels) -
                   oracles::aurac_direct(scores, labels)) <= 1e-12);
  }
}

TEST_CASE("pearson_quality: direction and degeneracy") {
  // High uncertainty on low-quality answers: positive correlation.
  CHECK(std::abs(*pearson_quality({1, 2, 3}, {3, 2, 1}) - 1.0) <= 1e-15);
  CHECK(std::abs(*pearson_quality({1, 2, 3}, {1, 2, 3}) + 1.0) <= 1e-15);
  CHECK_FALSE(pearson_quality({1, 2, 3}, {5, 5, 5}).has_value());
  CHECK_THROWS_AS(pearson_quality({1, 2}, {1, 2, 3}), ValidationError);
}

TEST_CASE("combined_score: weighted sum") {
  CHECK(std::abs(combined_score(0.8, 0.5, 0.1, {1, 1, 1}) -
                 (0.8 + 0.5 - 0.1)) <= 1e-15);
  CHECK(std::abs(combined_score(0.8, 0.5, 0.1, {2, 0.5, 3}) -
                 (2 * 0.8 + 0.5 * 0.5 - 3 * 0.1)) <= 1e-15);
}

TEST_CASE("chi-square(1) upper tail: normal-CDF identity") {
  CHECK(chi_square_1_upper_tail(0.0) == 1.0);
  auto phi = [](double t) { return 0.5 * (1.0 + std::erf(t / std::sqrt(2.0))); };
  for (double x : {0.1, 1.0, 3.841458820694124, 10.0}) {
    const double want = 2.0 * (1.0 - phi(std::sqrt(x)));
    CHECK(std::abs(chi_square_1_upper_tail(x) - want) <= 1e-10);
  }
  // The canonical 5% critical value.
  CHECK(std::abs(chi_square_1_upper_tail(3.841458820694124) - 0.05) <= 1e-9);
  CHECK(chi_square_1_upper_tail(50.0) < 1e-10);
  CHECK_THROWS_AS(chi_square_1_upper_tail(-1.0), ValidationError);
}

TEST_CASE("likelihood-ratio test: null cases give a zero statistic") {
  Rng rng(508);
  std::vector<double> q(80), u0(80, 0.0);
  std::vector<int> labels(80);
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] = rng.uniform();
    const double mu = 1.0 / (1.0 + std::exp(-(1.0 - 2.0 * q[i])));
    labels[i] = rng.uniform() < mu ? 1 : 0;
  }
  auto zero_u = lrt_q_vs_qu(q, u0, labels);
  CHECK(zero_u.statistic == 0.0);
  CHECK(zero_u.p_value == 1.0);

  // A duplicated regressor adds nothing either.
  auto duplicated = lrt_q_vs_qu(q, q, labels);
  CHECK(duplicated.statistic >= 0.0);
  CHECK(duplicated.statistic <= 1e-6);
  CHECK(duplicated.p_value >= 1.0 - 1e-3);
}

TEST_CASE("likelihood-ratio test: detects genuine second-regressor signal") {
  Rng rng(509);
  std::vector<double> q(300), u(300);
  std::vector<int> labels(300);
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] = rng.uniform();
    u[i] = rng.normal();
    const double mu = 1.0 / (1.0 + std::exp(-(-1.0 + 2.0 * q[i] + 2.0 * u[i])));
    labels[i] = rng.uniform() < mu ? 1 : 0;
  }
  auto result = lrt_q_vs_qu(q, u, labels);
  CHECK(result.statistic > 3.84);
  CHECK(result.p_value < 0.05);
  CHECK_FALSE(result.separation);
}

TEST_CASE("likelihood-ratio test: statistic stays nonnegative on noise") {
  Rng rng(510);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> q(60), u(60);
    std::vector<int> labels(60);
    for (std::size_t i = 0; i < q.size(); ++i) {
      q[i] = rng.uniform();
      u[i] = rng.normal();
      labels[i] = rng.uniform() < 0.5 ? 1 : 0;
    }
    labels.front() = 0;
    labels.back() = 1;
    auto result = lrt_q_vs_qu(q, u, labels);
    CHECK(result.statistic >= 0.0);
    CHECK(result.p_value >= 0.0);
    CHECK(result.p_value <= 1.0);
  }
}

TEST_CASE("likelihood-ratio test: separation is flagged, not fatal") {
  Rng rng(511);
  std::vector<double> q(40), u(40);
  std::vector<int> labels(40);
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] = rng.uniform();
    u[i] = rng.normal();
    labels[i] = q[i] > 0.5 ? 0 : 1;  // perfectly separable on q
  }
  auto result = lrt_q_vs_qu(q, u, labels);
  CHECK(result.separation);
  CHECK(result.statistic >= 0.0);
  CHECK(result.p_value >= 0.0);
  CHECK(result.p_value <= 1.0);
}

TEST_CASE("likelihood-ratio test: input validation") {
  std::vector<double> q(5, 0.5), u(5, 0.1);
  std::vector<int> labels(5, 1);
  CHECK_THROWS_AS(lrt_q_vs_qu(q, u, labels), ValidationError);

  std::vector<double> q10(10, 0.5), u10(10, 0.1);
  std::vector<int> ones(10, 1);
  CHECK_THROWS_AS(lrt_q_vs_qu(q10, u10, ones), ValidationError);

  std::vector<int> short_labels(9, 1);
  CHECK_THROWS_AS(lrt_q_vs_qu(q10, u10, short_labels), ValidationError);
}

TEST_CASE("evaluate_scores: assembles every component consistently") {
  Rng rng(512);
  const std::size_t n = 200;
  std::vector<double> scores, dev, qualities, q, u;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const double quality_signal = rng.uniform();
    qualities.push_back(quality_signal);
    q.push_back(1.0 - quality_signal);
    u.push_back(rng.normal());
    scores.push_back(1.0 - quality_signal + 0.1 * rng.normal());
    const double mu =
        1.0 / (1.0 + std::exp(-6.0 * (quality_signal - 0.4)));
    labels.push_back(rng.uniform() < mu ? 1 : 0);
  }
  for (int i = 0; i < 30; ++i) dev.push_back(rng.uniform());

  EvalConfig config;
  config.cpc_bins = 10;
  config.ece_bins = 5;
  auto report = evaluate_scores(
      scores, labels, dev, config, qualities,
      std::make_pair(q, u));

  CHECK(report.auroc == auroc(scores, labels));
  CHECK(report.ece == ece_minmax(scores, labels, dev, 5));
  CHECK(report.aurac == aurac(scores, labels));
  REQUIRE(report.tpr_at_fpr.size() == 2);
  CHECK(report.tpr_at_fpr.at(0.10) == tpr_at_fpr(scores, labels, 0.10));
  CHECK(report.tpr_at_fpr.at(0.01) == tpr_at_fpr(scores, labels, 0.01));
  CHECK(report.curve.bins.size() == 10);
  REQUIRE(report.cpc.has_value());
  REQUIRE(report.combined.has_value());
  CHECK(std::abs(*report.combined -
                 (report.auroc + *report.cpc - report.ece)) <= 1e-15);
  CHECK(report.pearson_quality.has_value());
  CHECK(report.lrt.has_value());

  EvalConfig bad = config;
  bad.cpc_bins = 1;
  CHECK_THROWS_AS(evaluate_scores(scores, labels, dev, bad), ValidationError);
  bad = config;
  bad.fpr_levels = {1.5};
  CHECK_THROWS_AS(evaluate_scores(scores, labels, dev, bad), ValidationError);
}
