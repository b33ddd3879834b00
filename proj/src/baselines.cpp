#include "umpire/baselines.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "umpire/linalg.hpp"

namespace umpire {

const std::set<std::string>& known_baselines() {
  static const std::set<std::string> names = {
      "eigenscore",       "ln_entropy", "mean_token_entropy",
      "perplexity",       "seq_prob",   "semantic_entropy_discrete",
  };
  return names;
}

void BaselineSelection::validate() const {
  if (!(eigen_jitter > 0.0))
    throw ValidationError("BaselineSelection: eigen_jitter must be positive");
  for (const auto& name : enabled)
    if (known_baselines().count(name) == 0)
      throw ValidationError("BaselineSelection: unknown baseline '" + name +
                            "'");
}

double ln_entropy(const std::vector<ResponseSample>& samples) {
  if (samples.empty()) throw ValidationError("ln_entropy: no samples");
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!s.token_count_known || s.token_count < 1)
      throw ValidationError("ln_entropy: sample " + std::to_string(i) +
                            " lacks a token count");
    sum += s.seq_logprob / static_cast<double>(s.token_count);
  }
  return -sum / static_cast<double>(samples.size());
}

double eigenscore(const std::vector<ResponseSample>& samples, double jitter) {
  if (!(jitter > 0.0))
    throw ValidationError("eigenscore: jitter must be positive");
  if (samples.size() < 2)
    throw ValidationError("eigenscore: need k >= 2 (covariance undefined)");
  const auto k = static_cast<Eigen::Index>(samples.size());
  const Eigen::Index d = samples.front().embedding.size();
  Eigen::MatrixXd z(k, d);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& e = samples[static_cast<std::size_t>(i)].embedding;
    if (e.size() != d)
      throw StructuralError("eigenscore: sample " + std::to_string(i) +
                            " has dimension " + std::to_string(e.size()) +
                            ", expected " + std::to_string(d));
    z.row(i) = e.transpose();
  }
  z.rowwise() -= z.colwise().mean();
  Eigen::MatrixXd centered_gram =
      (z * z.transpose()) / static_cast<double>(k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(centered_gram);
  if (solver.info() != Eigen::Success)
    throw NumericError("eigenscore: eigendecomposition failed");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    // The centered Gram is PSD; tiny negative eigenvalues are rounding.
    double lambda = std::max(0.0, solver.eigenvalues()(i));
    sum += std::log(lambda + jitter);
  }
  return sum / static_cast<double>(k);
}

double semantic_entropy_discrete(const std::vector<ResponseSample>& samples) {
  if (samples.empty())
    throw ValidationError("semantic_entropy_discrete: no samples");
  std::map<long, long> counts;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].cluster_id)
      throw ValidationError("semantic_entropy_discrete: sample " +
                            std::to_string(i) + " has no cluster_id");
    ++counts[*samples[i].cluster_id];
  }
  const double k = static_cast<double>(samples.size());
  double h = 0.0;
  for (const auto& [cluster, n] : counts) {
    double p = static_cast<double>(n) / k;
    h -= p * std::log(p);
  }
  return h;
}

std::map<std::string, double> single_sample_scores(
    const ResponseSample& greedy,
    const std::optional<std::vector<double>>& token_logprobs) {
  if (greedy.seq_logprob > 0.0)
    throw ValidationError("single_sample_scores: positive seq_logprob");
  std::map<std::string, double> out;
  out["seq_prob"] = -greedy.seq_logprob;
  out["perplexity"] =
      std::exp(-greedy.seq_logprob / static_cast<double>(greedy.token_count));
  if (token_logprobs) {
    if (token_logprobs->empty())
      throw ValidationError("single_sample_scores: empty token_logprobs");
    double sum = 0.0;
    for (double lp : *token_logprobs) sum += lp;
    out["mean_token_entropy"] =
        -sum / static_cast<double>(token_logprobs->size());
  }
  return out;
}

std::map<std::string, std::optional<double>> compute_baselines(
    const InstanceRecord& record, const BaselineSelection& selection,
    std::vector<std::string>* warnings) {
  selection.validate();
  auto warn = [&](const std::string& msg) {
    if (warnings) warnings->push_back(record.id + ": " + msg);
  };
  std::map<std::string, std::optional<double>> out;
  for (const auto& name : selection.enabled) {
    std::optional<double> value;
    if (name == "ln_entropy") {
      bool counted = true;
      for (const auto& s : record.samples)
        if (!s.token_count_known) counted = false;
      if (counted) value = ln_entropy(record.samples);
      else warn("ln_entropy skipped, token counts were defaulted at load");
    } else if (name == "eigenscore") {
      if (record.samples.size() >= 2)
        value = eigenscore(record.samples, selection.eigen_jitter);
      else
        warn("eigenscore skipped, needs at least 2 samples");
    } else if (name == "semantic_entropy_discrete") {
      if (record.cluster_labeled())
        value = semantic_entropy_discrete(record.samples);
      else
        warn("semantic_entropy_discrete skipped, missing cluster ids");
    } else {
      // Single-sample family; all need the greedy response.
      if (!record.greedy) {
        warn(name + " skipped, no greedy response");
        out[name] = std::nullopt;
        continue;
      }
      if (name == "seq_prob") {
        value = -record.greedy->seq_logprob;
      } else if (name == "perplexity") {
        if (record.greedy->token_count_known)
          value = std::exp(-record.greedy->seq_logprob /
                           static_cast<double>(record.greedy->token_count));
        else
          warn("perplexity skipped, greedy token count was defaulted");
      } else if (name == "mean_token_entropy") {
        if (record.greedy->token_logprobs &&
            !record.greedy->token_logprobs->empty()) {
          double sum = 0.0;
          for (double lp : *record.greedy->token_logprobs) sum += lp;
          value = -sum / static_cast<double>(
                             record.greedy->token_logprobs->size());
        } else {
          warn("mean_token_entropy skipped, no per-token log-probs");
        }
      }
    }
    out[name] = value;
  }
  return out;
}

}  // namespace umpire
