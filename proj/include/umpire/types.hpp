#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace umpire {

/**
 * One sampled model response: its embedding (unit vector), the natural-log
 * probability the model assigned to the full sequence, and optional
 * per-token detail. token_count_known is false when the count was defaulted
 * at load time because the file carried neither token_count nor per-token
 * log-probs; length-sensitive scores must not trust a defaulted count.
 */
struct ResponseSample {
  Eigen::VectorXd embedding;
  double seq_logprob = 0.0;  // natural log, <= 0
  long token_count = 1;
  bool token_count_known = true;
  std::optional<std::vector<double>> token_logprobs;
  std::optional<std::string> text;
  std::optional<long> cluster_id;
};

// One task instance: k sampled responses plus optional greedy response,
// correctness label (1 = correct) and external quality value.
struct InstanceRecord {
  std::string id;
  std::vector<ResponseSample> samples;
  std::optional<ResponseSample> greedy;
  std::optional<int> label;
  std::optional<double> quality;

  // True when every sample carries a cluster id, i.e. the record can feed
  // the discrete semantic-entropy baseline.
  bool cluster_labeled() const {
    if (samples.empty()) return false;
    for (const auto& s : samples)
      if (!s.cluster_id) return false;
    return true;
  }
};

struct Dataset {
  std::vector<InstanceRecord> records;
  Eigen::Index dim = 0;    // shared embedding dimension d
  std::string provenance;  // free-text source tag
};

}  // namespace umpire
