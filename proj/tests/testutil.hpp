#pragma once

// Shared generators for randomized tests: instances with unit-row embeddings
// and valid log-probabilities, drawn from the portable Rng so every test run
// sees identical data.

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "umpire/rng.hpp"
#include "umpire/types.hpp"

namespace testutil {

inline std::vector<umpire::ResponseSample> random_samples(
    Eigen::Index k, Eigen::Index d, umpire::Rng& rng, double p_min = 0.05) {
  Eigen::MatrixXd phi = oracles::random_unit_rows(k, d, rng);
  std::vector<umpire::ResponseSample> samples(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    auto& s = samples[static_cast<std::size_t>(i)];
    s.embedding = phi.row(i).transpose();
    double p = p_min + (1.0 - p_min) * rng.uniform();
    s.seq_logprob = std::log(p);
    s.token_count = 1 + static_cast<long>(rng.index(8));
  }
  return samples;
}

inline umpire::InstanceRecord random_instance(Eigen::Index k, Eigen::Index d,
                                              umpire::Rng& rng,
                                              std::string id) {
  umpire::InstanceRecord rec;
  rec.id = std::move(id);
  rec.samples = random_samples(k, d, rng);
  return rec;
}

}  // namespace testutil
