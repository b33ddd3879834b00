#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "umpire/errors.hpp"
#include "umpire/kernel.hpp"
#include "umpire/types.hpp"

namespace umpire {

struct LoadOptions {
  // Strict loading rejects the whole file on the first bad line; lenient
  // loading skips bad lines and reports how many were dropped.
  bool lenient = false;
};

struct LoadStats {
  long lines = 0;
  long loaded = 0;
  long skipped = 0;        // lenient mode only
  long renormalized = 0;   // embeddings nudged back onto the unit sphere
  std::vector<std::string> warnings;
};

/**
 * Read a line-delimited instance file. Each line is one record:
 *   {"id": ..., "samples": [{"embedding": [...],
 *                            "seq_logprob" | "token_logprobs": ...,
 *                            "token_count"?, "text"?, "cluster_id"?}, ...],
 *    "greedy"?, "label"?, "quality"?}
 * Log-probabilities are natural-log. A sample with only token_logprobs gets
 * seq_logprob as their sum and token_count as their length; a sample with
 * neither count source defaults token_count to 1 and marks it untrusted.
 * Embeddings off unit norm by more than 1e-3 are rejected, smaller
 * deviations renormalized. Errors name the offending line.
 */
Dataset load_instances(const std::string& path,
                       const LoadOptions& options = {},
                       LoadStats* stats = nullptr);

// Write records in the same line-delimited format load_instances reads;
// numbers round-trip exactly.
void write_instances(const Dataset& dataset, const std::string& path);

/**
 * Deterministic seeded shuffle of {0, .., n-1} followed by a split into a
 * dev side of round(fraction * n) indices and an eval side holding the
 * rest, each sorted ascending so downstream output keeps input order.
 * Either side coming out empty is an error.
 */
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double fraction, std::uint64_t seed);

// split_indices applied to a dataset's records.
std::pair<Dataset, Dataset> split_dev(const Dataset& dataset, double fraction,
                                      std::uint64_t seed);

// One scored instance, aligned with its record by id.
struct ScoredRecord {
  std::string id;
  ScoreBundle scores;
};

/**
 * Write the flat score table: header then one row per instance, columns
 * id, v, u, q, the given baseline columns in alphabetical order, label,
 * quality. Floats carry 17 significant digits so a re-read is bit-exact;
 * cells for unavailable values stay empty.
 */
void write_scores(const Dataset& dataset,
                  const std::vector<ScoredRecord>& scored,
                  const std::vector<std::string>& baseline_columns,
                  const std::string& path);

struct ScoreTable {
  std::vector<std::string> columns;  // header order
  std::vector<std::string> ids;
  std::vector<std::map<std::string, double>> cells;  // absent key = empty
  std::vector<std::optional<int>> labels;
  std::vector<std::optional<double>> qualities;

  // Fully populated numeric column; throws naming the first row with an
  // empty cell.
  std::vector<double> column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

ScoreTable read_scores(const std::string& path);

}  // namespace umpire
