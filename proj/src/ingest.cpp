#include "umpire/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "umpire/rng.hpp"

namespace umpire {

namespace {

using nlohmann::json;

std::string at_line(long line, const std::string& message) {
  return "line " + std::to_string(line) + ": " + message;
}

double require_finite_number(const json& j, const char* what, long line) {
  if (!j.is_number()) {
    throw StructuralError(at_line(line, std::string(what) + " must be a number"));
  }
  const double x = j.get<double>();
  if (!std::isfinite(x)) {
    throw ValidationError(at_line(line, std::string(what) + " is not finite"));
  }
  return x;
}

ResponseSample parse_sample(const json& j, long line, bool embedding_required,
                            LoadStats& stats) {
  if (!j.is_object()) {
    throw StructuralError(at_line(line, "sample must be an object"));
  }
  ResponseSample s;
  if (j.contains("embedding")) {
    const json& e = j.at("embedding");
    if (!e.is_array() || e.empty()) {
      throw StructuralError(
          at_line(line, "embedding must be a nonempty number array"));
    }
    s.embedding.resize(Eigen::Index(e.size()));
    for (std::size_t i = 0; i < e.size(); ++i) {
      s.embedding(Eigen::Index(i)) =
          require_finite_number(e[i], "embedding entry", line);
    }
    const double norm = s.embedding.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw ValidationError(at_line(line, "embedding norm is not positive"));
    }
    if (std::abs(norm - 1.0) > 1e-3) {
      throw ValidationError(
          at_line(line, "embedding norm deviates from 1 by more than 1e-3"));
    }
    if (norm != 1.0) {
      s.embedding /= norm;
      if (std::abs(norm - 1.0) > 1e-6) ++stats.renormalized;
    }
  } else if (embedding_required) {
    throw StructuralError(at_line(line, "sample lacks an embedding"));
  }

  if (j.contains("token_logprobs")) {
    const json& t = j.at("token_logprobs");
    if (!t.is_array() || t.empty()) {
      throw StructuralError(
          at_line(line, "token_logprobs must be a nonempty number array"));
    }
    std::vector<double> lps;
    lps.reserve(t.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double lp = require_finite_number(t[i], "token logprob", line);
      if (lp > 0.0) {
        throw ValidationError(at_line(line, "token logprob is positive"));
      }
      lps.push_back(lp);
      sum += lp;
    }
    s.token_logprobs = std::move(lps);
    s.seq_logprob = sum;
    s.token_count = long(t.size());
    s.token_count_known = true;
  }
  if (j.contains("seq_logprob")) {
    s.seq_logprob = require_finite_number(j.at("seq_logprob"), "seq_logprob",
                                          line);
    if (s.seq_logprob > 0.0) {
      throw ValidationError(at_line(line, "seq_logprob is positive"));
    }
  } else if (!j.contains("token_logprobs")) {
    throw StructuralError(
        at_line(line, "sample carries neither seq_logprob nor token_logprobs"));
  }
  if (j.contains("token_count")) {
    const json& c = j.at("token_count");
    if (!c.is_number_integer() || c.get<long>() < 1) {
      throw ValidationError(
          at_line(line, "token_count must be a positive integer"));
    }
    if (s.token_logprobs && long(s.token_logprobs->size()) != c.get<long>()) {
      throw ValidationError(
          at_line(line, "token_count disagrees with token_logprobs length"));
    }
    s.token_count = c.get<long>();
    s.token_count_known = true;
  } else if (!j.contains("token_logprobs")) {
    // No count source at all: default to 1 and flag the record so
    // length-normalized scoring knows not to trust it.
    s.token_count = 1;
    s.token_count_known = false;
    stats.warnings.push_back(
        at_line(line, "token_count missing, defaulted to 1 (untrusted)"));
  }
  if (j.contains("text")) {
    if (!j.at("text").is_string()) {
      throw StructuralError(at_line(line, "text must be a string"));
    }
    s.text = j.at("text").get<std::string>();
  }
  if (j.contains("cluster_id")) {
    if (!j.at("cluster_id").is_number_integer()) {
      throw StructuralError(at_line(line, "cluster_id must be an integer"));
    }
    s.cluster_id = j.at("cluster_id").get<long>();
  }
  return s;
}

InstanceRecord parse_record(const std::string& text, long line,
                            LoadStats& stats) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw StructuralError(at_line(line, std::string("malformed record: ") +
                                            e.what()));
  }
  if (!j.is_object()) {
    throw StructuralError(at_line(line, "record must be an object"));
  }
  InstanceRecord r;
  if (!j.contains("id") || !j.at("id").is_string() ||
      j.at("id").get<std::string>().empty()) {
    throw StructuralError(at_line(line, "record needs a nonempty string id"));
  }
  r.id = j.at("id").get<std::string>();
  if (!j.contains("samples") || !j.at("samples").is_array() ||
      j.at("samples").empty()) {
    throw StructuralError(
        at_line(line, "record needs a nonempty samples array"));
  }
  Eigen::Index d = 0;
  for (const json& sj : j.at("samples")) {
    ResponseSample s = parse_sample(sj, line, true, stats);
    if (d == 0) {
      d = s.embedding.size();
    } else if (s.embedding.size() != d) {
      throw StructuralError(
          at_line(line, "samples mix embedding dimensions " +
                            std::to_string(d) + " and " +
                            std::to_string(s.embedding.size())));
    }
    r.samples.push_back(std::move(s));
  }
  if (j.contains("greedy")) {
    ResponseSample g = parse_sample(j.at("greedy"), line, false, stats);
    if (g.embedding.size() != 0 && g.embedding.size() != d) {
      throw StructuralError(
          at_line(line, "greedy embedding dimension differs from samples"));
    }
    r.greedy = std::move(g);
  }
  if (j.contains("label")) {
    const json& l = j.at("label");
    if (!l.is_number_integer() ||
        (l.get<int>() != 0 && l.get<int>() != 1)) {
      throw ValidationError(at_line(line, "label must be 0 or 1"));
    }
    r.label = l.get<int>();
  }
  if (j.contains("quality")) {
    r.quality = require_finite_number(j.at("quality"), "quality", line);
  }
  return r;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// RFC-4180 style quoting, applied only when the field needs it.
std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> csv_split(const std::string& text, long line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      if (!cur.empty()) {
        throw StructuralError(at_line(line, "stray quote in score row"));
      }
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw StructuralError(at_line(line, "unterminated quote"));
  fields.push_back(cur);
  return fields;
}

double parse_strict_double(const std::string& field, long line,
                           const std::string& column) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double x = std::strtod(begin, &end);
  if (end != begin + field.size() || field.empty()) {
    throw StructuralError(
        at_line(line, "column " + column + " holds a non-numeric value"));
  }
  return x;
}

json sample_to_json(const ResponseSample& s) {
  json j = json::object();
  if (s.embedding.size() > 0) {
    json e = json::array();
    for (Eigen::Index i = 0; i < s.embedding.size(); ++i) {
      e.push_back(s.embedding(i));
    }
    j["embedding"] = std::move(e);
  }
  j["seq_logprob"] = s.seq_logprob;
  if (s.token_count_known) j["token_count"] = s.token_count;
  if (s.token_logprobs) j["token_logprobs"] = *s.token_logprobs;
  if (s.text) j["text"] = *s.text;
  if (s.cluster_id) j["cluster_id"] = *s.cluster_id;
  return j;
}

}  // namespace

Dataset load_instances(const std::string& path, const LoadOptions& options,
                       LoadStats* stats_out) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open instance file: " + path);
  Dataset ds;
  ds.provenance = path;
  LoadStats stats;
  std::set<std::string> seen_ids;
  std::string line_text;
  long line = 0;
  while (std::getline(in, line_text)) {
    ++line;
    if (blank(line_text)) continue;
    ++stats.lines;
    try {
      InstanceRecord r = parse_record(line_text, line, stats);
      const Eigen::Index d = r.samples.front().embedding.size();
      if (ds.dim == 0) {
        ds.dim = d;
      } else if (d != ds.dim) {
        throw StructuralError(at_line(
            line, "record dimension " + std::to_string(d) +
                      " differs from dataset dimension " +
                      std::to_string(ds.dim)));
      }
      if (!seen_ids.insert(r.id).second) {
        throw ValidationError(at_line(line, "duplicate id " + r.id));
      }
      ds.records.push_back(std::move(r));
      ++stats.loaded;
    } catch (const std::runtime_error& e) {
      if (!options.lenient) throw;
      ++stats.skipped;
      stats.warnings.push_back(std::string("skipped ") + e.what());
    }
  }
  if (stats.renormalized > 0) {
    stats.warnings.push_back(std::to_string(stats.renormalized) +
                             " embedding(s) renormalized to unit length");
  }
  if (stats_out) *stats_out = std::move(stats);
  return ds;
}

void write_instances(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open output file: " + path);
  for (const auto& r : dataset.records) {
    json j = json::object();
    j["id"] = r.id;
    json samples = json::array();
    for (const auto& s : r.samples) samples.push_back(sample_to_json(s));
    j["samples"] = std::move(samples);
    if (r.greedy) j["greedy"] = sample_to_json(*r.greedy);
    if (r.label) j["label"] = *r.label;
    if (r.quality) j["quality"] = *r.quality;
    out << j.dump() << '\n';
  }
  if (!out) throw ValidationError("failed writing instance file: " + path);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ValidationError("dev fraction must lie in (0,1)");
  }
  if (n == 0) throw ValidationError("cannot split an empty dataset");
  const auto m = std::size_t(std::llround(fraction * double(n)));
  if (m == 0 || m >= n) {
    throw ValidationError("dev fraction leaves one side of the split empty");
  }
  Rng rng(seed);
  std::vector<std::size_t> perm = rng.permutation(n);
  std::vector<std::size_t> dev_idx(perm.begin(), perm.begin() + long(m));
  std::vector<std::size_t> eval_idx(perm.begin() + long(m), perm.end());
  // Keep file order inside each side so downstream output stays stable.
  std::sort(dev_idx.begin(), dev_idx.end());
  std::sort(eval_idx.begin(), eval_idx.end());
  return {std::move(dev_idx), std::move(eval_idx)};
}

std::pair<Dataset, Dataset> split_dev(const Dataset& dataset, double fraction,
                                      std::uint64_t seed) {
  const auto [dev_idx, eval_idx] =
      split_indices(dataset.records.size(), fraction, seed);
  Dataset dev, eval;
  dev.dim = eval.dim = dataset.dim;
  dev.provenance = dataset.provenance + " (dev split)";
  eval.provenance = dataset.provenance + " (eval split)";
  for (std::size_t i : dev_idx) dev.records.push_back(dataset.records[i]);
  for (std::size_t i : eval_idx) eval.records.push_back(dataset.records[i]);
  return {std::move(dev), std::move(eval)};
}

void write_scores(const Dataset& dataset,
                  const std::vector<ScoredRecord>& scored,
                  const std::vector<std::string>& baseline_columns,
                  const std::string& path) {
  if (scored.size() != dataset.records.size()) {
    throw ValidationError("score rows and dataset records differ in count");
  }
  std::vector<std::string> baselines = baseline_columns;
  std::sort(baselines.begin(), baselines.end());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open output file: " + path);
  out << "id,v,u,q";
  for (const auto& b : baselines) out << ',' << csv_escape(b);
  out << ",label,quality\n";
  for (std::size_t i = 0; i < scored.size(); ++i) {
    const InstanceRecord& rec = dataset.records[i];
    const ScoredRecord& row = scored[i];
    if (row.id != rec.id) {
      throw ValidationError("score row " + std::to_string(i) + " has id " +
                            row.id + " but the dataset has " + rec.id);
    }
    out << csv_escape(row.id) << ',' << format_double(row.scores.v) << ','
        << format_double(row.scores.u) << ',' << format_double(row.scores.q);
    for (const auto& b : baselines) {
      out << ',';
      const auto it = row.scores.baselines.find(b);
      if (it != row.scores.baselines.end()) out << format_double(it->second);
    }
    out << ',';
    if (rec.label) out << *rec.label;
    out << ',';
    if (rec.quality) out << format_double(*rec.quality);
    out << '\n';
  }
  if (!out) throw ValidationError("failed writing score file: " + path);
}

bool ScoreTable::has_column(const std::string& name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

std::vector<double> ScoreTable::column(const std::string& name) const {
  if (!has_column(name)) {
    throw ValidationError("score file has no column named " + name);
  }
  std::vector<double> out;
  out.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto it = cells[i].find(name);
    if (it == cells[i].end()) {
      throw ValidationError("row " + ids[i] + " has no value in column " +
                            name);
    }
    out.push_back(it->second);
  }
  return out;
}

ScoreTable read_scores(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open score file: " + path);
  std::string line_text;
  long line = 0;
  ScoreTable table;
  if (!std::getline(in, line_text)) {
    throw StructuralError("score file has no header: " + path);
  }
  ++line;
  table.columns = csv_split(line_text, line);
  if (table.columns.empty() || table.columns.front() != "id") {
    throw StructuralError("score file header must start with id");
  }
  const auto label_pos =
      std::find(table.columns.begin(), table.columns.end(), "label");
  const auto quality_pos =
      std::find(table.columns.begin(), table.columns.end(), "quality");
  while (std::getline(in, line_text)) {
    ++line;
    if (blank(line_text)) continue;
    const auto fields = csv_split(line_text, line);
    if (fields.size() != table.columns.size()) {
      throw StructuralError(at_line(
          line, "row has " + std::to_string(fields.size()) +
                    " fields, header has " +
                    std::to_string(table.columns.size())));
    }
    table.ids.push_back(fields[0]);
    std::map<std::string, double> row;
    std::optional<int> label;
    std::optional<double> quality;
    for (std::size_t c = 1; c < fields.size(); ++c) {
      if (fields[c].empty()) continue;
      const std::string& name = table.columns[c];
      if (label_pos != table.columns.end() &&
          c == std::size_t(label_pos - table.columns.begin())) {
        const double l = parse_strict_double(fields[c], line, name);
        if (l != 0.0 && l != 1.0) {
          throw ValidationError(at_line(line, "label must be 0 or 1"));
        }
        label = int(l);
      } else if (quality_pos != table.columns.end() &&
                 c == std::size_t(quality_pos - table.columns.begin())) {
        quality = parse_strict_double(fields[c], line, name);
      } else {
        row[name] = parse_strict_double(fields[c], line, name);
      }
    }
    table.cells.push_back(std::move(row));
    table.labels.push_back(label);
    table.qualities.push_back(quality);
  }
  return table;
}

}  // namespace umpire
