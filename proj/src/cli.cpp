#include "umpire/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <utility>

#include "umpire/ingest.hpp"
#include "umpire/parallel.hpp"
#include "umpire/rng.hpp"
#include "umpire/synthetic.hpp"

namespace umpire {

namespace {

using nlohmann::json;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string formatted_id(const char* prefix, long i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s-%04ld", prefix, i);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open output file: " + path);
  out << text;
  if (!out) throw ValidationError("failed writing output file: " + path);
}

std::set<std::string> parse_baseline_list(const std::string& text) {
  std::set<std::string> out;
  if (text.empty() || text == "none") return out;
  std::string cur;
  auto flush = [&]() {
    const auto b = cur.find_first_not_of(" \t");
    if (b == std::string::npos) {
      cur.clear();
      return;
    }
    const auto e = cur.find_last_not_of(" \t");
    out.insert(cur.substr(b, e - b + 1));
    cur.clear();
  };
  for (char c : text) {
    if (c == ',') {
      flush();
    } else {
      cur += c;
    }
  }
  flush();
  return out;
}

json resolved_config_json(const RunConfig& rc) {
  json j;
  j["epsilon"] = rc.epsilon;
  j["alpha"] = rc.alpha;
  j["adaptive"] = rc.adaptive;
  j["fraction"] = rc.fraction;
  j["length_normalized"] = rc.length_normalized;
  j["baselines"] = rc.baselines;
  j["eigen_jitter"] = rc.eigen_jitter;
  j["bins_cpc"] = rc.bins_cpc;
  j["bins_ece"] = rc.bins_ece;
  j["dev_fraction"] = rc.dev_fraction;
  j["fpr"] = rc.fpr;
  j["weights"] = std::vector<double>(rc.weights.begin(), rc.weights.end());
  j["metric_column"] = rc.metric_column;
  j["grid"] = rc.grid;
  j["preset"] = rc.preset;
  j["spec_file"] = rc.spec_file;
  j["n"] = rc.n;
  j["k"] = rc.k;
  j["wrong_fraction"] = rc.wrong_fraction;
  j["seed"] = rc.seed;
  j["workers"] = rc.workers;
  return j;
}

double config_number(const json& v, const std::string& key) {
  if (!v.is_number()) {
    throw ValidationError("config key " + key + " must be a number");
  }
  return v.get<double>();
}

long config_integer(const json& v, const std::string& key) {
  if (!v.is_number_integer()) {
    throw ValidationError("config key " + key + " must be an integer");
  }
  return v.get<long>();
}

bool config_boolean(const json& v, const std::string& key) {
  if (!v.is_boolean()) {
    throw ValidationError("config key " + key + " must be a boolean");
  }
  return v.get<bool>();
}

std::string config_string(const json& v, const std::string& key) {
  if (!v.is_string()) {
    throw ValidationError("config key " + key + " must be a string");
  }
  return v.get<std::string>();
}

std::vector<double> config_number_list(const json& v, const std::string& key) {
  if (!v.is_array()) {
    throw ValidationError("config key " + key + " must be an array of numbers");
  }
  std::vector<double> out;
  for (const auto& e : v) out.push_back(config_number(e, key));
  return out;
}

void set_config_field(const std::string& key, const json& v, RunConfig& rc) {
  if (key == "epsilon") {
    rc.epsilon = config_number(v, key);
  } else if (key == "alpha") {
    rc.alpha = config_number(v, key);
  } else if (key == "adaptive") {
    rc.adaptive = config_boolean(v, key);
  } else if (key == "fraction") {
    rc.fraction = config_number(v, key);
  } else if (key == "length_normalized") {
    rc.length_normalized = config_boolean(v, key);
  } else if (key == "baselines") {
    rc.baselines = config_string(v, key);
  } else if (key == "eigen_jitter") {
    rc.eigen_jitter = config_number(v, key);
  } else if (key == "bins_cpc") {
    rc.bins_cpc = int(config_integer(v, key));
  } else if (key == "bins_ece") {
    rc.bins_ece = int(config_integer(v, key));
  } else if (key == "dev_fraction") {
    rc.dev_fraction = config_number(v, key);
  } else if (key == "fpr") {
    rc.fpr = config_number_list(v, key);
  } else if (key == "weights") {
    const auto w = config_number_list(v, key);
    if (w.size() != 3) {
      throw ValidationError("config key weights must hold three numbers");
    }
    std::copy(w.begin(), w.end(), rc.weights.begin());
  } else if (key == "metric_column") {
    rc.metric_column = config_string(v, key);
  } else if (key == "grid") {
    rc.grid = config_number_list(v, key);
  } else if (key == "preset") {
    rc.preset = config_string(v, key);
  } else if (key == "spec_file") {
    rc.spec_file = config_string(v, key);
  } else if (key == "n") {
    rc.n = config_integer(v, key);
  } else if (key == "k") {
    rc.k = config_integer(v, key);
  } else if (key == "wrong_fraction") {
    rc.wrong_fraction = config_number(v, key);
  } else if (key == "seed") {
    rc.seed = std::uint64_t(config_integer(v, key));
  } else if (key == "workers") {
    const long w = config_integer(v, key);
    if (w < 0) throw ValidationError("config key workers must be >= 0");
    rc.workers = unsigned(w);
  } else {
    throw ValidationError("unknown config key: " + key);
  }
}

std::string flag_for_key(const std::string& key) {
  if (key == "spec_file") return "--spec";
  std::string flag = "--";
  for (char c : key) flag += (c == '_' ? '-' : c);
  return flag;
}

// Config-file values apply only where the command line stayed silent.
void apply_config_file(const json& config, CLI::App* sub, RunConfig& rc) {
  if (!config.is_object()) {
    throw ValidationError("config file must hold a JSON object");
  }
  for (auto it = config.begin(); it != config.end(); ++it) {
    const CLI::Option* opt = sub->get_option_no_throw(flag_for_key(it.key()));
    if (opt != nullptr && opt->count() > 0) continue;
    set_config_field(it.key(), it.value(), rc);
  }
}

struct ScoreRun {
  std::vector<ScoredRecord> rows;
  std::vector<std::string> baseline_columns;
  double alpha_used = 0.0;
  bool adaptive = false;
  AdaptiveAlphaDetail detail;
  std::vector<std::string> warnings;
};

ScoreRun score_dataset(const Dataset& dataset, const RunConfig& rc) {
  ScoreRun run;
  KernelConfig kernel = rc.kernel_config();
  if (rc.adaptive) {
    run.detail = adaptive_alpha_detail(dataset.records, kernel, rc.fraction);
    kernel.alpha = run.detail.alpha;
    run.adaptive = true;
  }
  run.alpha_used = kernel.alpha;
  const BaselineSelection selection = rc.baseline_selection();
  run.baseline_columns.assign(selection.enabled.begin(),
                              selection.enabled.end());
  const std::size_t n = dataset.records.size();
  run.rows.resize(n);
  std::vector<std::vector<std::string>> warnings(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        const InstanceRecord& rec = dataset.records[i];
        ScoreBundle bundle = umpire_score(rec.samples, kernel);
        const auto values = compute_baselines(rec, selection, &warnings[i]);
        for (const auto& [name, value] : values) {
          if (value.has_value()) bundle.baselines[name] = *value;
        }
        run.rows[i] = ScoredRecord{rec.id, std::move(bundle)};
      },
      rc.workers);
  for (auto& w : warnings) {
    run.warnings.insert(run.warnings.end(), w.begin(), w.end());
  }
  return run;
}

json adaptive_detail_json(const AdaptiveAlphaDetail& detail) {
  json j;
  j["alpha"] = detail.alpha;
  j["median_u"] = detail.median_u;
  j["median_q"] = detail.median_q;
  j["subset_size"] = detail.subset_size;
  return j;
}

void do_score(const std::string& input, const std::string& output,
              const RunConfig& rc, const json& resolved) {
  LoadStats stats;
  const Dataset dataset = load_instances(input, {}, &stats);
  const ScoreRun run = score_dataset(dataset, rc);
  write_scores(dataset, run.rows, run.baseline_columns, output);
  json meta;
  meta["command"] = "score";
  meta["input"] = input;
  meta["output"] = output;
  meta["records"] = dataset.records.size();
  meta["alpha_resolved"] = run.alpha_used;
  if (run.adaptive) meta["adaptive_alpha"] = adaptive_detail_json(run.detail);
  meta["config"] = resolved;
  json warnings = json::array();
  for (const auto& w : stats.warnings) warnings.push_back(w);
  for (const auto& w : run.warnings) warnings.push_back(w);
  meta["warnings"] = warnings;
  write_text(output + ".meta.json", meta.dump(2) + "\n");
  std::cout << "scored " << dataset.records.size() << " instance(s) -> "
            << output << "\n";
}

void do_alpha(const std::string& input, const std::string& output,
              const RunConfig& rc, const json& resolved) {
  const Dataset dataset = load_instances(input);
  const AdaptiveAlphaDetail detail =
      adaptive_alpha_detail(dataset.records, rc.kernel_config(), rc.fraction);
  std::cout << "alpha " << format_double(detail.alpha) << "\n"
            << "median_u " << format_double(detail.median_u) << "\n"
            << "median_q " << format_double(detail.median_q) << "\n"
            << "subset_size " << detail.subset_size << "\n";
  if (!output.empty()) {
    json j = adaptive_detail_json(detail);
    j["command"] = "alpha";
    j["input"] = input;
    j["config"] = resolved;
    write_text(output, j.dump(2) + "\n");
  }
}

json report_to_json(const EvalReport& report) {
  json j;
  j["auroc"] = report.auroc;
  json tprs = json::array();
  for (const auto& [level, tpr] : report.tpr_at_fpr) {
    tprs.push_back(json{{"level", level}, {"tpr", tpr}});
  }
  j["tpr_at_fpr"] = tprs;
  j["ece"] = report.ece;
  j["cpc"] = report.cpc.has_value() ? json(*report.cpc) : json();
  j["aurac"] = report.aurac;
  j["pearson_quality"] = report.pearson_quality.has_value()
                             ? json(*report.pearson_quality)
                             : json();
  j["combined"] = report.combined.has_value() ? json(*report.combined) : json();
  json v = json::array(), r = json::array(), n = json::array();
  for (const auto& bin : report.curve.bins) {
    v.push_back(bin.v);
    r.push_back(bin.r);
    n.push_back(bin.n);
  }
  j["curve"] = json{{"v", v}, {"r", r}, {"n", n}};
  if (report.lrt.has_value()) {
    j["lrt"] = json{{"statistic", report.lrt->statistic},
                    {"p_value", report.lrt->p_value},
                    {"separation", report.lrt->separation}};
  } else {
    j["lrt"] = json();
  }
  return j;
}

// Metric values, labels and optional extras carved out of a score table
// along the dev/eval split.
struct TableSlice {
  std::vector<double> eval_scores;
  std::vector<double> dev_scores;
  std::vector<int> labels;
  std::optional<std::vector<double>> qualities;
  std::optional<std::pair<std::vector<double>, std::vector<double>>> q_and_u;
  std::vector<std::string> warnings;
};

TableSlice slice_table(const ScoreTable& table, const RunConfig& rc) {
  const auto [dev_idx, eval_idx] =
      split_indices(table.ids.size(), rc.dev_fraction, rc.seed);
  const std::vector<double> metric = table.column(rc.metric_column);
  TableSlice slice;
  for (std::size_t i : dev_idx) slice.dev_scores.push_back(metric[i]);
  bool all_quality = true;
  std::vector<double> qualities;
  for (std::size_t i : eval_idx) {
    slice.eval_scores.push_back(metric[i]);
    if (!table.labels[i].has_value()) {
      throw ValidationError("row " + table.ids[i] + " lacks a label");
    }
    slice.labels.push_back(*table.labels[i]);
    if (table.qualities[i].has_value()) {
      qualities.push_back(*table.qualities[i]);
    } else {
      all_quality = false;
    }
  }
  if (all_quality && !qualities.empty()) {
    slice.qualities = std::move(qualities);
  } else if (!qualities.empty()) {
    slice.warnings.push_back(
        "quality present on only part of the evaluation split; "
        "correlation skipped");
  }
  if (table.has_column("q") && table.has_column("u")) {
    try {
      const std::vector<double> q = table.column("q");
      const std::vector<double> u = table.column("u");
      std::vector<double> q_eval, u_eval;
      for (std::size_t i : eval_idx) {
        q_eval.push_back(q[i]);
        u_eval.push_back(u[i]);
      }
      slice.q_and_u = std::make_pair(std::move(q_eval), std::move(u_eval));
    } catch (const ValidationError& e) {
      slice.warnings.push_back(std::string("likelihood-ratio test skipped: ") +
                               e.what());
    }
  }
  return slice;
}

void do_evaluate(const std::string& input, const std::string& output,
                 const RunConfig& rc, const json& resolved) {
  const ScoreTable table = read_scores(input);
  TableSlice slice = slice_table(table, rc);
  EvalReport report = evaluate_scores(slice.eval_scores, slice.labels,
                                      slice.dev_scores, rc.eval_config(),
                                      slice.qualities, std::nullopt);
  if (slice.q_and_u.has_value()) {
    try {
      report.lrt =
          lrt_q_vs_qu(slice.q_and_u->first, slice.q_and_u->second,
                      slice.labels);
    } catch (const ValidationError& e) {
      slice.warnings.push_back(std::string("likelihood-ratio test skipped: ") +
                               e.what());
    }
  }
  json j;
  j["command"] = "evaluate";
  j["input"] = input;
  j["metric_column"] = rc.metric_column;
  j["n_dev"] = slice.dev_scores.size();
  j["n_eval"] = slice.eval_scores.size();
  j["report"] = report_to_json(report);
  j["config"] = resolved;
  j["warnings"] = slice.warnings;
  write_text(output, j.dump(2) + "\n");
  std::cout << "auroc=" << report.auroc << " ece=" << report.ece;
  if (report.cpc.has_value()) std::cout << " cpc=" << *report.cpc;
  std::cout << " aurac=" << report.aurac << "\n";
}

void do_sweep(const std::string& input, const std::string& output,
              const RunConfig& rc, const json& resolved) {
  if (rc.grid.empty()) {
    throw ValidationError("sweep needs a nonempty --grid of alpha values");
  }
  const Dataset dataset = load_instances(input);
  const std::size_t n = dataset.records.size();
  if (n == 0) throw ValidationError("sweep needs a nonempty instance file");
  for (const auto& rec : dataset.records) {
    if (!rec.label.has_value()) {
      throw ValidationError("record " + rec.id + " lacks a label");
    }
  }
  const KernelConfig kernel = rc.kernel_config();
  std::vector<double> us(n), qs(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        const ScoreBundle b = umpire_score(dataset.records[i].samples, kernel);
        us[i] = b.u;
        qs[i] = b.q;
      },
      rc.workers);
  const AdaptiveAlphaDetail detail =
      adaptive_alpha_detail(dataset.records, kernel, rc.fraction);
  const auto [dev_idx, eval_idx] = split_indices(n, rc.dev_fraction, rc.seed);
  std::vector<int> labels;
  labels.reserve(eval_idx.size());
  for (std::size_t i : eval_idx) labels.push_back(*dataset.records[i].label);

  std::string csv = "alpha,auroc,ece,cpc,combined,adaptive\n";
  auto emit_row = [&](double alpha, bool adaptive_row) {
    std::vector<double> dev, eval;
    dev.reserve(dev_idx.size());
    eval.reserve(eval_idx.size());
    for (std::size_t i : dev_idx) dev.push_back(us[i] + alpha * qs[i]);
    for (std::size_t i : eval_idx) eval.push_back(us[i] + alpha * qs[i]);
    const double a = auroc(eval, labels);
    const double e = ece_minmax(eval, labels, dev, rc.bins_ece);
    const std::optional<double> c =
        cpc(reliability_curve(eval, labels, rc.bins_cpc));
    csv += format_double(alpha);
    csv += ',';
    csv += format_double(a);
    csv += ',';
    csv += format_double(e);
    csv += ',';
    if (c.has_value()) csv += format_double(*c);
    csv += ',';
    if (c.has_value()) {
      csv += format_double(combined_score(a, *c, e, rc.weights));
    }
    csv += adaptive_row ? ",1\n" : ",0\n";
  };
  for (double alpha : rc.grid) emit_row(alpha, false);
  emit_row(detail.alpha, true);
  write_text(output, csv);
  json meta;
  meta["command"] = "sweep";
  meta["input"] = input;
  meta["output"] = output;
  meta["records"] = n;
  meta["adaptive_alpha"] = adaptive_detail_json(detail);
  meta["config"] = resolved;
  write_text(output + ".meta.json", meta.dump(2) + "\n");
  std::cout << "swept " << rc.grid.size() << " grid point(s) -> " << output
            << "\n";
}

MixtureSpec spec_from_json(const json& j) {
  if (!j.is_object()) {
    throw ValidationError("mixture spec must be a JSON object");
  }
  MixtureSpec spec;
  if (!j.contains("weights")) {
    throw ValidationError("mixture spec lacks weights");
  }
  spec.weights = config_number_list(j.at("weights"), "weights");
  if (!j.contains("mode_directions") || !j.at("mode_directions").is_array()) {
    throw ValidationError("mixture spec lacks a mode_directions array");
  }
  for (const auto& row : j.at("mode_directions")) {
    const auto values = config_number_list(row, "mode_directions");
    Eigen::VectorXd mu(Eigen::Index(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
      mu(Eigen::Index(i)) = values[i];
    }
    spec.mode_directions.push_back(std::move(mu));
  }
  if (j.contains("within_sigma")) {
    spec.within_sigma = config_number(j.at("within_sigma"), "within_sigma");
  }
  if (!j.contains("prob_profiles") || !j.at("prob_profiles").is_array()) {
    throw ValidationError("mixture spec lacks a prob_profiles array");
  }
  for (const auto& pj : j.at("prob_profiles")) {
    if (!pj.is_object() || !pj.contains("probs")) {
      throw ValidationError("each prob_profile needs a probs array");
    }
    DiscreteDist dist;
    dist.probs = config_number_list(pj.at("probs"), "probs");
    if (pj.contains("partition")) {
      const auto cells = config_number_list(pj.at("partition"), "partition");
      std::vector<int> partition;
      for (double c : cells) partition.push_back(int(c));
      dist.partition = std::move(partition);
    }
    spec.prob_profiles.push_back(std::move(dist));
  }
  spec.validate();
  return spec;
}

void do_synth(const std::string& output, const RunConfig& rc,
              const json& resolved) {
  if (rc.n < 1) throw ValidationError("synth needs --n >= 1");
  Dataset dataset;
  json provenance;
  provenance["command"] = "synth";
  provenance["n"] = rc.n;
  provenance["seed"] = rc.seed;
  provenance["generator"] = Rng::generator_id();
  if (!rc.spec_file.empty()) {
    std::ifstream in(rc.spec_file);
    if (!in) throw ValidationError("cannot open spec file: " + rc.spec_file);
    json sj;
    try {
      sj = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ValidationError(std::string("malformed spec file: ") + e.what());
    }
    const MixtureSpec spec = spec_from_json(sj);
    for (long i = 0; i < rc.n; ++i) {
      dataset.records.push_back(
          sample_instance(spec, rc.k, Rng::derive_seed(rc.seed, std::uint64_t(i)),
                          formatted_id("synth", i)));
    }
    dataset.provenance = "synthetic:" + rc.spec_file;
    provenance["spec_file"] = rc.spec_file;
    provenance["spec"] = sj;
    provenance["k"] = rc.k;
  } else if (rc.preset == "planted-benchmark" ||
             rc.preset == "lexical-variance") {
    if (!(rc.wrong_fraction >= 0.0 && rc.wrong_fraction <= 1.0)) {
      throw ValidationError("--wrong-fraction must lie in [0,1]");
    }
    const long n_wrong = std::llround(rc.wrong_fraction * double(rc.n));
    const long n_correct = rc.n - n_wrong;
    dataset.records =
        rc.preset == "planted-benchmark"
            ? planted_benchmark(n_correct, n_wrong, rc.seed)
            : lexical_variance_benchmark(n_correct, n_wrong, rc.seed);
    dataset.provenance = "synthetic:" + rc.preset;
    provenance["preset"] = rc.preset;
    provenance["n_correct"] = n_correct;
    provenance["n_wrong"] = n_wrong;
  } else if (rc.preset == "concentration") {
    const MixtureSpec spec = concentration_specs()[1];
    for (long i = 0; i < rc.n; ++i) {
      dataset.records.push_back(
          sample_instance(spec, rc.k, Rng::derive_seed(rc.seed, std::uint64_t(i)),
                          formatted_id("conc", i)));
    }
    dataset.provenance = "synthetic:concentration";
    provenance["preset"] = rc.preset;
    provenance["k"] = rc.k;
  } else {
    throw ValidationError("unknown preset: " + rc.preset);
  }
  dataset.dim = dataset.records.front().samples.front().embedding.size();
  write_instances(dataset, output);
  provenance["config"] = resolved;
  write_text(output + ".meta.json", provenance.dump(2) + "\n");
  std::cout << "wrote " << dataset.records.size() << " instance(s) -> "
            << output << "\n";
}

void do_compare(const std::string& input_a, const std::string& input_b,
                const std::string& output, const RunConfig& rc,
                const json& resolved) {
  const ScoreTable a = read_scores(input_a);
  const ScoreTable b = read_scores(input_b);
  if (a.ids.size() != b.ids.size()) {
    throw ValidationError("score files differ in row count");
  }
  std::map<std::string, std::size_t> b_index;
  for (std::size_t i = 0; i < b.ids.size(); ++i) b_index[b.ids[i]] = i;
  std::vector<std::size_t> aligned(a.ids.size());
  for (std::size_t i = 0; i < a.ids.size(); ++i) {
    const auto it = b_index.find(a.ids[i]);
    if (it == b_index.end()) {
      throw ValidationError("id " + a.ids[i] + " is missing from " + input_b);
    }
    aligned[i] = it->second;
    if (!a.labels[i].has_value() || !b.labels[it->second].has_value()) {
      throw ValidationError("row " + a.ids[i] + " lacks a label");
    }
    if (*a.labels[i] != *b.labels[it->second]) {
      throw ValidationError("label mismatch on id " + a.ids[i]);
    }
  }
  const std::vector<double> metric_a = a.column(rc.metric_column);
  const std::vector<double> metric_b_raw = b.column(rc.metric_column);
  std::vector<double> metric_b(a.ids.size());
  for (std::size_t i = 0; i < a.ids.size(); ++i) {
    metric_b[i] = metric_b_raw[aligned[i]];
  }
  const auto [dev_idx, eval_idx] =
      split_indices(a.ids.size(), rc.dev_fraction, rc.seed);
  std::vector<int> labels;
  for (std::size_t i : eval_idx) labels.push_back(*a.labels[i]);
  auto headline = [&](const std::vector<double>& metric) {
    std::vector<double> dev, eval;
    for (std::size_t i : dev_idx) dev.push_back(metric[i]);
    for (std::size_t i : eval_idx) eval.push_back(metric[i]);
    const double roc = auroc(eval, labels);
    const double ece = ece_minmax(eval, labels, dev, rc.bins_ece);
    return std::make_pair(roc, ece);
  };
  const auto [auroc_a, ece_a] = headline(metric_a);
  const auto [auroc_b, ece_b] = headline(metric_b);
  json j;
  j["command"] = "compare";
  j["metric_column"] = rc.metric_column;
  j["a"] = json{{"path", input_a}, {"auroc", auroc_a}, {"ece", ece_a}};
  j["b"] = json{{"path", input_b}, {"auroc", auroc_b}, {"ece", ece_b}};
  j["delta"] =
      json{{"auroc", auroc_a - auroc_b}, {"ece", ece_a - ece_b}};
  j["n_dev"] = dev_idx.size();
  j["n_eval"] = eval_idx.size();
  j["config"] = resolved;
  write_text(output, j.dump(2) + "\n");
  std::cout << "delta_auroc=" << (auroc_a - auroc_b)
            << " delta_ece=" << (ece_a - ece_b) << "\n";
}

}  // namespace

KernelConfig RunConfig::kernel_config() const {
  KernelConfig kc;
  kc.epsilon = epsilon;
  kc.alpha = alpha;
  kc.length_normalized = length_normalized;
  kc.validate();
  return kc;
}

EvalConfig RunConfig::eval_config() const {
  EvalConfig ec;
  ec.cpc_bins = bins_cpc;
  ec.ece_bins = bins_ece;
  ec.dev_fraction = dev_fraction;
  ec.fpr_levels = fpr;
  ec.combined_weights = weights;
  ec.rng_seed = seed;
  ec.validate();
  return ec;
}

BaselineSelection RunConfig::baseline_selection() const {
  BaselineSelection selection;
  selection.enabled = parse_baseline_list(baselines);
  selection.eigen_jitter = eigen_jitter;
  selection.validate();
  return selection;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"incoherence-adjusted semantic volume toolkit"};
  app.require_subcommand(1);
  RunConfig rc;
  std::string input, output, input_a, input_b, config_path;
  std::vector<double> weights_flag;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path,
                    "JSON config file (default: $UMPIRE_CONFIG)");
    sub->add_option("--seed", rc.seed, "seed for every random choice");
    sub->add_option("--workers", rc.workers,
                    "worker threads, 0 = hardware concurrency");
  };

  CLI::App* score =
      app.add_subcommand("score", "score an instance file (v, u, q, baselines)");
  score->add_option("--input", input, "instance file")->required();
  score->add_option("--output", output, "score table to write")->required();
  score->add_option("--epsilon", rc.epsilon, "Gram jitter");
  score->add_option("--alpha", rc.alpha, "fixed incoherence weight");
  score->add_flag("--adaptive", rc.adaptive,
                  "derive alpha from an unlabeled subset instead");
  score->add_option("--fraction", rc.fraction, "adaptive subset fraction");
  score->add_flag("--length-normalized", rc.length_normalized,
                  "use per-token normalized sequence probabilities");
  score->add_option("--baselines", rc.baselines,
                    "comma list of baseline scores, or 'none'");
  score->add_option("--eigen-jitter", rc.eigen_jitter,
                    "jitter for the eigenscore baseline");
  add_common(score);

  CLI::App* alpha_cmd = app.add_subcommand(
      "alpha", "print the label-free adaptive alpha for an instance file");
  alpha_cmd->add_option("--input", input, "instance file")->required();
  alpha_cmd->add_option("--output", output, "optional JSON result file");
  alpha_cmd->add_option("--epsilon", rc.epsilon, "Gram jitter");
  alpha_cmd->add_option("--fraction", rc.fraction, "subset fraction");
  alpha_cmd->add_flag("--length-normalized", rc.length_normalized,
                      "use per-token normalized sequence probabilities");
  add_common(alpha_cmd);

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "evaluate one column of a score table");
  evaluate->add_option("--input", input, "score table")->required();
  evaluate->add_option("--output", output, "JSON report to write")->required();
  evaluate->add_option("--metric-column", rc.metric_column,
                       "score column to evaluate");
  evaluate->add_option("--bins-cpc", rc.bins_cpc, "reliability curve bins");
  evaluate->add_option("--bins-ece", rc.bins_ece, "calibration bins");
  evaluate->add_option("--dev-fraction", rc.dev_fraction,
                       "unlabeled dev split fraction");
  evaluate->add_option("--fpr", rc.fpr, "FPR levels for TPR readouts")
      ->delimiter(',');
  evaluate->add_option("--weights", weights_flag,
                       "combined-score weights w1,w2,w3")
      ->delimiter(',');
  add_common(evaluate);

  CLI::App* sweep =
      app.add_subcommand("sweep", "alpha sensitivity table on labeled instances");
  sweep->add_option("--input", input, "labeled instance file")->required();
  sweep->add_option("--output", output, "CSV table to write")->required();
  sweep->add_option("--grid", rc.grid, "alpha grid values")
      ->delimiter(',')
      ->required();
  sweep->add_option("--epsilon", rc.epsilon, "Gram jitter");
  sweep->add_flag("--length-normalized", rc.length_normalized,
                  "use per-token normalized sequence probabilities");
  sweep->add_option("--fraction", rc.fraction, "adaptive subset fraction");
  sweep->add_option("--bins-cpc", rc.bins_cpc, "reliability curve bins");
  sweep->add_option("--bins-ece", rc.bins_ece, "calibration bins");
  sweep->add_option("--dev-fraction", rc.dev_fraction,
                    "unlabeled dev split fraction");
  sweep->add_option("--weights", weights_flag,
                    "combined-score weights w1,w2,w3")
      ->delimiter(',');
  add_common(sweep);

  CLI::App* synth =
      app.add_subcommand("synth", "generate a synthetic instance file");
  synth->add_option("--output", output, "instance file to write")->required();
  synth->add_option("--preset", rc.preset,
                    "planted-benchmark | lexical-variance | concentration");
  synth->add_option("--spec", rc.spec_file,
                    "JSON mixture spec (overrides --preset)");
  synth->add_option("--n", rc.n, "instance count");
  synth->add_option("--k", rc.k, "responses per instance (spec/concentration)");
  synth->add_option("--wrong-fraction", rc.wrong_fraction,
                    "wrong-label share for benchmark presets");
  add_common(synth);

  CLI::App* compare = app.add_subcommand(
      "compare", "AUROC/ECE deltas between two aligned score tables");
  compare->add_option("--input-a", input_a, "first score table")->required();
  compare->add_option("--input-b", input_b, "second score table")->required();
  compare->add_option("--output", output, "JSON delta report")->required();
  compare->add_option("--metric-column", rc.metric_column,
                      "score column to compare");
  compare->add_option("--bins-ece", rc.bins_ece, "calibration bins");
  compare->add_option("--dev-fraction", rc.dev_fraction,
                      "unlabeled dev split fraction");
  add_common(compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (config_path.empty()) {
      const char* env = std::getenv("UMPIRE_CONFIG");
      if (env != nullptr && *env != '\0') config_path = env;
    }
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ValidationError("cannot open config file: " + config_path);
      json config;
      try {
        config = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed config file: ") +
                              e.what());
      }
      apply_config_file(config, sub, rc);
    }
    if (!weights_flag.empty()) {
      if (weights_flag.size() != 3) {
        throw ValidationError("--weights needs exactly three values");
      }
      std::copy(weights_flag.begin(), weights_flag.end(), rc.weights.begin());
    }
    json resolved = resolved_config_json(rc);
    resolved["config_file"] = config_path;

    const std::string name = sub->get_name();
    if (name == "score") {
      do_score(input, output, rc, resolved);
    } else if (name == "alpha") {
      do_alpha(input, output, rc, resolved);
    } else if (name == "evaluate") {
      do_evaluate(input, output, rc, resolved);
    } else if (name == "sweep") {
      do_sweep(input, output, rc, resolved);
    } else if (name == "synth") {
      do_synth(output, rc, resolved);
    } else if (name == "compare") {
      do_compare(input_a, input_b, output, rc, resolved);
    }
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const StructuralError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace umpire
