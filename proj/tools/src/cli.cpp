#include "emfend/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "emfend/corpus/jsonl.hpp"
#include "emfend/corpus/split.hpp"
#include "emfend/corpus/text.hpp"
#include "emfend/error.hpp"
#include "emfend/eval/metrics.hpp"
#include "emfend/model/checkpoint.hpp"
#include "emfend/model/gradcheck_suite.hpp"
#include "emfend/model/train.hpp"
#include "emfend/synthetic/generator.hpp"
#include "json.hpp"

namespace emfend::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream bytes;
  bytes << in.rdbuf();
  return bytes.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw DataError("cannot create directory '" + dir + "': " + ec.message());
  return p;
}

std::vector<corpus::NewsPost> load_posts(const std::string& path, const model::ModelConfig& config) {
  corpus::ParseOptions options;
  options.region_count = config.n_regions;
  options.visual_width = config.d_visual;
  return corpus::read_dataset(path, options);
}

struct SplitData {
  std::vector<corpus::NewsPost> train;
  std::vector<corpus::NewsPost> validation;
  std::vector<corpus::NewsPost> test;
  std::uint64_t seed = 0;
};

SplitData apply_split(const std::vector<corpus::NewsPost>& posts, const std::string& split_path) {
  const corpus::SplitAssignment assignment = corpus::read_split(split_path);
  for (const auto& p : posts) {
    if (!assignment.by_id.count(p.id)) {
      throw DataError("split file has no assignment for post '" + p.id + "'");
    }
  }
  SplitData s;
  s.train = assignment.select(posts, corpus::Split::train);
  s.validation = assignment.select(posts, corpus::Split::validation);
  s.test = assignment.select(posts, corpus::Split::test);
  const auto j = nlohmann::json::parse(read_bytes(split_path), nullptr, false);
  if (j.is_object() && j.contains("seed") && j["seed"].is_number_unsigned()) {
    s.seed = j["seed"].get<std::uint64_t>();
  }
  return s;
}

struct Args {
  std::string data;
  std::string split;
  std::string config;
  std::string out;
  std::string checkpoint;
  std::string kind = "entity-mismatch";
  std::string subset = "test";
  std::vector<std::string> variants;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> clusters;
  std::size_t n = 1000;
  std::size_t d_visual = 16;
  double noise = 0.0;
  bool no_clamp = false;
  bool consistency_gradient = false;
};

model::ModelConfig load_config(const Args& a) {
  model::ModelConfig config = a.config.empty() ? model::ModelConfig{} : model::read_config(a.config);
  if (a.seed) config.seed = *a.seed;
  if (a.no_clamp) config.clamp_consistency = false;
  if (a.consistency_gradient) config.consistency_gradient = true;
  config.validate();
  return config;
}

struct Manifest {
  ordered_json json;
  std::string run_id;
};

// Content-addressed description of a run: reruns with the same inputs and
// config produce the same manifest.
Manifest make_manifest(const std::string& command, const model::ModelConfig& config,
                       const std::string& data, const std::string& split, std::uint64_t split_seed) {
  const std::string data_hash = hex64(corpus::fnv1a64(read_bytes(data)));
  const std::string split_hash = hex64(corpus::fnv1a64(read_bytes(split)));
  const std::string config_json = model::to_json(config, -1);
  Manifest m;
  m.run_id = hex64(corpus::fnv1a64(command + "\n" + config_json + "\n" + data_hash + "\n" + split_hash));
  m.json["version"] = 1;
  m.json["command"] = command;
  m.json["run_id"] = m.run_id;
  m.json["data"] = {{"file", fs::path(data).filename().string()}, {"fnv1a64", data_hash}};
  m.json["split"] = {{"file", fs::path(split).filename().string()},
                     {"fnv1a64", split_hash},
                     {"seed", split_seed}};
  m.json["config"] = ordered_json::parse(config_json);
  return m;
}

void print_epoch(std::ostream& out, const model::EpochRecord& e) {
  char line[128];
  std::snprintf(line, sizeof line, "epoch %3zu  train_loss %.4f  val_acc %.4f  val_f1 %.4f\n",
                e.epoch, e.train_loss, e.validation.accuracy, e.validation.f1);
  out << line << std::flush;
}

ordered_json metrics_object(const eval::Metrics& m) { return ordered_json::parse(eval::metrics_json(m)); }

std::vector<int> labels_of(const std::vector<corpus::NewsPost>& posts) {
  std::vector<int> y;
  for (const auto& p : posts) y.push_back(p.label);
  return y;
}


int run_split(const Args& a, std::ostream& out) {
  corpus::ParseOptions options;
  const auto posts = corpus::read_dataset(a.data, options);
  corpus::EventSplitOptions split_options;
  split_options.clusters = a.clusters;
  const std::uint64_t seed = a.seed.value_or(0);
  const corpus::SplitAssignment s = corpus::event_split(posts, {}, seed, split_options);
  corpus::write_split(a.out, s, seed);
  const auto c = s.counts();
  out << "train " << c[0] << "  validation " << c[1] << "  test " << c[2] << "\n";
  return kOk;
}

int run_train(const Args& a, std::ostream& out) {
  const model::ModelConfig config = load_config(a);
  const auto posts = load_posts(a.data, config);
  const SplitData s = apply_split(posts, a.split);
  const fs::path dir = prepare_dir(a.out);

  Manifest manifest = make_manifest("train", config, a.data, a.split, s.seed);
  manifest.json["outputs"] = {{"config", "config.json"},   {"checkpoint", "checkpoint.bin"},
                              {"history", "history.csv"}, {"metrics", "metrics.json"}};
  write_text(dir / "manifest.json", manifest.json.dump(2) + "\n");
  model::write_config((dir / "config.json").string(), config);
  out << "run " << manifest.run_id << ": " << s.train.size() << " train, " << s.validation.size()
      << " validation, " << s.test.size() << " test\n";

  model::EmFend m(config);
  model::FitOptions options;
  options.on_epoch = [&](const model::EpochRecord& e) { print_epoch(out, e); };
  const model::History history = model::fit(m, s.train, s.validation, options);

  model::save_checkpoint((dir / "checkpoint.bin").string(), m);
  std::ostringstream csv;
  model::write_history_csv(csv, history);
  write_text(dir / "history.csv", csv.str());

  ordered_json metrics;
  metrics["best_epoch"] = history.best_epoch;
  metrics["stopped_early"] = history.stopped_early;
  if (!s.validation.empty()) metrics["validation"] = metrics_object(model::evaluate(m, s.validation));
  if (!s.test.empty()) {
    const eval::Metrics test = model::evaluate(m, s.test);
    metrics["test"] = metrics_object(test);
    out << "test\n";
    eval::write_metrics_table(out, test);
  }
  write_text(dir / "metrics.json", metrics.dump(2) + "\n");
  return kOk;
}

int run_evaluate(const Args& a, std::ostream& out) {
  const auto m = model::load_checkpoint(a.checkpoint);
  auto posts = load_posts(a.data, m->config());
  if (!a.split.empty()) {
    const SplitData s = apply_split(posts, a.split);
    const auto which = corpus::parse_split(a.subset);
    if (!which) throw std::invalid_argument("--subset must be train, validation or test");
    posts = *which == corpus::Split::train ? s.train
            : *which == corpus::Split::validation ? s.validation
                                                  : s.test;
  }
  if (posts.empty()) throw DataError("no posts to evaluate");
  const auto predictions = model::predict_all(*m, posts);
  const std::vector<int> labels = labels_of(posts);
  const eval::Metrics metrics = eval::confusion_metrics(predictions, labels);
  eval::write_metrics_table(out, metrics);

  ordered_json report = metrics_object(metrics);
  std::vector<double> scores;
  for (const auto& p : predictions) scores.push_back(p.p_fake);
  const bool both = std::count(labels.begin(), labels.end(), 1) > 0 &&
                    std::count(labels.begin(), labels.end(), 0) > 0;
  std::vector<eval::RocPoint> roc;
  if (both) {
    roc = eval::roc_curve(scores, labels);
    const double area = eval::auc(roc);
    report["auc"] = area;
    char line[64];
    std::snprintf(line, sizeof line, "%-10s %8.4f\n", "auc", area);
    out << line;
  } else {
    out << "auc        n/a (single class)\n";
  }
  if (!a.out.empty()) {
    const fs::path dir = prepare_dir(a.out);
    write_text(dir / "metrics.json", report.dump(2) + "\n");
    if (both) {
      std::ostringstream csv;
      eval::write_roc_csv(csv, roc);
      write_text(dir / "roc.csv", csv.str());
    }
  }
  return kOk;
}

int run_predict(const Args& a, std::ostream& out) {
  const auto m = model::load_checkpoint(a.checkpoint);
  const auto posts = load_posts(a.data, m->config());
  std::ostringstream lines;
  for (const auto& p : model::predict_all(*m, posts)) {
    ordered_json j;
    j["id"] = p.id;
    j["p_real"] = p.p_real;
    j["p_fake"] = p.p_fake;
    j["label_pred"] = p.label();
    lines << j.dump() << "\n";
  }
  if (a.out.empty()) {
    out << lines.str();
  } else {
    write_text(a.out, lines.str());
    out << "wrote " << posts.size() << " predictions to " << a.out << "\n";
  }
  return kOk;
}

int run_ablate(const Args& a, std::ostream& out) {
  const model::ModelConfig base = load_config(a);
  std::vector<std::string> variants{"EM-FEND"};
  const auto& names = model::ablation_names();
  if (a.variants.empty()) {
    variants.insert(variants.end(), names.begin(), names.end());
  } else {
    for (const auto& v : a.variants) {
      model::apply_ablation(base, v);
      variants.push_back(v);
    }
  }

  const auto posts = load_posts(a.data, base);
  const SplitData s = apply_split(posts, a.split);
  const auto& scored = s.test.empty() ? s.validation : s.test;
  if (scored.empty()) throw DataError("split has neither test nor validation posts");

  std::optional<fs::path> dir;
  if (!a.out.empty()) {
    dir = prepare_dir(a.out);
    Manifest manifest = make_manifest("ablate", base, a.data, a.split, s.seed);
    manifest.json["variants"] = variants;
    manifest.json["outputs"] = {{"table", "ablation.csv"}, {"metrics", "ablation.json"}};
    write_text(*dir / "manifest.json", manifest.json.dump(2) + "\n");
  }

  char line[160];
  std::snprintf(line, sizeof line, "%-24s %7s %7s %7s %7s\n", "variant", "Acc", "Prec", "Recall", "F1");
  std::string table = line;
  std::string csv = "variant,accuracy,precision,recall,f1\n";
  ordered_json results = ordered_json::array();
  for (const auto& v : variants) {
    const model::ModelConfig config = v == "EM-FEND" ? base : model::apply_ablation(base, v);
    model::EmFend m(config);
    model::fit(m, s.train, s.validation);
    const eval::Metrics r = model::evaluate(m, scored);
    std::snprintf(line, sizeof line, "%-24s %7.4f %7.4f %7.4f %7.4f\n", v.c_str(), r.accuracy,
                  r.precision, r.recall, r.f1);
    table += line;
    out << line << std::flush;
    std::snprintf(line, sizeof line, "%s,%.17g,%.17g,%.17g,%.17g\n", v.c_str(), r.accuracy,
                  r.precision, r.recall, r.f1);
    csv += line;
    ordered_json entry;
    entry["variant"] = v;
    entry["metrics"] = metrics_object(r);
    results.push_back(entry);
  }
  out << "\n" << table;
  if (dir) {
    write_text(*dir / "ablation.csv", csv);
    write_text(*dir / "ablation.json", results.dump(2) + "\n");
  }
  return kOk;
}

int run_gradcheck(const Args& a, std::ostream& out) {
  model::ModelConfig config = model::toy_gradcheck_config();
  if (a.seed) config.seed = *a.seed;
  const numerics::GradCheckReport report = model::run_gradcheck_suite(config);
  report.print(out);
  char line[128];
  std::snprintf(line, sizeof line, "%zu parameters, worst relative error %.3e (tolerance %.0e): %s\n",
                report.entries.size(), report.worst_error(), report.tolerance,
                report.all_passed() ? "PASS" : "FAIL");
  out << line;
  return report.all_passed() ? kOk : kInternalError;
}

int run_synth(const Args& a, std::ostream& out) {
  synthetic::Options options;
  options.kind = synthetic::parse_kind(a.kind);
  options.n = a.n;
  options.seed = a.seed.value_or(0);
  options.visual_width = a.d_visual;
  options.noise = a.noise;
  const auto posts = synthetic::generate(options);
  corpus::write_dataset(a.out, posts);
  out << "wrote " << posts.size() << " " << a.kind << " posts to " << a.out << "\n";
  return kOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multimodal fake news detection with entity-aware co-attention fusion", "emfend"};
  app.require_subcommand(1);
  Args a;

  auto* split = app.add_subcommand("split", "Event-disjoint train/validation/test split of a dataset");
  split->add_option("--data", a.data, "Dataset JSONL")->required();
  split->add_option("--out", a.out, "Split file to write")->required();
  split->add_option("--seed", a.seed, "Clustering and assignment seed");
  split->add_option("--clusters", a.clusters, "Number of K-means event clusters");

  auto* train = app.add_subcommand("train", "Train a model and write a run directory");
  train->add_option("--data", a.data, "Dataset JSONL")->required();
  train->add_option("--split", a.split, "Split file")->required();
  train->add_option("--config", a.config, "Model config JSON (defaults when omitted)");
  train->add_option("--out", a.out, "Run directory")->required();
  train->add_option("--seed", a.seed, "Override the config seed");
  train->add_flag("--no-clamp", a.no_clamp, "Leave consistency features unclamped");
  train->add_flag("--consistency-gradient", a.consistency_gradient,
                  "Back-propagate through the consistency features");

  auto* evaluate = app.add_subcommand("evaluate", "Metrics and ROC of a checkpoint");
  evaluate->add_option("--checkpoint", a.checkpoint, "Checkpoint file")->required();
  evaluate->add_option("--data", a.data, "Dataset JSONL")->required();
  evaluate->add_option("--split", a.split, "Split file; restricts to --subset");
  evaluate->add_option("--subset", a.subset, "train, validation or test");
  evaluate->add_option("--out", a.out, "Directory for metrics.json and roc.csv");

  auto* predict = app.add_subcommand("predict", "Per-post class probabilities as JSONL");
  predict->add_option("--checkpoint", a.checkpoint, "Checkpoint file")->required();
  predict->add_option("--data", a.data, "Dataset JSONL")->required();
  predict->add_option("--out", a.out, "Predictions file (stdout when omitted)");

  auto* ablate = app.add_subcommand("ablate", "Train the full model and its ablations");
  ablate->add_option("--data", a.data, "Dataset JSONL")->required();
  ablate->add_option("--split", a.split, "Split file")->required();
  ablate->add_option("--config", a.config, "Base model config JSON");
  ablate->add_option("--out", a.out, "Directory for the comparison table");
  ablate->add_option("--seed", a.seed, "Override the config seed");
  ablate->add_flag("--no-clamp", a.no_clamp, "Leave consistency features unclamped");
  ablate->add_flag("--consistency-gradient", a.consistency_gradient,
                  "Back-propagate through the consistency features");
  ablate->add_option("--variant", a.variants, "Run only these ablations (repeatable)");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of the toy model");
  gradcheck->add_option("--seed", a.seed, "Initialisation seed");

  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset");
  synth->add_option("--kind", a.kind, "entity-mismatch, aligned-keyword, ocr-story or separable");
  synth->add_option("--n", a.n, "Number of posts");
  synth->add_option("--seed", a.seed, "Generator seed");
  synth->add_option("--out", a.out, "Dataset JSONL to write")->required();
  synth->add_option("--d-visual", a.d_visual, "Region feature width");
  synth->add_option("--noise", a.noise, "Label flip probability");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*split) return run_split(a, out);
    if (*train) return run_train(a, out);
    if (*evaluate) return run_evaluate(a, out);
    if (*predict) return run_predict(a, out);
    if (*ablate) return run_ablate(a, out);
    if (*gradcheck) return run_gradcheck(a, out);
    if (*synth) return run_synth(a, out);
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kInternalError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kUsage;
}

}  // namespace emfend::cli
