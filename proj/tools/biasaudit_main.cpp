/**
 * Copyright 2026 The biasaudit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "biasaudit/core/error.hpp"
#include "biasaudit/dataset/manifest.hpp"
#include "biasaudit/dataset/sampling.hpp"
#include "biasaudit/dataset/synthetic.hpp"
#include "biasaudit/experiment/config.hpp"
#include "biasaudit/experiment/report.hpp"
#include "biasaudit/experiment/store.hpp"
#include "biasaudit/experiment/suite.hpp"
#include "biasaudit/probe/features.hpp"
#include "biasaudit/probe/probe.hpp"
#include "biasaudit/study/server.hpp"
#include "biasaudit/study/service.hpp"
#include "biasaudit/train/evaluate.hpp"
#include "biasaudit/train/labeled_images.hpp"
#include "biasaudit/train/model.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace biasaudit;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// JSON files are parsed as JSON, anything else as YAML.
json read_structured(const fs::path& path) {
  const auto text = read_text(path);
  if (path.extension() == ".json") return json::parse(text);
  return experiment::yaml_to_json(text);
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error("cannot write " + path.string());
}

std::vector<int> read_labels(const fs::path& path) {
  const auto j = json::parse(read_text(path));
  if (j.is_array()) return j.get<std::vector<int>>();
  return j.at("labels").get<std::vector<int>>();
}

study::StudyServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"biasaudit: dataset classification audits"};
  app.require_subcommand(1);

  // dataset ------------------------------------------------------------------
  auto* ds = app.add_subcommand("dataset", "Build, synthesize and sample dataset manifests");
  ds->require_subcommand(1);

  fs::path build_root, build_out, build_cache;
  std::string build_id, build_name, build_notes;
  auto* ds_build = ds->add_subcommand("build", "Scan an image directory into a manifest");
  ds_build->add_option("root", build_root, "Image directory")->required()->check(CLI::ExistingDirectory);
  ds_build->add_option("--id", build_id, "Dataset id")->required();
  ds_build->add_option("--display-name", build_name);
  ds_build->add_option("--notes", build_notes);
  ds_build->add_option("--cache", build_cache, "Preprocessed image cache directory");
  ds_build->add_option("--out", build_out, "Manifest path")->required();

  std::string synth_id;
  std::size_t synth_count = 0;
  dataset::SyntheticStyle synth_style;
  fs::path synth_out;
  auto* ds_synth = ds->add_subcommand("synth", "Write a manifest for a procedural image source");
  ds_synth->add_option("--id", synth_id)->required();
  ds_synth->add_option("--count", synth_count)->required();
  ds_synth->add_option("--seed", synth_style.seed);
  ds_synth->add_option("--min-side", synth_style.min_side);
  ds_synth->add_option("--max-side", synth_style.max_side);
  ds_synth->add_option("--shapes", synth_style.mean_shapes);
  ds_synth->add_option("--saturation", synth_style.saturation);
  ds_synth->add_option("--brightness", synth_style.brightness);
  ds_synth->add_option("--out", synth_out)->required();

  fs::path sample_manifest, sample_out;
  std::size_t sample_train = 0, sample_val = 0, pseudo_k = 0;
  std::uint64_t sample_seed = 0;
  auto* ds_sample = ds->add_subcommand("sample", "Draw disjoint train/val splits");
  ds_sample->add_option("--manifest", sample_manifest)->required()->check(CLI::ExistingFile);
  ds_sample->add_option("--train", sample_train)->required();
  ds_sample->add_option("--val", sample_val)->required();
  ds_sample->add_option("--seed", sample_seed);
  ds_sample->add_option("--pseudo", pseudo_k, "Draw this many pseudo-datasets instead of one split");
  ds_sample->add_option("--out", sample_out, "Split file (or directory with --pseudo)")->required();

  // train / eval ---------------------------------------------------------------
  fs::path train_config, train_out;
  auto* train_cmd = app.add_subcommand("train", "Train a dataset classifier from an experiment config");
  train_cmd->add_option("--config", train_config, "Experiment config (JSON or YAML)")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train_out, "Run directory");

  fs::path eval_ckpt, eval_set;
  std::size_t eval_max = 0;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a saved evaluation set");
  eval_cmd->add_option("--ckpt", eval_ckpt)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--val", eval_set, "val_set.json written by training")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--max-images", eval_max);

  // features / probe -------------------------------------------------------------
  fs::path feat_ckpt, feat_set, feat_out, feat_labels_out;
  int feat_layer = 0;
  std::string feat_subset = "train";
  auto* feat_cmd = app.add_subcommand("features", "Extract frozen features to a cache file");
  feat_cmd->add_option("--ckpt", feat_ckpt)->required()->check(CLI::ExistingFile);
  feat_cmd->add_option("--layer", feat_layer)->required();
  feat_cmd->add_option("--set", feat_set, "Evaluation-set file")->required()->check(CLI::ExistingFile);
  feat_cmd->add_option("--subset", feat_subset)->check(CLI::IsMember({"train", "val"}));
  feat_cmd->add_option("--out", feat_out)->required();
  feat_cmd->add_option("--labels-out", feat_labels_out);

  fs::path probe_features, probe_labels, probe_val_features, probe_val_labels, probe_config;
  auto* probe_cmd = app.add_subcommand("probe", "Linear probe on cached features");
  probe_cmd->add_option("--features", probe_features)->required()->check(CLI::ExistingFile);
  probe_cmd->add_option("--labels", probe_labels)->required()->check(CLI::ExistingFile);
  probe_cmd->add_option("--val-features", probe_val_features)->required()->check(CLI::ExistingFile);
  probe_cmd->add_option("--val-labels", probe_val_labels)->required()->check(CLI::ExistingFile);
  probe_cmd->add_option("--config", probe_config)->check(CLI::ExistingFile);

  // suite / report ----------------------------------------------------------------
  auto* suite_cmd = app.add_subcommand("suite", "Experiment suites");
  suite_cmd->require_subcommand(1);
  fs::path suite_spec, suite_store = "results.jsonl", suite_runs, suite_cache;
  bool suite_force = false;
  std::size_t suite_parallel = 1;
  auto* suite_run = suite_cmd->add_subcommand("run", "Run missing cells of a suite");
  suite_run->add_option("--spec", suite_spec)->required()->check(CLI::ExistingFile);
  suite_run->add_option("--store", suite_store);
  suite_run->add_option("--runs-dir", suite_runs);
  suite_run->add_option("--image-cache", suite_cache);
  suite_run->add_option("--parallel", suite_parallel);
  suite_run->add_flag("--force", suite_force, "Re-run completed cells");
  auto* suite_list = suite_cmd->add_subcommand("list", "Print the cells of a suite");
  suite_list->add_option("--spec", suite_spec)->required()->check(CLI::ExistingFile);
  suite_list->add_option("--store", suite_store);

  std::string report_template;
  fs::path report_store = "results.jsonl", report_refs, report_out;
  std::string report_suite;
  auto* report_cmd = app.add_subcommand("report", "Render a report from the results store");
  report_cmd->add_option("--template", report_template)->required()->check(CLI::IsMember(experiment::report_template_names()));
  report_cmd->add_option("--store", report_store);
  report_cmd->add_option("--suite", report_suite, "Only rows from this suite");
  report_cmd->add_option("--references", report_refs, "JSON map of row key to reference value")->check(CLI::ExistingFile);
  report_cmd->add_option("--out", report_out, "Write <out>.md, <out>.csv (and <out>.svg) instead of stdout");

  // serve ------------------------------------------------------------------------
  fs::path serve_config, serve_log, serve_static;
  std::string serve_host = "127.0.0.1";
  int serve_port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "Run the human study service");
  serve_cmd->add_option("--config", serve_config, "Study config (JSON or YAML)")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--log", serve_log, "Event log")->required();
  serve_cmd->add_option("--host", serve_host);
  serve_cmd->add_option("--port", serve_port);
  serve_cmd->add_option("--static", serve_static, "Directory of static UI files")->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ds_build) {
      dataset::BuildOptions opts{build_name, build_notes, std::nullopt};
      if (!build_cache.empty()) opts.cache_dir = build_cache;
      const auto m = dataset::build_manifest_from_directory(build_root, build_id, opts);
      dataset::write_manifest(m, build_out);
      std::cout << json{{"dataset_id", m.dataset_id}, {"images", m.images.size()}, {"usable", m.usable_indices().size()}}.dump()
                << '\n';
    } else if (*ds_synth) {
      const auto m = dataset::make_synthetic_manifest(synth_id, synth_count, synth_style);
      dataset::write_manifest(m, synth_out);
      std::cout << json{{"dataset_id", m.dataset_id}, {"images", m.images.size()}, {"root_uri", m.root_uri}}.dump() << '\n';
    } else if (*ds_sample) {
      const auto m = dataset::register_dataset(sample_manifest);
      if (pseudo_k > 0) {
        const auto splits = dataset::build_pseudo_datasets(m, pseudo_k, sample_train, sample_seed, sample_val);
        fs::create_directories(sample_out);
        for (std::size_t i = 0; i < splits.size(); ++i) {
          dataset::save_split(splits[i], sample_out / ("pseudo" + std::to_string(i) + ".json"));
        }
      } else {
        dataset::save_split(dataset::sample_split(m, sample_train, sample_val, sample_seed), sample_out);
      }
    } else if (*train_cmd) {
      const auto cfg = experiment::experiment_from_json(read_structured(train_config));
      const fs::path dir = train_out.empty() ? fs::path("runs") / experiment::config_hash(cfg) : train_out;
      const auto outcome = experiment::execute_experiment(cfg, dir);
      json summary = {{"config_hash", outcome.record.config_hash},
                      {"final_train_accuracy", outcome.record.final_train_accuracy},
                      {"final_val_accuracy", outcome.record.final_val_accuracy},
                      {"convergence_status", std::string(train::to_string(outcome.record.convergence_status))},
                      {"run_dir", dir.string()}};
      if (!outcome.extra.empty()) summary["extra"] = outcome.extra;
      std::cout << summary.dump(2) << '\n';
    } else if (*eval_cmd) {
      auto model = train::load_checkpoint(eval_ckpt);
      const auto data = train::eval_set_from_json(json::parse(read_text(eval_set)));
      const auto r = train::evaluate(*model, data, train::Subset::val, eval_max);
      std::cout << json{{"accuracy", r.accuracy}, {"correct", r.correct}, {"total", r.total}, {"confusion", r.confusion},
                        {"class_names", data.class_names()}}
                       .dump(2)
                << '\n';
    } else if (*feat_cmd) {
      auto model = train::load_checkpoint(feat_ckpt);
      const auto data = train::eval_set_from_json(json::parse(read_text(feat_set)));
      const auto subset = feat_subset == "train" ? train::Subset::train : train::Subset::val;
      const auto examples = data.examples(subset);
      probe::ClassifierFeatureExtractor extractor(*model, feat_layer);
      const auto features = probe::extract_features(extractor, data, examples);
      probe::save_feature_cache(feat_out, features, extractor.fingerprint(), probe::split_fingerprint(data, examples));
      if (!feat_labels_out.empty()) {
        std::vector<int> labels;
        for (const auto& e : examples) labels.push_back(e.label);
        write_json(feat_labels_out, {{"labels", labels}, {"class_names", data.class_names()}});
      }
    } else if (*probe_cmd) {
      const auto cfg = probe_config.empty() ? probe::ProbeConfig{} : probe::probe_config_from_json(read_structured(probe_config));
      const auto xtr = probe::load_feature_cache(probe_features);
      const auto xva = probe::load_feature_cache(probe_val_features);
      const auto ytr = read_labels(probe_labels);
      const auto yva = read_labels(probe_val_labels);
      int k = 0;
      for (int y : ytr) k = std::max(k, y + 1);
      for (int y : yva) k = std::max(k, y + 1);
      const auto r = probe::linear_probe(xtr, ytr, xva, yva, k, cfg);
      if (r.degenerate) std::cerr << "warning: " << r.warning << '\n';
      std::cout << probe::probe_result_to_json(r).dump(2) << '\n';
    } else if (*suite_run) {
      const auto spec = experiment::load_suite_spec(suite_spec);
      experiment::ResultsStore store(suite_store);
      experiment::RunOptions opts;
      opts.force = suite_force;
      opts.parallelism = suite_parallel;
      if (!suite_runs.empty()) opts.runs_dir = suite_runs;
      if (!suite_cache.empty()) opts.image_cache = suite_cache;
      opts.on_cell_done = [](const experiment::SuiteCell& cell, const experiment::ResultRow& row) {
        json line = {{"ordinal", cell.ordinal}, {"config_hash", cell.hash}, {"status", row.status}};
        if (row.ok()) {
          line["final_val_accuracy"] = row.record.value("final_val_accuracy", 0.0);
          line["convergence_status"] = row.record.value("convergence_status", std::string());
        } else {
          line["error"] = row.error;
        }
        std::cerr << line.dump() << '\n';
      };
      const auto s = experiment::run_suite(spec, store, opts);
      std::cout << json{{"total", s.total}, {"executed", s.executed}, {"skipped", s.skipped}, {"failed", s.failed}}.dump()
                << '\n';
      return s.failed > 0 ? 2 : 0;
    } else if (*suite_list) {
      const auto spec = experiment::load_suite_spec(suite_spec);
      const experiment::ResultsStore store(suite_store);
      for (const auto& cell : experiment::expand_suite(spec)) {
        std::cout << json{{"ordinal", cell.ordinal},
                          {"config_hash", cell.hash},
                          {"classes", cell.config.class_names()},
                          {"train_per_dataset", cell.config.train_per_dataset},
                          {"done", store.completed(cell.hash)}}
                         .dump()
                  << '\n';
      }
    } else if (*report_cmd) {
      const experiment::ResultsStore store(report_store);
      std::vector<experiment::ResultRow> rows;
      for (auto& r : store.rows()) {
        if (report_suite.empty() || r.suite == report_suite) rows.push_back(std::move(r));
      }
      const json refs = report_refs.empty() ? json::object() : json::parse(read_text(report_refs));
      const auto report = experiment::render_report(rows, experiment::report_template_from_string(report_template), refs);
      if (report_out.empty()) {
        std::cout << report.markdown;
      } else {
        if (report_out.has_parent_path()) fs::create_directories(report_out.parent_path());
        std::ofstream(report_out.string() + ".md") << report.markdown;
        std::ofstream(report_out.string() + ".csv") << report.csv;
        if (!report.svg.empty()) std::ofstream(report_out.string() + ".svg") << report.svg;
      }
    } else if (*serve_cmd) {
      study::StudyService service(study::study_config_from_json(read_structured(serve_config)), serve_log);
      study::StudyServer server(service, serve_static.empty() ? std::nullopt : std::optional<fs::path>(serve_static));
      if (!server.bind(serve_host, serve_port)) throw Error("cannot bind " + serve_host + ":" + std::to_string(serve_port));
      g_server = &server;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      std::cerr << "serving on http://" << serve_host << ':' << serve_port << '\n';
      server.listen();
      g_server = nullptr;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
