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

#include "biasaudit/experiment/suite.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <yaml-cpp/yaml.h>

#include "biasaudit/core/error.hpp"
#include "biasaudit/core/hash.hpp"
#include "biasaudit/dataset/image_store.hpp"
#include "biasaudit/dataset/manifest.hpp"
#include "biasaudit/dataset/sampling.hpp"

namespace biasaudit::experiment {

using nlohmann::json;

namespace {

constexpr std::pair<SuiteKind, std::string_view> kKindNames[] = {
    {SuiteKind::combinations, "combinations"}, {SuiteKind::model_size, "model_size"},
    {SuiteKind::data_scale, "data_scale"},     {SuiteKind::augmentation, "augmentation"},
    {SuiteKind::corruption, "corruption"},     {SuiteKind::pseudo, "pseudo"},
    {SuiteKind::probe, "probe"}};

json scalar_to_json(const YAML::Node& node) {
  const std::string& text = node.Scalar();
  // Quoted scalars stay strings.
  if (node.Tag() == "!") return text;
  if (text == "~" || text == "null" || text.empty()) return nullptr;
  if (text == "true") return true;
  if (text == "false") return false;
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(text, &pos);
    if (pos == text.size()) return v;
  } catch (const std::logic_error&) {
  }
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos == text.size()) return v;
  } catch (const std::logic_error&) {
  }
  return text;
}

json node_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar_to_json(node);
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : node) arr.push_back(node_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = node_to_json(kv.second);
      return obj;
    }
  }
  return nullptr;
}

template <typename T>
std::vector<T> list_or_scalar(const json& j) {
  if (j.is_array()) return j.get<std::vector<T>>();
  return {j.get<T>()};
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::mutex g_manifest_mu;
std::map<std::string, std::shared_ptr<const dataset::DatasetManifest>> g_manifests;

std::shared_ptr<const dataset::DatasetManifest> load_manifest(const std::string& path) {
  std::lock_guard lock(g_manifest_mu);
  auto it = g_manifests.find(path);
  if (it != g_manifests.end()) return it->second;
  auto m = std::make_shared<const dataset::DatasetManifest>(dataset::register_dataset(path));
  g_manifests.emplace(path, m);
  return m;
}

std::vector<train::ClassSource> sample_classes(const std::vector<DatasetSource>& sources, std::size_t n_train,
                                               std::size_t n_val, std::uint64_t seed) {
  std::vector<train::ClassSource> classes;
  for (const auto& src : sources) {
    auto manifest = load_manifest(src.manifest);
    auto cls = train::class_from_split(manifest, dataset::sample_split(*manifest, n_train, n_val, seed));
    cls.name = src.id;
    cls.corruption = src.corruption;
    classes.push_back(std::move(cls));
  }
  return classes;
}

}  // namespace

std::string_view to_string(SuiteKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  throw Error("unknown suite kind");
}

SuiteKind suite_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw Error("unknown suite kind: " + std::string(name));
}

void SuiteSpec::validate() const {
  auto require = [&](bool ok, const char* axis) {
    if (!ok) throw Error("suite kind " + std::string(to_string(kind)) + " requires " + axis);
  };
  if (pseudo && !pool.empty()) throw Error("a suite uses either datasets or a pseudo source, not both");
  if (!pseudo && pool.empty()) throw Error("suite has no datasets");
  for (auto size : k) {
    if (size > pool.size()) {
      throw Error("k=" + std::to_string(size) + " exceeds pool size " + std::to_string(pool.size()));
    }
    if (size < 2) throw Error("k must be at least 2");
  }
  switch (kind) {
    case SuiteKind::combinations: require(!k.empty(), "k"); break;
    case SuiteKind::model_size:
      require(!grid.width_multiplier.empty() || !grid.depth_multiplier.empty(),
              "grid.width_multiplier or grid.depth_multiplier");
      break;
    case SuiteKind::data_scale: require(!grid.train_per_dataset.empty(), "grid.train_per_dataset"); break;
    case SuiteKind::augmentation: require(!grid.aug_level.empty(), "grid.aug_level"); break;
    case SuiteKind::corruption: require(!grid.corruption.empty(), "grid.corruption"); break;
    case SuiteKind::pseudo: require(pseudo.has_value(), "pseudo"); break;
    case SuiteKind::probe: require(base.probe.has_value(), "probe"); break;
  }
}

json yaml_to_json(const std::string& text) {
  try {
    return node_to_json(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw Error(std::string("invalid suite spec: ") + e.what());
  }
}

SuiteSpec suite_from_json(const json& j) {
  if (!j.is_object()) throw Error("suite spec must be a mapping");
  SuiteSpec s;
  s.kind = suite_kind_from_string(j.at("kind").get<std::string>());
  s.name = j.value("name", std::string(to_string(s.kind)));
  s.seed = j.value("seed", std::uint64_t{0});
  for (const auto& d : j.value("datasets", json::array())) s.pool.push_back(dataset_source_from_json(d));
  if (j.contains("k")) s.k = list_or_scalar<std::size_t>(j["k"]);
  if (j.contains("pseudo") && !j["pseudo"].is_null()) {
    const auto& p = j["pseudo"];
    s.pseudo = PseudoSpec{dataset_source_from_json(p.contains("source") ? p["source"] : p), p.value("k", std::size_t{3})};
  }

  auto& b = s.base;
  b.train_per_dataset = j.value("train_per_dataset", std::size_t{0});
  b.val_per_dataset = j.value("val_per_dataset", std::size_t{0});
  if (j.contains("model")) b.model = train::model_spec_from_json(j["model"]);
  if (j.contains("train")) b.train = train::train_config_from_json(j["train"]);
  if (j.contains("augmentation")) {
    const auto& a = j["augmentation"];
    b.augmentation = a.is_string() ? transform::policy_for_level(transform::aug_level_from_string(a.get<std::string>()))
                                   : transform::policy_from_json(a);
  }
  if (j.contains("corruption")) b.corruption = transform::corruption_from_json(j["corruption"]);
  if (j.contains("probe") && !j["probe"].is_null()) {
    const auto& p = j["probe"];
    ProbeTask task;
    for (const auto& d : p.at("classes")) task.classes.push_back(dataset_source_from_json(d));
    task.train_per_class = p.at("train_per_class").get<std::size_t>();
    task.val_per_class = p.at("val_per_class").get<std::size_t>();
    if (p.contains("config")) task.config = probe::probe_config_from_json(p["config"]);
    b.probe = std::move(task);
  }

  if (j.contains("grid")) {
    const auto& g = j["grid"];
    if (g.contains("train_per_dataset")) s.grid.train_per_dataset = list_or_scalar<std::size_t>(g["train_per_dataset"]);
    if (g.contains("width_multiplier")) s.grid.width_multiplier = list_or_scalar<double>(g["width_multiplier"]);
    if (g.contains("depth_multiplier")) s.grid.depth_multiplier = list_or_scalar<double>(g["depth_multiplier"]);
    if (g.contains("aug_level")) {
      for (const auto& name : list_or_scalar<std::string>(g["aug_level"])) {
        s.grid.aug_level.push_back(transform::aug_level_from_string(name));
      }
    }
    if (g.contains("corruption")) {
      for (const auto& c : g["corruption"]) s.grid.corruption.push_back(transform::corruption_from_json(c));
    }
  }
  s.validate();
  return s;
}

SuiteSpec parse_suite_yaml(const std::string& text) { return suite_from_json(yaml_to_json(text)); }

SuiteSpec load_suite_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open suite spec: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_suite_yaml(buf.str());
}

std::vector<SuiteCell> expand_suite(const SuiteSpec& suite) {
  suite.validate();
  std::vector<std::vector<DatasetSource>> sets;
  if (suite.pseudo) {
    sets.emplace_back();
  } else if (suite.k.empty()) {
    sets.push_back(suite.pool);
  } else {
    std::vector<std::string> ids;
    for (const auto& d : suite.pool) ids.push_back(d.id);
    for (auto size : suite.k) {
      for (const auto& combo : enumerate_combinations(ids, size)) {
        std::vector<DatasetSource> set;
        for (const auto& id : combo) {
          set.push_back(*std::find_if(suite.pool.begin(), suite.pool.end(), [&](const auto& d) { return d.id == id; }));
        }
        sets.push_back(std::move(set));
      }
    }
  }

  // Each axis contributes its values, or a single "keep base" entry.
  const auto& g = suite.grid;
  const std::size_t n_train = std::max<std::size_t>(1, g.train_per_dataset.size());
  const std::size_t n_width = std::max<std::size_t>(1, g.width_multiplier.size());
  const std::size_t n_depth = std::max<std::size_t>(1, g.depth_multiplier.size());
  const std::size_t n_aug = std::max<std::size_t>(1, g.aug_level.size());
  const std::size_t n_corr = std::max<std::size_t>(1, g.corruption.size());

  std::vector<SuiteCell> cells;
  std::int64_t ordinal = 0;
  for (const auto& set : sets) {
    for (std::size_t a = 0; a < n_train; ++a) {
      for (std::size_t w = 0; w < n_width; ++w) {
        for (std::size_t d = 0; d < n_depth; ++d) {
          for (std::size_t l = 0; l < n_aug; ++l) {
            for (std::size_t c = 0; c < n_corr; ++c) {
              ExperimentConfig cfg = suite.base;
              cfg.datasets = set;
              cfg.pseudo = suite.pseudo;
              if (!g.train_per_dataset.empty()) cfg.train_per_dataset = g.train_per_dataset[a];
              if (!g.width_multiplier.empty()) cfg.model.width_multiplier = g.width_multiplier[w];
              if (!g.depth_multiplier.empty()) cfg.model.depth_multiplier = g.depth_multiplier[d];
              if (!g.aug_level.empty()) cfg.augmentation.level = g.aug_level[l];
              if (!g.corruption.empty()) cfg.corruption = g.corruption[c];
              cfg.seed = hash64(suite.seed, static_cast<std::uint64_t>(ordinal));
              cfg.train.seed = cfg.seed;
              cfg.model.num_classes = static_cast<int>(cfg.num_classes());
              cfg.validate();
              cells.push_back({ordinal, cfg, config_hash(cfg)});
              ++ordinal;
            }
          }
        }
      }
    }
  }
  return cells;
}

CellOutcome execute_experiment(const ExperimentConfig& config, const std::optional<std::filesystem::path>& run_dir,
                               const std::optional<std::filesystem::path>& image_cache) {
  config.validate();
  std::vector<train::ClassSource> classes;
  std::vector<std::string> manifest_paths;
  if (config.pseudo) {
    auto manifest = load_manifest(config.pseudo->source.manifest);
    const auto splits = dataset::build_pseudo_datasets(*manifest, config.pseudo->k, config.train_per_dataset,
                                                       config.seed, config.val_per_dataset);
    for (const auto& split : splits) {
      classes.push_back(train::class_from_split(manifest, split));
      manifest_paths.push_back(config.pseudo->source.manifest);
    }
  } else {
    classes = sample_classes(config.datasets, config.train_per_dataset, config.val_per_dataset, config.seed);
    for (const auto& d : config.datasets) manifest_paths.push_back(d.manifest);
  }
  const dataset::ImageStore store = image_cache ? dataset::ImageStore(*image_cache) : dataset::ImageStore();
  const train::LabeledImages data(std::move(classes), config.corruption, store);

  auto model_spec = config.model;
  model_spec.num_classes = static_cast<int>(config.num_classes());
  auto train_cfg = config.train;
  train_cfg.seed = config.seed;
  train::TrainOptions opts;
  opts.out_dir = run_dir;
  opts.config_hash = config_hash(config);
  opts.manifest_paths = manifest_paths;
  auto result = train::train_classifier(data, model_spec, train_cfg, config.augmentation, opts);

  CellOutcome out{std::move(result.record), json::object()};
  if (config.probe) {
    const auto& task = *config.probe;
    const train::LabeledImages semantic(
        sample_classes(task.classes, task.train_per_class, task.val_per_class, hash64(config.seed, "probe")),
        transform::CorruptionSpec{}, store);
    const auto tr = probe::transfer_probe(*result.model, semantic, task.config, hash64(config.seed, "random"));
    out.extra["probe_accuracy"] = tr.trained.accuracy;
    out.extra["probe_random_accuracy"] = tr.random.accuracy;
    out.extra["probe"] = probe::probe_result_to_json(tr.trained);
    out.extra["probe_random"] = probe::probe_result_to_json(tr.random);
  }
  return out;
}

SuiteSummary run_suite(const SuiteSpec& suite, ResultsStore& store, const RunOptions& options) {
  const auto cells = expand_suite(suite);
  SuiteSummary summary;
  summary.total = cells.size();

  std::vector<const SuiteCell*> todo;
  for (const auto& cell : cells) {
    if (!options.force && store.completed(cell.hash)) {
      ++summary.skipped;
    } else {
      todo.push_back(&cell);
    }
  }

  const CellExecutor executor = options.executor ? options.executor
                                                 : CellExecutor([&](const ExperimentConfig& c,
                                                                    const std::optional<std::filesystem::path>& dir) {
                                                     return execute_experiment(c, dir, options.image_cache);
                                                   });
  std::mutex summary_mu;
  auto run_cell = [&](const SuiteCell& cell) {
    ResultRow row;
    row.config_hash = cell.hash;
    row.suite = suite.name;
    row.kind = std::string(to_string(suite.kind));
    row.ordinal = cell.ordinal;
    row.config = experiment_to_json(cell.config);
    std::optional<std::filesystem::path> dir;
    if (options.runs_dir) dir = *options.runs_dir / cell.hash;
    try {
      auto outcome = executor(cell.config, dir);
      if (outcome.record.config_hash.empty()) outcome.record.config_hash = cell.hash;
      row.record = train::run_record_to_json(outcome.record);
      row.extra = std::move(outcome.extra);
    } catch (const std::exception& e) {
      row.status = "error";
      row.error = e.what();
    }
    row.finished_at = utc_timestamp();
    store.append(row);
    {
      std::lock_guard lock(summary_mu);
      ++summary.executed;
      if (!row.ok()) ++summary.failed;
    }
    if (options.on_cell_done) options.on_cell_done(cell, row);
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(options.parallelism, todo.size()));
  if (workers <= 1) {
    for (const auto* cell : todo) run_cell(*cell);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < todo.size(); i = next++) run_cell(*todo[i]);
      });
    }
    for (auto& t : pool) t.join();
  }
  return summary;
}

}  // namespace biasaudit::experiment
