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

#include "biasaudit/probe/probe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <regex>
#include <set>

#include <json.hpp>

#include "biasaudit/core/error.hpp"
#include "biasaudit/core/hash.hpp"
#include "biasaudit/core/rng.hpp"

namespace biasaudit::probe {

using nlohmann::json;

void ProbeConfig::validate() const {
  if (base_lr_sweep.empty()) throw Error("base_lr_sweep is empty");
  for (double lr : base_lr_sweep) {
    if (!(lr > 0.0)) throw Error("probe learning rates must be positive");
  }
  if (layer_sweep.empty()) throw Error("layer_sweep is empty");
  if (reference_depth < 1) throw Error("reference_depth must be positive");
  for (int l : layer_sweep) {
    if (l < 1 || l > reference_depth) throw Error("layer_index out of range: " + std::to_string(l));
  }
  if (epochs < 1 || batch_size < 1) throw Error("epochs and batch_size must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw Error("momentum must be in [0, 1)");
  if (checkpoint_fraction <= 0.0 || checkpoint_fraction > 1.0) throw Error("checkpoint_fraction must be in (0, 1]");
}

json probe_config_to_json(const ProbeConfig& c) {
  return {{"base_lr_sweep", c.base_lr_sweep},       {"layer_sweep", c.layer_sweep},
          {"reference_depth", c.reference_depth},   {"epochs", c.epochs},
          {"batch_size", c.batch_size},             {"momentum", c.momentum},
          {"weight_decay", c.weight_decay},         {"checkpoint_fraction", c.checkpoint_fraction},
          {"seed", c.seed}};
}

ProbeConfig probe_config_from_json(const json& j) {
  ProbeConfig c;
  c.base_lr_sweep = j.value("base_lr_sweep", c.base_lr_sweep);
  c.layer_sweep = j.value("layer_sweep", c.layer_sweep);
  c.reference_depth = j.value("reference_depth", c.reference_depth);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.momentum = j.value("momentum", c.momentum);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.checkpoint_fraction = j.value("checkpoint_fraction", c.checkpoint_fraction);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

json probe_result_to_json(const ProbeResult& r) {
  json cells = json::array();
  for (const auto& c : r.cells) cells.push_back({{"layer", c.layer}, {"base_lr", c.base_lr}, {"accuracy", c.accuracy}});
  json j = {{"accuracy", r.accuracy}, {"best_layer", r.best_layer}, {"best_lr", r.best_lr},
            {"cells", cells},         {"degenerate", r.degenerate}};
  if (!r.warning.empty()) j["warning"] = r.warning;
  return j;
}

Standardizer Standardizer::fit(const Mat& x) {
  if (x.cols() == 0) throw Error("no training features");
  Standardizer s;
  s.mean = x.rowwise().mean();
  s.inv_std = Eigen::VectorXf::Zero(x.rows());
  for (Eigen::Index d = 0; d < x.rows(); ++d) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      const double v = static_cast<double>(x(d, i)) - s.mean(d);
      acc += v * v;
    }
    const double var = acc / static_cast<double>(x.cols());
    if (var > 1e-12) {
      s.inv_std(d) = static_cast<float>(1.0 / std::sqrt(var));
      ++s.informative_dims;
    }
  }
  return s;
}

Mat Standardizer::apply(const Mat& x) const {
  if (x.rows() != mean.size()) throw Error("feature dimension mismatch");
  return ((x.colwise() - mean).array().colwise() * inv_std.array()).matrix();
}

std::vector<int> map_probe_layers(const ProbeConfig& cfg, int num_layers) {
  if (num_layers < 1) throw Error("backbone exposes no feature layers");
  std::set<int> layers;
  for (int l : cfg.layer_sweep) {
    const auto mapped = static_cast<int>(std::lround(static_cast<double>(l) * num_layers / cfg.reference_depth));
    layers.insert(std::clamp(mapped, 1, num_layers));
  }
  return {layers.begin(), layers.end()};
}

namespace {

void check_labels(const std::vector<int>& y, Eigen::Index n, int k) {
  if (static_cast<Eigen::Index>(y.size()) != n) throw Error("label count does not match feature rows");
  for (int v : y) {
    if (v < 0 || v >= k) throw Error("label out of range: " + std::to_string(v));
  }
}

int argmax_col(const Mat& logits, Eigen::Index col) {
  Eigen::Index best = 0;
  logits.col(col).maxCoeff(&best);
  return static_cast<int>(best);
}

}  // namespace

double train_linear_head(const Mat& train_x, const std::vector<int>& train_y, const Mat& val_x,
                         const std::vector<int>& val_y, int num_classes, double base_lr, const ProbeConfig& cfg) {
  const Eigen::Index dim = train_x.rows();
  const Eigen::Index n = train_x.cols();
  const auto batch = std::min<Eigen::Index>(cfg.batch_size, n);
  const Eigen::Index steps_per_epoch = (n + batch - 1) / batch;
  const Eigen::Index total = steps_per_epoch * cfg.epochs;
  // Learning rate scales linearly with batch size relative to 256.
  const double peak = base_lr * static_cast<double>(batch) / 256.0;

  Mat w = Mat::Zero(num_classes, dim);
  Eigen::VectorXf b = Eigen::VectorXf::Zero(num_classes);
  Mat vw = Mat::Zero(num_classes, dim);
  Eigen::VectorXf vb = Eigen::VectorXf::Zero(num_classes);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  Eigen::Index step = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    CounterRng rng(hash64(cfg.seed, static_cast<std::uint64_t>(epoch)));
    rng.shuffle(std::span<Eigen::Index>(order));
    for (Eigen::Index start = 0; start < n; start += batch, ++step) {
      const Eigen::Index m = std::min(batch, n - start);
      Mat xb(dim, m);
      Mat t = Mat::Zero(num_classes, m);
      for (Eigen::Index j = 0; j < m; ++j) {
        const auto idx = order[static_cast<std::size_t>(start + j)];
        xb.col(j) = train_x.col(idx);
        t(train_y[static_cast<std::size_t>(idx)], j) = 1.0f;
      }
      Mat logits = w * xb;
      logits.colwise() += b;
      const Mat p = train::softmax(logits);
      const Mat g = (p - t) / static_cast<float>(m);
      Mat gw = g * xb.transpose();
      if (cfg.weight_decay > 0.0) gw += static_cast<float>(cfg.weight_decay) * w;
      const Eigen::VectorXf gb = g.rowwise().sum();
      const double lr =
          0.5 * peak * (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / static_cast<double>(total)));
      const auto mom = static_cast<float>(cfg.momentum);
      vw = mom * vw + gw;
      vb = mom * vb + gb;
      w -= static_cast<float>(lr) * vw;
      b -= static_cast<float>(lr) * vb;
    }
  }

  Mat logits = w * val_x;
  logits.colwise() += b;
  std::int64_t correct = 0;
  for (Eigen::Index i = 0; i < val_x.cols(); ++i) {
    if (argmax_col(logits, i) == val_y[static_cast<std::size_t>(i)]) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(val_x.cols());
}

ProbeResult linear_probe(const Mat& train_x, const std::vector<int>& train_y, const Mat& val_x,
                         const std::vector<int>& val_y, int num_classes, const ProbeConfig& cfg, int layer) {
  cfg.validate();
  if (num_classes < 2) throw Error("num_classes must be at least 2");
  if (train_x.cols() == 0) throw Error("no training features");
  if (val_x.cols() == 0) throw Error("empty validation set");
  if (train_x.rows() != val_x.rows()) throw Error("feature dimension mismatch");
  check_labels(train_y, train_x.cols(), num_classes);
  check_labels(val_y, val_x.cols(), num_classes);

  ProbeResult result;
  const auto scaler = Standardizer::fit(train_x);
  if (scaler.informative_dims == 0) {
    result.degenerate = true;
    result.warning = "degenerate features: zero variance in every dimension; reporting chance";
    result.accuracy = 100.0 / num_classes;
    result.best_layer = layer;
    result.best_lr = cfg.base_lr_sweep.front();
    for (double lr : cfg.base_lr_sweep) result.cells.push_back({layer, lr, result.accuracy});
    return result;
  }
  const Mat xt = scaler.apply(train_x);
  const Mat xv = scaler.apply(val_x);
  result.accuracy = -1.0;
  for (double lr : cfg.base_lr_sweep) {
    const double acc = train_linear_head(xt, train_y, xv, val_y, num_classes, lr, cfg);
    result.cells.push_back({layer, lr, acc});
    if (acc > result.accuracy) {
      result.accuracy = acc;
      result.best_lr = lr;
      result.best_layer = layer;
    }
  }
  return result;
}

namespace {

std::vector<int> labels_of(const std::vector<train::ExampleRef>& examples) {
  std::vector<int> y;
  y.reserve(examples.size());
  for (const auto& e : examples) y.push_back(e.label);
  return y;
}

}  // namespace

ProbeResult probe_backbone(const train::Classifier& backbone, const train::LabeledImages& data, const ProbeConfig& cfg,
                           const std::optional<std::filesystem::path>& cache_dir) {
  cfg.validate();
  const auto train_ex = data.examples(train::Subset::train);
  const auto val_ex = data.examples(train::Subset::val);
  const auto ytr = labels_of(train_ex);
  const auto yva = labels_of(val_ex);
  ProbeResult best;
  best.accuracy = -1.0;
  for (int layer : map_probe_layers(cfg, backbone.num_feature_layers())) {
    ClassifierFeatureExtractor extractor(backbone, layer);
    const Mat ftr = extract_features(extractor, data, train_ex, cache_dir);
    const Mat fva = extract_features(extractor, data, val_ex, cache_dir);
    auto r = linear_probe(ftr, ytr, fva, yva, data.num_classes(), cfg, layer);
    best.cells.insert(best.cells.end(), r.cells.begin(), r.cells.end());
    if (r.degenerate) {
      best.degenerate = true;
      best.warning = r.warning;
    }
    if (r.accuracy > best.accuracy) {
      best.accuracy = r.accuracy;
      best.best_layer = r.best_layer;
      best.best_lr = r.best_lr;
    }
  }
  return best;
}

TransferResult transfer_probe(const train::Classifier& backbone, const train::LabeledImages& semantic,
                              const ProbeConfig& cfg, std::uint64_t random_seed,
                              const std::optional<std::filesystem::path>& cache_dir) {
  TransferResult out;
  out.trained = probe_backbone(backbone, semantic, cfg, cache_dir);
  auto spec = backbone.spec();
  auto random = train::make_model(spec, random_seed);
  out.random = probe_backbone(*random, semantic, cfg, cache_dir);
  return out;
}

std::filesystem::path select_checkpoint(const std::filesystem::path& run_dir, double fraction) {
  static const std::regex pattern(R"(ckpt_(\d+)\.bin)");
  std::int64_t budget = 0;
  std::vector<std::pair<std::int64_t, std::filesystem::path>> found;
  if (!std::filesystem::is_directory(run_dir)) throw Error("not a run directory: " + run_dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(run_dir)) {
    std::smatch m;
    const auto name = entry.path().filename().string();
    if (!std::regex_match(name, m, pattern)) continue;
    found.emplace_back(std::stoll(m[1].str()), entry.path());
    std::ifstream meta(entry.path().string() + ".json");
    if (meta) budget = std::max<std::int64_t>(budget, json::parse(meta).value("budget", std::int64_t{0}));
  }
  if (found.empty()) throw Error("no checkpoints in " + run_dir.string());
  std::sort(found.begin(), found.end());
  if (budget == 0) budget = found.back().first;
  const double target = fraction * static_cast<double>(budget);
  auto best = found.front();
  for (const auto& f : found) {
    if (std::abs(static_cast<double>(f.first) - target) < std::abs(static_cast<double>(best.first) - target)) best = f;
  }
  return best.second;
}

}  // namespace biasaudit::probe
