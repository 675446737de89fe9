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

#include "biasaudit/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <unordered_map>

#include <json.hpp>

#include "biasaudit/core/error.hpp"
#include "biasaudit/core/hash.hpp"
#include "biasaudit/core/rng.hpp"

namespace biasaudit::train {

using nlohmann::json;

std::int64_t TrainConfig::budget() const {
  if (iterations) return *iterations;
  return iteration_budget(ref_epochs, ref_dataset_size, batch_size);
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw Error("batch_size must be positive");
  if (!(base_lr > 0.0)) throw Error("base_lr must be positive");
  if (weight_decay < 0.0) throw Error("weight_decay must be non-negative");
  if (warmup_fraction < 0.0 || warmup_fraction >= 1.0) throw Error("warmup_fraction must be in [0, 1)");
  if (label_smoothing < 0.0 || label_smoothing >= 1.0) throw Error("label_smoothing must be in [0, 1)");
  if (iterations && *iterations < 1) throw Error("iterations must be positive");
  if (budget() < 1) throw Error("empty iteration budget");
}

json train_config_to_json(const TrainConfig& c) {
  json j = {{"optimizer", "adamw"},
            {"base_lr", c.base_lr},
            {"weight_decay", c.weight_decay},
            {"betas", {c.beta1, c.beta2}},
            {"eps", c.eps},
            {"batch_size", c.batch_size},
            {"warmup_fraction", c.warmup_fraction},
            {"label_smoothing", c.label_smoothing},
            {"ref_epochs", c.ref_epochs},
            {"ref_dataset_size", c.ref_dataset_size},
            {"seed", c.seed},
            {"checkpoint_fraction", c.checkpoint_fraction},
            {"val_interval_fraction", c.val_interval_fraction},
            {"val_monitor_max_images", c.val_monitor_max_images},
            {"train_eval_max_images", c.train_eval_max_images}};
  j["iterations"] = c.iterations ? json(*c.iterations) : json(nullptr);
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.base_lr = j.value("base_lr", c.base_lr);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  if (j.contains("betas")) {
    c.beta1 = j["betas"].at(0).get<double>();
    c.beta2 = j["betas"].at(1).get<double>();
  }
  c.eps = j.value("eps", c.eps);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.warmup_fraction = j.value("warmup_fraction", c.warmup_fraction);
  c.label_smoothing = j.value("label_smoothing", c.label_smoothing);
  c.ref_epochs = j.value("ref_epochs", c.ref_epochs);
  c.ref_dataset_size = j.value("ref_dataset_size", c.ref_dataset_size);
  if (j.contains("iterations") && !j["iterations"].is_null()) c.iterations = j["iterations"].get<std::int64_t>();
  c.seed = j.value("seed", c.seed);
  c.checkpoint_fraction = j.value("checkpoint_fraction", c.checkpoint_fraction);
  c.val_interval_fraction = j.value("val_interval_fraction", c.val_interval_fraction);
  c.val_monitor_max_images = j.value("val_monitor_max_images", c.val_monitor_max_images);
  c.train_eval_max_images = j.value("train_eval_max_images", c.train_eval_max_images);
  c.validate();
  return c;
}

json run_record_to_json(const RunRecord& r) {
  json val = json::array();
  for (const auto& [it, acc] : r.val_series) val.push_back({it, acc});
  return {{"config_hash", r.config_hash},
          {"class_names", r.class_names},
          {"loss_series", r.loss_series},
          {"val_series", val},
          {"final_train_accuracy", r.final_train_accuracy},
          {"final_val_accuracy", r.final_val_accuracy},
          {"confusion", r.confusion},
          {"convergence_status", std::string(to_string(r.convergence_status))},
          {"wall_time_seconds", r.wall_time_seconds},
          {"iterations", r.iterations},
          {"parameter_count", r.parameter_count}};
}

RunRecord run_record_from_json(const json& j) {
  RunRecord r;
  r.config_hash = j.value("config_hash", std::string{});
  r.class_names = j.value("class_names", std::vector<std::string>{});
  r.loss_series = j.value("loss_series", std::vector<float>{});
  for (const auto& v : j.value("val_series", json::array())) {
    r.val_series.emplace_back(v.at(0).get<std::int64_t>(), v.at(1).get<double>());
  }
  r.final_train_accuracy = j.value("final_train_accuracy", 0.0);
  r.final_val_accuracy = j.value("final_val_accuracy", 0.0);
  r.confusion = j.value("confusion", std::vector<std::vector<std::int64_t>>{});
  r.convergence_status = convergence_status_from_string(j.value("convergence_status", std::string("converged")));
  r.wall_time_seconds = j.value("wall_time_seconds", 0.0);
  r.iterations = j.value("iterations", std::int64_t{0});
  r.parameter_count = j.value("parameter_count", std::int64_t{0});
  return r;
}

TrainStream::TrainStream(std::vector<ExampleRef> examples, std::uint64_t seed)
    : examples_(std::move(examples)), seed_(seed) {
  if (examples_.empty()) throw Error("empty training set");
  reshuffle();
}

void TrainStream::reshuffle() {
  order_ = examples_;
  CounterRng rng(hash64(seed_, pass_));
  rng.shuffle(std::span<ExampleRef>(order_));
  pos_ = 0;
}

std::vector<ExampleRef> TrainStream::next_batch(std::size_t batch_size) {
  std::vector<ExampleRef> batch;
  batch.reserve(batch_size);
  while (batch.size() < batch_size) {
    if (pos_ == order_.size()) {
      ++pass_;
      reshuffle();
    }
    batch.push_back(order_[pos_++]);
  }
  return batch;
}

namespace {

std::uint64_t example_key(const ExampleRef& ex) { return hash64(static_cast<std::uint64_t>(ex.label), ex.index); }

/// Prepared images (or, without augmentation, final model inputs) kept in
/// memory up to a byte budget.
class InputCache {
 public:
  explicit InputCache(std::size_t budget) : budget_(budget) {}

  template <typename Fn>
  Image get(const ExampleRef& ex, Fn&& compute) {
    const auto key = example_key(ex);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    Image img = compute();
    const std::size_t bytes = img.pixels.size() * sizeof(float);
    if (used_ + bytes <= budget_) {
      used_ += bytes;
      entries_.emplace(key, img);
    }
    return img;
  }

 private:
  std::size_t budget_;
  std::size_t used_ = 0;
  std::unordered_map<std::uint64_t, Image> entries_;
};

Image transform_one(const Image& prepared, const transform::AugmentationPolicy& policy, std::uint64_t seed,
                    std::int64_t iteration, std::size_t position) {
  CounterRng rng(hash64(hash64(seed, std::string_view("augment")),
                        static_cast<std::uint64_t>(iteration) * 1'000'003ULL + position));
  return transform::train_transform(prepared, policy, rng);
}

}  // namespace

std::vector<Image> training_inputs(const LabeledImages& data, const std::vector<ExampleRef>& batch,
                                   const transform::AugmentationPolicy& policy, std::uint64_t seed,
                                   std::int64_t iteration) {
  std::vector<Image> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out.push_back(transform_one(data.prepared(batch[i]), policy, seed, iteration, i));
  }
  return out;
}

TrainResult train_classifier(const LabeledImages& data, const ModelSpec& spec, const TrainConfig& cfg,
                             const transform::AugmentationPolicy& policy, const TrainOptions& options) {
  cfg.validate();
  spec.validate();
  if (spec.num_classes != data.num_classes()) throw Error("model num_classes must equal the number of splits");
  for (const auto& src : data.sources()) {
    if (src.train_indices.empty() || src.val_indices.empty()) throw Error("split is empty: " + src.name);
  }

  const auto start = std::chrono::steady_clock::now();
  const std::int64_t budget = cfg.budget();
  const auto warmup = static_cast<std::int64_t>(std::llround(cfg.warmup_fraction * static_cast<double>(budget)));
  const int k = data.num_classes();
  const auto batch_size = static_cast<std::size_t>(cfg.batch_size);

  auto model = make_model(spec, hash64(cfg.seed, std::string_view("init")));
  AdamW optimizer(cfg.beta1, cfg.beta2, cfg.eps, cfg.weight_decay);
  TrainStream stream(data.examples(Subset::train), hash64(cfg.seed, std::string_view("stream")));
  InputCache cache(cfg.cache_bytes);
  const auto params = model->parameters();

  std::ofstream events;
  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    events.open(*options.out_dir / "metrics.jsonl");
  }
  auto emit = [&](const json& e) {
    if (events.is_open()) events << e.dump() << '\n';
    if (options.on_event) options.on_event(e);
  };
  auto write_sidecar = [&](const std::filesystem::path& ckpt, std::int64_t iteration) {
    json meta = {{"config_hash", options.config_hash},
                 {"class_names", data.class_names()},
                 {"model", model_spec_to_json(spec)},
                 {"iteration", iteration},
                 {"budget", budget}};
    std::ofstream(ckpt.string() + ".json") << meta.dump(2) << '\n';
  };

  RunRecord record;
  record.config_hash = options.config_hash;
  record.class_names = data.class_names();
  record.parameter_count = static_cast<std::int64_t>(model->parameter_count());
  record.loss_series.reserve(static_cast<std::size_t>(budget));

  const auto val_every = std::max<std::int64_t>(1, std::llround(cfg.val_interval_fraction * static_cast<double>(budget)));
  const auto ckpt_every = std::max<std::int64_t>(1, std::llround(cfg.checkpoint_fraction * static_cast<double>(budget)));
  const auto monitor = data.examples(Subset::val, static_cast<std::size_t>(std::max(0, cfg.val_monitor_max_images)));
  const auto label_smoothing = static_cast<float>(cfg.label_smoothing);

  for (std::int64_t it = 0; it < budget; ++it) {
    const auto batch = stream.next_batch(batch_size);
    std::vector<Image> inputs;
    std::vector<int> labels;
    inputs.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto& ex = batch[i];
      labels.push_back(ex.label);
      if (!policy.uses_crop()) {
        inputs.push_back(cache.get(ex, [&] { return transform::eval_transform(data.prepared(ex)); }));
      } else {
        const Image prepared = cache.get(ex, [&] { return data.prepared(ex); });
        inputs.push_back(transform_one(prepared, policy, cfg.seed, it, i));
      }
    }
    transform::MixedBatch mixed;
    if (policy.uses_mix()) {
      CounterRng mix_rng(hash64(hash64(cfg.seed, std::string_view("mix")), static_cast<std::uint64_t>(it)));
      mixed = transform::mix_batch(std::move(inputs), labels, k, policy, mix_rng);
    } else {
      mixed = transform::one_hot_batch(std::move(inputs), labels, k);
    }
    const Eigen::Map<const Mat> targets(mixed.soft_labels.data(), k, static_cast<Eigen::Index>(batch.size()));

    const Mat logits = model->forward(mixed.inputs, true);
    Mat dlogits;
    const float loss = softmax_cross_entropy(logits, targets, label_smoothing, dlogits);
    if (!std::isfinite(loss)) throw Error("training diverged: non-finite loss");
    model->zero_grad();
    model->backward(dlogits);
    const double lr = learning_rate_at(it, budget, warmup, cfg.base_lr);
    optimizer.step(params, lr);
    record.loss_series.push_back(loss);
    emit({{"event", "train_step"}, {"iteration", it}, {"loss", loss}, {"lr", lr}});

    const std::int64_t done = it + 1;
    if (cfg.val_interval_fraction > 0.0 && !monitor.empty() && (done % val_every == 0 || done == budget)) {
      const auto r = evaluate([&](const Image& in) { return model->predict(in); }, data, monitor);
      record.val_series.emplace_back(done, r.accuracy);
      emit({{"event", "val"}, {"iteration", done}, {"accuracy", r.accuracy}});
    }
    if (options.out_dir && cfg.checkpoint_fraction > 0.0 && (done % ckpt_every == 0 || done == budget)) {
      const auto path = *options.out_dir / ("ckpt_" + std::to_string(done) + ".bin");
      save_checkpoint(*model, path);
      write_sidecar(path, done);
      emit({{"event", "checkpoint"}, {"iteration", done}, {"path", path.string()}});
    }
  }

  const auto val = evaluate(*model, data, Subset::val);
  record.final_val_accuracy = val.accuracy;
  record.confusion = val.confusion;
  record.final_train_accuracy =
      evaluate(*model, data, Subset::train, static_cast<std::size_t>(std::max(0, cfg.train_eval_max_images))).accuracy;
  record.iterations = budget;
  record.convergence_status = detect_failure(record.loss_series, k, budget);
  record.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit({{"event", "done"},
        {"final_val_accuracy", record.final_val_accuracy},
        {"final_train_accuracy", record.final_train_accuracy},
        {"convergence_status", std::string(to_string(record.convergence_status))}});

  if (options.out_dir) {
    const auto path = *options.out_dir / "checkpoint.bin";
    save_checkpoint(*model, path);
    write_sidecar(path, budget);
    std::ofstream(*options.out_dir / "run_record.json") << run_record_to_json(record).dump(2) << '\n';
    if (options.manifest_paths.size() == static_cast<std::size_t>(k)) {
      std::ofstream(*options.out_dir / "val_set.json") << eval_set_to_json(data, options.manifest_paths).dump(2) << '\n';
    }
  }
  return TrainResult{std::move(model), std::move(record)};
}

}  // namespace biasaudit::train
