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

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>

#include <json.hpp>

#include "biasaudit/core/error.hpp"
#include "biasaudit/probe/features.hpp"
#include "biasaudit/probe/probe.hpp"
#include "biasaudit/train/model.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace biasaudit;
using namespace biasaudit::probe;
using train::Mat;
namespace bt = biasaudit::testing;

namespace {

ProbeConfig fast_config() {
  ProbeConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 64;
  return cfg;
}

struct Problem {
  Mat train_x, val_x;
  std::vector<int> train_y, val_y;
};

// Three Gaussian blobs in 8 dims, far apart along separate axes.
Problem separable(int per_class, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<float> noise(0.0f, 0.3f);
  Problem p;
  auto fill = [&](Mat& x, std::vector<int>& y) {
    x.resize(8, 3 * per_class);
    for (int i = 0; i < 3 * per_class; ++i) {
      const int label = i % 3;
      y.push_back(label);
      for (int d = 0; d < 8; ++d) x(d, i) = noise(gen) + (d == label ? 4.0f : 0.0f);
    }
  };
  fill(p.train_x, p.train_y);
  fill(p.val_x, p.val_y);
  return p;
}

Problem random_features(int n_train, int n_val, int dim, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<float> normal;
  Problem p;
  p.train_x.resize(dim, n_train);
  p.val_x.resize(dim, n_val);
  for (long i = 0; i < p.train_x.size(); ++i) p.train_x.data()[i] = normal(gen);
  for (long i = 0; i < p.val_x.size(); ++i) p.val_x.data()[i] = normal(gen);
  for (int i = 0; i < n_train; ++i) p.train_y.push_back(i % 3);
  for (int i = 0; i < n_val; ++i) p.val_y.push_back(i % 3);
  return p;
}

double least_squares_accuracy(const Problem& p, int k) {
  return oracle::least_squares_accuracy(p.train_x, p.train_y, p.val_x, p.val_y, k);
}

class ConstantExtractor final : public FeatureExtractor {
 public:
  std::string source() const override { return "external_checkpoint"; }
  int layer_index() const override { return 1; }
  int feature_dim() const override { return 4; }
  std::uint64_t fingerprint() const override { return 77; }
  std::vector<float> extract(const Image&) override { return {1.0f, 2.0f, 3.0f, 4.0f}; }
};

}  // namespace

TEST(LinearProbe, SeparableFeaturesReachHundred) {
  const auto p = separable(60, 1);
  ASSERT_DOUBLE_EQ(least_squares_accuracy(p, 3), 100.0);
  const auto r = linear_probe(p.train_x, p.train_y, p.val_x, p.val_y, 3, fast_config());
  EXPECT_DOUBLE_EQ(r.accuracy, 100.0);
  EXPECT_FALSE(r.degenerate);
}

TEST(LinearProbe, RandomFeaturesStayAtChance) {
  const auto p = random_features(600, 3000, 16, 2);
  // Oracle: the same estimate with labels permuted is chance by construction.
  Problem shuffled = p;
  std::mt19937 gen(3);
  std::shuffle(shuffled.train_y.begin(), shuffled.train_y.end(), gen);
  const double oracle = least_squares_accuracy(shuffled, 3);
  ASSERT_NEAR(oracle, 100.0 / 3, 3.0);
  ASSERT_NEAR(least_squares_accuracy(p, 3), 100.0 / 3, 3.0);
  const auto r = linear_probe(p.train_x, p.train_y, p.val_x, p.val_y, 3, fast_config());
  for (const auto& c : r.cells) EXPECT_NEAR(c.accuracy, 100.0 / 3, 3.0) << "lr " << c.base_lr;
}

TEST(LinearProbe, SweepReportsMaxOverCells) {
  const auto p = random_features(300, 300, 8, 4);
  const auto r = linear_probe(p.train_x, p.train_y, p.val_x, p.val_y, 3, fast_config(), 2);
  ASSERT_EQ(r.cells.size(), 3u);
  for (const auto& c : r.cells) {
    EXPECT_GE(r.accuracy, c.accuracy);
    EXPECT_EQ(c.layer, 2);
  }
  EXPECT_TRUE(std::any_of(r.cells.begin(), r.cells.end(), [&](const ProbeCell& c) {
    return c.accuracy == r.accuracy && c.base_lr == r.best_lr;
  }));
}

TEST(LinearProbe, ZeroVarianceGivesChanceWithWarning) {
  Mat x = Mat::Constant(5, 30, 2.5f);
  std::vector<int> y(30);
  for (int i = 0; i < 30; ++i) y[static_cast<std::size_t>(i)] = i % 3;
  const auto r = linear_probe(x, y, x, y, 3, fast_config());
  EXPECT_TRUE(r.degenerate);
  EXPECT_NEAR(r.accuracy, 100.0 / 3, 1e-9);
  EXPECT_FALSE(r.warning.empty());
}

TEST(LinearProbe, Deterministic) {
  const auto p = random_features(200, 100, 8, 5);
  const auto a = linear_probe(p.train_x, p.train_y, p.val_x, p.val_y, 3, fast_config());
  const auto b = linear_probe(p.train_x, p.train_y, p.val_x, p.val_y, 3, fast_config());
  EXPECT_EQ(a.accuracy, b.accuracy);
  EXPECT_EQ(a.best_lr, b.best_lr);
}

TEST(LinearProbe, InputValidation) {
  const auto p = random_features(30, 30, 4, 6);
  auto bad = p.train_y;
  bad[0] = 3;
  EXPECT_THROW(linear_probe(p.train_x, bad, p.val_x, p.val_y, 3, fast_config()), Error);
  EXPECT_THROW(linear_probe(p.train_x, p.train_y, Mat(4, 0), {}, 3, fast_config()), Error);
  ProbeConfig cfg = fast_config();
  cfg.base_lr_sweep.clear();
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(StandardizerTest, FitsOnTrainOnlyAndZeroesConstantDims) {
  Mat x(2, 4);
  x << 1, 2, 3, 4, 5, 5, 5, 5;
  const auto s = Standardizer::fit(x);
  EXPECT_EQ(s.informative_dims, 1);
  const Mat z = s.apply(x);
  EXPECT_NEAR(z.row(0).mean(), 0.0f, 1e-6f);
  EXPECT_NEAR(z.row(0).squaredNorm() / 4, 1.0f, 1e-5f);
  EXPECT_EQ(z.row(1), Eigen::RowVectorXf::Zero(4));
}

TEST(ProbeLayers, MappedProportionally) {
  EXPECT_EQ(map_probe_layers(ProbeConfig{}, 5), (std::vector<int>{3, 4}));
  EXPECT_EQ(map_probe_layers(ProbeConfig{}, 12), (std::vector<int>{8, 9, 10}));
  ProbeConfig cfg;
  cfg.layer_sweep = {1};
  EXPECT_EQ(map_probe_layers(cfg, 5), (std::vector<int>{1}));
}

TEST(Features, ExtractionTwiceIsBitIdenticalAndCached) {
  bt::TempDir dir;
  const auto data = bt::pseudo_task(3, 3, 2, 1);
  train::ModelSpec spec;
  spec.width_multiplier = 0.25;
  auto model = train::make_model(spec, 4);
  ClassifierFeatureExtractor ex(*model, 3);
  EXPECT_EQ(ex.feature_dim(), model->feature_dim(3));
  const auto examples = data.examples(train::Subset::train);
  const Mat a = extract_features(ex, data, examples);
  const Mat b = extract_features(ex, data, examples, dir.path());
  EXPECT_TRUE(a == b);
  EXPECT_EQ(a.rows(), ex.feature_dim());
  EXPECT_EQ(a.cols(), 9);

  const auto path = feature_cache_path(dir.path(), ex.fingerprint(), split_fingerprint(data, examples));
  ASSERT_TRUE(std::filesystem::exists(path));
  FeatureCacheHeader h;
  const Mat loaded = load_feature_cache(path, &h);
  EXPECT_TRUE(loaded == a);
  EXPECT_EQ(h.rows, 9u);
  EXPECT_EQ(h.cols, static_cast<std::uint64_t>(ex.feature_dim()));
  EXPECT_EQ(h.dtype, 1u);
  EXPECT_TRUE(extract_features(ex, data, examples, dir.path()) == a);

  // A cache entry of the wrong width is refused.
  save_feature_cache(path, Mat::Zero(ex.feature_dim() + 1, 9), ex.fingerprint(), split_fingerprint(data, examples));
  EXPECT_THROW(extract_features(ex, data, examples, dir.path()), Error);
  EXPECT_THROW(ClassifierFeatureExtractor(*model, 6), Error);
}

TEST(Features, StubExtractorGivesEqualRows) {
  const auto data = bt::pseudo_task(3, 2, 2, 2);
  ConstantExtractor ex;
  const Mat f = extract_features(ex, data, data.examples(train::Subset::train));
  for (long i = 1; i < f.cols(); ++i) EXPECT_TRUE(f.col(i) == f.col(0));
  std::vector<int> y;
  for (const auto& e : data.examples(train::Subset::train)) y.push_back(e.label);
  const auto r = linear_probe(f, y, f, y, 3, fast_config());
  EXPECT_TRUE(r.degenerate);
}

TEST(Features, FingerprintsTrackWeightsAndSplits) {
  train::ModelSpec spec;
  spec.width_multiplier = 0.25;
  auto a = train::make_model(spec, 1);
  auto b = train::make_model(spec, 2);
  EXPECT_EQ(weights_fingerprint(*a), weights_fingerprint(*train::make_model(spec, 1)));
  EXPECT_NE(weights_fingerprint(*a), weights_fingerprint(*b));
  EXPECT_NE(ClassifierFeatureExtractor(*a, 2).fingerprint(), ClassifierFeatureExtractor(*a, 3).fingerprint());
  const auto data = bt::pseudo_task(3, 2, 2, 2);
  EXPECT_NE(split_fingerprint(data, data.examples(train::Subset::train)),
            split_fingerprint(data, data.examples(train::Subset::val)));
}

TEST(ProbeBackbone, BackboneUnchangedAndResultSane) {
  bt::TempDir dir;
  const auto data = bt::pseudo_task(3, 6, 3, 3);
  train::ModelSpec spec;
  spec.width_multiplier = 0.25;
  auto model = train::make_model(spec, 5);
  const auto before = weights_fingerprint(*model);
  auto cfg = fast_config();
  cfg.base_lr_sweep = {0.1};
  const auto r = probe_backbone(*model, data, cfg, dir.path());
  EXPECT_EQ(weights_fingerprint(*model), before);
  EXPECT_EQ(r.cells.size(), 2u);
  EXPECT_GE(r.accuracy, 0.0);
  EXPECT_LE(r.accuracy, 100.0);

  const auto t = transfer_probe(*model, data, cfg, 99);
  EXPECT_EQ(weights_fingerprint(*model), before);
  EXPECT_EQ(t.trained.cells.size(), t.random.cells.size());
}

TEST(SelectCheckpoint, NearestToFractionEarlierWinsTies) {
  bt::TempDir dir;
  for (int it : {10, 20, 30, 40}) {
    std::ofstream(dir / ("ckpt_" + std::to_string(it) + ".bin")) << "x";
    std::ofstream(dir / ("ckpt_" + std::to_string(it) + ".bin.json")) << nlohmann::json{{"iteration", it}, {"budget", 40}}.dump();
  }
  std::ofstream(dir / "checkpoint.bin") << "x";
  EXPECT_EQ(select_checkpoint(dir.path(), 250.0 / 300.0).filename(), "ckpt_30.bin");
  EXPECT_EQ(select_checkpoint(dir.path(), 0.375).filename(), "ckpt_10.bin");
  EXPECT_EQ(select_checkpoint(dir.path(), 1.0).filename(), "ckpt_40.bin");
  bt::TempDir empty;
  EXPECT_THROW(select_checkpoint(empty.path(), 0.5), Error);
}

TEST(ProbeJson, ConfigRoundTrip) {
  ProbeConfig cfg;
  cfg.epochs = 7;
  cfg.base_lr_sweep = {0.5};
  cfg.seed = 3;
  const auto back = probe_config_from_json(probe_config_to_json(cfg));
  EXPECT_EQ(back.epochs, 7);
  EXPECT_EQ(back.base_lr_sweep, cfg.base_lr_sweep);
  EXPECT_EQ(back.seed, 3u);
  EXPECT_EQ(back.layer_sweep, cfg.layer_sweep);
}
