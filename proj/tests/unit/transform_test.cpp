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

#include <cmath>
#include <numeric>
#include <random>

#include "biasaudit/core/error.hpp"
#include "biasaudit/core/rng.hpp"
#include "biasaudit/transform/augment.hpp"
#include "biasaudit/transform/corruption.hpp"
#include "biasaudit/transform/resample.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace biasaudit;
using namespace biasaudit::transform;
namespace bt = biasaudit::testing;

namespace {

Image ramp4x4() {
  Image img(4, 4, 3);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<float>((x + 4 * y) / 15.0);
  return img;
}

void expect_images_near(const Image& a, const Image& b, float tol) {
  ASSERT_EQ(a.width, b.width);
  ASSERT_EQ(a.height, b.height);
  ASSERT_EQ(a.channels, b.channels);
  for (std::size_t i = 0; i < a.pixels.size(); ++i) ASSERT_NEAR(a.pixels[i], b.pixels[i], tol) << "at " << i;
}

}  // namespace

TEST(Resample, MatchesBruteForceOracleShrinkAndGrow) {
  const auto src = bt::pattern_image(13, 9);
  for (auto [w, h] : {std::pair{5, 4}, std::pair{13, 9}, std::pair{20, 31}, std::pair{3, 17}, std::pair{1, 1}}) {
    expect_images_near(resize_bilinear(src, w, h), oracle::triangle_resample(src, w, h), 1e-5f);
  }
}

TEST(Resample, SameSizeIsIdentity) {
  const auto src = bt::pattern_image(11, 7);
  EXPECT_EQ(resize_bilinear(src, 11, 7), src);
}

TEST(Resample, ShorterSideGeometry) {
  const auto a = resize_shorter_side(bt::pattern_image(100, 80), 256);
  EXPECT_EQ(a.width, 320);
  EXPECT_EQ(a.height, 256);
  const auto b = resize_shorter_side(bt::pattern_image(30, 70), 256);
  EXPECT_EQ(b.width, 256);
  EXPECT_EQ(b.height, 597);
}

TEST(Resample, CenterCropOffsetsAndFlip) {
  const auto src = bt::pattern_image(10, 8);
  EXPECT_EQ(center_crop(src, 4, 4), crop(src, 3, 2, 4, 4));
  const auto f = flip_horizontal(src);
  EXPECT_EQ(f.at(0, 3, 1), src.at(9, 3, 1));
  EXPECT_EQ(flip_horizontal(f), src);
  EXPECT_THROW(crop(src, 8, 0, 4, 4), Error);
}

TEST(Corruption, BlurOfConstantIsConstant) {
  const auto img = bt::constant_image(40, 30, 0.37f);
  for (int r : {1, 3, 7}) {
    const auto out = gaussian_blur(img, r);
    for (float v : out.pixels) ASSERT_NEAR(v, 0.37f, 1e-5f) << "radius " << r;
  }
}

TEST(Corruption, BlurReducesHighFrequencyEnergy) {
  Image checker(32, 32, 3);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      for (int c = 0; c < 3; ++c) checker.at(x, y, c) = ((x + y) % 2) ? 1.0f : 0.0f;
  EXPECT_LT(oracle::pixel_std(gaussian_blur(checker, 3)), 0.1 * oracle::pixel_std(checker));
}

TEST(Corruption, NoiseStdMatchesMonteCarloOracle) {
  // Oracle: clipped N(0.5, 0.2^2) sampled with the standard library.
  const double oracle_std = oracle::clipped_noise_std(0.5, 0.2, 1'000'000, 12345);
  ASSERT_GE(oracle_std, 0.185);
  ASSERT_LE(oracle_std, 0.205);

  const auto gray = bt::constant_image(600, 600, 0.5f);
  const auto out = apply_corruption(gray, {CorruptionKind::gaussian_noise, 0.2, 0}, "gray");
  const double got = oracle::pixel_std(out);
  EXPECT_GE(got, 0.185);
  EXPECT_LE(got, 0.205);
  EXPECT_NEAR(got, oracle_std, 0.002);
}

TEST(Corruption, LowResolutionMatchesTriangleOracleOnRamp) {
  const auto img = ramp4x4();
  const auto out = apply_corruption(img, {CorruptionKind::low_resolution, 2, 0}, "ramp");
  const auto expected = oracle::triangle_resample(oracle::triangle_resample(img, 2, 2), 4, 4);
  expect_images_near(out, expected, 1e-5f);
  // The round trip through 2x2 loses detail: 16 distinct values cannot survive.
  EXPECT_GT(oracle::pixel_std(img), oracle::pixel_std(out));
}

TEST(Corruption, PureFunctionOfImageSpecAndId) {
  const auto img = bt::pattern_image(50, 40);
  for (auto kind : {CorruptionKind::color_jitter, CorruptionKind::gaussian_noise}) {
    const CorruptionSpec spec{kind, 0.5, 7};
    EXPECT_EQ(apply_corruption(img, spec, "a"), apply_corruption(img, spec, "a"));
    EXPECT_NE(apply_corruption(img, spec, "a"), apply_corruption(img, spec, "b"));
    CorruptionSpec other = spec;
    other.per_image_seed_base = 8;
    EXPECT_NE(apply_corruption(img, spec, "a"), apply_corruption(img, other, "a"));
  }
}

TEST(Corruption, OutputShapeAndRange) {
  const auto img = bt::pattern_image(33, 21);
  for (const CorruptionSpec& spec : {CorruptionSpec{CorruptionKind::color_jitter, 1.0, 0},
                                     CorruptionSpec{CorruptionKind::gaussian_noise, 0.5, 0},
                                     CorruptionSpec{CorruptionKind::gaussian_blur, 5, 0},
                                     CorruptionSpec{CorruptionKind::low_resolution, 8, 0}}) {
    const auto out = apply_corruption(img, spec, "x");
    EXPECT_EQ(out.width, 33);
    EXPECT_EQ(out.height, 21);
    for (float v : out.pixels) {
      ASSERT_GE(v, 0.0f);
      ASSERT_LE(v, 1.0f);
    }
  }
}

TEST(Corruption, NoneIsIdentityAndInvalidParametersRejected) {
  const auto img = bt::pattern_image(9, 9);
  EXPECT_EQ(apply_corruption(img, {}, "x"), img);
  EXPECT_THROW(apply_corruption(img, {CorruptionKind::gaussian_noise, 0.0, 0}, "x"), Error);
  EXPECT_THROW(apply_corruption(img, {CorruptionKind::gaussian_blur, -1, 0}, "x"), Error);
  EXPECT_THROW(corruption_kind_from_string("sepia"), Error);
}

TEST(Corruption, JsonRoundTripAndLabels) {
  const CorruptionSpec spec{CorruptionKind::gaussian_blur, 3, 42};
  EXPECT_EQ(corruption_from_json(corruption_to_json(spec)), spec);
  EXPECT_EQ(spec.label(), "Gaussian blur (radius: 3)");
  EXPECT_EQ((CorruptionSpec{CorruptionKind::low_resolution, 64, 0}.label()), "low resolution (64x64)");
  EXPECT_EQ((CorruptionSpec{CorruptionKind::gaussian_noise, 0.2, 0}.label()), "Gaussian noise (std: 0.2)");
}

TEST(EvalTransform, SquareInputCropsAtSixteen) {
  const auto img = bt::pattern_image(256, 256);
  EXPECT_EQ(eval_transform(img), crop(img, 16, 16, 224, 224));
}

TEST(EvalTransform, SmallInputUpscaledThenCropped) {
  const auto img = bt::pattern_image(100, 80);
  const auto resized = resize_bilinear(img, 320, 256);
  EXPECT_EQ(eval_transform(img), crop(resized, 48, 16, 224, 224));
}

TEST(EvalTransform, WideInputCropsCenter) {
  const auto img = bt::pattern_image(512, 256);
  EXPECT_EQ(eval_transform(img), crop(img, 144, 16, 224, 224));
}

TEST(TrainTransform, AlwaysProduces224x224x3) {
  CounterRng rng(1);
  for (auto level : {AugLevel::none, AugLevel::rand_crop, AugLevel::rand_crop_rand_aug, AugLevel::rand_crop_rand_aug_mix}) {
    for (auto [w, h] : {std::pair{256, 256}, std::pair{300, 700}, std::pair{90, 60}}) {
      const auto out = train_transform(bt::pattern_image(w, h), policy_for_level(level), rng);
      EXPECT_EQ(out.width, 224);
      EXPECT_EQ(out.height, 224);
      EXPECT_EQ(out.channels, 3);
      for (float v : out.pixels) ASSERT_TRUE(v >= 0.0f && v <= 1.0f);
    }
  }
}

TEST(TrainTransform, LevelNoneEqualsEvalTransform) {
  CounterRng rng(3);
  const auto img = bt::pattern_image(300, 260);
  EXPECT_EQ(train_transform(img, policy_for_level(AugLevel::none), rng), eval_transform(img));
}

TEST(TrainTransform, DeterministicPerRngKey) {
  const auto img = bt::pattern_image(300, 260);
  const auto policy = policy_for_level(AugLevel::rand_crop_rand_aug);
  CounterRng a(5), b(5), c(6);
  const auto x = train_transform(img, policy, a);
  EXPECT_EQ(x, train_transform(img, policy, b));
  EXPECT_NE(x, train_transform(img, policy, c));
}

TEST(RandAugment, EveryOpKeepsShapeAndRange) {
  const auto img = bt::pattern_image(64, 48);
  ASSERT_FALSE(rand_augment_op_names().empty());
  for (const auto& op : rand_augment_op_names()) {
    CounterRng rng(9);
    const auto out = apply_rand_augment_op(img, op, 9.0, rng);
    EXPECT_EQ(out.width, 64) << op;
    EXPECT_EQ(out.height, 48) << op;
    for (float v : out.pixels) ASSERT_TRUE(v >= 0.0f && v <= 1.0f) << op;
  }
  CounterRng rng(1);
  EXPECT_THROW(apply_rand_augment_op(img, "no_such_op", 5.0, rng), Error);
}

TEST(Policy, JsonRoundTripAndLevelNames) {
  for (auto level : {AugLevel::none, AugLevel::rand_crop, AugLevel::rand_crop_rand_aug, AugLevel::rand_crop_rand_aug_mix}) {
    EXPECT_EQ(aug_level_from_string(to_string(level)), level);
    const auto p = policy_for_level(level);
    EXPECT_EQ(policy_from_json(policy_to_json(p)), p);
  }
  EXPECT_THROW(aug_level_from_string("strong"), Error);
}

TEST(Mixing, MixupWithLambdaOneIsIdentity) {
  std::vector<Image> inputs{bt::pattern_image(8, 8), bt::constant_image(8, 8, 0.2f), bt::constant_image(8, 8, 0.9f)};
  const std::vector<int> labels{0, 1, 2};
  const auto b = mixup_pair(inputs, labels, 3, 1.0);
  for (std::size_t i = 0; i < inputs.size(); ++i) EXPECT_EQ(b.inputs[i], inputs[i]);
  const auto onehot = one_hot_batch(inputs, labels, 3);
  EXPECT_EQ(b.soft_labels, onehot.soft_labels);
}

TEST(Mixing, MixupBlendsPixelsAndLabels) {
  std::vector<Image> inputs{bt::constant_image(4, 4, 0.0f), bt::constant_image(4, 4, 1.0f)};
  const auto b = mixup_pair(inputs, {0, 1}, 2, 0.75);
  EXPECT_NEAR(b.inputs[0].pixels[0], 0.25f, 1e-6f);
  EXPECT_NEAR(b.inputs[1].pixels[0], 0.75f, 1e-6f);
  EXPECT_NEAR(b.soft_labels[0], 0.75f, 1e-6f);
  EXPECT_NEAR(b.soft_labels[1], 0.25f, 1e-6f);
}

TEST(Mixing, CutmixLabelWeightMatchesPastedArea) {
  std::vector<Image> inputs{bt::constant_image(8, 8, 0.0f), bt::constant_image(8, 8, 1.0f)};
  const CutBox box{2, 1, 5, 6};  // 3x5 = 15 of 64 pixels
  const auto b = cutmix_pair(inputs, {0, 1}, 2, box);
  int pasted = 0;
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) pasted += b.inputs[0].at(x, y, 0) == 1.0f;
  EXPECT_EQ(pasted, 15);
  const double area_fraction = pasted / 64.0;
  EXPECT_NEAR(b.soft_labels[0], 1.0 - area_fraction, 1e-6);
  EXPECT_NEAR(b.soft_labels[1], area_fraction, 1e-6);
  EXPECT_NEAR(b.lambda, 1.0 - area_fraction, 1e-12);
  EXPECT_TRUE(b.used_cutmix);
}

TEST(Mixing, SoftLabelsAlwaysSumToOne) {
  CounterRng rng(77);
  const auto policy = policy_for_level(AugLevel::rand_crop_rand_aug_mix);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_below(6));
    std::vector<Image> inputs;
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) {
      inputs.push_back(bt::constant_image(16, 16, static_cast<float>(rng.uniform01())));
      labels.push_back(static_cast<int>(rng.uniform_below(4)));
    }
    const auto b = mix_batch(inputs, labels, 4, policy, rng);
    ASSERT_EQ(b.soft_labels.size(), static_cast<std::size_t>(n) * 4);
    for (int i = 0; i < n; ++i) {
      double s = 0;
      for (int k = 0; k < 4; ++k) {
        const float v = b.soft_labels[static_cast<std::size_t>(i) * 4 + static_cast<std::size_t>(k)];
        ASSERT_GE(v, 0.0f);
        s += v;
      }
      ASSERT_NEAR(s, 1.0, 1e-6);
    }
    if (n == 1) EXPECT_DOUBLE_EQ(b.lambda, 1.0);
  }
}
