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

#include "biasaudit/transform/augment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "biasaudit/core/error.hpp"
#include "biasaudit/transform/corruption.hpp"
#include "biasaudit/transform/resample.hpp"

namespace biasaudit::transform {
namespace {

constexpr std::array<float, 3> kFill = {124.0f / 255.0f, 116.0f / 255.0f, 104.0f / 255.0f};

// Maps each output pixel through the inverse affine (a b c; d e f) and samples
// bilinearly; samples outside the image take the fill color.
Image affine_inverse(const Image& src, double a, double b, double c, double d, double e, double f) {
  Image out(src.width, src.height, src.channels);
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      const double ox = x + 0.5;
      const double oy = y + 0.5;
      const double sx = a * ox + b * oy + c - 0.5;
      const double sy = d * ox + e * oy + f - 0.5;
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const float fx = static_cast<float>(sx - x0);
      const float fy = static_cast<float>(sy - y0);
      for (int ch = 0; ch < src.channels; ++ch) {
        auto sample = [&](int xx, int yy) {
          if (xx < 0 || yy < 0 || xx >= src.width || yy >= src.height) return kFill[static_cast<std::size_t>(ch % 3)];
          return src.at(xx, yy, ch);
        };
        const float top = sample(x0, y0) * (1 - fx) + sample(x0 + 1, y0) * fx;
        const float bot = sample(x0, y0 + 1) * (1 - fx) + sample(x0 + 1, y0 + 1) * fx;
        out.at(x, y, ch) = top * (1 - fy) + bot * fy;
      }
    }
  }
  return out;
}

Image blend(const Image& degenerate, const Image& image, float factor) {
  Image out = image;
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    out.pixels[i] = std::clamp(degenerate.pixels[i] + factor * (image.pixels[i] - degenerate.pixels[i]), 0.0f, 1.0f);
  }
  return out;
}

Image grayscale3(const Image& image) {
  Image out = image;
  const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
  for (std::size_t i = 0; i < n; ++i) {
    const float* p = &image.pixels[i * 3];
    const float g = 0.299f * p[0] + 0.587f * p[1] + 0.114f * p[2];
    out.pixels[i * 3] = out.pixels[i * 3 + 1] = out.pixels[i * 3 + 2] = g;
  }
  return out;
}

int to_u8(float v) { return static_cast<int>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)); }

Image equalize(const Image& image) {
  Image out = image;
  const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
  for (int ch = 0; ch < image.channels; ++ch) {
    std::array<long, 256> hist{};
    for (std::size_t i = 0; i < n; ++i) ++hist[static_cast<std::size_t>(to_u8(image.pixels[i * image.channels + ch]))];
    long last = 0;
    for (int v = 255; v >= 0; --v) {
      if (hist[static_cast<std::size_t>(v)] > 0) {
        last = hist[static_cast<std::size_t>(v)];
        break;
      }
    }
    const long step = (static_cast<long>(n) - last) / 255;
    if (step == 0) continue;
    std::array<float, 256> lut{};
    long acc = step / 2;
    for (int v = 0; v < 256; ++v) {
      lut[static_cast<std::size_t>(v)] = static_cast<float>(std::min(255L, acc / step)) / 255.0f;
      acc += hist[static_cast<std::size_t>(v)];
    }
    for (std::size_t i = 0; i < n; ++i) {
      float& p = out.pixels[i * image.channels + ch];
      p = lut[static_cast<std::size_t>(to_u8(p))];
    }
  }
  return out;
}

Image sharpness(const Image& image, float factor) {
  Image smooth = image;
  for (int y = 1; y + 1 < image.height; ++y) {
    for (int x = 1; x + 1 < image.width; ++x) {
      for (int ch = 0; ch < image.channels; ++ch) {
        float acc = 0.0f;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) acc += image.at(x + dx, y + dy, ch) * ((dx == 0 && dy == 0) ? 5.0f : 1.0f);
        smooth.at(x, y, ch) = acc / 13.0f;
      }
    }
  }
  return blend(smooth, image, factor);
}

double signed_magnitude(double value, CounterRng& rng) { return rng.bernoulli(0.5) ? -value : value; }

}  // namespace

std::string_view to_string(AugLevel level) {
  switch (level) {
    case AugLevel::none: return "none";
    case AugLevel::rand_crop: return "rand_crop";
    case AugLevel::rand_crop_rand_aug: return "rand_crop+rand_aug";
    case AugLevel::rand_crop_rand_aug_mix: return "rand_crop+rand_aug+mix";
  }
  return "none";
}

AugLevel aug_level_from_string(std::string_view name) {
  for (auto l : {AugLevel::none, AugLevel::rand_crop, AugLevel::rand_crop_rand_aug, AugLevel::rand_crop_rand_aug_mix}) {
    if (to_string(l) == name) return l;
  }
  throw Error("unknown augmentation level: " + std::string(name));
}

AugmentationPolicy policy_for_level(AugLevel level) {
  AugmentationPolicy p;
  p.level = level;
  return p;
}

nlohmann::json policy_to_json(const AugmentationPolicy& p) {
  return {{"level", std::string(to_string(p.level))},
          {"rand_aug_ops", p.rand_aug_ops},
          {"rand_aug_magnitude", p.rand_aug_magnitude},
          {"rand_aug_prob", p.rand_aug_prob},
          {"mixup_alpha", p.mixup_alpha},
          {"cutmix_alpha", p.cutmix_alpha},
          {"cutmix_switch_prob", p.cutmix_switch_prob},
          {"crop_scale", {p.crop_scale_min, p.crop_scale_max}},
          {"crop_ratio", {p.crop_ratio_min, p.crop_ratio_max}}};
}

AugmentationPolicy policy_from_json(const nlohmann::json& j) {
  AugmentationPolicy p;
  p.level = aug_level_from_string(j.value("level", std::string(to_string(p.level))));
  p.rand_aug_ops = j.value("rand_aug_ops", p.rand_aug_ops);
  p.rand_aug_magnitude = j.value("rand_aug_magnitude", p.rand_aug_magnitude);
  p.rand_aug_prob = j.value("rand_aug_prob", p.rand_aug_prob);
  p.mixup_alpha = j.value("mixup_alpha", p.mixup_alpha);
  p.cutmix_alpha = j.value("cutmix_alpha", p.cutmix_alpha);
  p.cutmix_switch_prob = j.value("cutmix_switch_prob", p.cutmix_switch_prob);
  if (j.contains("crop_scale")) {
    p.crop_scale_min = j["crop_scale"].at(0).get<double>();
    p.crop_scale_max = j["crop_scale"].at(1).get<double>();
  }
  if (j.contains("crop_ratio")) {
    p.crop_ratio_min = j["crop_ratio"].at(0).get<double>();
    p.crop_ratio_max = j["crop_ratio"].at(1).get<double>();
  }
  if (p.mixup_alpha <= 0.0 || p.cutmix_alpha <= 0.0) throw Error("mixing alphas must be positive");
  return p;
}

Image eval_transform(const Image& image) {
  return center_crop(resize_shorter_side(image, kEvalResize), kInputSize, kInputSize);
}

Image random_resized_crop(const Image& image, const AugmentationPolicy& policy, CounterRng& rng) {
  const int W = image.width;
  const int H = image.height;
  const double area = static_cast<double>(W) * H;
  const double log_lo = std::log(policy.crop_ratio_min);
  const double log_hi = std::log(policy.crop_ratio_max);
  for (int attempt = 0; attempt < 10; ++attempt) {
    const double target = area * rng.uniform(policy.crop_scale_min, policy.crop_scale_max);
    const double aspect = std::exp(rng.uniform(log_lo, log_hi));
    const int w = static_cast<int>(std::lround(std::sqrt(target * aspect)));
    const int h = static_cast<int>(std::lround(std::sqrt(target / aspect)));
    if (w > 0 && h > 0 && w <= W && h <= H) {
      const int y = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(H - h + 1)));
      const int x = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(W - w + 1)));
      return resize_bilinear(crop(image, x, y, w, h), kInputSize, kInputSize);
    }
  }
  const double ratio = static_cast<double>(W) / H;
  int w = W;
  int h = H;
  if (ratio < policy.crop_ratio_min) {
    h = static_cast<int>(std::lround(W / policy.crop_ratio_min));
  } else if (ratio > policy.crop_ratio_max) {
    w = static_cast<int>(std::lround(H * policy.crop_ratio_max));
  }
  w = std::clamp(w, 1, W);
  h = std::clamp(h, 1, H);
  return resize_bilinear(center_crop(image, w, h), kInputSize, kInputSize);
}

const std::vector<std::string>& rand_augment_op_names() {
  static const std::vector<std::string> kOps = {
      "AutoContrast", "Equalize", "Invert", "Rotate", "Posterize", "Solarize", "SolarizeAdd", "Color",
      "Contrast", "Brightness", "Sharpness", "ShearX", "ShearY", "TranslateXRel", "TranslateYRel"};
  return kOps;
}

Image apply_rand_augment_op(const Image& image, std::string_view op, double magnitude, CounterRng& rng) {
  const double level = std::clamp(magnitude, 0.0, 10.0) / 10.0;
  const auto enhance = static_cast<float>(level * 1.8 + 0.1);
  const double cx = image.width / 2.0;
  const double cy = image.height / 2.0;
  if (op == "AutoContrast") {
    Image out = image;
    for (int ch = 0; ch < image.channels; ++ch) {
      float lo = 1.0f, hi = 0.0f;
      for (std::size_t i = static_cast<std::size_t>(ch); i < image.pixels.size(); i += static_cast<std::size_t>(image.channels)) {
        lo = std::min(lo, image.pixels[i]);
        hi = std::max(hi, image.pixels[i]);
      }
      if (hi <= lo) continue;
      for (std::size_t i = static_cast<std::size_t>(ch); i < out.pixels.size(); i += static_cast<std::size_t>(image.channels)) {
        out.pixels[i] = (out.pixels[i] - lo) / (hi - lo);
      }
    }
    return out;
  }
  if (op == "Equalize") return equalize(image);
  if (op == "Invert") {
    Image out = image;
    for (float& v : out.pixels) v = 1.0f - v;
    return out;
  }
  if (op == "Rotate") {
    const double deg = signed_magnitude(30.0 * level, rng);
    const double t = deg * std::numbers::pi / 180.0;
    const double c = std::cos(t), s = std::sin(t);
    // Inverse rotation about the image center.
    return affine_inverse(image, c, s, cx - c * cx - s * cy, -s, c, cy + s * cx - c * cy);
  }
  if (op == "Posterize") {
    const int bits = std::max(1, static_cast<int>(level * 4.0));
    const int mask = ~((1 << (8 - bits)) - 1) & 0xFF;
    Image out = image;
    for (float& v : out.pixels) v = static_cast<float>(to_u8(v) & mask) / 255.0f;
    return out;
  }
  if (op == "Solarize") {
    const auto threshold = static_cast<float>(level);
    Image out = image;
    for (float& v : out.pixels) if (v >= threshold) v = 1.0f - v;
    return out;
  }
  if (op == "SolarizeAdd") {
    const auto add = static_cast<float>(level * 110.0 / 255.0);
    Image out = image;
    for (float& v : out.pixels) if (v < 128.0f / 255.0f) v = std::min(1.0f, v + add);
    return out;
  }
  if (op == "Color") return blend(grayscale3(image), image, enhance);
  if (op == "Contrast") {
    const Image gray = grayscale3(image);
    double mean = 0.0;
    for (float v : gray.pixels) mean += v;
    Image degenerate(image.width, image.height, image.channels,
                     static_cast<float>(mean / static_cast<double>(gray.pixels.size())));
    return blend(degenerate, image, enhance);
  }
  if (op == "Brightness") {
    Image black(image.width, image.height, image.channels, 0.0f);
    return blend(black, image, enhance);
  }
  if (op == "Sharpness") return sharpness(image, enhance);
  if (op == "ShearX") return affine_inverse(image, 1, signed_magnitude(0.3 * level, rng), 0, 0, 1, 0);
  if (op == "ShearY") return affine_inverse(image, 1, 0, 0, signed_magnitude(0.3 * level, rng), 1, 0);
  if (op == "TranslateXRel") return affine_inverse(image, 1, 0, signed_magnitude(0.45 * level, rng) * image.width, 0, 1, 0);
  if (op == "TranslateYRel") return affine_inverse(image, 1, 0, 0, 0, 1, signed_magnitude(0.45 * level, rng) * image.height);
  throw Error("unknown RandAugment op: " + std::string(op));
}

Image rand_augment(const Image& image, const AugmentationPolicy& policy, CounterRng& rng) {
  const auto& ops = rand_augment_op_names();
  Image out = image;
  for (int i = 0; i < policy.rand_aug_ops; ++i) {
    const auto& op = ops[static_cast<std::size_t>(rng.uniform_below(ops.size()))];
    if (!rng.bernoulli(policy.rand_aug_prob)) continue;
    out = apply_rand_augment_op(out, op, policy.rand_aug_magnitude, rng);
  }
  clamp01(out);
  return out;
}

Image train_transform(const Image& image, const AugmentationPolicy& policy, CounterRng& rng) {
  if (image.width < 1 || image.height < 1) throw Error("empty image");
  if (!policy.uses_crop()) return eval_transform(image);
  const Image& source = std::min(image.width, image.height) < kInputSize ? resize_shorter_side(image, kInputSize) : image;
  Image out = random_resized_crop(source, policy, rng);
  if (policy.uses_rand_aug()) out = rand_augment(out, policy, rng);
  return out;
}

MixedBatch one_hot_batch(std::vector<Image> inputs, const std::vector<int>& labels, int num_classes) {
  if (inputs.size() != labels.size()) throw Error("batch inputs and labels differ in size");
  MixedBatch b;
  b.num_classes = num_classes;
  b.soft_labels.assign(inputs.size() * static_cast<std::size_t>(num_classes), 0.0f);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) throw Error("label out of range");
    b.soft_labels[i * static_cast<std::size_t>(num_classes) + static_cast<std::size_t>(labels[i])] = 1.0f;
  }
  b.inputs = std::move(inputs);
  return b;
}

namespace {

void mix_labels(MixedBatch& b, const std::vector<int>& labels, double lambda) {
  const std::size_t n = labels.size();
  const auto k = static_cast<std::size_t>(b.num_classes);
  std::fill(b.soft_labels.begin(), b.soft_labels.end(), 0.0f);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = n - 1 - i;
    b.soft_labels[i * k + static_cast<std::size_t>(labels[i])] += static_cast<float>(lambda);
    b.soft_labels[i * k + static_cast<std::size_t>(labels[j])] += static_cast<float>(1.0 - lambda);
  }
  b.lambda = lambda;
}

}  // namespace

MixedBatch mixup_pair(std::vector<Image> inputs, const std::vector<int>& labels, int num_classes, double lambda) {
  MixedBatch b = one_hot_batch(std::move(inputs), labels, num_classes);
  const std::size_t n = b.inputs.size();
  if (n < 2) return b;
  const std::vector<Image> original = b.inputs;
  const auto lam = static_cast<float>(lambda);
  for (std::size_t i = 0; i < n; ++i) {
    const Image& other = original[n - 1 - i];
    if (other.pixels.size() != b.inputs[i].pixels.size()) throw Error("mixup needs equally sized inputs");
    for (std::size_t p = 0; p < other.pixels.size(); ++p) {
      b.inputs[i].pixels[p] = lam * original[i].pixels[p] + (1.0f - lam) * other.pixels[p];
    }
  }
  mix_labels(b, labels, lambda);
  return b;
}

MixedBatch cutmix_pair(std::vector<Image> inputs, const std::vector<int>& labels, int num_classes, const CutBox& box) {
  MixedBatch b = one_hot_batch(std::move(inputs), labels, num_classes);
  const std::size_t n = b.inputs.size();
  b.used_cutmix = true;
  if (n < 2) return b;
  const Image& first = b.inputs.front();
  if (box.x0 < 0 || box.y0 < 0 || box.x1 > first.width || box.y1 > first.height || box.x1 < box.x0 || box.y1 < box.y0) {
    throw Error("cutmix box outside image");
  }
  const std::vector<Image> original = b.inputs;
  for (std::size_t i = 0; i < n; ++i) {
    const Image& other = original[n - 1 - i];
    if (other.width != first.width || other.height != first.height) throw Error("cutmix needs equally sized inputs");
    for (int y = box.y0; y < box.y1; ++y)
      for (int x = box.x0; x < box.x1; ++x)
        for (int c = 0; c < other.channels; ++c) b.inputs[i].at(x, y, c) = other.at(x, y, c);
  }
  const double lambda = 1.0 - static_cast<double>(box.area()) / (static_cast<double>(first.width) * first.height);
  mix_labels(b, labels, lambda);
  return b;
}

MixedBatch mix_batch(std::vector<Image> inputs, const std::vector<int>& labels, int num_classes,
                     const AugmentationPolicy& policy, CounterRng& rng) {
  if (inputs.size() < 2) return one_hot_batch(std::move(inputs), labels, num_classes);
  if (rng.bernoulli(policy.cutmix_switch_prob)) {
    const double lam = rng.beta(policy.cutmix_alpha, policy.cutmix_alpha);
    const int W = inputs.front().width;
    const int H = inputs.front().height;
    const double ratio = std::sqrt(1.0 - lam);
    const int cut_w = static_cast<int>(W * ratio);
    const int cut_h = static_cast<int>(H * ratio);
    const int cx = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(W)));
    const int cy = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(H)));
    CutBox box{std::clamp(cx - cut_w / 2, 0, W), std::clamp(cy - cut_h / 2, 0, H),
               std::clamp(cx + cut_w / 2, 0, W), std::clamp(cy + cut_h / 2, 0, H)};
    return cutmix_pair(std::move(inputs), labels, num_classes, box);
  }
  const double lam = rng.beta(policy.mixup_alpha, policy.mixup_alpha);
  return mixup_pair(std::move(inputs), labels, num_classes, lam);
}

}  // namespace biasaudit::transform
