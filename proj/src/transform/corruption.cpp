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

#include "biasaudit/transform/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "biasaudit/core/error.hpp"
#include "biasaudit/core/hash.hpp"
#include "biasaudit/core/rng.hpp"
#include "biasaudit/transform/resample.hpp"

namespace biasaudit::transform {
namespace {

// Mirror index without repeating the edge sample (d c b | a b c d | c b a).
int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

void rgb_to_hsv(float r, float g, float b, float& h, float& s, float& v) {
  const float mx = std::max({r, g, b});
  const float mn = std::min({r, g, b});
  const float d = mx - mn;
  v = mx;
  s = mx > 0.0f ? d / mx : 0.0f;
  if (d <= 0.0f) {
    h = 0.0f;
    return;
  }
  if (mx == r) h = (g - b) / d;
  else if (mx == g) h = 2.0f + (b - r) / d;
  else h = 4.0f + (r - g) / d;
  h /= 6.0f;
  if (h < 0.0f) h += 1.0f;
}

void hsv_to_rgb(float h, float s, float v, float& r, float& g, float& b) {
  const float hh = (h - std::floor(h)) * 6.0f;
  const int i = static_cast<int>(hh) % 6;
  const float f = hh - std::floor(hh);
  const float p = v * (1.0f - s);
  const float q = v * (1.0f - s * f);
  const float t = v * (1.0f - s * (1.0f - f));
  switch (i) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
}

float luma(const float* p) { return 0.299f * p[0] + 0.587f * p[1] + 0.114f * p[2]; }

}  // namespace

std::string_view to_string(CorruptionKind kind) {
  switch (kind) {
    case CorruptionKind::none: return "none";
    case CorruptionKind::color_jitter: return "color_jitter";
    case CorruptionKind::gaussian_noise: return "gaussian_noise";
    case CorruptionKind::gaussian_blur: return "gaussian_blur";
    case CorruptionKind::low_resolution: return "low_resolution";
  }
  return "none";
}

CorruptionKind corruption_kind_from_string(std::string_view name) {
  for (auto k : {CorruptionKind::none, CorruptionKind::color_jitter, CorruptionKind::gaussian_noise,
                 CorruptionKind::gaussian_blur, CorruptionKind::low_resolution}) {
    if (to_string(k) == name) return k;
  }
  throw Error("unknown corruption kind: " + std::string(name));
}

void CorruptionSpec::validate() const {
  if (kind == CorruptionKind::none) return;
  if (!(parameter > 0.0) || !std::isfinite(parameter)) {
    throw Error("non-positive parameter for corruption " + std::string(to_string(kind)));
  }
  if ((kind == CorruptionKind::gaussian_blur || kind == CorruptionKind::low_resolution) &&
      parameter != std::floor(parameter)) {
    throw Error("corruption " + std::string(to_string(kind)) + " needs an integer parameter");
  }
}

std::string CorruptionSpec::label() const {
  if (kind == CorruptionKind::none) return "none";
  char buf[64];
  switch (kind) {
    case CorruptionKind::color_jitter: std::snprintf(buf, sizeof(buf), "color jittering (strength: %.1f)", parameter); break;
    case CorruptionKind::gaussian_noise: std::snprintf(buf, sizeof(buf), "Gaussian noise (std: %.1f)", parameter); break;
    case CorruptionKind::gaussian_blur: std::snprintf(buf, sizeof(buf), "Gaussian blur (radius: %d)", static_cast<int>(parameter)); break;
    default: std::snprintf(buf, sizeof(buf), "low resolution (%dx%d)", static_cast<int>(parameter), static_cast<int>(parameter)); break;
  }
  return buf;
}

nlohmann::json corruption_to_json(const CorruptionSpec& spec) {
  return {{"kind", std::string(to_string(spec.kind))},
          {"parameter", spec.parameter},
          {"seed_base", spec.per_image_seed_base}};
}

CorruptionSpec corruption_from_json(const nlohmann::json& j) {
  CorruptionSpec s;
  s.kind = corruption_kind_from_string(j.value("kind", std::string("none")));
  s.parameter = j.value("parameter", 0.0);
  s.per_image_seed_base = j.value("seed_base", std::uint64_t{0});
  s.validate();
  return s;
}

Image gaussian_blur(const Image& image, int radius) {
  if (radius < 1) throw Error("non-positive parameter for corruption gaussian_blur");
  const double sigma = radius / 2.0;
  std::vector<float> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double v = std::exp(-0.5 * k * k / (sigma * sigma));
    kernel[static_cast<std::size_t>(k + radius)] = static_cast<float>(v);
    total += v;
  }
  for (float& v : kernel) v = static_cast<float>(v / total);

  const int w = image.width;
  const int h = image.height;
  const int c = image.channels;
  Image tmp(w, h, c);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        float acc = 0.0f;
        for (int k = -radius; k <= radius; ++k) acc += kernel[static_cast<std::size_t>(k + radius)] * image.at(reflect(x + k, w), y, ch);
        tmp.at(x, y, ch) = acc;
      }
    }
  }
  Image out(w, h, c);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        float acc = 0.0f;
        for (int k = -radius; k <= radius; ++k) acc += kernel[static_cast<std::size_t>(k + radius)] * tmp.at(x, reflect(y + k, h), ch);
        out.at(x, y, ch) = acc;
      }
    }
  }
  clamp01(out);
  return out;
}

Image color_jitter(const Image& image, double brightness, double contrast, double saturation, double hue_shift) {
  if (image.channels != 3) throw Error("color jitter needs a 3-channel image");
  Image out = image;
  const auto b = static_cast<float>(brightness);
  for (float& v : out.pixels) v = std::clamp(v * b, 0.0f, 1.0f);

  const std::size_t n = static_cast<std::size_t>(out.width) * out.height;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += luma(&out.pixels[i * 3]);
  const auto m = static_cast<float>(mean / static_cast<double>(n));
  const auto cf = static_cast<float>(contrast);
  for (float& v : out.pixels) v = std::clamp(m + cf * (v - m), 0.0f, 1.0f);

  const auto sf = static_cast<float>(saturation);
  for (std::size_t i = 0; i < n; ++i) {
    float* p = &out.pixels[i * 3];
    const float g = luma(p);
    for (int ch = 0; ch < 3; ++ch) p[ch] = std::clamp(g + sf * (p[ch] - g), 0.0f, 1.0f);
  }

  if (hue_shift != 0.0) {
    const auto hs = static_cast<float>(hue_shift);
    for (std::size_t i = 0; i < n; ++i) {
      float* p = &out.pixels[i * 3];
      float hh = 0.0f, s = 0.0f, v = 0.0f;
      rgb_to_hsv(p[0], p[1], p[2], hh, s, v);
      hsv_to_rgb(hh + hs, s, v, p[0], p[1], p[2]);
    }
  }
  clamp01(out);
  return out;
}

Image apply_corruption(const Image& image, const CorruptionSpec& spec, std::string_view image_id) {
  spec.validate();
  if (spec.kind == CorruptionKind::none) return image;
  if (image.channels != 3) throw Error("corruption expects a 3-channel image");
  CounterRng rng(hash64(spec.per_image_seed_base, image_id));
  switch (spec.kind) {
    case CorruptionKind::color_jitter: {
      const double s = spec.parameter;
      const double lo = std::max(0.0, 1.0 - 0.4 * s);
      const double hi = 1.0 + 0.4 * s;
      const double b = rng.uniform(lo, hi);
      const double c = rng.uniform(lo, hi);
      const double sat = rng.uniform(lo, hi);
      const double hue = rng.uniform(-0.1 * s, 0.1 * s);
      return color_jitter(image, b, c, sat, hue);
    }
    case CorruptionKind::gaussian_noise: {
      Image out = image;
      for (float& v : out.pixels) {
        v = std::clamp(static_cast<float>(v + spec.parameter * rng.normal()), 0.0f, 1.0f);
      }
      return out;
    }
    case CorruptionKind::gaussian_blur:
      return gaussian_blur(image, static_cast<int>(spec.parameter));
    case CorruptionKind::low_resolution: {
      const int side = static_cast<int>(spec.parameter);
      Image small = resize_bilinear(image, side, side);
      Image out = resize_bilinear(small, image.width, image.height);
      clamp01(out);
      return out;
    }
    case CorruptionKind::none: break;
  }
  return image;
}

}  // namespace biasaudit::transform
