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

#include "biasaudit/transform/resample.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "biasaudit/core/error.hpp"

namespace biasaudit::transform {
namespace {

struct Taps {
  std::vector<int> first;
  std::vector<int> count;
  std::vector<float> weights;  // count[i] entries per output, packed
  std::vector<std::size_t> offset;
};

Taps compute_taps(int in_size, int out_size) {
  const double scale = static_cast<double>(in_size) / out_size;
  const double support = std::max(scale, 1.0);
  Taps taps;
  taps.first.resize(static_cast<std::size_t>(out_size));
  taps.count.resize(static_cast<std::size_t>(out_size));
  taps.offset.resize(static_cast<std::size_t>(out_size));
  for (int i = 0; i < out_size; ++i) {
    const double center = (i + 0.5) * scale;
    const int lo = std::max(0, static_cast<int>(std::floor(center - support)));
    const int hi = std::min(in_size - 1, static_cast<int>(std::ceil(center + support)));
    std::vector<double> w;
    double total = 0.0;
    int first = -1;
    for (int j = lo; j <= hi; ++j) {
      const double t = std::abs((j + 0.5 - center) / support);
      const double v = t < 1.0 ? 1.0 - t : 0.0;
      if (v <= 0.0 && first < 0) continue;
      if (first < 0) first = j;
      w.push_back(v);
      total += v;
    }
    while (!w.empty() && w.back() <= 0.0) w.pop_back();
    if (first < 0 || total <= 0.0) {
      // Degenerate only for out_size > 0 with an empty input; guarded by callers.
      first = std::clamp(static_cast<int>(center), 0, in_size - 1);
      w.assign(1, 1.0);
      total = 1.0;
    }
    taps.first[static_cast<std::size_t>(i)] = first;
    taps.count[static_cast<std::size_t>(i)] = static_cast<int>(w.size());
    taps.offset[static_cast<std::size_t>(i)] = taps.weights.size();
    for (double v : w) taps.weights.push_back(static_cast<float>(v / total));
  }
  return taps;
}

}  // namespace

Image resize_bilinear(const Image& src, int out_width, int out_height) {
  if (src.width < 1 || src.height < 1) throw Error("resize of empty image");
  if (out_width < 1 || out_height < 1) throw Error("resize to empty size");
  if (out_width == src.width && out_height == src.height) return src;

  const int c = src.channels;
  const Taps tx = compute_taps(src.width, out_width);
  const Taps ty = compute_taps(src.height, out_height);

  Image horizontal(out_width, src.height, c);
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      const auto xi = static_cast<std::size_t>(x);
      const float* w = &tx.weights[tx.offset[xi]];
      for (int ch = 0; ch < c; ++ch) {
        float acc = 0.0f;
        for (int k = 0; k < tx.count[xi]; ++k) acc += w[k] * src.at(tx.first[xi] + k, y, ch);
        horizontal.at(x, y, ch) = acc;
      }
    }
  }
  Image out(out_width, out_height, c);
  for (int y = 0; y < out_height; ++y) {
    const auto yi = static_cast<std::size_t>(y);
    const float* w = &ty.weights[ty.offset[yi]];
    for (int x = 0; x < out_width; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        float acc = 0.0f;
        for (int k = 0; k < ty.count[yi]; ++k) acc += w[k] * horizontal.at(x, ty.first[yi] + k, ch);
        out.at(x, y, ch) = acc;
      }
    }
  }
  return out;
}

Image crop(const Image& src, int x, int y, int width, int height) {
  if (x < 0 || y < 0 || width < 1 || height < 1 || x + width > src.width || y + height > src.height) {
    throw Error("crop window outside image");
  }
  Image out(width, height, src.channels);
  const std::size_t row = static_cast<std::size_t>(width) * src.channels;
  for (int r = 0; r < height; ++r) {
    std::copy_n(&src.pixels[src.index(x, y + r, 0)], row, &out.pixels[out.index(0, r, 0)]);
  }
  return out;
}

Image resize_shorter_side(const Image& src, int target) {
  if (src.width < 1 || src.height < 1) throw Error("resize of empty image");
  int w = target;
  int h = target;
  if (src.width <= src.height) {
    h = static_cast<int>(static_cast<long long>(target) * src.height / src.width);
  } else {
    w = static_cast<int>(static_cast<long long>(target) * src.width / src.height);
  }
  return resize_bilinear(src, w, h);
}

Image center_crop(const Image& src, int width, int height) {
  const int x = static_cast<int>(std::lround((src.width - width) / 2.0));
  const int y = static_cast<int>(std::lround((src.height - height) / 2.0));
  return crop(src, x, y, width, height);
}

Image flip_horizontal(const Image& src) {
  Image out(src.width, src.height, src.channels);
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      for (int c = 0; c < src.channels; ++c) out.at(x, y, c) = src.at(src.width - 1 - x, y, c);
    }
  }
  return out;
}

void clamp01(Image& image) {
  for (float& v : image.pixels) v = std::clamp(v, 0.0f, 1.0f);
}

}  // namespace biasaudit::transform
