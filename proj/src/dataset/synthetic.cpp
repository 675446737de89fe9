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

#include "biasaudit/dataset/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "biasaudit/core/error.hpp"
#include "biasaudit/core/hash.hpp"
#include "biasaudit/core/rng.hpp"

namespace biasaudit::dataset {
namespace {

constexpr std::string_view kScheme = "synthetic://shapes";

using Color = std::array<float, 3>;

Color random_color(CounterRng& rng, const SyntheticStyle& style) {
  Color c{};
  for (float& v : c) v = static_cast<float>(rng.uniform01());
  const float gray = (c[0] + c[1] + c[2]) / 3.0f;
  for (float& v : c) {
    v = gray + static_cast<float>(style.saturation) * (v - gray) + static_cast<float>(style.brightness);
    v = std::clamp(v, 0.0f, 1.0f);
  }
  return c;
}

void paint(Image& img, int x, int y, const Color& c) {
  float* p = &img.pixels[img.index(x, y, 0)];
  p[0] = c[0];
  p[1] = c[1];
  p[2] = c[2];
}

}  // namespace

std::string SyntheticStyle::to_uri() const {
  std::ostringstream os;
  os << kScheme << "?seed=" << seed << "&min_side=" << min_side << "&max_side=" << max_side
     << "&shapes=" << mean_shapes << "&saturation=" << saturation << "&brightness=" << brightness;
  return os.str();
}

SyntheticStyle SyntheticStyle::from_uri(const std::string& uri) {
  if (!is_synthetic_uri(uri)) throw Error("not a synthetic uri: " + uri);
  SyntheticStyle s;
  const auto q = uri.find('?');
  if (q == std::string::npos) return s;
  std::istringstream params(uri.substr(q + 1));
  std::string kv;
  while (std::getline(params, kv, '&')) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error("malformed synthetic uri parameter: " + kv);
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    try {
      if (key == "seed") s.seed = std::stoull(value);
      else if (key == "min_side") s.min_side = std::stoi(value);
      else if (key == "max_side") s.max_side = std::stoi(value);
      else if (key == "shapes") s.mean_shapes = std::stoi(value);
      else if (key == "saturation") s.saturation = std::stod(value);
      else if (key == "brightness") s.brightness = std::stod(value);
      else throw Error("unknown synthetic uri parameter: " + key);
    } catch (const std::logic_error&) {
      throw Error("malformed synthetic uri parameter: " + kv);
    }
  }
  if (s.min_side < 1 || s.max_side < s.min_side) throw Error("invalid synthetic image size range");
  return s;
}

bool is_synthetic_uri(const std::string& uri) { return uri.rfind(kScheme, 0) == 0; }

DatasetManifest make_synthetic_manifest(const std::string& dataset_id, std::size_t count,
                                        const SyntheticStyle& style) {
  DatasetManifest m;
  m.dataset_id = dataset_id;
  m.display_name = dataset_id;
  m.root_uri = style.to_uri();
  m.notes = "procedural images";
  m.images.reserve(count);
  const auto span = static_cast<std::uint64_t>(style.max_side - style.min_side + 1);
  for (std::size_t i = 0; i < count; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "img_%06zu", i);
    CounterRng rng(hash64(style.seed ^ 0x5157ULL, std::string_view(id)));
    ImageRecord r;
    r.image_id = id;
    r.relative_path = std::string(id) + ".png";
    r.width = style.min_side + static_cast<int>(rng.uniform_below(span));
    r.height = style.min_side + static_cast<int>(rng.uniform_below(span));
    m.images.push_back(std::move(r));
  }
  finalize_manifest(m);
  return m;
}

Image render_synthetic(const SyntheticStyle& style, const ImageRecord& record) {
  const int w = record.width;
  const int h = record.height;
  if (w < 1 || h < 1) throw Error("invalid synthetic record size");
  CounterRng rng(hash64(style.seed, record.image_id));
  Image img(w, h, 3);

  const Color c0 = random_color(rng, style);
  const Color c1 = random_color(rng, style);
  const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  const double extent = std::abs(ct) * w + std::abs(st) * h;
  const double base = std::min(0.0, ct * w) + std::min(0.0, st * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float t = static_cast<float>((ct * x + st * y - base) / extent);
      paint(img, x, y, {c0[0] + t * (c1[0] - c0[0]), c0[1] + t * (c1[1] - c0[1]), c0[2] + t * (c1[2] - c0[2])});
    }
  }

  const int m = std::max(1, style.mean_shapes);
  const int shapes = m / 2 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(m) + 1));
  const int min_dim = std::min(w, h);
  for (int s = 0; s < shapes; ++s) {
    const int kind = static_cast<int>(rng.uniform_below(3));
    const Color color = random_color(rng, style);
    const double cx = rng.uniform(0.0, w);
    const double cy = rng.uniform(0.0, h);
    const double rx = rng.uniform(0.05, 0.3) * min_dim;
    const double ry = rng.uniform(0.05, 0.3) * min_dim;
    const int x0 = std::max(0, static_cast<int>(cx - rx));
    const int x1 = std::min(w - 1, static_cast<int>(cx + rx));
    const int y0 = std::max(0, static_cast<int>(cy - ry));
    const int y1 = std::min(h - 1, static_cast<int>(cy + ry));
    if (kind == 0) {
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) paint(img, x, y, color);
    } else if (kind == 1) {
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const double dx = (x + 0.5 - cx) / rx;
          const double dy = (y + 0.5 - cy) / ry;
          if (dx * dx + dy * dy <= 1.0) paint(img, x, y, color);
        }
      }
    } else {
      const Color other = random_color(rng, style);
      const double period = rng.uniform(4.0, 16.0);
      const double phi = rng.uniform(0.0, std::numbers::pi);
      const double px = std::cos(phi) / period;
      const double py = std::sin(phi) / period;
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const double u = x * px + y * py;
          paint(img, x, y, (u - std::floor(u)) < 0.5 ? color : other);
        }
      }
    }
  }
  return img;
}

}  // namespace biasaudit::dataset
