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

#include "biasaudit/dataset/image_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>

#include <opencv2/imgcodecs.hpp>

#include "biasaudit/core/error.hpp"

namespace biasaudit::dataset {
namespace {

Image from_mat(const cv::Mat& mat) {
  if (mat.empty()) throw Error("undecodable image");
  const int channels = mat.channels();
  if (channels != 1 && channels != 3 && channels != 4) throw Error("unsupported channel count");
  double scale = 1.0;
  switch (mat.depth()) {
    case CV_8U: scale = 1.0 / 255.0; break;
    case CV_16U: scale = 1.0 / 65535.0; break;
    case CV_32F: scale = 1.0; break;
    default: throw Error("unsupported pixel depth");
  }
  cv::Mat f;
  mat.convertTo(f, CV_MAKETYPE(CV_32F, channels), scale);
  Image out(f.cols, f.rows, channels);
  for (int y = 0; y < f.rows; ++y) {
    const float* row = f.ptr<float>(y);
    for (int x = 0; x < f.cols; ++x) {
      for (int c = 0; c < channels; ++c) {
        // OpenCV stores BGR(A); swap to RGB(A).
        int src_c = c;
        if (channels >= 3 && c < 3) src_c = 2 - c;
        out.at(x, y, c) = std::clamp(row[x * channels + src_c], 0.0f, 1.0f);
      }
    }
  }
  return out;
}

cv::Mat to_mat(const Image& image) {
  if (image.channels != 1 && image.channels != 3 && image.channels != 4) {
    throw Error("unsupported channel count for encoding");
  }
  cv::Mat mat(image.height, image.width, CV_MAKETYPE(CV_8U, image.channels));
  for (int y = 0; y < image.height; ++y) {
    auto* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < image.channels; ++c) {
        int dst_c = c;
        if (image.channels >= 3 && c < 3) dst_c = 2 - c;
        const float v = std::clamp(image.at(x, y, c), 0.0f, 1.0f);
        row[x * image.channels + dst_c] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
      }
    }
  }
  return mat;
}

}  // namespace

Image decode_image_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open image: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_image_bytes(bytes);
}

Image decode_image_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw Error("undecodable image");
  cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8U, const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat mat;
  try {
    mat = cv::imdecode(buf, cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception&) {
    throw Error("undecodable image");
  }
  return from_mat(mat);
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", to_mat(image), out)) throw Error("png encoding failed");
  return out;
}

void write_png(const Image& image, const std::filesystem::path& path) {
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write image: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

bool has_image_extension(const std::filesystem::path& path) {
  static constexpr std::array<std::string_view, 8> kExt = {".jpg", ".jpeg", ".png", ".bmp",
                                                           ".ppm", ".pgm", ".webp", ".tif"};
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return std::find(kExt.begin(), kExt.end(), ext) != kExt.end();
}

}  // namespace biasaudit::dataset
