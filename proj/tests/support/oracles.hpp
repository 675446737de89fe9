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

#pragma once

// Independent reference implementations used to check library results.
// Nothing here calls into the code under test except plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "biasaudit/core/image.hpp"

namespace biasaudit::oracle {

/// Direct 2-D triangle-filter resampling: every output pixel sums over every
/// input pixel, so it shares no structure with a separable implementation.
inline Image triangle_resample(const Image& src, int ow, int oh) {
  Image out(ow, oh, src.channels);
  const double sx = static_cast<double>(src.width) / ow;
  const double sy = static_cast<double>(src.height) / oh;
  const double supx = std::max(1.0, sx), supy = std::max(1.0, sy);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      const double cx = (ox + 0.5) * sx - 0.5;
      const double cy = (oy + 0.5) * sy - 0.5;
      for (int c = 0; c < src.channels; ++c) {
        double acc = 0.0, wsum = 0.0;
        for (int iy = 0; iy < src.height; ++iy) {
          for (int ix = 0; ix < src.width; ++ix) {
            const double w = std::max(0.0, 1.0 - std::abs(ix - cx) / supx) * std::max(0.0, 1.0 - std::abs(iy - cy) / supy);
            acc += w * src.at(ix, iy, c);
            wsum += w;
          }
        }
        out.at(ox, oy, c) = static_cast<float>(acc / wsum);
      }
    }
  }
  return out;
}

/// Monte-Carlo std of clip(mean + N(0, sigma^2), 0, 1) using the standard library.
inline double clipped_noise_std(double mean, double sigma, int samples, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  double s = 0, s2 = 0;
  for (int i = 0; i < samples; ++i) {
    const double v = std::clamp(mean + normal(gen), 0.0, 1.0);
    s += v;
    s2 += v * v;
  }
  const double m = s / samples;
  return std::sqrt(s2 / samples - m * m);
}

inline double pixel_std(const Image& img) {
  const double n = static_cast<double>(img.pixels.size());
  double s = 0, s2 = 0;
  for (float v : img.pixels) {
    s += v;
    s2 += static_cast<double>(v) * v;
  }
  const double m = s / n;
  return std::sqrt(s2 / n - m * m);
}

/// Closed-form least squares onto one-hot targets (with bias), argmax decode.
/// Features are [dim, n]. Returns held-out accuracy in percent.
inline double least_squares_accuracy(const Eigen::MatrixXf& train_x, const std::vector<int>& train_y,
                                     const Eigen::MatrixXf& val_x, const std::vector<int>& val_y, int k) {
  const long n = train_x.cols();
  Eigen::MatrixXd x(train_x.rows() + 1, n);
  x.topRows(train_x.rows()) = train_x.cast<double>();
  x.bottomRows(1).setOnes();
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(k, n);
  for (long i = 0; i < n; ++i) y(train_y[static_cast<std::size_t>(i)], i) = 1.0;
  Eigen::MatrixXd gram = x * x.transpose();
  gram.diagonal().array() += 1e-9;
  const Eigen::MatrixXd w = gram.ldlt().solve(x * y.transpose());
  int correct = 0;
  for (long i = 0; i < val_x.cols(); ++i) {
    Eigen::VectorXd v(val_x.rows() + 1);
    v.head(val_x.rows()) = val_x.col(i).cast<double>();
    v(val_x.rows()) = 1.0;
    Eigen::Index best;
    (w.transpose() * v).maxCoeff(&best);
    correct += best == val_y[static_cast<std::size_t>(i)];
  }
  return 100.0 * correct / static_cast<double>(val_x.cols());
}

/// Mean absolute Laplacian of the luma channel with neighbours `step`
/// pixels away.
inline double laplacian_energy(const Image& img, int step) {
  auto luma = [&](int x, int y) {
    return 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
  };
  double acc = 0.0;
  long n = 0;
  for (int y = step; y + step < img.height; ++y) {
    for (int x = step; x + step < img.width; ++x) {
      acc += std::abs(4 * luma(x, y) - luma(x - step, y) - luma(x + step, y) - luma(x, y - step) - luma(x, y + step));
      ++n;
    }
  }
  return acc / static_cast<double>(std::max(1L, n));
}

/// log(fine / coarse) Laplacian energy. Content edges contribute at both
/// scales and largely cancel; blur removes the fine scale, noise inflates it.
inline double high_frequency_ratio(const Image& img) {
  return std::log((laplacian_energy(img, 1) + 1e-12) / (laplacian_energy(img, 2) + 1e-12));
}

/// One-dimensional nearest-centroid classifier.
struct NearestCentroid {
  std::vector<double> centroids;

  static NearestCentroid fit(const std::vector<double>& values, const std::vector<int>& labels, int k) {
    NearestCentroid nc;
    nc.centroids.assign(static_cast<std::size_t>(k), 0.0);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < values.size(); ++i) {
      nc.centroids[static_cast<std::size_t>(labels[i])] += values[i];
      ++counts[static_cast<std::size_t>(labels[i])];
    }
    for (std::size_t c = 0; c < nc.centroids.size(); ++c) nc.centroids[c] /= std::max(1, counts[c]);
    return nc;
  }

  int predict(double v) const {
    int best = 0;
    for (std::size_t c = 1; c < centroids.size(); ++c) {
      if (std::abs(v - centroids[c]) < std::abs(v - centroids[static_cast<std::size_t>(best)])) best = static_cast<int>(c);
    }
    return best;
  }
};

}  // namespace biasaudit::oracle
