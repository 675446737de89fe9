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

#include <string>
#include <vector>

#include <Eigen/Core>

namespace biasaudit::train {

/// Activations are stored channel-major: a [channels, n*h*w] matrix whose
/// column (n, y, x) holds the channel vector of one pixel. Column-major
/// storage makes that vector contiguous, which matches interleaved images.
using Mat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic>;

struct Shape {
  int n = 0;
  int h = 0;
  int w = 0;
  int columns() const { return n * h * w; }
};

struct Param {
  std::string name;
  Mat value;
  Mat grad;
  /// Subject to decoupled weight decay (conv and linear weights only).
  bool decay = false;
};

class Conv2d {
 public:
  Conv2d(int in_channels, int out_channels, int kernel, int stride, int pad, std::string name);

  Mat forward(const Mat& x, const Shape& in, Shape& out, bool keep_for_backward);
  /// Accumulates weight/bias gradients. Returns dx unless need_dx is false.
  Mat backward(const Mat& dy, bool need_dx);

  Param weight;
  Param bias;
  int in_channels() const { return cin_; }
  int out_channels() const { return cout_; }

 private:
  int cin_, cout_, k_, stride_, pad_;
  Shape in_{}, out_{};
  Mat cols_;
};

/// LayerNorm over the channel vector of each pixel.
class ChannelLayerNorm {
 public:
  ChannelLayerNorm(int channels, std::string name);
  Mat forward(const Mat& x, bool keep_for_backward);
  Mat backward(const Mat& dy);

  Param gamma;
  Param beta;

 private:
  Mat xhat_;
  Eigen::RowVectorXf inv_std_;
};

class Relu {
 public:
  Mat forward(const Mat& x, bool keep_for_backward);
  Mat backward(const Mat& dy) const;

 private:
  Mat y_;
};

/// [C, n*h*w] -> [C, n], mean over each sample's pixels.
Mat global_avg_pool(const Mat& x, const Shape& s);
Mat global_avg_pool_backward(const Mat& dy, const Shape& s);

class Linear {
 public:
  Linear(int in_features, int out_features, std::string name);
  Mat forward(const Mat& x, bool keep_for_backward);
  Mat backward(const Mat& dy);

  Param weight;
  Param bias;

 private:
  Mat x_;
};

/// Softmax cross-entropy against soft targets ([K, n], columns sum to 1),
/// label smoothing mixed in. Returns mean loss; fills dlogits (already / n).
float softmax_cross_entropy(const Mat& logits, const Mat& targets, float label_smoothing, Mat& dlogits);

Mat softmax(const Mat& logits);

}  // namespace biasaudit::train
