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

#include "biasaudit/train/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace biasaudit::train {

Conv2d::Conv2d(int in_channels, int out_channels, int kernel, int stride, int pad, std::string name)
    : cin_(in_channels), cout_(out_channels), k_(kernel), stride_(stride), pad_(pad) {
  weight.name = name + ".weight";
  weight.value = Mat::Zero(out_channels, in_channels * kernel * kernel);
  weight.grad = Mat::Zero(weight.value.rows(), weight.value.cols());
  weight.decay = true;
  bias.name = name + ".bias";
  bias.value = Mat::Zero(out_channels, 1);
  bias.grad = Mat::Zero(out_channels, 1);
}

Mat Conv2d::forward(const Mat& x, const Shape& in, Shape& out, bool keep_for_backward) {
  out.n = in.n;
  out.h = (in.h + 2 * pad_ - k_) / stride_ + 1;
  out.w = (in.w + 2 * pad_ - k_) / stride_ + 1;
  const int rows = cin_ * k_ * k_;
  Mat cols = Mat::Zero(rows, out.columns());
  const float* src = x.data();
  float* dst = cols.data();
  for (int n = 0; n < in.n; ++n) {
    for (int oy = 0; oy < out.h; ++oy) {
      for (int ox = 0; ox < out.w; ++ox) {
        const long col = (static_cast<long>(n) * out.h + oy) * out.w + ox;
        float* cdst = dst + col * rows;
        for (int ky = 0; ky < k_; ++ky) {
          const int iy = oy * stride_ - pad_ + ky;
          if (iy < 0 || iy >= in.h) continue;
          for (int kx = 0; kx < k_; ++kx) {
            const int ix = ox * stride_ - pad_ + kx;
            if (ix < 0 || ix >= in.w) continue;
            const long icol = (static_cast<long>(n) * in.h + iy) * in.w + ix;
            std::memcpy(cdst + (ky * k_ + kx) * cin_, src + icol * cin_, sizeof(float) * static_cast<std::size_t>(cin_));
          }
        }
      }
    }
  }
  Mat y = weight.value * cols;
  y.colwise() += bias.value.col(0);
  if (keep_for_backward) {
    cols_ = std::move(cols);
    in_ = in;
    out_ = out;
  }
  return y;
}

Mat Conv2d::backward(const Mat& dy, bool need_dx) {
  weight.grad.noalias() += dy * cols_.transpose();
  bias.grad.col(0) += dy.rowwise().sum().transpose();
  if (!need_dx) {
    cols_.resize(0, 0);
    return {};
  }
  const Mat dcols = weight.value.transpose() * dy;
  cols_.resize(0, 0);
  Mat dx = Mat::Zero(cin_, in_.columns());
  const int rows = cin_ * k_ * k_;
  const float* src = dcols.data();
  float* dst = dx.data();
  for (int n = 0; n < in_.n; ++n) {
    for (int oy = 0; oy < out_.h; ++oy) {
      for (int ox = 0; ox < out_.w; ++ox) {
        const long col = (static_cast<long>(n) * out_.h + oy) * out_.w + ox;
        const float* csrc = src + col * rows;
        for (int ky = 0; ky < k_; ++ky) {
          const int iy = oy * stride_ - pad_ + ky;
          if (iy < 0 || iy >= in_.h) continue;
          for (int kx = 0; kx < k_; ++kx) {
            const int ix = ox * stride_ - pad_ + kx;
            if (ix < 0 || ix >= in_.w) continue;
            const long icol = (static_cast<long>(n) * in_.h + iy) * in_.w + ix;
            float* d = dst + icol * cin_;
            const float* s = csrc + (ky * k_ + kx) * cin_;
            for (int c = 0; c < cin_; ++c) d[c] += s[c];
          }
        }
      }
    }
  }
  return dx;
}

ChannelLayerNorm::ChannelLayerNorm(int channels, std::string name) {
  gamma.name = name + ".gamma";
  gamma.value = Mat::Ones(channels, 1);
  gamma.grad = Mat::Zero(channels, 1);
  beta.name = name + ".beta";
  beta.value = Mat::Zero(channels, 1);
  beta.grad = Mat::Zero(channels, 1);
}

Mat ChannelLayerNorm::forward(const Mat& x, bool keep_for_backward) {
  constexpr float kEps = 1e-6f;
  const Eigen::RowVectorXf mean = x.colwise().mean();
  Mat xhat = x.rowwise() - mean;
  const Eigen::RowVectorXf var = xhat.array().square().colwise().mean();
  const Eigen::RowVectorXf inv_std = (var.array() + kEps).rsqrt();
  xhat.array().rowwise() *= inv_std.array();
  Mat y = (xhat.array().colwise() * gamma.value.col(0).array()).colwise() + beta.value.col(0).array();
  if (keep_for_backward) {
    xhat_ = std::move(xhat);
    inv_std_ = inv_std;
  }
  return y;
}

Mat ChannelLayerNorm::backward(const Mat& dy) {
  gamma.grad.col(0) += (dy.array() * xhat_.array()).rowwise().sum().matrix();
  beta.grad.col(0) += dy.rowwise().sum();
  const Mat dxhat = dy.array().colwise() * gamma.value.col(0).array();
  const Eigen::RowVectorXf mean_d = dxhat.colwise().mean();
  const Eigen::RowVectorXf mean_dx = (dxhat.array() * xhat_.array()).colwise().mean();
  Mat dx = dxhat.rowwise() - mean_d;
  dx.array() -= xhat_.array().rowwise() * mean_dx.array();
  dx.array().rowwise() *= inv_std_.array();
  xhat_.resize(0, 0);
  return dx;
}

Mat Relu::forward(const Mat& x, bool keep_for_backward) {
  Mat y = x.cwiseMax(0.0f);
  if (keep_for_backward) y_ = y;
  return y;
}

Mat Relu::backward(const Mat& dy) const { return (y_.array() > 0.0f).select(dy, 0.0f); }

Mat global_avg_pool(const Mat& x, const Shape& s) {
  const int hw = s.h * s.w;
  Mat out(x.rows(), s.n);
  for (int n = 0; n < s.n; ++n) out.col(n) = x.middleCols(static_cast<long>(n) * hw, hw).rowwise().mean();
  return out;
}

Mat global_avg_pool_backward(const Mat& dy, const Shape& s) {
  const int hw = s.h * s.w;
  Mat dx(dy.rows(), s.columns());
  for (int n = 0; n < s.n; ++n) {
    dx.middleCols(static_cast<long>(n) * hw, hw).colwise() = dy.col(n) / static_cast<float>(hw);
  }
  return dx;
}

Linear::Linear(int in_features, int out_features, std::string name) {
  weight.name = name + ".weight";
  weight.value = Mat::Zero(out_features, in_features);
  weight.grad = Mat::Zero(out_features, in_features);
  weight.decay = true;
  bias.name = name + ".bias";
  bias.value = Mat::Zero(out_features, 1);
  bias.grad = Mat::Zero(out_features, 1);
}

Mat Linear::forward(const Mat& x, bool keep_for_backward) {
  Mat y = weight.value * x;
  y.colwise() += bias.value.col(0);
  if (keep_for_backward) x_ = x;
  return y;
}

Mat Linear::backward(const Mat& dy) {
  weight.grad.noalias() += dy * x_.transpose();
  bias.grad.col(0) += dy.rowwise().sum();
  return weight.value.transpose() * dy;
}

Mat softmax(const Mat& logits) {
  Mat p = logits.rowwise() - logits.colwise().maxCoeff();
  p = p.array().exp();
  p.array().rowwise() /= p.colwise().sum().array();
  return p;
}

float softmax_cross_entropy(const Mat& logits, const Mat& targets, float label_smoothing, Mat& dlogits) {
  const auto k = static_cast<float>(logits.rows());
  const auto n = static_cast<float>(logits.cols());
  const Mat t = (targets.array() * (1.0f - label_smoothing) + label_smoothing / k).matrix();
  const Mat shifted = logits.rowwise() - logits.colwise().maxCoeff();
  const Eigen::RowVectorXf lse = shifted.array().exp().colwise().sum().log();
  const Mat logp = shifted.rowwise() - lse;
  const float loss = -(t.array() * logp.array()).sum() / n;
  dlogits = (logp.array().exp() - t.array()) / n;
  return loss;
}

}  // namespace biasaudit::train
