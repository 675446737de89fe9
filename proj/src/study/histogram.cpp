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

#include "biasaudit/study/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "biasaudit/core/error.hpp"

namespace biasaudit::study {

std::int64_t Histogram::count_in(double lo, double hi) const {
  std::int64_t total = 0;
  for (const auto& b : bins) {
    if (b.lo >= lo && b.hi <= hi) total += b.count;
  }
  return total;
}

Histogram aggregate_histogram(const std::vector<double>& accuracies, double bin_width) {
  if (accuracies.empty()) throw Error("no completed sessions");
  if (!(bin_width > 0.0) || bin_width > 100.0) throw Error("bin_width must be in (0, 100]");
  Histogram h;
  h.bin_width = bin_width;
  const auto n_bins = static_cast<std::size_t>(std::ceil(100.0 / bin_width - 1e-9));
  for (std::size_t i = 0; i < n_bins; ++i) {
    h.bins.push_back({static_cast<double>(i) * bin_width, std::min(100.0, static_cast<double>(i + 1) * bin_width), 0});
  }
  for (double a : accuracies) {
    if (a < 0.0 || a > 100.0 || std::isnan(a)) throw Error("accuracy outside [0, 100]");
    auto idx = static_cast<std::size_t>(std::floor(a / bin_width));
    if (idx >= n_bins) idx = n_bins - 1;
    ++h.bins[idx].count;
  }
  h.n = static_cast<std::int64_t>(accuracies.size());
  h.mean = std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / static_cast<double>(accuracies.size());
  auto sorted = accuracies;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  h.median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  return h;
}

nlohmann::json histogram_to_json(const Histogram& h) {
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : h.bins) bins.push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}});
  return {{"bin_width", h.bin_width}, {"bins", bins}, {"n", h.n}, {"mean", h.mean}, {"median", h.median}};
}

std::string render_histogram(const Histogram& h) {
  auto fmt = [](double v) {
    char buf[32];
    if (std::abs(v - std::round(v)) < 1e-9) {
      std::snprintf(buf, sizeof buf, "%.0f", v);
    } else {
      std::snprintf(buf, sizeof buf, "%.1f", v);
    }
    return std::string(buf);
  };
  std::ostringstream out;
  out << "# Human accuracy distribution\n\n";
  out << "| accuracy (%) | users |\n|:---|---:|\n";
  for (const auto& b : h.bins) {
    if (b.count == 0) continue;
    out << "| " << fmt(b.lo) << "-" << fmt(b.hi) << " | " << b.count << " |\n";
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "\nusers: %lld, mean: %.1f, median: %.1f\n", static_cast<long long>(h.n), h.mean,
                h.median);
  out << buf;
  return out.str();
}

}  // namespace biasaudit::study
