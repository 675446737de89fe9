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

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace biasaudit::study {

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::int64_t count = 0;
};

/// Accuracy histogram over [0, 100]. Bins are [lo, hi) except the last,
/// which also includes 100.
struct Histogram {
  double bin_width = 5.0;
  std::vector<HistogramBin> bins;
  std::int64_t n = 0;
  double mean = 0.0;
  double median = 0.0;

  std::int64_t count_in(double lo, double hi) const;
};

Histogram aggregate_histogram(const std::vector<double>& accuracies, double bin_width = 5.0);
nlohmann::json histogram_to_json(const Histogram& h);

/// Markdown table of the populated bins plus mean and median.
std::string render_histogram(const Histogram& h);

}  // namespace biasaudit::study
