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
#include <string_view>
#include <vector>

#include <json.hpp>

#include "biasaudit/experiment/store.hpp"

namespace biasaudit::experiment {

enum class ReportTemplate { combinations_table, size_plot, scale_plot, augmentation_table, corruption_table, pseudo_table };
std::string_view to_string(ReportTemplate t);
ReportTemplate report_template_from_string(std::string_view name);
const std::vector<std::string>& report_template_names();

struct Report {
  std::string markdown;
  std::string csv;
  /// Only for the plot templates.
  std::string svg;
};

/// Renders rows into a table or plot. Rows tagged with a different suite
/// kind are ignored; grid positions without a row stay blank. When
/// `references` maps a row key to a value, it is printed alongside.
/// Output depends only on the inputs (no timestamps, stable ordering).
Report render_report(const std::vector<ResultRow>& rows, ReportTemplate tmpl,
                     const nlohmann::json& references = nlohmann::json::object());

/// Row key used for reference lookups in the given template.
std::string report_row_key(const ResultRow& row, ReportTemplate tmpl);

/// "100", "1K", "10K", "1M", ... for image counts.
std::string format_count(std::size_t n);
/// One decimal place.
std::string format_accuracy(double v);

}  // namespace biasaudit::experiment
