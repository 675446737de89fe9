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

#include "biasaudit/experiment/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "biasaudit/core/error.hpp"
#include "biasaudit/transform/augment.hpp"
#include "biasaudit/transform/corruption.hpp"

namespace biasaudit::experiment {

using nlohmann::json;

namespace {

constexpr std::pair<ReportTemplate, std::string_view> kTemplates[] = {
    {ReportTemplate::combinations_table, "combinations_table"},
    {ReportTemplate::size_plot, "size_plot"},
    {ReportTemplate::scale_plot, "scale_plot"},
    {ReportTemplate::augmentation_table, "augmentation_table"},
    {ReportTemplate::corruption_table, "corruption_table"},
    {ReportTemplate::pseudo_table, "pseudo_table"}};

std::vector<std::string> class_ids(const json& config) {
  std::vector<std::string> ids;
  if (config.contains("pseudo") && !config["pseudo"].is_null()) {
    const auto src = config["pseudo"]["source"].value("id", std::string("pseudo"));
    const auto k = config["pseudo"].value("k", 0);
    for (int i = 0; i < k; ++i) ids.push_back(src + "#pseudo" + std::to_string(i));
    return ids;
  }
  for (const auto& d : config.value("datasets", json::array())) ids.push_back(d.value("id", std::string{}));
  return ids;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::size_t train_count(const ResultRow& r) { return r.config.value("train_per_dataset", std::size_t{0}); }

transform::AugLevel aug_level(const ResultRow& r) {
  if (!r.config.contains("augmentation")) return transform::AugLevel::rand_crop_rand_aug_mix;
  return transform::aug_level_from_string(
      r.config["augmentation"].value("level", std::string(to_string(transform::AugLevel::rand_crop_rand_aug_mix))));
}

std::string corruption_label(const ResultRow& r) {
  if (!r.config.contains("corruption")) return "none";
  return transform::corruption_from_json(r.config["corruption"]).label();
}

double width_of(const ResultRow& r) { return r.config.value("model", json::object()).value("width_multiplier", 1.0); }
double depth_of(const ResultRow& r) { return r.config.value("model", json::object()).value("depth_multiplier", 1.0); }

std::optional<double> val_accuracy(const ResultRow& r) {
  if (!r.ok() || !r.record.contains("final_val_accuracy")) return std::nullopt;
  return r.record["final_val_accuracy"].get<double>();
}

bool failed(const ResultRow& r) { return r.ok() && r.record.value("convergence_status", std::string()) == "failed"; }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string ref_text(const json& references, const std::string& key) {
  if (!references.is_object() || !references.contains(key)) return {};
  const auto& v = references[key];
  if (v.is_number()) return format_accuracy(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return {};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::string> align;  // "l", "c" or "r"
  std::vector<std::vector<std::string>> rows;

  std::string markdown(const std::string& title) const {
    std::ostringstream out;
    out << "# " << title << "\n\n";
    out << "|";
    for (const auto& h : header) out << ' ' << h << " |";
    out << "\n|";
    for (const auto& a : align) out << (a == "l" ? ":---" : a == "c" ? ":---:" : "---:") << '|';
    out << '\n';
    for (const auto& row : rows) {
      out << '|';
      for (const auto& cell : row) out << (cell.empty() ? " " : " " + cell + " ") << '|';
      out << '\n';
    }
    return out.str();
  }

  std::string csv() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << csv_field(header[i]);
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
      out << '\n';
    }
    return out.str();
  }
};

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (x, accuracy)
};

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

/// Static line plot with a log-scaled x axis and accuracy (0..100) on y.
std::string render_svg(const std::string& title, const std::string& x_label, const std::vector<Series>& series) {
  constexpr double W = 480, H = 320, L = 60, R = 20, T = 30, B = 50;
  double xmin = 0, xmax = 1;
  bool any = false;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (x <= 0) continue;
      const double lx = std::log10(x);
      if (!any) {
        xmin = xmax = lx;
        any = true;
      }
      xmin = std::min(xmin, lx);
      xmax = std::max(xmax, lx);
    }
  }
  if (xmax - xmin < 1e-9) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  auto px = [&](double x) { return L + (std::log10(x) - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - y / 100.0 * (H - T - B); };
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" << title << "</text>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int y = 0; y <= 100; y += 20) {
    out << "<text x=\"" << L - 6 << "\" y=\"" << fmt2(py(y) + 4) << "\" text-anchor=\"end\" font-size=\"10\">" << y
        << "</text>\n";
  }
  out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"11\">"
      << x_label << "</text>\n";
  out << "<text x=\"14\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" font-size=\"11\" transform=\"rotate(-90 14 "
      << (T + H - B) / 2 << ")\">accuracy (%)</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kColors[i % std::size(kColors)];
    std::string pts;
    for (const auto& [x, y] : s.points) {
      if (x <= 0) continue;
      if (!pts.empty()) pts += ' ';
      pts += fmt2(px(x)) + "," + fmt2(py(y));
    }
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"" << pts << "\"/>\n";
    for (const auto& [x, y] : s.points) {
      if (x <= 0) continue;
      out << "<circle cx=\"" << fmt2(px(x)) << "\" cy=\"" << fmt2(py(y)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      out << "<text x=\"" << fmt2(px(x)) << "\" y=\"" << fmt2(py(y) - 7) << "\" text-anchor=\"middle\" font-size=\"9\">"
          << format_accuracy(y) << "</text>\n";
    }
    out << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * (i + 1) << "\" text-anchor=\"end\" font-size=\"10\" fill=\""
        << color << "\">" << s.name << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string aug_row_label(transform::AugLevel level) {
  switch (level) {
    case transform::AugLevel::none: return "no aug";
    case transform::AugLevel::rand_crop: return "w/ RandCrop";
    case transform::AugLevel::rand_crop_rand_aug: return "w/ RandCrop, RandAug";
    case transform::AugLevel::rand_crop_rand_aug_mix: return "w/ RandCrop, RandAug, MixUp/CutMix";
  }
  return {};
}

Report combinations(const std::vector<ResultRow>& rows, const json& refs) {
  std::vector<std::string> columns;
  for (const auto& r : rows) {
    for (const auto& id : class_ids(r.config)) {
      if (std::find(columns.begin(), columns.end(), id) == columns.end()) columns.push_back(id);
    }
  }
  const bool with_refs = refs.is_object() && !refs.empty();
  Table md, csv;
  md.header = columns;
  md.header.push_back("accuracy");
  md.align.assign(columns.size(), "c");
  md.align.push_back("r");
  csv.header = {"datasets", "accuracy"};
  if (with_refs) {
    md.header.push_back("reference");
    md.align.push_back("r");
    csv.header.push_back("reference");
  }
  for (const auto& r : rows) {
    const auto ids = class_ids(r.config);
    std::vector<std::string> cells;
    for (const auto& c : columns) cells.push_back(std::find(ids.begin(), ids.end(), c) != ids.end() ? "✓" : "");
    const auto acc = val_accuracy(r);
    const std::string acc_text = acc ? format_accuracy(*acc) : "";
    cells.push_back(acc_text);
    std::vector<std::string> csv_row{join(ids, "+"), acc_text};
    if (with_refs) {
      const auto ref = ref_text(refs, report_row_key(r, ReportTemplate::combinations_table));
      cells.push_back(ref);
      csv_row.push_back(ref);
    }
    md.rows.push_back(std::move(cells));
    csv.rows.push_back(std::move(csv_row));
  }
  return {md.markdown("Dataset classification accuracy by dataset combination"), csv.csv(), {}};
}

Report pseudo(const std::vector<ResultRow>& rows, const json& refs) {
  // Grid: images per set x {without, with} augmentation; cell = training accuracy or "fail".
  std::map<std::size_t, std::map<int, std::string>> grid;
  std::map<std::size_t, std::map<int, std::string>> ref_grid;
  for (const auto& r : rows) {
    if (!r.ok()) {
      grid[train_count(r)];
      continue;
    }
    const int col = aug_level(r) == transform::AugLevel::none ? 0 : 1;
    std::string text;
    if (failed(r)) {
      text = "fail";
    } else if (r.record.contains("final_train_accuracy")) {
      text = format_accuracy(r.record["final_train_accuracy"].get<double>());
    }
    grid[train_count(r)][col] = text;
    ref_grid[train_count(r)][col] = ref_text(refs, report_row_key(r, ReportTemplate::pseudo_table));
  }
  const bool with_refs = refs.is_object() && !refs.empty();
  Table t;
  t.header = {"imgs per set", "w/o aug", "w/ aug"};
  t.align = {"r", "r", "r"};
  if (with_refs) {
    t.header.insert(t.header.end(), {"reference w/o aug", "reference w/ aug"});
    t.align.insert(t.align.end(), {"r", "r"});
  }
  for (const auto& [n, cols] : grid) {
    std::vector<std::string> row{format_count(n)};
    for (int c = 0; c < 2; ++c) row.push_back(cols.contains(c) ? cols.at(c) : "");
    if (with_refs) {
      for (int c = 0; c < 2; ++c) row.push_back(ref_grid[n].contains(c) ? ref_grid[n].at(c) : "");
    }
    t.rows.push_back(std::move(row));
  }
  return {t.markdown("Pseudo-dataset training accuracy"), t.csv(), {}};
}

Report augmentation(const std::vector<ResultRow>& rows, const json& refs) {
  std::set<std::size_t> sizes;
  std::map<transform::AugLevel, std::map<std::size_t, std::string>> grid;
  for (const auto& r : rows) {
    sizes.insert(train_count(r));
    const auto acc = val_accuracy(r);
    std::string text = acc ? format_accuracy(*acc) : "";
    const auto ref = ref_text(refs, report_row_key(r, ReportTemplate::augmentation_table));
    if (!ref.empty()) text += text.empty() ? "(" + ref + ")" : " (" + ref + ")";
    grid[aug_level(r)][train_count(r)] = text;
  }
  Table t;
  t.header = {"augmentation / training images per dataset"};
  t.align = {"l"};
  for (auto n : sizes) {
    t.header.push_back(format_count(n));
    t.align.push_back("r");
  }
  for (const auto& [level, cols] : grid) {
    std::vector<std::string> row{aug_row_label(level)};
    for (auto n : sizes) row.push_back(cols.contains(n) ? cols.at(n) : "");
    t.rows.push_back(std::move(row));
  }
  return {t.markdown("Dataset classification accuracy by augmentation"), t.csv(), {}};
}

Report corruption(const std::vector<ResultRow>& rows, const json& refs) {
  const bool with_refs = refs.is_object() && !refs.empty();
  Table t;
  t.header = {"corruption (on train+val)", "accuracy"};
  t.align = {"l", "r"};
  if (with_refs) {
    t.header.push_back("reference");
    t.align.push_back("r");
  }
  for (const auto& r : rows) {
    const auto acc = val_accuracy(r);
    std::vector<std::string> row{corruption_label(r), acc ? format_accuracy(*acc) : ""};
    if (with_refs) row.push_back(ref_text(refs, report_row_key(r, ReportTemplate::corruption_table)));
    t.rows.push_back(std::move(row));
  }
  return {t.markdown("Dataset classification accuracy under corruption"), t.csv(), {}};
}

Report size_plot(const std::vector<ResultRow>& rows, const json& refs) {
  std::vector<const ResultRow*> sorted;
  for (const auto& r : rows) sorted.push_back(&r);
  auto params = [](const ResultRow* r) { return r->record.value("parameter_count", std::int64_t{0}); };
  std::stable_sort(sorted.begin(), sorted.end(), [&](auto* a, auto* b) { return params(a) < params(b); });
  const bool with_refs = refs.is_object() && !refs.empty();
  Table t;
  t.header = {"width", "depth", "parameters", "accuracy"};
  t.align = {"r", "r", "r", "r"};
  if (with_refs) {
    t.header.push_back("reference");
    t.align.push_back("r");
  }
  std::map<std::string, Series> series;
  for (const auto* r : sorted) {
    const auto acc = val_accuracy(*r);
    std::vector<std::string> row{num(width_of(*r)), num(depth_of(*r)), r->ok() ? std::to_string(params(r)) : "",
                                 acc ? format_accuracy(*acc) : ""};
    if (with_refs) row.push_back(ref_text(refs, report_row_key(*r, ReportTemplate::size_plot)));
    t.rows.push_back(std::move(row));
    if (acc && params(r) > 0) {
      const std::string name = format_count(train_count(*r)) + " per dataset";
      series[name].name = name;
      series[name].points.emplace_back(static_cast<double>(params(r)), *acc);
    }
  }
  std::vector<Series> list;
  for (auto& [_, s] : series) list.push_back(std::move(s));
  return {t.markdown("Dataset classification accuracy by model size"), t.csv(),
          render_svg("Accuracy vs. model size", "parameters (log scale)", list)};
}

Report scale_plot(const std::vector<ResultRow>& rows, const json& refs) {
  std::vector<const ResultRow*> sorted;
  for (const auto& r : rows) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) {
    if (aug_level(*a) != aug_level(*b)) return aug_level(*a) < aug_level(*b);
    return train_count(*a) < train_count(*b);
  });
  const bool with_refs = refs.is_object() && !refs.empty();
  Table t;
  t.header = {"training images per dataset", "augmentation", "accuracy"};
  t.align = {"r", "l", "r"};
  if (with_refs) {
    t.header.push_back("reference");
    t.align.push_back("r");
  }
  std::map<transform::AugLevel, Series> series;
  for (const auto* r : sorted) {
    const auto acc = val_accuracy(*r);
    std::vector<std::string> row{format_count(train_count(*r)), std::string(to_string(aug_level(*r))),
                                 acc ? format_accuracy(*acc) : ""};
    if (with_refs) row.push_back(ref_text(refs, report_row_key(*r, ReportTemplate::scale_plot)));
    t.rows.push_back(std::move(row));
    if (acc) {
      auto& s = series[aug_level(*r)];
      s.name = std::string(to_string(aug_level(*r)));
      s.points.emplace_back(static_cast<double>(train_count(*r)), *acc);
    }
  }
  std::vector<Series> list;
  for (auto& [_, s] : series) list.push_back(std::move(s));
  return {t.markdown("Dataset classification accuracy by training-set size"), t.csv(),
          render_svg("Accuracy vs. training images per dataset", "training images per dataset (log scale)", list)};
}

}  // namespace

std::string_view to_string(ReportTemplate t) {
  for (const auto& [k, name] : kTemplates) {
    if (k == t) return name;
  }
  throw Error("unknown report template");
}

ReportTemplate report_template_from_string(std::string_view name) {
  for (const auto& [k, n] : kTemplates) {
    if (n == name) return k;
  }
  throw Error("unknown report template: " + std::string(name));
}

const std::vector<std::string>& report_template_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [_, n] : kTemplates) v.emplace_back(n);
    return v;
  }();
  return names;
}

std::string format_count(std::size_t n) {
  if (n >= 1'000'000 && n % 1'000'000 == 0) return std::to_string(n / 1'000'000) + "M";
  if (n >= 1'000 && n % 1'000 == 0) return std::to_string(n / 1'000) + "K";
  return std::to_string(n);
}

std::string format_accuracy(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string report_row_key(const ResultRow& row, ReportTemplate tmpl) {
  switch (tmpl) {
    case ReportTemplate::combinations_table: return join(class_ids(row.config), "+");
    case ReportTemplate::corruption_table: return corruption_label(row);
    case ReportTemplate::size_plot: return "width=" + num(width_of(row)) + ",depth=" + num(depth_of(row));
    case ReportTemplate::scale_plot:
      return format_count(train_count(row)) + "@" + std::string(to_string(aug_level(row)));
    case ReportTemplate::augmentation_table:
      return std::string(to_string(aug_level(row))) + "@" + format_count(train_count(row));
    case ReportTemplate::pseudo_table:
      return format_count(train_count(row)) + (aug_level(row) == transform::AugLevel::none ? "@w/o aug" : "@w/ aug");
  }
  return {};
}

Report render_report(const std::vector<ResultRow>& all_rows, ReportTemplate tmpl, const json& references) {
  static const std::map<ReportTemplate, std::string> kind_of = {
      {ReportTemplate::combinations_table, "combinations"}, {ReportTemplate::size_plot, "model_size"},
      {ReportTemplate::scale_plot, "data_scale"},           {ReportTemplate::augmentation_table, "augmentation"},
      {ReportTemplate::corruption_table, "corruption"},     {ReportTemplate::pseudo_table, "pseudo"}};
  std::vector<ResultRow> rows;
  for (const auto& r : all_rows) {
    if (r.kind.empty() || r.kind == kind_of.at(tmpl)) rows.push_back(r);
  }
  switch (tmpl) {
    case ReportTemplate::combinations_table: return combinations(rows, references);
    case ReportTemplate::size_plot: return size_plot(rows, references);
    case ReportTemplate::scale_plot: return scale_plot(rows, references);
    case ReportTemplate::augmentation_table: return augmentation(rows, references);
    case ReportTemplate::corruption_table: return corruption(rows, references);
    case ReportTemplate::pseudo_table: return pseudo(rows, references);
  }
  throw Error("unknown report template");
}

}  // namespace biasaudit::experiment
