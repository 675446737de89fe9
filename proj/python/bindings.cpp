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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "biasaudit/core/error.hpp"
#include "biasaudit/dataset/manifest.hpp"
#include "biasaudit/dataset/sampling.hpp"
#include "biasaudit/experiment/config.hpp"
#include "biasaudit/experiment/report.hpp"
#include "biasaudit/experiment/store.hpp"
#include "biasaudit/probe/probe.hpp"
#include "biasaudit/study/histogram.hpp"
#include "biasaudit/train/model.hpp"
#include "biasaudit/train/schedule.hpp"
#include "biasaudit/transform/corruption.hpp"
#include "biasaudit/transform/resample.hpp"

namespace py = pybind11;
namespace ba = biasaudit;
using nlohmann::json;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

ba::Image to_image(const FloatArray& a) {
  if (a.ndim() != 3) throw ba::Error("expected an HxWxC float array");
  ba::Image img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), static_cast<int>(a.shape(2)));
  std::copy(a.data(), a.data() + a.size(), img.pixels.begin());
  return img;
}

FloatArray from_image(const ba::Image& img) {
  FloatArray out({img.height, img.width, img.channels});
  std::copy(img.pixels.begin(), img.pixels.end(), out.mutable_data());
  return out;
}

ba::train::Mat columns(const FloatArray& rows) {
  if (rows.ndim() != 2) throw ba::Error("expected an [n, dim] feature array");
  const auto n = static_cast<int>(rows.shape(0));
  const auto d = static_cast<int>(rows.shape(1));
  // Row-major [n, d] is the same memory as column-major [d, n].
  return Eigen::Map<const ba::train::Mat>(rows.data(), d, n);
}

py::dict split_dict(const ba::dataset::SplitSpec& s) {
  py::dict d;
  d["dataset_id"] = s.dataset_id;
  d["train_indices"] = s.train_indices;
  d["val_indices"] = s.val_indices;
  d["seed"] = s.seed;
  return d;
}

}  // namespace

PYBIND11_MODULE(_biasaudit, m) {
  m.doc() = "Native core of the biasaudit toolkit";
  py::register_exception<ba::Error>(m, "BiasAuditError", PyExc_ValueError);

  m.def("iteration_budget", &ba::train::iteration_budget, py::arg("ref_epochs"), py::arg("ref_dataset_size"),
        py::arg("batch_size"));
  m.def("learning_rate_at", &ba::train::learning_rate_at, py::arg("iteration"), py::arg("budget"),
        py::arg("warmup_iters"), py::arg("base_lr"));
  m.def(
      "detect_failure",
      [](const std::vector<float>& losses, int n_classes, std::int64_t budget) {
        return std::string(ba::train::to_string(ba::train::detect_failure(losses, n_classes, budget)));
      },
      py::arg("losses"), py::arg("n_classes"), py::arg("budget"));
  m.def(
      "count_parameters",
      [](double width, double depth, int classes) {
        ba::train::ModelSpec spec;
        spec.width_multiplier = width;
        spec.depth_multiplier = depth;
        spec.num_classes = classes;
        return ba::train::count_parameters(spec);
      },
      py::arg("width") = 1.0, py::arg("depth") = 1.0, py::arg("num_classes") = 3);

  m.def("enumerate_combinations", &ba::experiment::enumerate_combinations, py::arg("pool"), py::arg("k"));
  m.def(
      "config_hash",
      [](const std::string& config_json) {
        return ba::experiment::config_hash(ba::experiment::experiment_from_json(json::parse(config_json)));
      },
      py::arg("config_json"));

  m.def(
      "sample_split",
      [](const std::string& manifest, std::size_t n_train, std::size_t n_val, std::uint64_t seed) {
        return split_dict(ba::dataset::sample_split(ba::dataset::register_dataset(manifest), n_train, n_val, seed));
      },
      py::arg("manifest"), py::arg("n_train"), py::arg("n_val"), py::arg("seed"));
  m.def(
      "build_pseudo_datasets",
      [](const std::string& manifest, std::size_t k, std::size_t n_per_set, std::uint64_t seed, std::size_t n_val) {
        py::list out;
        for (const auto& s :
             ba::dataset::build_pseudo_datasets(ba::dataset::register_dataset(manifest), k, n_per_set, seed, n_val)) {
          out.append(split_dict(s));
        }
        return out;
      },
      py::arg("manifest"), py::arg("k"), py::arg("n_per_set"), py::arg("seed"), py::arg("n_val_per_set") = 0);

  m.def(
      "apply_corruption",
      [](const FloatArray& image, const std::string& kind, double parameter, std::uint64_t seed_base,
         const std::string& image_id) {
        const ba::transform::CorruptionSpec spec{ba::transform::corruption_kind_from_string(kind), parameter, seed_base};
        return from_image(ba::transform::apply_corruption(to_image(image), spec, image_id));
      },
      py::arg("image"), py::arg("kind"), py::arg("parameter"), py::arg("seed_base") = 0, py::arg("image_id") = "");
  m.def(
      "eval_transform", [](const FloatArray& image) { return from_image(ba::transform::eval_transform(to_image(image))); },
      py::arg("image"));

  m.def(
      "linear_probe",
      [](const FloatArray& train_x, const std::vector<int>& train_y, const FloatArray& val_x,
         const std::vector<int>& val_y, int num_classes, int epochs, std::uint64_t seed) {
        ba::probe::ProbeConfig cfg;
        cfg.epochs = epochs;
        cfg.batch_size = 64;
        cfg.seed = seed;
        const auto r = ba::probe::linear_probe(columns(train_x), train_y, columns(val_x), val_y, num_classes, cfg);
        return ba::probe::probe_result_to_json(r).dump();
      },
      py::arg("train_x"), py::arg("train_y"), py::arg("val_x"), py::arg("val_y"), py::arg("num_classes"),
      py::arg("epochs") = 40, py::arg("seed") = 0);

  m.def(
      "aggregate_histogram",
      [](const std::vector<double>& accuracies, double bin_width) {
        return ba::study::histogram_to_json(ba::study::aggregate_histogram(accuracies, bin_width)).dump();
      },
      py::arg("accuracies"), py::arg("bin_width") = 5.0);
  m.def(
      "render_report",
      [](const std::string& store, const std::string& tmpl, const std::string& references_json) {
        const auto rows = ba::experiment::ResultsStore(store).rows();
        const auto report = ba::experiment::render_report(rows, ba::experiment::report_template_from_string(tmpl),
                                                          json::parse(references_json));
        py::dict d;
        d["markdown"] = report.markdown;
        d["csv"] = report.csv;
        d["svg"] = report.svg;
        return d;
      },
      py::arg("store"), py::arg("template"), py::arg("references_json") = "{}");
}
