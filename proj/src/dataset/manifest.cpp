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

#include "biasaudit/dataset/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "biasaudit/core/error.hpp"
#include "biasaudit/dataset/image_io.hpp"
#include "biasaudit/dataset/preprocess.hpp"

namespace biasaudit::dataset {

using nlohmann::json;

std::vector<std::size_t> DatasetManifest::usable_indices() const {
  std::vector<std::size_t> out;
  if (predefined_train_split) {
    out = *predefined_train_split;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    std::erase_if(out, [&](std::size_t i) { return i >= images.size() || !images[i].decode_ok; });
    return out;
  }
  out.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].decode_ok) out.push_back(i);
  }
  return out;
}

std::optional<std::size_t> DatasetManifest::find(const std::string& image_id) const {
  auto it = std::lower_bound(images.begin(), images.end(), image_id,
                             [](const ImageRecord& r, const std::string& id) { return r.image_id < id; });
  if (it == images.end() || it->image_id != image_id) return std::nullopt;
  return static_cast<std::size_t>(it - images.begin());
}

void finalize_manifest(DatasetManifest& manifest) {
  if (manifest.dataset_id.empty()) throw Error("manifest missing dataset_id");
  if (manifest.images.empty()) throw Error("empty manifest");
  std::stable_sort(manifest.images.begin(), manifest.images.end(),
                   [](const ImageRecord& a, const ImageRecord& b) { return a.image_id < b.image_id; });
  for (std::size_t i = 1; i < manifest.images.size(); ++i) {
    if (manifest.images[i].image_id == manifest.images[i - 1].image_id) {
      throw Error("duplicate id: " + manifest.images[i].image_id);
    }
  }
  for (const auto& r : manifest.images) {
    if (r.image_id.empty()) throw Error("record with empty image_id");
    if (r.decode_ok && (r.width < 1 || r.height < 1)) {
      throw Error("invalid size for decodable image: " + r.image_id);
    }
  }
  if (manifest.predefined_train_split) {
    for (std::size_t i : *manifest.predefined_train_split) {
      if (i >= manifest.images.size()) throw Error("predefined_train_split index out of range");
    }
  }
}

DatasetManifest parse_manifest(std::istream& in, const std::string& source_name) {
  DatasetManifest m;
  bool have_header = false;
  json pending_split;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error("parse error in " + source_name + " line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object()) {
      throw Error("parse error in " + source_name + " line " + std::to_string(line_no) + ": not an object");
    }
    try {
      if (obj.contains("dataset_id")) {
        if (have_header) throw Error("parse error in " + source_name + ": multiple header objects");
        have_header = true;
        m.dataset_id = obj.at("dataset_id").get<std::string>();
        m.display_name = obj.value("display_name", m.dataset_id);
        m.root_uri = obj.value("root_uri", std::string{});
        m.notes = obj.value("notes", std::string{});
        if (obj.contains("predefined_train_split") && !obj["predefined_train_split"].is_null()) {
          pending_split = obj["predefined_train_split"];
        }
        continue;
      }
      ImageRecord r;
      r.image_id = obj.at("image_id").get<std::string>();
      r.relative_path = obj.value("path", r.image_id);
      r.width = obj.value("width", 0);
      r.height = obj.value("height", 0);
      r.decode_ok = obj.value("decode_ok", true);
      m.images.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error("parse error in " + source_name + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw Error("parse error in " + source_name + ": missing header object");
  finalize_manifest(m);

  if (!pending_split.is_null()) {
    if (!pending_split.is_array()) throw Error("parse error: predefined_train_split must be an array");
    std::vector<std::size_t> split;
    for (const auto& e : pending_split) {
      if (e.is_string()) {
        auto idx = m.find(e.get<std::string>());
        if (!idx) throw Error("predefined_train_split names unknown image_id: " + e.get<std::string>());
        split.push_back(*idx);
      } else if (e.is_number_unsigned() || e.is_number_integer()) {
        const auto v = e.get<long long>();
        if (v < 0 || static_cast<std::size_t>(v) >= m.images.size()) {
          throw Error("predefined_train_split index out of range");
        }
        split.push_back(static_cast<std::size_t>(v));
      } else {
        throw Error("parse error: predefined_train_split entries must be indices or image ids");
      }
    }
    m.predefined_train_split = std::move(split);
  }
  return m;
}

DatasetManifest register_dataset(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error("cannot open manifest: " + manifest_path.string());
  return parse_manifest(in, manifest_path.string());
}

void write_manifest(const DatasetManifest& manifest, std::ostream& out) {
  json header = {{"dataset_id", manifest.dataset_id},
                 {"display_name", manifest.display_name},
                 {"root_uri", manifest.root_uri}};
  if (!manifest.notes.empty()) header["notes"] = manifest.notes;
  if (manifest.predefined_train_split) header["predefined_train_split"] = *manifest.predefined_train_split;
  out << header.dump() << '\n';
  for (const auto& r : manifest.images) {
    json rec = {{"image_id", r.image_id}, {"path", r.relative_path}, {"width", r.width}, {"height", r.height}};
    if (!r.decode_ok) rec["decode_ok"] = false;
    out << rec.dump() << '\n';
  }
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest: " + path.string());
  write_manifest(manifest, out);
}

DatasetManifest build_manifest_from_directory(const std::filesystem::path& root,
                                              const std::string& dataset_id,
                                              const BuildOptions& options) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw Error("not a directory: " + root.string());

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && has_image_extension(entry.path())) files.push_back(entry.path());
  }
  // Directory iteration order is filesystem-dependent; fix it before anything
  // observable happens.
  std::sort(files.begin(), files.end());

  std::optional<PreprocessCache> cache;
  if (options.cache_dir) cache.emplace(*options.cache_dir);

  DatasetManifest m;
  m.dataset_id = dataset_id;
  m.display_name = options.display_name.empty() ? dataset_id : options.display_name;
  m.root_uri = fs::absolute(root).lexically_normal().string();
  m.notes = options.notes;
  for (const auto& file : files) {
    ImageRecord r;
    r.relative_path = fs::relative(file, root).generic_string();
    r.image_id = r.relative_path;
    try {
      Image raw = decode_image_file(file);
      r.width = raw.width;
      r.height = raw.height;
      if (cache) cache->store(dataset_id, r.image_id, preprocess_image(raw));
    } catch (const Error&) {
      r.decode_ok = false;
    }
    m.images.push_back(std::move(r));
  }
  finalize_manifest(m);
  return m;
}

}  // namespace biasaudit::dataset
