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

#include "biasaudit/probe/features.hpp"

#include <cstring>
#include <fstream>

#include "biasaudit/core/error.hpp"
#include "biasaudit/core/hash.hpp"
#include "biasaudit/transform/augment.hpp"

namespace biasaudit::probe {

namespace {

constexpr char kMagic[8] = {'B', 'A', 'F', 'E', 'A', 'T', '0', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error("truncated feature cache");
  return v;
}

std::uint64_t hash_floats(std::uint64_t h, const Mat& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    std::uint32_t bits = 0;
    const float f = m.data()[i];
    std::memcpy(&bits, &f, sizeof bits);
    h = hash64(h, bits);
  }
  return h;
}

}  // namespace

std::uint64_t weights_fingerprint(train::Classifier& model) {
  std::uint64_t h = hash64(0, std::string_view(model.spec().backend_name));
  h = hash64(h, static_cast<std::uint64_t>(model.num_feature_layers()));
  for (const auto* p : model.parameters()) {
    h = hash64(h, std::string_view(p->name));
    h = hash64(h, static_cast<std::uint64_t>(p->value.rows()));
    h = hash_floats(h, p->value);
  }
  return h;
}

ClassifierFeatureExtractor::ClassifierFeatureExtractor(const train::Classifier& model, int layer_index,
                                                       std::string source)
    : model_(model.clone()), layer_(layer_index), source_(std::move(source)) {
  if (layer_ < 1 || layer_ > model_->num_feature_layers()) {
    throw Error("layer_index out of range: " + std::to_string(layer_));
  }
  dim_ = model_->feature_dim(layer_);
  fingerprint_ = hash64(weights_fingerprint(*model_), static_cast<std::uint64_t>(layer_));
}

std::vector<float> ClassifierFeatureExtractor::extract(const Image& input) {
  const Mat f = model_->features(std::span<const Image>(&input, 1), layer_);
  return {f.data(), f.data() + f.size()};
}

std::uint64_t split_fingerprint(const train::LabeledImages& data, const std::vector<train::ExampleRef>& examples) {
  std::uint64_t h = hash64(0, std::string_view(data.corruption().label()));
  h = hash64(h, data.corruption().per_image_seed_base);
  for (const auto& src : data.sources()) {
    if (src.corruption) {
      h = hash64(h, std::string_view(src.corruption->label()));
      h = hash64(h, src.corruption->per_image_seed_base);
    }
  }
  for (const auto& ex : examples) h = hash64(h, std::string_view(data.image_id(ex)));
  return hash64(h, examples.size());
}

std::filesystem::path feature_cache_path(const std::filesystem::path& dir, std::uint64_t extractor_hash,
                                         std::uint64_t split_hash) {
  return dir / (hex64(extractor_hash) + "_" + hex64(split_hash) + ".feat");
}

Mat extract_features(FeatureExtractor& extractor, const train::LabeledImages& data,
                     const std::vector<train::ExampleRef>& examples,
                     const std::optional<std::filesystem::path>& cache_dir) {
  std::optional<std::filesystem::path> cache_file;
  const std::uint64_t ext_hash = extractor.fingerprint();
  std::uint64_t split_hash = 0;
  if (cache_dir) {
    split_hash = split_fingerprint(data, examples);
    cache_file = feature_cache_path(*cache_dir, ext_hash, split_hash);
    if (std::filesystem::exists(*cache_file)) {
      FeatureCacheHeader header;
      Mat cached = load_feature_cache(*cache_file, &header);
      if (header.rows != examples.size() || header.cols != static_cast<std::uint64_t>(extractor.feature_dim()) ||
          header.extractor_hash != ext_hash || header.split_hash != split_hash) {
        throw Error("dimension mismatch with cache: " + cache_file->string());
      }
      return cached;
    }
  }
  const int dim = extractor.feature_dim();
  Mat out(dim, static_cast<Eigen::Index>(examples.size()));
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto f = extractor.extract(transform::eval_transform(data.prepared(examples[i])));
    if (static_cast<int>(f.size()) != dim) throw Error("extractor returned wrong feature dimension");
    std::copy(f.begin(), f.end(), out.col(static_cast<Eigen::Index>(i)).data());
  }
  if (cache_file) {
    std::filesystem::create_directories(*cache_dir);
    save_feature_cache(*cache_file, out, ext_hash, split_hash);
  }
  return out;
}

void save_feature_cache(const std::filesystem::path& path, const Mat& features, std::uint64_t extractor_hash,
                        std::uint64_t split_hash) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write feature cache: " + path.string());
    out.write(kMagic, sizeof kMagic);
    write_pod(out, static_cast<std::uint64_t>(features.cols()));
    write_pod(out, static_cast<std::uint64_t>(features.rows()));
    write_pod(out, std::uint32_t{1});
    write_pod(out, extractor_hash);
    write_pod(out, split_hash);
    out.write(reinterpret_cast<const char*>(features.data()),
              static_cast<std::streamsize>(features.size() * sizeof(float)));
    if (!out) throw Error("cannot write feature cache: " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

FeatureCacheHeader read_header(std::istream& in, const std::filesystem::path& path) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw Error("not a feature cache: " + path.string());
  FeatureCacheHeader h;
  h.rows = read_pod<std::uint64_t>(in);
  h.cols = read_pod<std::uint64_t>(in);
  h.dtype = read_pod<std::uint32_t>(in);
  h.extractor_hash = read_pod<std::uint64_t>(in);
  h.split_hash = read_pod<std::uint64_t>(in);
  if (h.dtype != 1) throw Error("unsupported feature dtype in " + path.string());
  return h;
}

}  // namespace

FeatureCacheHeader read_feature_cache_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open feature cache: " + path.string());
  return read_header(in, path);
}

Mat load_feature_cache(const std::filesystem::path& path, FeatureCacheHeader* header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open feature cache: " + path.string());
  const auto h = read_header(in, path);
  Mat m(static_cast<Eigen::Index>(h.cols), static_cast<Eigen::Index>(h.rows));
  in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(float)));
  if (!in) throw Error("truncated feature cache: " + path.string());
  if (header) *header = h;
  return m;
}

}  // namespace biasaudit::probe
