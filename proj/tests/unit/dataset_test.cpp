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

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/core.hpp>

#include "biasaudit/core/error.hpp"
#include "biasaudit/dataset/image_io.hpp"
#include "biasaudit/dataset/image_store.hpp"
#include "biasaudit/dataset/manifest.hpp"
#include "biasaudit/dataset/preprocess.hpp"
#include "biasaudit/dataset/sampling.hpp"
#include "biasaudit/dataset/synthetic.hpp"
#include "test_util.hpp"

using namespace biasaudit;
using namespace biasaudit::dataset;
using biasaudit::testing::TempDir;
namespace bt = biasaudit::testing;

namespace {

DatasetManifest parse(const std::string& text) {
  std::istringstream in(text);
  return parse_manifest(in);
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Manifest, RecordsAreSortedById) {
  const auto m = parse(R"({"dataset_id":"toy","display_name":"Toy","root_uri":"/data"}
{"image_id":"c","path":"c.jpg","width":4,"height":3}
{"image_id":"a","path":"a.jpg","width":4,"height":3}
{"image_id":"b","path":"b.jpg","width":4,"height":3}
)");
  ASSERT_EQ(m.images.size(), 3u);
  EXPECT_EQ(m.images[0].image_id, "a");
  EXPECT_EQ(m.images[1].image_id, "b");
  EXPECT_EQ(m.images[2].image_id, "c");
  EXPECT_EQ(m.dataset_id, "toy");
  EXPECT_EQ(m.display_name, "Toy");
}

TEST(Manifest, DuplicateIdRejected) {
  const auto msg = error_of([] {
    parse(R"({"dataset_id":"toy"}
{"image_id":"a","path":"a.jpg","width":4,"height":3}
{"image_id":"a","path":"b.jpg","width":4,"height":3}
)");
  });
  EXPECT_NE(msg.find("duplicate id"), std::string::npos) << msg;
}

TEST(Manifest, EmptyManifestRejected) {
  const auto msg = error_of([] { parse(R"({"dataset_id":"toy"})"); });
  EXPECT_NE(msg.find("empty manifest"), std::string::npos) << msg;
}

TEST(Manifest, MalformedLineIsParseError) {
  EXPECT_THROW(parse("{\"dataset_id\":\"x\"}\n{not json}\n"), Error);
}

TEST(Manifest, InvalidSizeOfDecodableRecordRejected) {
  EXPECT_THROW(parse(R"({"dataset_id":"toy"}
{"image_id":"a","path":"a.jpg","width":0,"height":3}
)"),
               Error);
}

TEST(Manifest, WriteThenRegisterRoundTrips) {
  TempDir dir;
  auto m = bt::numbered_manifest("rt", 12);
  m.display_name = "Round Trip";
  m.notes = "filtered by hand";
  m.images[3].decode_ok = false;
  m.predefined_train_split = std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6};
  write_manifest(m, dir / "m.jsonl");
  EXPECT_EQ(register_dataset(dir / "m.jsonl"), m);
}

TEST(Manifest, PredefinedSplitRestrictsSampling) {
  auto m = bt::numbered_manifest("p", 20);
  m.predefined_train_split = std::vector<std::size_t>{1, 3, 5, 7, 9, 11, 13, 15};
  m.images[5].decode_ok = false;
  const auto usable = m.usable_indices();
  EXPECT_EQ(usable, (std::vector<std::size_t>{1, 3, 7, 9, 11, 13, 15}));
  const auto split = sample_split(m, 4, 3, 0);
  for (auto i : split.train_indices) EXPECT_TRUE(std::count(usable.begin(), usable.end(), i));
  for (auto i : split.val_indices) EXPECT_TRUE(std::count(usable.begin(), usable.end(), i));
  EXPECT_THROW(sample_split(m, 5, 3, 0), Error);
}

TEST(Manifest, PredefinedSplitAcceptsImageIds) {
  const auto m = parse(R"({"dataset_id":"toy","predefined_train_split":["b","c"]}
{"image_id":"c","path":"c.jpg","width":4,"height":3}
{"image_id":"a","path":"a.jpg","width":4,"height":3}
{"image_id":"b","path":"b.jpg","width":4,"height":3}
)");
  ASSERT_TRUE(m.predefined_train_split);
  EXPECT_EQ(*m.predefined_train_split, (std::vector<std::size_t>{1, 2}));
}

TEST(SampleSplit, SizesAndDisjointness) {
  const auto m = bt::numbered_manifest("d", 30);
  const auto s = sample_split(m, 9, 3, 7);
  EXPECT_EQ(s.train_indices.size(), 9u);
  EXPECT_EQ(s.val_indices.size(), 3u);
  std::set<std::size_t> train(s.train_indices.begin(), s.train_indices.end());
  for (auto v : s.val_indices) EXPECT_FALSE(train.contains(v));
  EXPECT_TRUE(std::is_sorted(s.train_indices.begin(), s.train_indices.end()));
  EXPECT_TRUE(std::is_sorted(s.val_indices.begin(), s.val_indices.end()));
  for (auto i : s.train_indices) EXPECT_LT(i, 30u);
}

TEST(SampleSplit, DeterministicForSameInputs) {
  const auto m = bt::numbered_manifest("d", 30);
  EXPECT_EQ(sample_split(m, 9, 3, 7), sample_split(m, 9, 3, 7));
}

TEST(SampleSplit, InsufficientImages) {
  const auto m = bt::numbered_manifest("d", 30);
  const auto msg = error_of([&] { sample_split(m, 29, 2, 0); });
  EXPECT_NE(msg.find("insufficient images"), std::string::npos) << msg;
}

TEST(SampleSplit, SeedSensitivityOverTenSeeds) {
  const auto m = bt::numbered_manifest("d", 40);
  const auto base = sample_split(m, 9, 3, 0);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto s = sample_split(m, 9, 3, seed);
    EXPECT_TRUE(s.train_indices != base.train_indices || s.val_indices != base.val_indices) << seed;
  }
}

TEST(SampleSplit, DependsOnDatasetId) {
  const auto a = sample_split(bt::numbered_manifest("a", 40), 9, 3, 1);
  const auto b = sample_split(bt::numbered_manifest("b", 40), 9, 3, 1);
  EXPECT_NE(a.train_indices, b.train_indices);
}

TEST(SampleSplit, IndependentOfRecordInputOrder) {
  auto m1 = bt::numbered_manifest("d", 25);
  auto m2 = m1;
  std::reverse(m2.images.begin(), m2.images.end());
  finalize_manifest(m2);
  EXPECT_EQ(sample_split(m1, 10, 5, 3), sample_split(m2, 10, 5, 3));
}

TEST(SampleSplit, SerializedSplitEqualsRegenerated) {
  TempDir dir;
  const auto m = bt::numbered_manifest("d", 30);
  const auto s = sample_split(m, 9, 3, 7);
  save_split(s, dir / "split.json");
  EXPECT_EQ(load_split(dir / "split.json"), sample_split(m, 9, 3, 7));
}

TEST(SampleSplit, CorruptFilesAreReplacedByOthers) {
  auto m = bt::numbered_manifest("d", 20);
  for (int i = 0; i < 5; ++i) m.images[static_cast<std::size_t>(i)].decode_ok = false;
  const auto s = sample_split(m, 10, 5, 1);
  EXPECT_EQ(s.train_indices.size() + s.val_indices.size(), 15u);
  for (auto i : s.train_indices) EXPECT_GE(i, 5u);
  for (auto i : s.val_indices) EXPECT_GE(i, 5u);
}

TEST(PseudoDatasets, DisjointSetsOfRequestedSize) {
  const auto m = bt::numbered_manifest("yfcc", 400);
  const auto sets = build_pseudo_datasets(m, 3, 100, 5, 20);
  ASSERT_EQ(sets.size(), 3u);
  std::set<std::size_t> all;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    EXPECT_EQ(sets[i].train_indices.size(), 100u);
    EXPECT_EQ(sets[i].val_indices.size(), 20u);
    EXPECT_EQ(sets[i].dataset_id, "yfcc#pseudo" + std::to_string(i));
    all.insert(sets[i].train_indices.begin(), sets[i].train_indices.end());
    all.insert(sets[i].val_indices.begin(), sets[i].val_indices.end());
  }
  EXPECT_EQ(all.size(), 3u * 120u);
}

TEST(PseudoDatasets, TooFewImages) {
  const auto m = bt::numbered_manifest("small", 10);
  EXPECT_THROW(build_pseudo_datasets(m, 3, 4, 0), Error);
}

TEST(PseudoDatasets, Deterministic) {
  const auto m = bt::numbered_manifest("yfcc", 400);
  EXPECT_EQ(build_pseudo_datasets(m, 3, 100, 5, 10), build_pseudo_datasets(m, 3, 100, 5, 10));
  EXPECT_NE(build_pseudo_datasets(m, 3, 100, 5, 10)[0].train_indices,
            build_pseudo_datasets(m, 3, 100, 6, 10)[0].train_indices);
}

TEST(Preprocess, LargeImageShorterSideTo500) {
  const auto out = preprocess_image(bt::pattern_image(1000, 800));
  EXPECT_EQ(out.width, 625);
  EXPECT_EQ(out.height, 500);
}

TEST(Preprocess, SmallImageUnchanged) {
  const auto in = bt::pattern_image(400, 300);
  EXPECT_EQ(preprocess_image(in), in);
}

TEST(Preprocess, GrayscaleBecomesEqualRgb) {
  Image gray = bt::pattern_image(20, 10, 1);
  const auto out = preprocess_image(gray);
  ASSERT_EQ(out.channels, 3);
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 20; ++x) {
      EXPECT_EQ(out.at(x, y, 0), gray.at(x, y, 0));
      EXPECT_EQ(out.at(x, y, 1), gray.at(x, y, 0));
      EXPECT_EQ(out.at(x, y, 2), gray.at(x, y, 0));
    }
  }
}

TEST(Preprocess, AlphaDropped) {
  const auto out = to_rgb(bt::pattern_image(5, 5, 4));
  EXPECT_EQ(out.channels, 3);
}

TEST(ImageIo, PngRoundTripIsLosslessAt8Bit) {
  TempDir dir;
  Image img(7, 5, 3);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<float>(i % 256) / 255.0f;
  write_png(img, dir / "a.png");
  const auto back = decode_image_file(dir / "a.png");
  ASSERT_EQ(back.width, 7);
  ASSERT_EQ(back.height, 5);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) EXPECT_NEAR(back.pixels[i], img.pixels[i], 1e-6);
}

TEST(ImageIo, ChannelOrderIsRgb) {
  TempDir dir;
  cv::Mat bgr(2, 2, CV_8UC3, cv::Scalar(255, 0, 0));  // pure blue in OpenCV order
  cv::imwrite((dir / "blue.png").string(), bgr);
  const auto img = decode_image_file(dir / "blue.png");
  EXPECT_FLOAT_EQ(img.at(0, 0, 0), 0.0f);
  EXPECT_FLOAT_EQ(img.at(0, 0, 2), 1.0f);
}

TEST(ImageIo, UndecodableThrows) {
  TempDir dir;
  std::ofstream(dir / "bad.jpg") << "not an image";
  EXPECT_THROW(decode_image_file(dir / "bad.jpg"), Error);
}

TEST(BuildManifest, ScansDirectoryAndFlagsCorruptFiles) {
  TempDir dir;
  std::filesystem::create_directories(dir / "root/sub");
  write_png(bt::pattern_image(30, 20), dir / "root/b.png");
  write_png(bt::pattern_image(900, 600), dir / "root/sub/a.png");
  write_png(bt::pattern_image(8, 8, 1), dir / "root/gray.png");
  std::ofstream(dir / "root/broken.jpg") << "garbage";
  std::ofstream(dir / "root/readme.txt") << "ignored";
  BuildOptions opts;
  opts.display_name = "Toy";
  opts.cache_dir = dir / "cache";
  const auto m = build_manifest_from_directory(dir / "root", "toy", opts);
  ASSERT_EQ(m.images.size(), 4u);
  EXPECT_EQ(m.dataset_id, "toy");
  const auto broken = m.find("broken.jpg");
  ASSERT_TRUE(broken);
  EXPECT_FALSE(m.images[*broken].decode_ok);
  EXPECT_EQ(m.usable_indices().size(), 3u);
  const auto a = m.find("sub/a.png");
  ASSERT_TRUE(a);
  EXPECT_EQ(m.images[*a].width, 900);
  EXPECT_EQ(m.images[*a].height, 600);

  // Stored images come back preprocessed, through the cache.
  ImageStore store(dir / "cache");
  const auto img = store.load(m, *a);
  EXPECT_EQ(img.height, 500);
  EXPECT_EQ(img.width, 750);
  EXPECT_TRUE(std::filesystem::exists(PreprocessCache(dir / "cache").path_for("toy", "sub/a.png")));
  EXPECT_THROW(store.load(m, *broken), Error);
}

TEST(PreprocessCacheTest, StoreThenLoad) {
  TempDir dir;
  PreprocessCache cache(dir.path());
  EXPECT_FALSE(cache.load("d", "x"));
  const auto img = bt::pattern_image(9, 4);
  cache.store("d", "x", img);
  const auto back = cache.load("d", "x");
  ASSERT_TRUE(back);
  EXPECT_EQ(back->width, 9);
  EXPECT_NE(cache.path_for("d", "x"), cache.path_for("d", "y"));
  EXPECT_NE(cache.path_for("d", "x"), cache.path_for("e", "x"));
}

TEST(Synthetic, UriRoundTrip) {
  SyntheticStyle s;
  s.seed = 12;
  s.min_side = 100;
  s.max_side = 140;
  s.mean_shapes = 3;
  s.saturation = 0.5;
  s.brightness = -0.1;
  const auto back = SyntheticStyle::from_uri(s.to_uri());
  EXPECT_EQ(back.seed, 12u);
  EXPECT_EQ(back.min_side, 100);
  EXPECT_EQ(back.max_side, 140);
  EXPECT_EQ(back.mean_shapes, 3);
  EXPECT_DOUBLE_EQ(back.saturation, 0.5);
  EXPECT_DOUBLE_EQ(back.brightness, -0.1);
  EXPECT_THROW(SyntheticStyle::from_uri("synthetic://shapes?bogus=1"), Error);
}

TEST(Synthetic, RenderingIsDeterministicAndSized) {
  const auto m = make_synthetic_manifest("syn", 5, {});
  ImageStore store;
  for (std::size_t i = 0; i < m.images.size(); ++i) {
    const auto a = store.load(m, i);
    EXPECT_EQ(a, store.load(m, i));
    EXPECT_EQ(a.width, m.images[i].width);
    EXPECT_EQ(a.height, m.images[i].height);
    EXPECT_GE(std::min(a.width, a.height), 256);
    for (float v : a.pixels) {
      ASSERT_GE(v, 0.0f);
      ASSERT_LE(v, 1.0f);
    }
  }
  EXPECT_NE(store.load(m, 0), store.load(m, 1));
}

TEST(Synthetic, ManifestWrittenAndReloaded) {
  TempDir dir;
  const auto m = make_synthetic_manifest("syn", 10, {});
  write_manifest(m, dir / "syn.jsonl");
  const auto back = register_dataset(dir / "syn.jsonl");
  EXPECT_EQ(back, m);
  EXPECT_TRUE(is_synthetic_uri(back.root_uri));
}
