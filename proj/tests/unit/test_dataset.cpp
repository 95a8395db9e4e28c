/*
 * Copyright 2026 The SDL Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "sdl/dataset.hpp"
#include "sdl/errors.hpp"

namespace sdl {
namespace {

TEST(LoadDataset, CountsPerClass) {
  testing::TempDir dir("ds");
  testing::write_fixture(dir.path(), 2, 8, 1);
  const Dataset ds = load_dataset(dir.path());
  EXPECT_EQ(ds.size(), 6u);
  EXPECT_EQ(ds.class_counts, (std::vector<std::size_t>{2, 2, 2}));
  EXPECT_TRUE(ds.warnings.empty());
  EXPECT_TRUE(ds.errors.empty());
  for (const Sample& s : ds.samples) EXPECT_EQ(s.image.shape(), Shape({8, 8, 3}));
}

TEST(LoadDataset, ResizesOnLoad) {
  testing::TempDir dir("dsr");
  testing::write_fixture(dir.path(), 1, 8, 1);
  const Dataset ds = load_dataset(dir.path(), 32);
  for (const Sample& s : ds.samples) EXPECT_EQ(s.image.shape(), Shape({32, 32, 3}));
}

TEST(LoadDataset, EmptyClassNamesClass) {
  testing::TempDir dir("dse");
  testing::write_fixture(dir.path(), 2, 8, 1);
  for (const auto& e : std::filesystem::directory_iterator(dir / "intruder")) std::filesystem::remove(e.path());
  try {
    load_dataset(dir.path());
    FAIL();
  } catch (const DatasetError& e) {
    EXPECT_NE(std::string(e.what()).find("intruder"), std::string::npos) << e.what();
  }
}

TEST(LoadDataset, MissingClassDir) {
  testing::TempDir dir("dsm");
  testing::write_fixture(dir.path(), 1, 8, 1);
  std::filesystem::remove_all(dir / "no_human");
  EXPECT_THROW(load_dataset(dir.path()), DatasetError);
}

TEST(LoadDataset, SkipsNonImagesAndRecordsBadFiles) {
  testing::TempDir dir("dsw");
  testing::write_fixture(dir.path(), 2, 8, 1);
  testing::write_text(dir / "admin" / "notes.txt", "hello");
  testing::write_text(dir / "admin" / "broken.ppm", "P3\n1 1\n255\n0 0 0\n");
  const Dataset ds = load_dataset(dir.path());
  EXPECT_EQ(ds.size(), 6u);
  ASSERT_EQ(ds.warnings.size(), 1u);
  EXPECT_EQ(ds.warnings[0].path.filename(), "notes.txt");
  ASSERT_EQ(ds.errors.size(), 1u);
  EXPECT_EQ(ds.errors[0].path.filename(), "broken.ppm");
  EXPECT_NE(ds.errors[0].message.find("P6"), std::string::npos);
}

TEST(OneHot, Examples) {
  EXPECT_EQ(one_hot(1, 3), Tensor(Shape{3}, {0, 1, 0}));
  for (std::size_t k = 2; k < 6; ++k)
    for (std::size_t c = 0; c < k; ++c) {
      const Tensor t = one_hot(c, k);
      double s = 0.0;
      for (float v : t.data()) s += v;
      EXPECT_EQ(s, 1.0);
    }
  EXPECT_THROW(one_hot(3, 3), RangeError);
}

TEST(Batches, FinalPartialBatch) {
  const Dataset ds = synthetic_dataset(4, 8, 2);  // 12 samples
  std::vector<std::size_t> idx(10);
  for (std::size_t i = 0; i < 10; ++i) idx[i] = i;
  BatchOptions opts;
  opts.batch_size = 4;
  BatchIterator it(ds, idx, opts, 0);
  EXPECT_EQ(it.batch_count(), 3u);
  std::vector<std::size_t> sizes;
  while (auto b = it.next()) {
    sizes.push_back(b->images.dim(0));
    EXPECT_EQ(b->labels.shape(), Shape({b->images.dim(0), 3}));
  }
  EXPECT_EQ(sizes, (std::vector<std::size_t>{4, 4, 2}));
}

TEST(Batches, SameSeedSameOrderDifferentEpochsDiffer) {
  const Dataset ds = synthetic_dataset(5, 8, 3);
  BatchOptions opts;
  opts.seed = 42;
  const auto order = [&](std::uint64_t epoch) { return BatchIterator(ds, all_indices(ds), opts, epoch).order(); };
  EXPECT_EQ(order(1), order(1));
  EXPECT_NE(order(1), order(2));
  auto sorted = order(1);
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, all_indices(ds));
}

TEST(Batches, LabelMultisetPreserved) {
  const Dataset ds = synthetic_dataset(7, 8, 4);
  BatchOptions opts;
  opts.batch_size = 5;
  opts.seed = 5;
  opts.augment = AugmentConfig{};
  BatchIterator it(ds, all_indices(ds), opts, 3);
  std::vector<std::size_t> seen(3, 0);
  while (auto b = it.next()) {
    for (std::size_t i = 0; i < b->indices.size(); ++i) {
      const std::size_t k = b->indices[i];
      EXPECT_EQ(b->labels[i * 3 + ds.samples[k].label], 1.0f);
      ++seen[ds.samples[k].label];
    }
    for (float v : b->images.data()) {
      EXPECT_GE(v, -1.0f);
      EXPECT_LE(v, 255.0f / 127.0f - 1.0f + 1e-6f);
    }
  }
  EXPECT_EQ(seen, ds.class_counts);
}

TEST(Batches, AugmentedBatchesReproducible) {
  const Dataset ds = synthetic_dataset(3, 16, 6);
  BatchOptions opts;
  opts.batch_size = 4;
  opts.seed = 9;
  opts.augment = AugmentConfig{15.0, 0.9, 1.1, 0.5, 123};
  BatchIterator a(ds, all_indices(ds), opts, 2), b(ds, all_indices(ds), opts, 2);
  while (auto x = a.next()) {
    auto y = b.next();
    ASSERT_TRUE(y);
    EXPECT_EQ(x->images, y->images);
  }
}

TEST(Split, StratifiedWithinOneSample) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Dataset ds = synthetic_dataset(1, 4, seed);
    ds.samples.clear();
    ds.class_counts = {13, 7, 22};
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < ds.class_counts[c]; ++i) ds.samples.push_back({Tensor(Shape{1, 1, 3}), c, ""});
    const SplitConfig cfg{0.7, 0.2, 0.1, seed};
    const Split s = stratified_split(ds, cfg);
    EXPECT_EQ(s.train.size() + s.val.size() + s.test.size(), ds.size());
    auto count = [&](const std::vector<std::size_t>& part, std::size_t c) {
      return static_cast<double>(std::count_if(part.begin(), part.end(), [&](std::size_t i) { return ds.samples[i].label == c; }));
    };
    for (std::size_t c = 0; c < 3; ++c) {
      const double n = static_cast<double>(ds.class_counts[c]);
      EXPECT_LE(std::abs(count(s.train, c) - 0.7 * n), 1.0);
      EXPECT_LE(std::abs(count(s.val, c) - 0.2 * n), 1.0);
      EXPECT_LE(std::abs(count(s.test, c) - 0.1 * n), 1.0);
    }
    std::vector<std::size_t> all = s.train;
    all.insert(all.end(), s.val.begin(), s.val.end());
    all.insert(all.end(), s.test.begin(), s.test.end());
    std::sort(all.begin(), all.end());
    EXPECT_EQ(all, all_indices(ds));
  }
}

TEST(Split, InvalidFractions) {
  EXPECT_ANY_THROW((SplitConfig{0.5, 0.2, 0.2, 0}.validate()));
  EXPECT_ANY_THROW((SplitConfig{1.2, -0.2, 0.0, 0}.validate()));
}

TEST(Synthetic, DeterministicAndRoundTrips) {
  testing::TempDir dir("syn");
  const Dataset a = synthetic_dataset(2, 12, 7), b = synthetic_dataset(2, 12, 7);
  ASSERT_EQ(a.size(), 6u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.samples[i].image, b.samples[i].image);
  write_dataset(a, dir.path());
  const Dataset c = load_dataset(dir.path());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(c.samples[i].image, a.samples[i].image);
    EXPECT_EQ(c.samples[i].label, a.samples[i].label);
  }
}

}  // namespace
}  // namespace sdl
