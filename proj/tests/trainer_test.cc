// Copyright 2026 The Weave Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "weave/trainer.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "weave/errors.h"

namespace weave {
namespace {

const std::string kData = WEAVE_DATA_DIR;

Dataset mnist(std::size_t limit) {
  return load_idx(kData + "/mnist-subset-images-idx3-ubyte.gz",
                  kData + "/mnist-subset-labels-idx1-ubyte.gz", limit);
}

void write_raw_idx(const std::string& images, const std::string& labels, std::uint32_t n,
                   std::uint32_t image_magic = 0x803) {
  auto be = [](std::ofstream& os, std::uint32_t v) {
    for (int i = 3; i >= 0; --i) os.put(static_cast<char>(v >> (8 * i)));
  };
  std::ofstream im(images, std::ios::binary);
  be(im, image_magic);
  be(im, n);
  be(im, 2);
  be(im, 3);
  for (std::uint32_t i = 0; i < n * 6; ++i) im.put(static_cast<char>(i * 40));
  std::ofstream lb(labels, std::ios::binary);
  be(lb, 0x801);
  be(lb, n);
  for (std::uint32_t i = 0; i < n; ++i) lb.put(static_cast<char>(i % 10));
}

TEST(DatasetTest, ReadsGzipSubset) {
  const auto d = mnist(500);
  ASSERT_EQ(d.size(), 500u);
  EXPECT_EQ(d.rows, 28);
  EXPECT_EQ(d.cols, 28);
  for (int y : d.labels) {
    EXPECT_GE(y, 0);
    EXPECT_LT(y, 10);
  }
  const auto [lo, hi] = std::minmax_element(d.pixels.begin(), d.pixels.end());
  EXPECT_EQ(*lo, 0.0f);
  EXPECT_EQ(*hi, 1.0f);
}

TEST(DatasetTest, ReadsRawIdxBitExactly) {
  const std::string im = ::testing::TempDir() + "/w_img.idx", lb = ::testing::TempDir() + "/w_lab.idx";
  write_raw_idx(im, lb, 3);
  const auto d = load_idx(im, lb);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d.rows, 2);
  EXPECT_EQ(d.cols, 3);
  EXPECT_EQ(d.labels, (std::vector<int>{0, 1, 2}));
  for (std::size_t i = 0; i < d.pixels.size(); ++i) {
    EXPECT_EQ(d.pixels[i], static_cast<float>(static_cast<unsigned char>(i * 40)) / 255.0f);
  }
  write_raw_idx(im, lb, 3, 0x801);
  EXPECT_THROW(load_idx(im, lb), FormatError);
  EXPECT_THROW(load_idx(im + ".missing", lb), FormatError);
  std::remove(im.c_str());
  std::remove(lb.c_str());
}

TEST(DatasetTest, SliceAndBatch) {
  const auto d = make_synthetic(20, 1);
  const auto s = d.slice(5, 9);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s.labels[0], d.labels[5]);
  std::vector<std::size_t> idx = {3, 1};
  std::vector<int> y;
  const auto t = s.batch(idx, &y);
  EXPECT_EQ(t.shape, (Shape{2, 28, 28, 1}));
  EXPECT_EQ(y, (std::vector<int>{d.labels[8], d.labels[6]}));
  EXPECT_THROW(d.slice(10, 30), RangeError);
}

TEST(EvaluateTest, EmptyTestSetIsAnError) {
  Model m(NetworkSpec::network_i(), 1);
  EXPECT_THROW(evaluate(m, Dataset{}, 128), RangeError);
}

TEST(EvaluateTest, RandomWeightsAreAtChance) {
  // Balanced classes: 100 of each.
  auto d = make_synthetic(1000, 5);
  for (std::size_t i = 0; i < d.size(); ++i) d.labels[i] = static_cast<int>(i % 10);
  double sum = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Model m(NetworkSpec::network_i(), seed);
    sum += evaluate(m, d, 128);
  }
  EXPECT_NEAR(sum / 5, 0.1, 0.03);
}

TEST(TrainTest, MemorizesTenSamples) {
  const auto d = mnist(10);
  TrainConfig cfg;
  cfg.batch_size = 10;
  cfg.keep = 1.0;
  cfg.learning_rate = 0.1;
  cfg.epochs = 150;
  cfg.reproducible = true;
  auto r = train_solo(NetworkSpec::network_i(), d, d, cfg);
  EXPECT_EQ(evaluate(*r.model, d, 10), 1.0);
}

TEST(TrainTest, MedianLossDecreasesOverFirstEpochs) {
  const auto d = mnist(1000);
  const auto test = d.slice(0, 100);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.seed = 7;
  auto r = train_solo(NetworkSpec::network_i(), d, test, cfg);
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  for (int e = 0; e < 3; ++e) {
    EXPECT_LT(median(r.batch_losses[e + 1]), median(r.batch_losses[e])) << "epoch " << e + 1;
  }
  EXPECT_TRUE(r.model->finite());
  ASSERT_EQ(r.records.size(), 4u);
  EXPECT_GT(r.records.back().wall_time, 0.0);
}

TEST(TrainTest, ConfigValidation) {
  TrainConfig cfg;
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.keep = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.keep = 1.0;
  EXPECT_NO_THROW(cfg.validate());
  cfg.pretrain_epochs = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.batch_size = 32;
  cfg.epochs = 2;
  cfg.seed = 3;
  cfg.reproducible = true;
  return cfg;
}

TEST(CollaborativeTest, SingleDomainIsSolo) {
  const auto d = make_synthetic(96, 1);
  const auto test = make_synthetic(40, 2);
  const auto cfg = small_config();
  const auto solo = train_solo(NetworkSpec::network_i(), d, test, cfg);
  auto collab = train_collaborative(NetworkSpec::network_i(), {d}, test,
                                    DegreeMatrix::identity(1), cfg);
  ASSERT_EQ(collab.domains.size(), 1u);
  EXPECT_EQ(collab.domains[0].batch_losses, solo.batch_losses);
  EXPECT_EQ(collab.domains[0].records[1].test_accuracy, solo.records[1].test_accuracy);
}

TEST(CollaborativeTest, IdentityDegreeMatchesSoloRuns) {
  const std::vector<Dataset> domains = {make_synthetic(96, 11), make_synthetic(96, 12)};
  const auto test = make_synthetic(64, 13);
  const auto cfg = small_config();
  auto collab = train_collaborative(NetworkSpec::network_i(), domains, test,
                                    DegreeMatrix::identity(2), cfg);
  ASSERT_TRUE(collab.run.all_ok());
  ASSERT_EQ(collab.domains.size(), 2u);
  for (int i = 0; i < 2; ++i) {
    const auto solo = train_solo(NetworkSpec::network_i(), domains[i], test, cfg, i + 1);
    const auto& c = collab.domains[i];
    ASSERT_EQ(c.batch_losses.size(), solo.batch_losses.size());
    for (std::size_t e = 0; e < solo.batch_losses.size(); ++e) {
      for (std::size_t b = 0; b < solo.batch_losses[e].size(); ++b) {
        EXPECT_NEAR(c.batch_losses[e][b], solo.batch_losses[e][b], 1e-2);
      }
    }
    EXPECT_NEAR(c.records.back().test_accuracy, solo.records.back().test_accuracy, 0.05);
  }
}

TEST(CollaborativeTest, UnequalDomainsWrapAndStayInLockstep) {
  const std::vector<Dataset> domains = {make_synthetic(70, 21), make_synthetic(40, 22)};
  const auto test = make_synthetic(30, 23);
  auto cfg = small_config();
  cfg.epochs = 1;
  auto r = train_collaborative(NetworkSpec::network_ii(), domains, test,
                               DegreeMatrix::uniform(2), cfg);
  ASSERT_TRUE(r.run.all_ok());
  EXPECT_EQ(r.domains[0].batch_losses[0].size(), 3u);
  EXPECT_EQ(r.domains[1].batch_losses[0].size(), 3u);
}

TEST(CollaborativeTest, DeterministicAcrossRuns) {
  const std::vector<Dataset> domains = {make_synthetic(64, 31), make_synthetic(64, 32)};
  const auto test = make_synthetic(32, 33);
  auto cfg = small_config();
  cfg.epochs = 1;
  LocalRunOptions opts;
  opts.dealer_seed = seed_from_u64(99);
  auto a = train_collaborative(NetworkSpec::network_i(), domains, test, DegreeMatrix::uniform(2),
                               cfg, {}, opts);
  auto b = train_collaborative(NetworkSpec::network_i(), domains, test, DegreeMatrix::uniform(2),
                               cfg, {}, opts);
  EXPECT_EQ(a.run.transcripts, b.run.transcripts);
  EXPECT_EQ(a.domains[0].batch_losses, b.domains[0].batch_losses);
  EXPECT_EQ(a.domains[1].records[0].test_accuracy, b.domains[1].records[0].test_accuracy);
}

TEST(CollaborativeTest, PretrainingEpochsRunLocally) {
  const std::vector<Dataset> domains = {make_synthetic(64, 41), make_synthetic(64, 42)};
  const auto test = make_synthetic(32, 43);
  auto cfg = small_config();
  cfg.pretrain_epochs = 2;
  cfg.epochs = 1;
  auto r = train_collaborative(NetworkSpec::network_i(), domains, test, DegreeMatrix::uniform(2),
                               cfg);
  ASSERT_TRUE(r.run.all_ok());
  auto local = cfg;
  local.epochs = 2;
  for (int i = 0; i < 2; ++i) {
    const auto solo = train_solo(NetworkSpec::network_i(), domains[i], test, local, i + 1);
    const auto& c = r.domains[i];
    ASSERT_EQ(c.records.size(), 3u);
    EXPECT_EQ(c.records[2].epoch, 3);
    for (int e = 0; e < 2; ++e) {
      EXPECT_EQ(c.batch_losses[e], solo.batch_losses[e]);
      EXPECT_EQ(c.records[e].test_accuracy, solo.records[e].test_accuracy);
    }
  }
  EXPECT_FALSE(r.run.transcripts[0].empty());
}

TEST(CollaborativeTest, DegreeMatrixSizeMustMatch) {
  const std::vector<Dataset> domains = {make_synthetic(8, 1), make_synthetic(8, 2)};
  EXPECT_THROW(train_collaborative(NetworkSpec::network_i(), domains, domains[0],
                                   DegreeMatrix::identity(3), small_config()),
               ConfigError);
}

}  // namespace
}  // namespace weave
