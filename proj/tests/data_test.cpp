#include "smrnn/data.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "smrnn/rng.hpp"

using namespace smrnn;
namespace fs = std::filesystem;

namespace {

fs::path test_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("smrnn_data_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream os(path);
  os << content;
}

}  // namespace

TEST(Idx, ImageRoundTrip) {
  fs::path dir = test_dir("img_rt");
  std::vector<IdxImage> images(2, IdxImage(784, 0));
  for (std::size_t i = 0; i < 784; ++i) {
    images[0][i] = static_cast<std::uint8_t>(i % 251);
    images[1][i] = static_cast<std::uint8_t>((3 * i) % 256);
  }
  const std::string path = (dir / "images.idx").string();
  write_idx_images(path, images);
  EXPECT_EQ(load_idx_images(path), images);
  EXPECT_EQ(load_idx_images(path), images);  // loaders are pure
}

TEST(Idx, LabelRoundTripAndRange) {
  fs::path dir = test_dir("lbl_rt");
  const std::string path = (dir / "labels.idx").string();
  write_idx_labels(path, {0, 9, 5});
  EXPECT_EQ(load_idx_labels(path), (std::vector<int>{0, 9, 5}));
  EXPECT_THROW(write_idx_labels(path, {10}), std::invalid_argument);

  // Hand-craft a label payload byte of 10.
  std::ofstream os(path, std::ios::binary);
  const unsigned char raw[] = {0, 0, 8, 1, 0, 0, 0, 1, 10};
  os.write(reinterpret_cast<const char*>(raw), sizeof raw);
  os.close();
  EXPECT_THROW(load_idx_labels(path), std::runtime_error);
}

TEST(Idx, MagicMismatchRejected) {
  fs::path dir = test_dir("magic");
  const std::string imgs = (dir / "images.idx").string();
  const std::string lbls = (dir / "labels.idx").string();
  write_idx_images(imgs, {IdxImage(784, 7)});
  write_idx_labels(lbls, {3});
  EXPECT_THROW(load_idx_images(lbls), std::runtime_error);  // label magic 0x801
  EXPECT_THROW(load_idx_labels(imgs), std::runtime_error);  // image magic 0x803
}

TEST(Idx, TruncationAndTrailingBytesRejected) {
  fs::path dir = test_dir("trunc");
  const std::string path = (dir / "images.idx").string();
  write_idx_images(path, {IdxImage(784, 1), IdxImage(784, 2)});

  fs::resize_file(path, 16 + 784 + 100);  // cuts the second image short
  EXPECT_THROW(load_idx_images(path), std::runtime_error);

  write_idx_images(path, {IdxImage(784, 1)});
  std::ofstream os(path, std::ios::binary | std::ios::app);
  os.put('x');
  os.close();
  EXPECT_THROW(load_idx_images(path), std::runtime_error);
}

TEST(Idx, WrongDimensionsRejected) {
  fs::path dir = test_dir("dims");
  const std::string path = (dir / "images.idx").string();
  std::ofstream os(path, std::ios::binary);
  const unsigned char header[] = {0, 0, 8, 3, 0, 0, 0, 1, 0, 0, 0, 27, 0, 0, 0, 28};
  os.write(reinterpret_cast<const char*>(header), sizeof header);
  for (int i = 0; i < 27 * 28; ++i) os.put(0);
  os.close();
  EXPECT_THROW(load_idx_images(path), std::runtime_error);
}

TEST(RowSequence, NormalizationAndReassembly) {
  IdxImage zero(784, 0);
  auto steps = to_row_sequence(zero);
  ASSERT_EQ(steps.size(), 28u);
  for (const auto& row : steps) EXPECT_EQ(row, std::vector<double>(28, 0.0));

  IdxImage img(784, 0);
  img[0] = 255;
  img[40] = 128;
  steps = to_row_sequence(img);
  EXPECT_EQ(steps[0][0], 1.0);
  EXPECT_EQ(steps[1][12], 128.0 / 255.0);

  // Reassembling the 28 rows reproduces the normalized bitmap.
  for (std::size_t r = 0; r < 28; ++r) {
    for (std::size_t c = 0; c < 28; ++c) {
      EXPECT_EQ(steps[r][c], img[r * 28 + c] / 255.0);
    }
  }
}

TEST(SpatialCorpus, PairingMismatchRejected) {
  std::vector<IdxImage> images(3, IdxImage(784, 0));
  EXPECT_THROW(make_spatial_corpus(images, {1, 2}), std::runtime_error);
  Corpus corpus = make_spatial_corpus(images, {1, 2, 3});
  ASSERT_EQ(corpus.size(), 3u);
  EXPECT_EQ(corpus[0].steps.size(), 28u);
  EXPECT_EQ(corpus[0].steps[0].size(), 28u);
  EXPECT_EQ(corpus[2].label, 3);
}

TEST(Strokes, ParseBasics) {
  fs::path dir = test_dir("parse");
  write_text(dir / "s.txt", "1 0 0 0\n0 1 1 1\n");
  auto steps = parse_stroke_file((dir / "s.txt").string());
  ASSERT_EQ(steps.size(), 2u);
  EXPECT_EQ(steps[0].dx, 1.0);
  EXPECT_EQ(steps[0].end_of_stroke, 0);
  EXPECT_EQ(steps[1].end_of_stroke, 1);
  EXPECT_EQ(steps[1].end_of_digit, 1);
}

TEST(Strokes, MalformedFilesRejected) {
  fs::path dir = test_dir("bad");
  write_text(dir / "empty.txt", "");
  EXPECT_THROW(parse_stroke_file((dir / "empty.txt").string()), std::runtime_error);

  write_text(dir / "nonnum.txt", "1 zebra 0 1\n");
  EXPECT_THROW(parse_stroke_file((dir / "nonnum.txt").string()), std::runtime_error);

  write_text(dir / "flag.txt", "1 0 2 1\n");
  EXPECT_THROW(parse_stroke_file((dir / "flag.txt").string()), std::runtime_error);

  write_text(dir / "early.txt", "1 0 0 1\n0 1 1 1\n");
  EXPECT_THROW(parse_stroke_file((dir / "early.txt").string()), std::runtime_error);

  write_text(dir / "noend.txt", "1 0 0 0\n0 1 1 0\n");
  EXPECT_THROW(parse_stroke_file((dir / "noend.txt").string()), std::runtime_error);

  write_text(dir / "extra.txt", "1 0 0 1 9\n");
  EXPECT_THROW(parse_stroke_file((dir / "extra.txt").string()), std::runtime_error);
}

TEST(Strokes, CorpusRoundTrip) {
  fs::path dir = test_dir("stroke_rt");
  Corpus corpus = synthetic_stroke_corpus(10, 77);
  write_strokes(dir.string(), corpus);
  Corpus loaded = load_strokes(dir.string(), (dir / "labels.txt").string());
  ASSERT_EQ(loaded.size(), corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    EXPECT_EQ(loaded[i].label, corpus[i].label);
    EXPECT_EQ(loaded[i].steps, corpus[i].steps);
  }
}

TEST(Strokes, MoreFilesThanLabelsRejected) {
  fs::path dir = test_dir("excess");
  write_strokes(dir.string(), synthetic_stroke_corpus(3, 1));
  write_text(dir / stroke_sample_name(3), "1 0 0 1\n");
  EXPECT_THROW(load_strokes(dir.string(), (dir / "labels.txt").string()), std::runtime_error);
}

TEST(Split, DeterministicAndDisjoint) {
  Corpus corpus;
  for (int i = 0; i < 200; ++i) {
    corpus.push_back({{{static_cast<double>(i)}}, i % 10});
  }
  DatasetSplit a = split_corpus(corpus, 5, 120, 50);
  DatasetSplit b = split_corpus(corpus, 5, 120, 50);
  ASSERT_EQ(a.train.size(), 120u);
  ASSERT_EQ(a.test.size(), 50u);
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    EXPECT_EQ(a.train[i].steps, b.train[i].steps);
  }

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    DatasetSplit s = split_corpus(corpus, seed, 120, 50);
    std::set<double> train_ids, test_ids;
    for (const auto& smp : s.train) train_ids.insert(smp.steps[0][0]);
    for (const auto& smp : s.test) test_ids.insert(smp.steps[0][0]);
    EXPECT_EQ(train_ids.size(), 120u);
    EXPECT_EQ(test_ids.size(), 50u);
    for (double id : test_ids) EXPECT_FALSE(train_ids.count(id));
  }
}

TEST(Split, FullScaleSizesAndErrors) {
  Corpus corpus;
  corpus.reserve(70000);
  for (int i = 0; i < 70000; ++i) corpus.push_back({{{1.0}}, i % 10});
  DatasetSplit s = split_corpus(corpus, 9, 60000);
  EXPECT_EQ(s.train.size(), 60000u);
  EXPECT_EQ(s.test.size(), 10000u);

  EXPECT_THROW(split_corpus(corpus, 0, 70000), std::invalid_argument);
  EXPECT_THROW(split_corpus(corpus, 0, 0), std::invalid_argument);
  EXPECT_THROW(split_corpus(corpus, 0, 60000, 20000), std::invalid_argument);
}

TEST(Batches, ExactCoverRectangularAndDeterministic) {
  Corpus corpus = synthetic_stroke_corpus(97, 3);  // variable lengths
  Rng rng(4);
  auto batches = make_batches(corpus, 16, rng);

  std::multiset<std::size_t> seen;
  for (const auto& batch : batches) {
    ASSERT_GE(batch.size(), 1u);
    ASSERT_LE(batch.size(), 16u);
    const std::size_t len = corpus[batch[0]].steps.size();
    for (std::size_t idx : batch) {
      EXPECT_EQ(corpus[idx].steps.size(), len);  // rectangular
      seen.insert(idx);
    }
  }
  ASSERT_EQ(seen.size(), corpus.size());  // each sample exactly once
  for (std::size_t i = 0; i < corpus.size(); ++i) EXPECT_EQ(seen.count(i), 1u);

  Rng rng2(4);
  EXPECT_EQ(make_batches(corpus, 16, rng2), batches);
  EXPECT_THROW(make_batches(corpus, 0, rng), std::invalid_argument);
}

TEST(Synthetic, SpatialCorpusShapeAndDeterminism) {
  Corpus a = synthetic_spatial_corpus(40, 11);
  Corpus b = synthetic_spatial_corpus(40, 11);
  ASSERT_EQ(a.size(), 40u);
  std::map<int, int> counts;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].steps.size(), 28u);
    for (const auto& row : a[i].steps) {
      ASSERT_EQ(row.size(), 28u);
      for (double v : row) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
    }
    EXPECT_EQ(a[i].steps, b[i].steps);
    ++counts[a[i].label];
  }
  for (int d = 0; d < 10; ++d) EXPECT_EQ(counts[d], 4);
}

TEST(Synthetic, StrokeCorpusObeysFormatInvariants) {
  Corpus corpus = synthetic_stroke_corpus(60, 21);
  std::set<std::size_t> lengths;
  for (const auto& sample : corpus) {
    ASSERT_GE(sample.steps.size(), 1u);
    lengths.insert(sample.steps.size());
    for (std::size_t t = 0; t < sample.steps.size(); ++t) {
      const auto& s = sample.steps[t];
      ASSERT_EQ(s.size(), 4u);
      EXPECT_GE(s[0], -1.0);  // unit moves only
      EXPECT_LE(s[0], 1.0);
      EXPECT_GE(s[1], -1.0);
      EXPECT_LE(s[1], 1.0);
      EXPECT_TRUE(s[2] == 0.0 || s[2] == 1.0);
      const bool last = (t + 1 == sample.steps.size());
      EXPECT_EQ(s[3], last ? 1.0 : 0.0);
    }
  }
  EXPECT_GT(lengths.size(), 5u);  // scale jitter produces varied lengths
}
