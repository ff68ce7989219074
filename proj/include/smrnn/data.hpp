#pragma once

// Dataset ingestion and preparation. Two encodings of the digit benchmark:
//   spatial  — 28x28 bitmaps (IDX container) fed row by row, 28 steps of 28
//   temporal — pen strokes, one (dx, dy, end_of_stroke, end_of_digit) tuple
//              per step, variable length
// plus seeded splits, length-bucketed batching, and synthetic corpus
// generators so everything runs without external downloads.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "smrnn/rng.hpp"
#include "smrnn/tensor.hpp"

namespace smrnn {

struct SequenceSample {
  std::vector<std::vector<double>> steps;  // each entry one stimulus vector
  int label = 0;                           // class index 0..9
};

using Corpus = std::vector<SequenceSample>;

inline std::vector<Tensor> as_stimuli(const SequenceSample& sample) {
  std::vector<Tensor> out;
  out.reserve(sample.steps.size());
  for (const auto& step : sample.steps) out.emplace_back(Shape{step.size()}, step);
  return out;
}

// ---------------------------------------------------------------------------
// IDX container (big-endian magic + counts, raw bytes)

using IdxImage = std::vector<std::uint8_t>;  // 784 row-major pixels

namespace detail {

constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

inline void write_be32(std::ostream& os, std::uint32_t v) {
  const unsigned char bytes[4] = {static_cast<unsigned char>(v >> 24),
                                  static_cast<unsigned char>(v >> 16),
                                  static_cast<unsigned char>(v >> 8),
                                  static_cast<unsigned char>(v)};
  os.write(reinterpret_cast<const char*>(bytes), 4);
}

inline std::uint32_t read_be32(std::istream& is, const std::string& what) {
  unsigned char bytes[4];
  if (!is.read(reinterpret_cast<char*>(bytes), 4)) {
    throw std::runtime_error("truncated IDX header while reading " + what);
  }
  return (std::uint32_t{bytes[0]} << 24) | (std::uint32_t{bytes[1]} << 16) |
         (std::uint32_t{bytes[2]} << 8) | std::uint32_t{bytes[3]};
}

}  // namespace detail

inline std::vector<IdxImage> load_idx_images(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open IDX image file: " + path);
  if (detail::read_be32(is, "magic") != detail::kIdxImageMagic) {
    throw std::runtime_error("bad magic for IDX image file: " + path);
  }
  const std::uint32_t count = detail::read_be32(is, "count");
  const std::uint32_t rows = detail::read_be32(is, "rows");
  const std::uint32_t cols = detail::read_be32(is, "cols");
  if (rows != 28 || cols != 28) {
    throw std::runtime_error("unsupported IDX image dimensions (expected 28x28): " + path);
  }
  std::vector<IdxImage> images(count, IdxImage(784));
  for (auto& img : images) {
    if (!is.read(reinterpret_cast<char*>(img.data()), 784)) {
      throw std::runtime_error("truncated IDX image payload: " + path);
    }
  }
  if (is.peek() != std::ifstream::traits_type::eof()) {
    throw std::runtime_error("trailing bytes after IDX image payload: " + path);
  }
  return images;
}

inline void write_idx_images(const std::string& path, const std::vector<IdxImage>& images) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write IDX image file: " + path);
  detail::write_be32(os, detail::kIdxImageMagic);
  detail::write_be32(os, static_cast<std::uint32_t>(images.size()));
  detail::write_be32(os, 28);
  detail::write_be32(os, 28);
  for (const auto& img : images) {
    if (img.size() != 784) throw std::invalid_argument("IDX image must hold 784 bytes");
    os.write(reinterpret_cast<const char*>(img.data()), 784);
  }
}

inline std::vector<int> load_idx_labels(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open IDX label file: " + path);
  if (detail::read_be32(is, "magic") != detail::kIdxLabelMagic) {
    throw std::runtime_error("bad magic for IDX label file: " + path);
  }
  const std::uint32_t count = detail::read_be32(is, "count");
  std::vector<int> labels(count);
  for (auto& label : labels) {
    char byte;
    if (!is.get(byte)) throw std::runtime_error("truncated IDX label payload: " + path);
    label = static_cast<unsigned char>(byte);
    if (label > 9) throw std::runtime_error("IDX label out of range 0..9: " + path);
  }
  if (is.peek() != std::ifstream::traits_type::eof()) {
    throw std::runtime_error("trailing bytes after IDX label payload: " + path);
  }
  return labels;
}

inline void write_idx_labels(const std::string& path, const std::vector<int>& labels) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write IDX label file: " + path);
  detail::write_be32(os, detail::kIdxLabelMagic);
  detail::write_be32(os, static_cast<std::uint32_t>(labels.size()));
  for (int label : labels) {
    if (label < 0 || label > 9) throw std::invalid_argument("label out of range 0..9");
    os.put(static_cast<char>(label));
  }
}

// Row-by-row presentation: 28 steps, each one bitmap row scaled to [0, 1].
inline std::vector<std::vector<double>> to_row_sequence(const IdxImage& image) {
  if (image.size() != 784) throw std::invalid_argument("expected a 28x28 image");
  std::vector<std::vector<double>> steps(28, std::vector<double>(28));
  for (std::size_t r = 0; r < 28; ++r) {
    for (std::size_t c = 0; c < 28; ++c) steps[r][c] = image[r * 28 + c] / 255.0;
  }
  return steps;
}

inline Corpus make_spatial_corpus(const std::vector<IdxImage>& images,
                                  const std::vector<int>& labels) {
  if (images.size() != labels.size()) {
    throw std::runtime_error("image/label count mismatch: " + std::to_string(images.size()) +
                             " vs " + std::to_string(labels.size()));
  }
  Corpus corpus(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    corpus[i].steps = to_row_sequence(images[i]);
    corpus[i].label = labels[i];
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Stroke corpus (text): one file per sample, each line "dx dy eos eod";
// exactly the final line carries eod = 1. Labels in labels.txt, one per line.

struct StrokeStep {
  double dx = 0.0;
  double dy = 0.0;
  int end_of_stroke = 0;
  int end_of_digit = 0;
};

inline std::string stroke_sample_name(std::size_t index) {
  std::ostringstream os;
  os << "sample-" << std::setw(6) << std::setfill('0') << index << ".txt";
  return os.str();
}

inline std::vector<StrokeStep> parse_stroke_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open stroke file: " + path);
  std::vector<StrokeStep> steps;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    StrokeStep s;
    std::string extra;
    if (!(ls >> s.dx >> s.dy >> s.end_of_stroke >> s.end_of_digit) || (ls >> extra)) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 4 numeric tokens 'dx dy eos eod'");
    }
    if ((s.end_of_stroke != 0 && s.end_of_stroke != 1) ||
        (s.end_of_digit != 0 && s.end_of_digit != 1)) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": stroke flags must be 0 or 1");
    }
    if (!steps.empty() && steps.back().end_of_digit == 1) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": step after end_of_digit");
    }
    steps.push_back(s);
  }
  if (steps.empty()) throw std::runtime_error("empty stroke file: " + path);
  if (steps.back().end_of_digit != 1) {
    throw std::runtime_error("missing end_of_digit terminator: " + path);
  }
  return steps;
}

inline std::vector<std::vector<double>> stroke_steps_to_stimuli(
    const std::vector<StrokeStep>& steps) {
  std::vector<std::vector<double>> out;
  out.reserve(steps.size());
  for (const auto& s : steps) {
    out.push_back({s.dx, s.dy, static_cast<double>(s.end_of_stroke),
                   static_cast<double>(s.end_of_digit)});
  }
  return out;
}

inline Corpus load_strokes(const std::string& dir, const std::string& labels_path) {
  std::ifstream ls(labels_path);
  if (!ls) throw std::runtime_error("cannot open stroke labels file: " + labels_path);
  std::vector<int> labels;
  int label;
  while (ls >> label) {
    if (label < 0 || label > 9) {
      throw std::runtime_error("stroke label out of range 0..9: " + labels_path);
    }
    labels.push_back(label);
  }
  if (!ls.eof()) throw std::runtime_error("non-numeric stroke label: " + labels_path);

  Corpus corpus(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string path = (std::filesystem::path(dir) / stroke_sample_name(i)).string();
    corpus[i].steps = stroke_steps_to_stimuli(parse_stroke_file(path));
    corpus[i].label = labels[i];
  }
  if (std::filesystem::exists(std::filesystem::path(dir) / stroke_sample_name(labels.size()))) {
    throw std::runtime_error("stroke corpus has more sample files than labels");
  }
  return corpus;
}

inline void write_strokes(const std::string& dir, const Corpus& corpus) {
  std::filesystem::create_directories(dir);
  std::ofstream ls(std::filesystem::path(dir) / "labels.txt");
  if (!ls) throw std::runtime_error("cannot write stroke labels in " + dir);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    ls << corpus[i].label << "\n";
    std::ofstream os(std::filesystem::path(dir) / stroke_sample_name(i));
    if (!os) throw std::runtime_error("cannot write stroke sample in " + dir);
    os << std::setprecision(17);
    for (const auto& step : corpus[i].steps) {
      if (step.size() != 4) throw std::invalid_argument("stroke steps carry 4 values");
      os << step[0] << " " << step[1] << " " << static_cast<int>(step[2]) << " "
         << static_cast<int>(step[3]) << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// Splits and batches

struct DatasetSplit {
  Corpus train;
  Corpus test;
  std::uint64_t seed = 0;
};

// Seeded shuffle, then the first train_size samples train and the next
// test_size (default: all remaining) test. Disjoint by construction.
inline DatasetSplit split_corpus(const Corpus& corpus, std::uint64_t seed, std::size_t train_size,
                                 std::size_t test_size = 0) {
  if (train_size == 0 || train_size >= corpus.size()) {
    throw std::invalid_argument("split_corpus: train_size out of range");
  }
  if (test_size == 0) test_size = corpus.size() - train_size;
  if (train_size + test_size > corpus.size()) {
    throw std::invalid_argument("split_corpus: train_size + test_size exceeds corpus");
  }
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  DatasetSplit split;
  split.seed = seed;
  split.train.reserve(train_size);
  split.test.reserve(test_size);
  for (std::size_t i = 0; i < train_size; ++i) split.train.push_back(corpus[order[i]]);
  for (std::size_t i = 0; i < test_size; ++i) split.test.push_back(corpus[order[train_size + i]]);
  return split;
}

// Length-bucketed batching: every batch holds samples of one sequence length
// (rectangular, no padding), covers the dataset exactly once, and both the
// within-bucket order and the batch order come from the caller's rng.
inline std::vector<std::vector<std::size_t>> make_batches(const Corpus& data,
                                                          std::size_t batch_size, Rng& rng) {
  if (batch_size < 1) throw std::invalid_argument("make_batches: batch_size must be >= 1");
  std::map<std::size_t, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < data.size(); ++i) buckets[data[i].steps.size()].push_back(i);

  std::vector<std::vector<std::size_t>> batches;
  for (auto& [length, indices] : buckets) {
    rng.shuffle(indices);
    for (std::size_t start = 0; start < indices.size(); start += batch_size) {
      const std::size_t end = std::min(start + batch_size, indices.size());
      batches.emplace_back(indices.begin() + static_cast<std::ptrdiff_t>(start),
                           indices.begin() + static_cast<std::ptrdiff_t>(end));
    }
  }
  rng.shuffle(batches);
  return batches;
}

// ---------------------------------------------------------------------------
// Synthetic corpora: shifted, noisy 21x15 digit glyphs on a 28x28 canvas, and
// jittered polyline pen traces. Deterministic in the seed.

namespace detail {

inline const std::array<std::array<const char*, 7>, 10>& digit_glyphs() {
  static const std::array<std::array<const char*, 7>, 10> glyphs = {{
      {"01110", "10001", "10011", "10101", "11001", "10001", "01110"},  // 0
      {"00100", "01100", "00100", "00100", "00100", "00100", "01110"},  // 1
      {"01110", "10001", "00001", "00010", "00100", "01000", "11111"},  // 2
      {"11111", "00010", "00100", "00010", "00001", "10001", "01110"},  // 3
      {"00010", "00110", "01010", "10010", "11111", "00010", "00010"},  // 4
      {"11111", "10000", "11110", "00001", "00001", "10001", "01110"},  // 5
      {"00110", "01000", "10000", "11110", "10001", "10001", "01110"},  // 6
      {"11111", "00001", "00010", "00100", "01000", "01000", "01000"},  // 7
      {"01110", "10001", "10001", "01110", "10001", "10001", "01110"},  // 8
      {"01110", "10001", "10001", "01111", "00001", "00010", "01100"},  // 9
  }};
  return glyphs;
}

// One pen trace per digit: strokes as vertex lists on a 5x7 grid (x right,
// y down). Multi-stroke digits list several vertex chains.
inline const std::vector<std::vector<std::vector<std::pair<int, int>>>>& digit_polylines() {
  static const std::vector<std::vector<std::vector<std::pair<int, int>>>> polys = {
      {{{1, 0}, {3, 0}, {4, 1}, {4, 5}, {3, 6}, {1, 6}, {0, 5}, {0, 1}, {1, 0}}},        // 0
      {{{1, 1}, {2, 0}, {2, 6}}, {{1, 6}, {3, 6}}},                                      // 1
      {{{0, 1}, {1, 0}, {3, 0}, {4, 1}, {4, 2}, {0, 6}, {4, 6}}},                        // 2
      {{{0, 0}, {3, 0}, {4, 1}, {4, 2}, {3, 3}, {1, 3}}, {{3, 3}, {4, 4}, {4, 5}, {3, 6}, {0, 6}}},  // 3
      {{{3, 6}, {3, 0}, {0, 4}, {4, 4}}},                                                // 4
      {{{4, 0}, {0, 0}, {0, 3}, {3, 3}, {4, 4}, {4, 5}, {3, 6}, {0, 6}}},                // 5
      {{{3, 0}, {1, 2}, {0, 4}, {0, 5}, {1, 6}, {3, 6}, {4, 5}, {4, 4}, {3, 3}, {0, 3}}},  // 6
      {{{0, 0}, {4, 0}, {2, 3}, {1, 6}}},                                                // 7
      {{{2, 0}, {0, 1}, {0, 2}, {2, 3}, {4, 4}, {4, 5}, {2, 6}, {0, 5}, {0, 4}, {2, 3}, {4, 2}, {4, 1}, {2, 0}}},  // 8
      {{{4, 3}, {1, 3}, {0, 2}, {0, 1}, {1, 0}, {3, 0}, {4, 1}, {4, 4}, {3, 6}, {1, 6}}},  // 9
  };
  return polys;
}

}  // namespace detail

inline std::pair<std::vector<IdxImage>, std::vector<int>> synthetic_spatial_images(
    std::size_t n, std::uint64_t seed) {
  std::vector<IdxImage> images;
  std::vector<int> labels;
  images.reserve(n);
  labels.reserve(n);
  Rng rng(seed);
  for (std::size_t k = 0; k < n; ++k) {
    const int digit = static_cast<int>(k % 10);
    const auto& glyph = detail::digit_glyphs()[static_cast<std::size_t>(digit)];
    const int shift_r = rng.uniform_int(-3, 4);
    const int shift_c = rng.uniform_int(-5, 5);
    const double intensity = rng.uniform(0.55, 1.0) * 255.0;

    IdxImage img(784, 0);
    for (int gr = 0; gr < 7; ++gr) {
      for (int gc = 0; gc < 5; ++gc) {
        if (glyph[static_cast<std::size_t>(gr)][gc] != '1') continue;
        for (int rr = 0; rr < 3; ++rr) {
          for (int cc = 0; cc < 3; ++cc) {
            const int r = 3 + shift_r + 3 * gr + rr;
            const int c = 6 + shift_c + 3 * gc + cc;
            if (r >= 0 && r < 28 && c >= 0 && c < 28) {
              img[static_cast<std::size_t>(r) * 28 + static_cast<std::size_t>(c)] =
                  static_cast<std::uint8_t>(intensity);
            }
          }
        }
      }
    }
    for (auto& px : img) {
      const double noisy = px + rng.uniform(-45.0, 45.0);
      px = static_cast<std::uint8_t>(std::clamp(noisy, 0.0, 255.0));
    }
    images.push_back(std::move(img));
    labels.push_back(digit);
  }
  return {std::move(images), std::move(labels)};
}

inline Corpus synthetic_spatial_corpus(std::size_t n, std::uint64_t seed) {
  auto [images, labels] = synthetic_spatial_images(n, seed);
  return make_spatial_corpus(images, labels);
}

inline Corpus synthetic_stroke_corpus(std::size_t n, std::uint64_t seed) {
  Corpus corpus;
  corpus.reserve(n);
  Rng rng(seed);
  for (std::size_t k = 0; k < n; ++k) {
    const int digit = static_cast<int>(k % 10);
    const auto& strokes = detail::digit_polylines()[static_cast<std::size_t>(digit)];
    const double sx = rng.uniform(1.8, 3.2);
    const double sy = rng.uniform(1.8, 3.2);

    std::vector<StrokeStep> steps;
    int x = 0, y = 0;
    bool have_pos = false;
    for (const auto& stroke : strokes) {
      std::vector<std::pair<int, int>> verts;
      for (const auto& [vx, vy] : stroke) {
        const int jx = static_cast<int>(std::lround(rng.uniform(-0.8, 0.8)));
        const int jy = static_cast<int>(std::lround(rng.uniform(-0.8, 0.8)));
        verts.emplace_back(static_cast<int>(std::lround(vx * sx)) + jx,
                           static_cast<int>(std::lround(vy * sy)) + jy);
      }
      if (!have_pos) {
        x = verts[0].first;
        y = verts[0].second;
        have_pos = true;
      }
      const std::size_t stroke_began = steps.size();
      for (const auto& [tx, ty] : verts) {
        while (x != tx || y != ty) {
          const int dx = (tx > x) - (tx < x);
          const int dy = (ty > y) - (ty < y);
          x += dx;
          y += dy;
          steps.push_back({static_cast<double>(dx), static_cast<double>(dy), 0, 0});
        }
      }
      if (steps.size() > stroke_began) steps.back().end_of_stroke = 1;
    }
    if (steps.empty()) steps.push_back({1, 0, 1, 0});
    steps.back().end_of_digit = 1;

    SequenceSample sample;
    sample.steps = stroke_steps_to_stimuli(steps);
    sample.label = digit;
    corpus.push_back(std::move(sample));
  }
  return corpus;
}

}  // namespace smrnn
