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

#include "weave/dataset.h"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <random>

#include "weave/errors.h"

namespace weave {

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > size()) {
    throw RangeError("dataset slice [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") outside " + std::to_string(size()) + " samples");
  }
  Dataset out;
  out.rows = rows;
  out.cols = cols;
  out.pixels.assign(pixels.begin() + begin * image_bytes(), pixels.begin() + end * image_bytes());
  out.labels.assign(labels.begin() + begin, labels.begin() + end);
  return out;
}

Tensor Dataset::batch(std::span<const std::size_t> indices, std::vector<int>* labels_out) const {
  Tensor t(Shape{static_cast<int>(indices.size()), rows, cols, 1});
  if (labels_out) labels_out->clear();
  const std::size_t px = image_bytes();
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const std::size_t i = indices[b];
    if (i >= size()) throw RangeError("dataset index " + std::to_string(i) + " out of range");
    std::copy(pixels.begin() + i * px, pixels.begin() + (i + 1) * px, t.data.begin() + b * px);
    if (labels_out) labels_out->push_back(labels[i]);
  }
  return t;
}

namespace {

// gzread passes uncompressed files through unchanged.
class GzFile {
 public:
  explicit GzFile(const std::string& path) : path_(path), f_(gzopen(path.c_str(), "rb")) {
    if (!f_) throw FormatError("cannot open " + path);
  }
  ~GzFile() { gzclose(f_); }
  GzFile(const GzFile&) = delete;
  GzFile& operator=(const GzFile&) = delete;

  void read(void* dst, std::size_t n) {
    auto* p = static_cast<unsigned char*>(dst);
    while (n > 0) {
      const unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(n, 1u << 30));
      const int got = gzread(f_, p, chunk);
      if (got <= 0) throw FormatError(path_ + ": truncated");
      p += got;
      n -= static_cast<std::size_t>(got);
    }
  }
  std::uint32_t u32() {
    std::array<unsigned char, 4> b;
    read(b.data(), 4);
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
           b[3];
  }

 private:
  std::string path_;
  gzFile f_;
};

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::size_t limit) {
  GzFile img(images_path);
  if (img.u32() != 0x00000803) throw FormatError(images_path + ": not an IDX3 ubyte image file");
  const std::uint32_t n_img = img.u32();
  const std::uint32_t rows = img.u32();
  const std::uint32_t cols = img.u32();
  if (rows == 0 || cols == 0 || rows > 4096 || cols > 4096) {
    throw FormatError(images_path + ": implausible image size");
  }
  GzFile lab(labels_path);
  if (lab.u32() != 0x00000801) throw FormatError(labels_path + ": not an IDX1 ubyte label file");
  const std::uint32_t n_lab = lab.u32();
  if (n_img != n_lab) {
    throw FormatError("image count " + std::to_string(n_img) + " does not match label count " +
                      std::to_string(n_lab));
  }
  std::size_t n = n_img;
  if (limit != 0) n = std::min(n, limit);

  Dataset d;
  d.rows = static_cast<int>(rows);
  d.cols = static_cast<int>(cols);
  std::vector<unsigned char> raw(n * rows * cols);
  img.read(raw.data(), raw.size());
  d.pixels.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) d.pixels[i] = static_cast<float>(raw[i]) / 255.0f;
  std::vector<unsigned char> lraw(n);
  lab.read(lraw.data(), n);
  d.labels.assign(lraw.begin(), lraw.end());
  return d;
}

Dataset make_synthetic(std::size_t count, std::uint64_t seed, int classes) {
  constexpr int kSide = 28;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pos(6, kSide - 7);
  // Each template: a few thick line segments.
  struct Segment {
    int x0, y0, x1, y1;
  };
  std::vector<std::vector<Segment>> templates(classes);
  for (auto& t : templates) {
    for (int s = 0; s < 3; ++s) t.push_back({pos(rng), pos(rng), pos(rng), pos(rng)});
  }
  Dataset d;
  d.pixels.assign(count * kSide * kSide, 0.0f);
  d.labels.resize(count);
  std::uniform_int_distribution<int> cls(0, classes - 1), jitter(-2, 2);
  std::normal_distribution<float> noise(0.0f, 0.15f);
  for (std::size_t i = 0; i < count; ++i) {
    const int y = cls(rng);
    d.labels[i] = y;
    float* img = &d.pixels[i * kSide * kSide];
    const int dx = jitter(rng), dy = jitter(rng);
    for (const auto& s : templates[y]) {
      for (int k = 0; k <= 20; ++k) {
        const int cx = s.x0 + (s.x1 - s.x0) * k / 20 + dx;
        const int cy = s.y0 + (s.y1 - s.y0) * k / 20 + dy;
        for (int oy = -1; oy <= 1; ++oy) {
          for (int ox = -1; ox <= 1; ++ox) {
            const int px = cx + ox, py = cy + oy;
            if (px >= 0 && px < kSide && py >= 0 && py < kSide) img[py * kSide + px] = 1.0f;
          }
        }
      }
    }
    for (int p = 0; p < kSide * kSide; ++p) img[p] = std::clamp(img[p] + noise(rng), 0.0f, 1.0f);
  }
  return d;
}

}  // namespace weave
