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

#ifndef WEAVE_DATASET_H_
#define WEAVE_DATASET_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "weave/tensor.h"

namespace weave {

// Grayscale images scaled to [0, 1] with integer class labels.
struct Dataset {
  int rows = 28, cols = 28;
  std::vector<float> pixels;  // size() * rows * cols, row-major per image
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t image_bytes() const { return static_cast<std::size_t>(rows) * cols; }
  // Samples [begin, end). Throws RangeError when out of bounds.
  Dataset slice(std::size_t begin, std::size_t end) const;
  // Images at `indices` as an (n, rows, cols, 1) tensor, plus their labels.
  Tensor batch(std::span<const std::size_t> indices, std::vector<int>* labels_out) const;
};

// Reads an IDX3 image file and its IDX1 label file, gzip-compressed or raw.
// At most `limit` samples are read (0 for all). Throws FormatError on bad
// magic numbers, truncation or mismatched counts.
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::size_t limit = 0);

// Class-conditional synthetic digits: every class owns a fixed random stroke
// template, samples add jitter and pixel noise. Learnable but not trivial.
Dataset make_synthetic(std::size_t count, std::uint64_t seed, int classes = 10);

}  // namespace weave

#endif  // WEAVE_DATASET_H_
