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

#ifndef WEAVE_TENSOR_H_
#define WEAVE_TENSOR_H_

#include <cstddef>
#include <string>
#include <vector>

namespace weave {

// Batch x height x width x channels.
struct Shape {
  int n = 1, h = 1, w = 1, c = 1;

  std::size_t size() const { return static_cast<std::size_t>(n) * per_sample(); }
  std::size_t per_sample() const { return static_cast<std::size_t>(h) * w * c; }
  std::string str() const;
  friend bool operator==(const Shape&, const Shape&) = default;
};

// Dense NHWC tensor of doubles.
struct Tensor {
  Shape shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0) : shape(s), data(s.size(), fill) {}

  std::size_t size() const { return data.size(); }
  std::size_t index(int b, int y, int x, int ch) const {
    return ((static_cast<std::size_t>(b) * shape.h + y) * shape.w + x) * shape.c + ch;
  }
  double& at(int b, int y, int x, int ch) { return data[index(b, y, x, ch)]; }
  double at(int b, int y, int x, int ch) const { return data[index(b, y, x, ch)]; }
};

}  // namespace weave

#endif  // WEAVE_TENSOR_H_
