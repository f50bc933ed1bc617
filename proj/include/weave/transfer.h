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

#ifndef WEAVE_TRANSFER_H_
#define WEAVE_TRANSFER_H_

// Transfer units: elementwise mixing of n domains' activation maps under a
// degree matrix. At every location the transferred value of domain i is
//
//   x~_i = sum_j theta_ij * x_j
//
// with n = 2 being the cross unit. The plaintext versions are reference
// oracles; weave_forward_secure computes the same thing under MAC-checked
// sharing. Locations of all samples in a mini-batch are mixed by batch index.

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "weave/protocol.h"
#include "weave/ring.h"
#include "weave/tensor.h"

namespace weave {

// Symmetric n x n matrix with entries in [0, 1]. Diagonal entries weigh a
// domain's own representation, off-diagonal entries the transferred ones.
class DegreeMatrix {
 public:
  // Throws ConfigError when not square, not symmetric or out of range.
  explicit DegreeMatrix(std::vector<std::vector<double>> rows);

  static DegreeMatrix identity(int n);
  // Off-diagonal entries theta_t, diagonal 1 - (n - 1) * theta_t, so each row
  // sums to one.
  static DegreeMatrix uniform(int n, double theta_t = 0.1);

  int size() const { return static_cast<int>(rows_.size()); }
  double operator()(int i, int j) const { return rows_[i][j]; }
  const std::vector<double>& row(int i) const { return rows_[i]; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }
  bool row_stochastic(double tol = 1e-9) const;

 private:
  std::vector<std::vector<double>> rows_;
};

// Elementwise Q(m, p). RangeError names the layer and the offending location.
std::vector<RingElement> quantize_tensor(const Tensor& x, const FixedPointCodec& codec,
                                         std::string_view layer = "activation");
Tensor dequantize_tensor(std::span<const RingElement> x, const Shape& shape,
                         const FixedPointCodec& codec);

std::pair<Tensor, Tensor> cross_forward_plain(const Tensor& x1, const Tensor& x2,
                                              const DegreeMatrix& theta);
std::vector<Tensor> weave_forward_plain(std::span<const Tensor> xs, const DegreeMatrix& theta);

// Gradient of the joint loss with respect to each domain's input, given the
// gradients with respect to every domain's output: per location Theta^T g.
std::vector<Tensor> weave_backward(std::span<const Tensor> grads, const DegreeMatrix& theta);
// What domain `self` can compute on its own: the column-`self` term of
// Theta^T applied to its local gradient, theta_ii * g_i.
Tensor local_backward(const Tensor& grad, const DegreeMatrix& theta, PartyId self);

enum class ThetaMode {
  // Theta is known to every party; mixing is linear on shares, no triples.
  kPublic,
  // Each domain inputs its own row; every product theta_ij * x_j is a
  // Beaver multiplication.
  kSecret,
};

struct SecureTransferOptions {
  ThetaMode mode = ThetaMode::kPublic;
  // Locations per multiplication round in secret mode.
  std::size_t chunk_locations = 2048;
};

// One invocation of the secure weave unit by party engine.self(). All parties
// call in lockstep with same-shape tensors. The whole invocation is covered
// by one MAC check; on failure nothing is returned (MacCheckFailed or
// ProtocolAbort propagates). In secret mode only row self of theta is used.
Tensor weave_forward_secure(Engine& engine, const Tensor& local_x, const DegreeMatrix& theta,
                            const FixedPointCodec& codec, std::string_view layer = "activation",
                            const SecureTransferOptions& options = {});

// Offline material one invocation over `locations` elements consumes.
struct TransferDemand {
  std::uint64_t triples = 0;
  std::uint64_t masks_per_owner = 0;
};
TransferDemand transfer_demand(int n, std::uint64_t locations, ThetaMode mode);

}  // namespace weave

#endif  // WEAVE_TRANSFER_H_
