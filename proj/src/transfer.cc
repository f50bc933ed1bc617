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

#include "weave/transfer.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "weave/errors.h"

namespace weave {

// DegreeMatrix

DegreeMatrix::DegreeMatrix(std::vector<std::vector<double>> rows) : rows_(std::move(rows)) {
  const std::size_t n = rows_.size();
  if (n == 0) throw ConfigError("degree matrix is empty");
  for (std::size_t i = 0; i < n; ++i) {
    if (rows_[i].size() != n) {
      throw ConfigError("degree matrix row " + std::to_string(i + 1) + " has " +
                        std::to_string(rows_[i].size()) + " entries, expected " +
                        std::to_string(n));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = rows_[i][j];
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ConfigError("degree matrix entry (" + std::to_string(i + 1) + "," +
                          std::to_string(j + 1) + ") = " + std::to_string(v) +
                          " is outside [0, 1]");
      }
      if (std::abs(v - rows_[j][i]) > 1e-12) {
        throw ConfigError("degree matrix is not symmetric at (" + std::to_string(i + 1) + "," +
                          std::to_string(j + 1) + ")");
      }
    }
  }
}

DegreeMatrix DegreeMatrix::identity(int n) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(n),
                                        std::vector<double>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i) rows[i][i] = 1.0;
  return DegreeMatrix(std::move(rows));
}

DegreeMatrix DegreeMatrix::uniform(int n, double theta_t) {
  const double self = 1.0 - (n - 1) * theta_t;
  if (self < 0.0) {
    throw ConfigError("theta_t = " + std::to_string(theta_t) + " is too large for " +
                      std::to_string(n) + " domains");
  }
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(n),
                                        std::vector<double>(static_cast<std::size_t>(n), theta_t));
  for (int i = 0; i < n; ++i) rows[i][i] = self;
  return DegreeMatrix(std::move(rows));
}

bool DegreeMatrix::row_stochastic(double tol) const {
  for (const auto& r : rows_) {
    double s = 0;
    for (double v : r) s += v;
    if (std::abs(s - 1.0) > tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Codec helpers

std::vector<RingElement> quantize_tensor(const Tensor& x, const FixedPointCodec& codec,
                                         std::string_view layer) {
  std::vector<RingElement> out(x.size());
  const Shape& s = x.shape;
  for (std::size_t k = 0; k < x.size(); ++k) {
    try {
      out[k] = codec.quantize(x.data[k]);
    } catch (const RangeError& e) {
      const std::size_t ch = k % s.c, px = (k / s.c) % s.w, py = (k / s.c / s.w) % s.h,
                        b = k / s.per_sample();
      throw RangeError(std::string(layer) + " at (sample " + std::to_string(b) + ", y " +
                       std::to_string(py) + ", x " + std::to_string(px) + ", channel " +
                       std::to_string(ch) + "): " + e.what());
    }
  }
  return out;
}

Tensor dequantize_tensor(std::span<const RingElement> x, const Shape& shape,
                         const FixedPointCodec& codec) {
  if (x.size() != shape.size()) {
    throw ShapeMismatch("dequantize_tensor: " + std::to_string(x.size()) + " elements for shape " +
                        shape.str());
  }
  Tensor t(shape);
  codec.dequantize(x, t.data);
  return t;
}

// ---------------------------------------------------------------------------
// Plaintext units

namespace {

void require_same_shapes(std::span<const Tensor> xs, int n, const char* what) {
  if (static_cast<int>(xs.size()) != n) {
    throw ShapeMismatch(std::string(what) + ": " + std::to_string(xs.size()) +
                        " tensors for a " + std::to_string(n) + "-domain matrix");
  }
  for (const auto& x : xs) {
    if (x.shape != xs[0].shape) {
      throw ShapeMismatch(std::string(what) + ": shapes " + xs[0].shape.str() + " and " +
                          x.shape.str() + " differ");
    }
  }
}

// out_i = sum_j m(i, j) * xs_j, with m either theta or its transpose.
template <class Coef>
std::vector<Tensor> mix(std::span<const Tensor> xs, int n, Coef m) {
  std::vector<Tensor> out(static_cast<std::size_t>(n), Tensor(xs[0].shape));
  for (int i = 0; i < n; ++i) {
    auto& o = out[i].data;
    for (int j = 0; j < n; ++j) {
      const double c = m(i, j);
      if (c == 0.0) continue;
      const auto& x = xs[j].data;
      for (std::size_t k = 0; k < o.size(); ++k) o[k] += c * x[k];
    }
  }
  return out;
}

}  // namespace

std::vector<Tensor> weave_forward_plain(std::span<const Tensor> xs, const DegreeMatrix& theta) {
  require_same_shapes(xs, theta.size(), "weave_forward_plain");
  return mix(xs, theta.size(), [&](int i, int j) { return theta(i, j); });
}

std::pair<Tensor, Tensor> cross_forward_plain(const Tensor& x1, const Tensor& x2,
                                              const DegreeMatrix& theta) {
  if (theta.size() != 2) throw ShapeMismatch("cross unit needs a 2x2 degree matrix");
  const Tensor xs[2] = {x1, x2};
  auto out = weave_forward_plain(xs, theta);
  return {std::move(out[0]), std::move(out[1])};
}

std::vector<Tensor> weave_backward(std::span<const Tensor> grads, const DegreeMatrix& theta) {
  require_same_shapes(grads, theta.size(), "weave_backward");
  return mix(grads, theta.size(), [&](int i, int j) { return theta(j, i); });
}

Tensor local_backward(const Tensor& grad, const DegreeMatrix& theta, PartyId self) {
  Tensor out = grad;
  const double c = theta(static_cast<int>(self.slot()), static_cast<int>(self.slot()));
  for (auto& v : out.data) v *= c;
  return out;
}

// ---------------------------------------------------------------------------
// Secure unit

Tensor weave_forward_secure(Engine& engine, const Tensor& local_x, const DegreeMatrix& theta,
                            const FixedPointCodec& codec, std::string_view layer,
                            const SecureTransferOptions& options) {
  const int n = engine.parties();
  if (theta.size() != n) {
    throw ShapeMismatch("degree matrix is " + std::to_string(theta.size()) + "x" +
                        std::to_string(theta.size()) + " for " + std::to_string(n) + " parties");
  }
  const std::size_t count = local_x.size();
  const std::size_t me = engine.self().slot();

  std::vector<std::vector<AuthShare>> theta_shares;
  if (options.mode == ThetaMode::kSecret) {
    std::vector<RingElement> row(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) row[j] = codec.quantize(theta(static_cast<int>(me), j));
    theta_shares = engine.input_all(row, row.size());
  }
  const auto q = quantize_tensor(local_x, codec, layer);
  const auto x = engine.input_all(q, count);

  // z[i * count + k] holds the share of row i at location k, scale 2^{2p}.
  std::vector<AuthShare> z(static_cast<std::size_t>(n) * count);
  if (options.mode == ThetaMode::kPublic) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const RingElement t = codec.quantize(theta(i, j));
        for (std::size_t k = 0; k < count; ++k) {
          auto& acc = z[i * count + k];
          acc = add_shares(acc, mul_public(x[j][k], t));
        }
      }
    }
  } else {
    const std::size_t chunk = std::max<std::size_t>(1, options.chunk_locations);
    std::vector<AuthShare> lhs, rhs;
    for (std::size_t k0 = 0; k0 < count; k0 += chunk) {
      const std::size_t k1 = std::min(count, k0 + chunk);
      lhs.clear();
      rhs.clear();
      for (int i = 0; i < n; ++i) {
        for (std::size_t k = k0; k < k1; ++k) {
          for (int j = 0; j < n; ++j) {
            lhs.push_back(theta_shares[i][j]);
            rhs.push_back(x[j][k]);
          }
        }
      }
      const auto prod = engine.multiply(lhs, rhs);
      std::size_t at = 0;
      for (int i = 0; i < n; ++i) {
        for (std::size_t k = k0; k < k1; ++k) {
          auto& acc = z[i * count + k];
          for (int j = 0; j < n; ++j) acc = add_shares(acc, prod[at++]);
        }
      }
    }
  }

  auto opened = engine.partial_open(z, /*keep_provenance=*/false);
  engine.mac_check(opened);
  require_checked(opened);

  Tensor out(local_x.shape);
  for (std::size_t k = 0; k < count; ++k) {
    out.data[k] = codec.dequantize(codec.truncate(opened[me * count + k].value));
  }
  return out;
}

TransferDemand transfer_demand(int n, std::uint64_t locations, ThetaMode mode) {
  const auto nn = static_cast<std::uint64_t>(n);
  if (mode == ThetaMode::kPublic) return {0, locations};
  return {nn * nn * locations, locations + nn};
}

}  // namespace weave
