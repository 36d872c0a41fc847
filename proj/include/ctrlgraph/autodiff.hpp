// Copyright 2026 The ctrlgraph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Tape-based reverse-mode differentiation over the handful of tensor ops the
// model needs. All values are float64. Ops that take image-like tensors use
// the layout [batch, channels, height, width]; vector-like tensors use
// [batch, features]. A leading batch dimension of 1 is the single-sample case.

#ifndef CTRLGRAPH_AUTODIFF_HPP_
#define CTRLGRAPH_AUTODIFF_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ctrlgraph {

using Shape = std::vector<std::size_t>;

std::size_t ShapeSize(const Shape& shape);
std::string ShapeToString(const Shape& shape);

struct Tensor {
  Shape shape;
  std::vector<double> data;

  Tensor() = default;
  // Zero-filled.
  explicit Tensor(Shape s);
  // Throws std::invalid_argument if data.size() != ShapeSize(s).
  Tensor(Shape s, std::vector<double> d);

  std::size_t size() const { return data.size(); }
  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }
};

// Named parameters in insertion order, each with a gradient accumulator of
// the same shape.
class ParamStore {
 public:
  // Throws std::invalid_argument on a duplicate name.
  std::size_t Add(std::string name, Tensor init);

  std::size_t size() const { return values_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  Tensor& value(std::size_t i) { return values_[i]; }
  const Tensor& value(std::size_t i) const { return values_[i]; }
  std::vector<double>& grad(std::size_t i) { return grads_[i]; }
  const std::vector<double>& grad(std::size_t i) const { return grads_[i]; }
  std::optional<std::size_t> Find(std::string_view name) const;
  // Throws std::out_of_range for unknown names.
  std::size_t Index(std::string_view name) const;

  std::size_t NumScalars() const;
  void ZeroGrad();

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::vector<std::vector<double>> grads_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Handle to a node on a Tape.
struct Var {
  std::size_t id = 0;
};

// Records a forward computation and replays it backwards. A tape is used by
// a single thread and must outlive the Vars it hands out.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Constant(Tensor value);
  // Leaf bound to store.value(index). Backward adds into store.grad(index).
  Var Param(ParamStore& store, std::size_t index);
  Var Param(ParamStore& store, std::string_view name);

  // Appends an interior node. `backward` reads grad(out) and accumulates
  // into the grads of its inputs via AccumulateGrad.
  Var Record(Tensor value, BackwardFn backward);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  const Shape& shape(Var v) const { return nodes_[v.id].value.shape; }
  // Valid after Backward; empty for nodes that received no gradient.
  const std::vector<double>& grad(Var v) const { return nodes_[v.id].grad; }
  std::vector<double>& MutableGrad(Var v);

  // Seeds d(out)/d(out) = 1 for a scalar output (or `seed` for a general
  // output) and propagates to every node recorded before it.
  void Backward(Var out);
  void Backward(Var out, const std::vector<double>& seed);

  std::size_t size() const { return nodes_.size(); }

  // Hash of every piecewise branch taken so far (relu signs, clamps). Two
  // evaluations with equal signatures are on the same smooth piece.
  std::uint64_t kink_signature() const { return kink_signature_; }
  void MixKink(bool branch);

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    BackwardFn backward;
    ParamStore* store = nullptr;
    std::size_t param_index = 0;
  };
  std::vector<Node> nodes_;
  std::uint64_t kink_signature_ = 0x9e3779b97f4a7c15ULL;
  std::uint64_t kink_count_ = 0;
};

namespace ops {

// x: [B, in], w: [out, in], b: [out] -> [B, out].
Var Dense(Tape& t, Var x, Var w, Var b);
// x: [B, Cin, H, W], k: [Cout, Cin, 5, 5], b: [Cout] -> [B, Cout, H, W].
// Stride 1, zero padding 2.
Var Conv2d(Tape& t, Var x, Var k, Var b);
inline constexpr std::size_t kConvKernel = 5;

Var Relu(Tape& t, Var x);
Var Sigmoid(Tape& t, Var x);
Var Softplus(Tape& t, Var x);

// z = mu + sigma * eps. Throws std::invalid_argument on negative sigma.
Var Reparameterize(Tape& t, Var mu, Var sigma, const Tensor& eps);

// [B, C, H, W] -> [B, C, 2H, 2W], nearest neighbour.
Var Upsample2x(Tape& t, Var x);
// [B, C, H, W] -> [B, C, H/2, W/2] (floor), 2x2 mean.
Var AvgPool2x(Tape& t, Var x);

Var Reshape(Tape& t, Var x, Shape shape);
// Slices axis 1 of x (any rank >= 2) to [begin, end).
Var SliceAxis1(Tape& t, Var x, std::size_t begin, std::size_t end);
Var Add(Tape& t, Var a, Var b);
Var Scale(Tape& t, Var x, double s);
// beta * a + (1 - beta) * b.
Var Mix(Tape& t, Var a, Var b, double beta);
// x: [B, F] times a constant mask [F] broadcast over the batch.
Var MaskFeatures(Tape& t, Var x, const std::vector<double>& mask);

// [B, 1, N, N] or [B, N, N] -> [B, N, N] with P' = (P + P^T) / 2 and zero
// diagonal.
Var SymmetrizeZeroDiagonal(Tape& t, Var x);

// Scalar reductions.
Var Sum(Tape& t, Var x);
Var Mean(Tape& t, Var x);
Var SumSquares(Tape& t, Var x);

inline constexpr double kProbClamp = 1e-7;
// p, target: [B, N, N]. Mean binary cross-entropy over the strict upper
// triangle of every sample, with p clamped to [kProbClamp, 1 - kProbClamp].
Var BceUpper(Tape& t, Var p, const Tensor& target);
// Batch mean of ||mu_q - mu_p||^2 + ||sigma_q - sigma_p||^2. All [B, d].
Var W2Squared(Tape& t, Var mu_q, Var sigma_q, Var mu_p, Var sigma_p);
// Batch mean of the per-sample mean squared error. pred: [B, F];
// target: [B, F].
Var Mse(Tape& t, Var pred, const Tensor& target);

}  // namespace ops

struct GradCheckOptions {
  double step = 1e-5;
  double denominator_floor = 1e-6;
  // 0 checks every coordinate; otherwise a random subsample of this many.
  std::size_t max_coordinates = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  // Coordinates whose perturbation crossed a relu or clamp boundary.
  std::size_t skipped = 0;
};

// fn builds a scalar from the parameters in `store` on the given tape. It
// must be a deterministic function of the parameter values.
using ScalarFn = std::function<Var(Tape&, ParamStore&)>;
GradCheckResult GradCheck(ParamStore& store, const ScalarFn& fn,
                          const GradCheckOptions& options = {});

}  // namespace ctrlgraph

#endif  // CTRLGRAPH_AUTODIFF_HPP_
