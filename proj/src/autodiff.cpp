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

#include "ctrlgraph/autodiff.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ctrlgraph {

namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;
using ConstMapVec = Eigen::Map<const Eigen::VectorXd>;
using MapVec = Eigen::Map<Eigen::VectorXd>;

[[noreturn]] void ShapeError(std::string_view op, const Shape& got,
                             std::string_view want) {
  std::ostringstream os;
  os << op << ": unexpected shape " << ShapeToString(got) << ", expected "
     << want;
  throw std::invalid_argument(os.str());
}

void RequireRank(std::string_view op, const Shape& s, std::size_t rank) {
  if (s.size() != rank) {
    ShapeError(op, s, "rank " + std::to_string(rank));
  }
}

void RequireSameShape(std::string_view op, const Shape& a, const Shape& b) {
  if (a != b) ShapeError(op, b, ShapeToString(a));
}

double StableSigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double StableSoftplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// Unrolls one sample x[C, H, W] into cols[C * 25, H * W] for a same-padded
// 5x5 cross-correlation.
void Im2Col(const double* x, std::size_t c, std::size_t h, std::size_t w,
            double* cols) {
  constexpr std::ptrdiff_t kPad = ops::kConvKernel / 2;
  const std::size_t hw = h * w;
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t ky = 0; ky < ops::kConvKernel; ++ky) {
      for (std::size_t kx = 0; kx < ops::kConvKernel; ++kx) {
        double* row = cols + ((ch * ops::kConvKernel + ky) * ops::kConvKernel +
                              kx) * hw;
        for (std::size_t y = 0; y < h; ++y) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + ky) - kPad;
          for (std::size_t xx = 0; xx < w; ++xx) {
            const std::ptrdiff_t sx =
                static_cast<std::ptrdiff_t>(xx + kx) - kPad;
            row[y * w + xx] =
                (sy < 0 || sx < 0 || sy >= static_cast<std::ptrdiff_t>(h) ||
                 sx >= static_cast<std::ptrdiff_t>(w))
                    ? 0.0
                    : x[(ch * h + sy) * w + sx];
          }
        }
      }
    }
  }
}

void Col2ImAdd(const double* cols, std::size_t c, std::size_t h,
               std::size_t w, double* dx) {
  constexpr std::ptrdiff_t kPad = ops::kConvKernel / 2;
  const std::size_t hw = h * w;
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t ky = 0; ky < ops::kConvKernel; ++ky) {
      for (std::size_t kx = 0; kx < ops::kConvKernel; ++kx) {
        const double* row =
            cols + ((ch * ops::kConvKernel + ky) * ops::kConvKernel + kx) * hw;
        for (std::size_t y = 0; y < h; ++y) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + ky) - kPad;
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
          for (std::size_t xx = 0; xx < w; ++xx) {
            const std::ptrdiff_t sx =
                static_cast<std::ptrdiff_t>(xx + kx) - kPad;
            if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(w)) continue;
            dx[(ch * h + sy) * w + sx] += row[y * w + xx];
          }
        }
      }
    }
  }
}

}  // namespace

std::size_t ShapeSize(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string ShapeToString(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape s) : shape(std::move(s)), data(ShapeSize(shape), 0.0) {}

Tensor::Tensor(Shape s, std::vector<double> d)
    : shape(std::move(s)), data(std::move(d)) {
  if (data.size() != ShapeSize(shape)) {
    throw std::invalid_argument("tensor data size " +
                                std::to_string(data.size()) +
                                " does not match shape " + ShapeToString(shape));
  }
}

std::size_t ParamStore::Add(std::string name, Tensor init) {
  if (index_.count(name)) {
    throw std::invalid_argument("duplicate parameter name: " + name);
  }
  const std::size_t i = values_.size();
  index_.emplace(name, i);
  names_.push_back(std::move(name));
  grads_.emplace_back(init.size(), 0.0);
  values_.push_back(std::move(init));
  return i;
}

std::optional<std::size_t> ParamStore::Find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t ParamStore::Index(std::string_view name) const {
  auto i = Find(name);
  if (!i) throw std::out_of_range("unknown parameter: " + std::string(name));
  return *i;
}

std::size_t ParamStore::NumScalars() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

void ParamStore::ZeroGrad() {
  for (auto& g : grads_) std::fill(g.begin(), g.end(), 0.0);
}

Var Tape::Constant(Tensor value) { return Record(std::move(value), nullptr); }

Var Tape::Param(ParamStore& store, std::size_t index) {
  Var v = Record(store.value(index), nullptr);
  nodes_[v.id].store = &store;
  nodes_[v.id].param_index = index;
  return v;
}

Var Tape::Param(ParamStore& store, std::string_view name) {
  return Param(store, store.Index(name));
}

Var Tape::Record(Tensor value, BackwardFn backward) {
  nodes_.push_back(Node{std::move(value), {}, std::move(backward), nullptr, 0});
  return Var{nodes_.size() - 1};
}

std::vector<double>& Tape::MutableGrad(Var v) {
  Node& n = nodes_[v.id];
  if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

void Tape::Backward(Var out) {
  if (value(out).size() != 1) {
    throw std::invalid_argument("Backward without seed needs a scalar output");
  }
  Backward(out, {1.0});
}

void Tape::Backward(Var out, const std::vector<double>& seed) {
  if (seed.size() != value(out).size()) {
    throw std::invalid_argument("seed size does not match output");
  }
  for (auto& n : nodes_) n.grad.clear();
  MutableGrad(out) = seed;
  for (std::size_t i = out.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.empty()) continue;
    if (n.backward) n.backward(*this);
    if (n.store != nullptr) {
      auto& g = n.store->grad(n.param_index);
      for (std::size_t j = 0; j < g.size(); ++j) g[j] += nodes_[i].grad[j];
    }
  }
}

void Tape::MixKink(bool branch) {
  kink_signature_ ^= (branch ? 0x5bd1e995ULL : 0x1b873593ULL) + kink_count_++;
  kink_signature_ *= 0x100000001b3ULL;
}

namespace ops {

Var Dense(Tape& t, Var x, Var w, Var b) {
  const Shape& xs = t.shape(x);
  const Shape& ws = t.shape(w);
  const Shape& bs = t.shape(b);
  RequireRank("dense x", xs, 2);
  RequireRank("dense w", ws, 2);
  RequireRank("dense b", bs, 1);
  const std::size_t batch = xs[0], in = xs[1], out = ws[0];
  if (ws[1] != in || bs[0] != out) {
    ShapeError("dense", ws, "[" + std::to_string(bs[0]) + ", " +
                                std::to_string(in) + "]");
  }
  Tensor y({batch, out});
  ConstMapMat X(t.value(x).data.data(), batch, in);
  ConstMapMat W(t.value(w).data.data(), out, in);
  ConstMapVec B(t.value(b).data.data(), out);
  MapMat Y(y.data.data(), batch, out);
  Y.noalias() = X * W.transpose();
  Y.rowwise() += B.transpose();
  Var yv{t.size()};
  return t.Record(std::move(y), [x, w, b, yv, batch, in, out](Tape& tp) {
    ConstMapMat dY(tp.grad(yv).data(), batch, out);
    {
      ConstMapMat X(tp.value(x).data.data(), batch, in);
      MapMat dW(tp.MutableGrad(w).data(), out, in);
      dW.noalias() += dY.transpose() * X;
    }
    {
      MapVec dB(tp.MutableGrad(b).data(), out);
      dB += dY.colwise().sum().transpose();
    }
    {
      ConstMapMat W(tp.value(w).data.data(), out, in);
      MapMat dX(tp.MutableGrad(x).data(), batch, in);
      dX.noalias() += dY * W;
    }
  });
}

Var Conv2d(Tape& t, Var x, Var k, Var b) {
  const Shape& xs = t.shape(x);
  const Shape& ks = t.shape(k);
  const Shape& bs = t.shape(b);
  RequireRank("conv2d x", xs, 4);
  RequireRank("conv2d kernel", ks, 4);
  RequireRank("conv2d bias", bs, 1);
  const std::size_t batch = xs[0], cin = xs[1], h = xs[2], w = xs[3];
  const std::size_t cout = ks[0];
  if (ks[1] != cin || ks[2] != kConvKernel || ks[3] != kConvKernel ||
      bs[0] != cout) {
    ShapeError("conv2d kernel", ks,
               "[" + std::to_string(bs[0]) + ", " + std::to_string(cin) +
                   ", 5, 5]");
  }
  const std::size_t hw = h * w, taps = cin * kConvKernel * kConvKernel;
  Tensor y({batch, cout, h, w});
  std::vector<double> cols(taps * hw);
  ConstMapMat K(t.value(k).data.data(), cout, taps);
  ConstMapVec B(t.value(b).data.data(), cout);
  for (std::size_t s = 0; s < batch; ++s) {
    Im2Col(t.value(x).data.data() + s * cin * hw, cin, h, w, cols.data());
    MapMat Y(y.data.data() + s * cout * hw, cout, hw);
    Y.noalias() = K * ConstMapMat(cols.data(), taps, hw);
    Y.colwise() += B;
  }
  Var yv{t.size()};
  return t.Record(std::move(y), [=](Tape& tp) {
    std::vector<double> cols(taps * hw), dcols(taps * hw);
    ConstMapMat K(tp.value(k).data.data(), cout, taps);
    auto& dk = tp.MutableGrad(k);
    auto& db = tp.MutableGrad(b);
    auto& dx = tp.MutableGrad(x);
    MapMat dK(dk.data(), cout, taps);
    MapVec dB(db.data(), cout);
    for (std::size_t s = 0; s < batch; ++s) {
      ConstMapMat dY(tp.grad(yv).data() + s * cout * hw, cout, hw);
      Im2Col(tp.value(x).data.data() + s * cin * hw, cin, h, w, cols.data());
      dK.noalias() += dY * ConstMapMat(cols.data(), taps, hw).transpose();
      dB += dY.rowwise().sum();
      MapMat(dcols.data(), taps, hw).noalias() = K.transpose() * dY;
      Col2ImAdd(dcols.data(), cin, h, w, dx.data() + s * cin * hw);
    }
  });
}

namespace {

// Elementwise op with derivative expressed from input and output values.
template <typename Fn, typename Dfn>
Var Pointwise(Tape& t, Var x, Fn f, Dfn df) {
  const Tensor& in = t.value(x);
  Tensor out(in.shape);
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  Var yv{t.size()};
  return t.Record(std::move(out), [x, yv, df](Tape& tp) {
    const auto& g = tp.grad(yv);
    const auto& xin = tp.value(x).data;
    const auto& yout = tp.value(yv).data;
    auto& dx = tp.MutableGrad(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      dx[i] += g[i] * df(xin[i], yout[i]);
    }
  });
}

}  // namespace

Var Relu(Tape& t, Var x) {
  for (double v : t.value(x).data) t.MixKink(v > 0);
  return Pointwise(
      t, x, [](double v) { return v > 0 ? v : 0.0; },
      [](double v, double) { return v > 0 ? 1.0 : 0.0; });
}

Var Sigmoid(Tape& t, Var x) {
  return Pointwise(t, x, StableSigmoid,
                   [](double, double y) { return y * (1.0 - y); });
}

Var Softplus(Tape& t, Var x) {
  return Pointwise(t, x, StableSoftplus,
                   [](double v, double) { return StableSigmoid(v); });
}

Var Reparameterize(Tape& t, Var mu, Var sigma, const Tensor& eps) {
  RequireSameShape("reparameterize sigma", t.shape(mu), t.shape(sigma));
  RequireSameShape("reparameterize eps", t.shape(mu), eps.shape);
  const auto& m = t.value(mu).data;
  const auto& s = t.value(sigma).data;
  Tensor z(t.shape(mu));
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (s[i] < 0) throw std::invalid_argument("reparameterize: negative sigma");
    z[i] = m[i] + s[i] * eps[i];
  }
  Var zv{t.size()};
  return t.Record(std::move(z), [mu, sigma, zv, e = eps.data](Tape& tp) {
    const auto& g = tp.grad(zv);
    auto& dm = tp.MutableGrad(mu);
    for (std::size_t i = 0; i < g.size(); ++i) dm[i] += g[i];
    auto& ds = tp.MutableGrad(sigma);
    for (std::size_t i = 0; i < g.size(); ++i) ds[i] += g[i] * e[i];
  });
}

Var Upsample2x(Tape& t, Var x) {
  const Shape& xs = t.shape(x);
  RequireRank("upsample2x", xs, 4);
  const std::size_t planes = xs[0] * xs[1], h = xs[2], w = xs[3];
  Tensor y({xs[0], xs[1], 2 * h, 2 * w});
  const auto& in = t.value(x).data;
  for (std::size_t p = 0; p < planes; ++p) {
    for (std::size_t i = 0; i < 2 * h; ++i) {
      for (std::size_t j = 0; j < 2 * w; ++j) {
        y[(p * 2 * h + i) * 2 * w + j] = in[(p * h + i / 2) * w + j / 2];
      }
    }
  }
  Var yv{t.size()};
  return t.Record(std::move(y), [x, yv, planes, h, w](Tape& tp) {
    const auto& g = tp.grad(yv);
    auto& dx = tp.MutableGrad(x);
    for (std::size_t p = 0; p < planes; ++p) {
      for (std::size_t i = 0; i < 2 * h; ++i) {
        for (std::size_t j = 0; j < 2 * w; ++j) {
          dx[(p * h + i / 2) * w + j / 2] += g[(p * 2 * h + i) * 2 * w + j];
        }
      }
    }
  });
}

Var AvgPool2x(Tape& t, Var x) {
  const Shape& xs = t.shape(x);
  RequireRank("avg_pool2x", xs, 4);
  const std::size_t planes = xs[0] * xs[1], h = xs[2], w = xs[3];
  const std::size_t oh = h / 2, ow = w / 2;
  if (oh == 0 || ow == 0) ShapeError("avg_pool2x", xs, "spatial size >= 2");
  Tensor y({xs[0], xs[1], oh, ow});
  const auto& in = t.value(x).data;
  for (std::size_t p = 0; p < planes; ++p) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        const double* r0 = &in[(p * h + 2 * i) * w + 2 * j];
        const double* r1 = r0 + w;
        y[(p * oh + i) * ow + j] = 0.25 * (r0[0] + r0[1] + r1[0] + r1[1]);
      }
    }
  }
  Var yv{t.size()};
  return t.Record(std::move(y), [x, yv, planes, h, w, oh, ow](Tape& tp) {
    const auto& g = tp.grad(yv);
    auto& dx = tp.MutableGrad(x);
    for (std::size_t p = 0; p < planes; ++p) {
      for (std::size_t i = 0; i < oh; ++i) {
        for (std::size_t j = 0; j < ow; ++j) {
          const double v = 0.25 * g[(p * oh + i) * ow + j];
          double* r0 = &dx[(p * h + 2 * i) * w + 2 * j];
          double* r1 = r0 + w;
          r0[0] += v;
          r0[1] += v;
          r1[0] += v;
          r1[1] += v;
        }
      }
    }
  });
}

Var Reshape(Tape& t, Var x, Shape shape) {
  if (ShapeSize(shape) != t.value(x).size()) {
    ShapeError("reshape", shape, ShapeToString(t.shape(x)));
  }
  Tensor y(std::move(shape), t.value(x).data);
  Var yv{t.size()};
  return t.Record(std::move(y), [x, yv](Tape& tp) {
    const auto& g = tp.grad(yv);
    auto& dx = tp.MutableGrad(x);
    for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i];
  });
}

Var SliceAxis1(Tape& t, Var x, std::size_t begin, std::size_t end) {
  const Shape& xs = t.shape(x);
  if (xs.size() < 2 || begin >= end || end > xs[1]) {
    ShapeError("slice", xs, "axis 1 covering [" + std::to_string(begin) +
                                ", " + std::to_string(end) + ")");
  }
  const std::size_t outer = xs[0], dim = xs[1];
  const std::size_t inner = ShapeSize(xs) / (outer * dim);
  Shape ys = xs;
  ys[1] = end - begin;
  Tensor y(ys);
  const auto& in = t.value(x).data;
  const std::size_t span = (end - begin) * inner;
  for (std::size_t o = 0; o < outer; ++o) {
    std::copy_n(in.begin() + (o * dim + begin) * inner, span,
                y.data.begin() + o * span);
  }
  Var yv{t.size()};
  return t.Record(std::move(y), [=](Tape& tp) {
    const auto& g = tp.grad(yv);
    auto& dx = tp.MutableGrad(x);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t i = 0; i < span; ++i) {
        dx[(o * dim + begin) * inner + i] += g[o * span + i];
      }
    }
  });
}

Var Add(Tape& t, Var a, Var b) {
  RequireSameShape("add", t.shape(a), t.shape(b));
  Tensor y(t.shape(a));
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = t.value(a)[i] + t.value(b)[i];
  }
  Var yv{t.size()};
  return t.Record(std::move(y), [a, b, yv](Tape& tp) {
    const auto& g = tp.grad(yv);
    auto& da = tp.MutableGrad(a);
    for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i];
    auto& db = tp.MutableGrad(b);
    for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i];
  });
}

Var Scale(Tape& t, Var x, double s) {
  Tensor y(t.shape(x));
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = s * t.value(x)[i];
  Var yv{t.size()};
  return t.Record(std::move(y), [x, yv, s](Tape& tp) {
    const auto& g = tp.grad(yv);
    auto& dx = tp.MutableGrad(x);
    for (std::size_t i = 0; i < g.size(); ++i) dx[i] += s * g[i];
  });
}

Var Mix(Tape& t, Var a, Var b, double beta) {
  RequireSameShape("mix", t.shape(a), t.shape(b));
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("mix: beta outside [0, 1]");
  }
  Tensor y(t.shape(a));
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = beta * t.value(a)[i] + (1.0 - beta) * t.value(b)[i];
  }
  Var yv{t.size()};
  return t.Record(std::move(y), [a, b, yv, beta](Tape& tp) {
    const auto& g = tp.grad(yv);
    auto& da = tp.MutableGrad(a);
    for (std::size_t i = 0; i < g.size(); ++i) da[i] += beta * g[i];
    auto& db = tp.MutableGrad(b);
    for (std::size_t i = 0; i < g.size(); ++i) db[i] += (1.0 - beta) * g[i];
  });
}

Var MaskFeatures(Tape& t, Var x, const std::vector<double>& mask) {
  const Shape& xs = t.shape(x);
  RequireRank("mask", xs, 2);
  if (xs[1] != mask.size()) ShapeError("mask", xs, "feature count of mask");
  Tensor y(xs);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = t.value(x)[i] * mask[i % mask.size()];
  }
  Var yv{t.size()};
  return t.Record(std::move(y), [x, yv, mask](Tape& tp) {
    const auto& g = tp.grad(yv);
    auto& dx = tp.MutableGrad(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      dx[i] += g[i] * mask[i % mask.size()];
    }
  });
}

Var SymmetrizeZeroDiagonal(Tape& t, Var x) {
  const Shape& xs = t.shape(x);
  const bool ok = (xs.size() == 3 && xs[1] == xs[2]) ||
                  (xs.size() == 4 && xs[1] == 1 && xs[2] == xs[3]);
  if (!ok) ShapeError("symmetrize", xs, "[B, N, N] or [B, 1, N, N]");
  const std::size_t batch = xs[0], n = xs.back();
  Tensor y({batch, n, n});
  const auto& in = t.value(x).data;
  for (std::size_t s = 0; s < batch; ++s) {
    const std::size_t o = s * n * n;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        y[o + i * n + j] =
            i == j ? 0.0 : 0.5 * (in[o + i * n + j] + in[o + j * n + i]);
      }
    }
  }
  Var yv{t.size()};
  return t.Record(std::move(y), [x, yv, batch, n](Tape& tp) {
    const auto& g = tp.grad(yv);
    auto& dx = tp.MutableGrad(x);
    for (std::size_t s = 0; s < batch; ++s) {
      const std::size_t o = s * n * n;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          dx[o + i * n + j] += 0.5 * (g[o + i * n + j] + g[o + j * n + i]);
        }
      }
    }
  });
}

Var Sum(Tape& t, Var x) {
  const auto& in = t.value(x).data;
  Tensor y({1}, {std::accumulate(in.begin(), in.end(), 0.0)});
  Var yv{t.size()};
  return t.Record(std::move(y), [x, yv](Tape& tp) {
    const double g = tp.grad(yv)[0];
    for (double& d : tp.MutableGrad(x)) d += g;
  });
}

Var Mean(Tape& t, Var x) {
  return Scale(t, Sum(t, x), 1.0 / static_cast<double>(t.value(x).size()));
}

Var SumSquares(Tape& t, Var x) {
  const auto& in = t.value(x).data;
  double s = 0.0;
  for (double v : in) s += v * v;
  Var yv{t.size()};
  return t.Record(Tensor({1}, {s}), [x, yv](Tape& tp) {
    const double g = tp.grad(yv)[0];
    const auto& v = tp.value(x).data;
    auto& dx = tp.MutableGrad(x);
    for (std::size_t i = 0; i < v.size(); ++i) dx[i] += 2.0 * g * v[i];
  });
}

Var BceUpper(Tape& t, Var p, const Tensor& target) {
  const Shape& ps = t.shape(p);
  if (ps.size() != 3 || ps[1] != ps[2]) ShapeError("bce", ps, "[B, N, N]");
  if (target.size() != t.value(p).size()) {
    ShapeError("bce target", target.shape, ShapeToString(ps));
  }
  const std::size_t batch = ps[0], n = ps[1];
  const double count = static_cast<double>(batch * n * (n - 1) / 2);
  if (count == 0) throw std::invalid_argument("bce: no off-diagonal entries");
  const auto& pv = t.value(p).data;
  double loss = 0.0;
  for (std::size_t s = 0; s < batch; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const std::size_t k = (s * n + i) * n + j;
        const double raw = pv[k];
        t.MixKink(raw < kProbClamp || raw > 1.0 - kProbClamp);
        const double q = std::clamp(raw, kProbClamp, 1.0 - kProbClamp);
        const double a = target[k];
        loss -= a * std::log(q) + (1.0 - a) * std::log1p(-q);
      }
    }
  }
  Var yv{t.size()};
  return t.Record(
      Tensor({1}, {loss / count}),
      [p, yv, batch, n, count, a = target.data](Tape& tp) {
        const double g = tp.grad(yv)[0] / count;
        const auto& pv = tp.value(p).data;
        auto& dp = tp.MutableGrad(p);
        for (std::size_t s = 0; s < batch; ++s) {
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
              const std::size_t k = (s * n + i) * n + j;
              const double q = pv[k];
              if (q < kProbClamp || q > 1.0 - kProbClamp) continue;
              dp[k] -= g * (a[k] / q - (1.0 - a[k]) / (1.0 - q));
            }
          }
        }
      });
}

Var W2Squared(Tape& t, Var mu_q, Var sigma_q, Var mu_p, Var sigma_p) {
  const Shape& s = t.shape(mu_q);
  RequireRank("w2", s, 2);
  RequireSameShape("w2 sigma_q", s, t.shape(sigma_q));
  RequireSameShape("w2 mu_p", s, t.shape(mu_p));
  RequireSameShape("w2 sigma_p", s, t.shape(sigma_p));
  const double batch = static_cast<double>(s[0]);
  double acc = 0.0;
  for (std::size_t i = 0; i < ShapeSize(s); ++i) {
    const double dm = t.value(mu_q)[i] - t.value(mu_p)[i];
    const double ds = t.value(sigma_q)[i] - t.value(sigma_p)[i];
    acc += dm * dm + ds * ds;
  }
  Var yv{t.size()};
  return t.Record(Tensor({1}, {acc / batch}), [=](Tape& tp) {
    const double g = 2.0 * tp.grad(yv)[0] / batch;
    const std::size_t n = tp.value(mu_q).size();
    std::vector<double> dm(n), ds(n);
    for (std::size_t i = 0; i < n; ++i) {
      dm[i] = g * (tp.value(mu_q)[i] - tp.value(mu_p)[i]);
      ds[i] = g * (tp.value(sigma_q)[i] - tp.value(sigma_p)[i]);
    }
    auto add = [&](Var v, const std::vector<double>& d, double sign) {
      auto& gv = tp.MutableGrad(v);
      for (std::size_t i = 0; i < n; ++i) gv[i] += sign * d[i];
    };
    add(mu_q, dm, 1.0);
    add(mu_p, dm, -1.0);
    add(sigma_q, ds, 1.0);
    add(sigma_p, ds, -1.0);
  });
}

Var Mse(Tape& t, Var pred, const Tensor& target) {
  RequireRank("mse", t.shape(pred), 2);
  if (target.size() != t.value(pred).size()) {
    ShapeError("mse target", target.shape, ShapeToString(t.shape(pred)));
  }
  const double count = static_cast<double>(target.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double d = t.value(pred)[i] - target[i];
    acc += d * d;
  }
  Var yv{t.size()};
  return t.Record(Tensor({1}, {acc / count}),
                  [pred, yv, count, y = target.data](Tape& tp) {
                    const double g = 2.0 * tp.grad(yv)[0] / count;
                    const auto& v = tp.value(pred).data;
                    auto& dp = tp.MutableGrad(pred);
                    for (std::size_t i = 0; i < v.size(); ++i) {
                      dp[i] += g * (v[i] - y[i]);
                    }
                  });
}

}  // namespace ops

GradCheckResult GradCheck(ParamStore& store, const ScalarFn& fn,
                          const GradCheckOptions& options) {
  std::uint64_t base_signature = 0;
  std::vector<std::vector<double>> analytic;
  {
    Tape tape;
    Var out = fn(tape, store);
    store.ZeroGrad();
    tape.Backward(out);
    base_signature = tape.kink_signature();
    for (std::size_t i = 0; i < store.size(); ++i) {
      analytic.push_back(store.grad(i));
    }
  }
  auto eval = [&](std::uint64_t* signature) {
    Tape tape;
    Var out = fn(tape, store);
    *signature = tape.kink_signature();
    return tape.value(out)[0];
  };

  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t i = 0; i < store.size(); ++i) {
    for (std::size_t j = 0; j < store.value(i).size(); ++j) {
      coords.emplace_back(i, j);
    }
  }
  if (options.max_coordinates > 0 && coords.size() > options.max_coordinates) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(options.max_coordinates);
  }

  GradCheckResult result;
  for (auto [i, j] : coords) {
    double& w = store.value(i)[j];
    const double original = w;
    const double h = options.step * std::max(1.0, std::abs(original));
    std::uint64_t sig_plus = 0, sig_minus = 0;
    w = original + h;
    const double f_plus = eval(&sig_plus);
    w = original - h;
    const double f_minus = eval(&sig_minus);
    w = original;
    if (sig_plus != base_signature || sig_minus != base_signature) {
      ++result.skipped;
      continue;
    }
    const double numeric = (f_plus - f_minus) / (2.0 * h);
    const double a = analytic[i][j];
    const double denom =
        std::max({std::abs(a), std::abs(numeric), options.denominator_floor});
    result.max_relative_error =
        std::max(result.max_relative_error, std::abs(a - numeric) / denom);
    ++result.checked;
  }
  store.ZeroGrad();
  return result;
}

}  // namespace ctrlgraph
