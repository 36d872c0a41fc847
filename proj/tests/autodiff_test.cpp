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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace ctrlgraph {
namespace {

constexpr double kGradTolerance = 1e-3;

Tensor RandomTensor(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> nd(0.0, scale);
  for (auto& v : t.data) v = nd(rng);
  return t;
}

// Direct 6-loop cross-correlation with zero padding, used as a forward oracle.
Tensor NaiveConv(const Tensor& x, const Tensor& k, const Tensor& b) {
  const std::size_t batch = x.shape[0], cin = x.shape[1], h = x.shape[2],
                    w = x.shape[3], cout = k.shape[0];
  Tensor y({batch, cout, h, w});
  for (std::size_t s = 0; s < batch; ++s)
    for (std::size_t o = 0; o < cout; ++o)
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) {
          double acc = b[o];
          for (std::size_t c = 0; c < cin; ++c)
            for (int ky = -2; ky <= 2; ++ky)
              for (int kx = -2; kx <= 2; ++kx) {
                const int si = static_cast<int>(i) + ky;
                const int sj = static_cast<int>(j) + kx;
                if (si < 0 || sj < 0 || si >= static_cast<int>(h) ||
                    sj >= static_cast<int>(w))
                  continue;
                acc += k[((o * cin + c) * 5 + (ky + 2)) * 5 + (kx + 2)] *
                       x[((s * cin + c) * h + si) * w + sj];
              }
          y[((s * cout + o) * h + i) * w + j] = acc;
        }
  return y;
}

// Projects a tensor output to a scalar with fixed random weights so every
// output coordinate contributes to the checked gradient.
Var Project(Tape& t, Var y, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0xabcdef);
  Tensor w = RandomTensor(t.shape(y), rng);
  Var wv = t.Constant(std::move(w));
  // sum(w * y) == 0.25 * (|w + y|^2 - |w - y|^2)
  Var plus = ops::SumSquares(t, ops::Add(t, wv, y));
  Var minus = ops::SumSquares(t, ops::Add(t, wv, ops::Scale(t, y, -1.0)));
  return ops::Scale(t, ops::Add(t, plus, ops::Scale(t, minus, -1.0)), 0.25);
}

TEST(TensorTest, ShapeChecks) {
  EXPECT_EQ(ShapeSize({2, 3, 4}), 24u);
  EXPECT_EQ(Tensor({2, 2}).size(), 4u);
  EXPECT_THROW(Tensor({2, 2}, {1.0, 2.0}), std::invalid_argument);
}

TEST(ParamStoreTest, NamesAreUniqueAndOrdered) {
  ParamStore s;
  EXPECT_EQ(s.Add("a", Tensor({2})), 0u);
  EXPECT_EQ(s.Add("b", Tensor({3})), 1u);
  EXPECT_THROW(s.Add("a", Tensor({1})), std::invalid_argument);
  EXPECT_EQ(s.name(1), "b");
  EXPECT_EQ(s.Index("a"), 0u);
  EXPECT_FALSE(s.Find("c").has_value());
  EXPECT_EQ(s.NumScalars(), 5u);
  s.grad(0)[1] = 3.0;
  s.ZeroGrad();
  EXPECT_EQ(s.grad(0)[1], 0.0);
}

TEST(DenseTest, Examples) {
  Tape t;
  Var x = t.Constant(Tensor({1, 3}, {1, 2, 3}));
  Var zero = t.Constant(Tensor({2, 3}));
  Var b = t.Constant(Tensor({2}, {5, -1}));
  EXPECT_EQ(t.value(ops::Dense(t, x, zero, b)).data,
            (std::vector<double>{5, -1}));
  Var eye = t.Constant(Tensor({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1}));
  Var b0 = t.Constant(Tensor({3}));
  EXPECT_EQ(t.value(ops::Dense(t, x, eye, b0)).data,
            (std::vector<double>{1, 2, 3}));
  EXPECT_THROW(ops::Dense(t, x, zero, b0), std::invalid_argument);
}

TEST(DenseTest, GradCheck) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    ParamStore s;
    s.Add("x", RandomTensor({3, 7}, rng));
    s.Add("w", RandomTensor({4, 7}, rng));
    s.Add("b", RandomTensor({4}, rng));
    auto r = GradCheck(s, [seed](Tape& t, ParamStore& p) {
      return Project(t,
                     ops::Dense(t, t.Param(p, "x"), t.Param(p, "w"),
                                t.Param(p, "b")),
                     seed);
    });
    EXPECT_LT(r.max_relative_error, kGradTolerance);
    EXPECT_EQ(r.checked, 3u * 7 + 4 * 7 + 4);
  }
}

TEST(Conv2dTest, DeltaAndZeroKernels) {
  std::mt19937_64 rng(1);
  Tensor x = RandomTensor({2, 1, 6, 5}, rng);
  Tensor delta({1, 1, 5, 5});
  delta[12] = 1.0;
  Tape t;
  Var xv = t.Constant(x);
  Var y = ops::Conv2d(t, xv, t.Constant(delta), t.Constant(Tensor({1})));
  EXPECT_EQ(t.value(y).data, x.data);
  Var z = ops::Conv2d(t, xv, t.Constant(Tensor({3, 1, 5, 5})),
                      t.Constant(Tensor({3}, {1, 2, 3})));
  for (std::size_t i = 0; i < t.value(z).size(); ++i) {
    EXPECT_EQ(t.value(z)[i], static_cast<double>(1 + (i / 30) % 3));
  }
}

TEST(Conv2dTest, MatchesNaiveLoops) {
  std::mt19937_64 rng(2);
  Tensor x = RandomTensor({2, 3, 7, 4}, rng);
  Tensor k = RandomTensor({4, 3, 5, 5}, rng);
  Tensor b = RandomTensor({4}, rng);
  Tape t;
  Var y = ops::Conv2d(t, t.Constant(x), t.Constant(k), t.Constant(b));
  Tensor want = NaiveConv(x, k, b);
  ASSERT_EQ(t.shape(y), want.shape);
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_NEAR(t.value(y)[i], want[i], 1e-12);
  }
}

TEST(Conv2dTest, GradCheck) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed + 10);
    ParamStore s;
    s.Add("x", RandomTensor({2, 2, 6, 6}, rng));
    s.Add("k", RandomTensor({3, 2, 5, 5}, rng, 0.3));
    s.Add("b", RandomTensor({3}, rng));
    auto r = GradCheck(s, [seed](Tape& t, ParamStore& p) {
      return Project(t,
                     ops::Conv2d(t, t.Param(p, "x"), t.Param(p, "k"),
                                 t.Param(p, "b")),
                     seed);
    });
    EXPECT_LT(r.max_relative_error, kGradTolerance);
    EXPECT_EQ(r.skipped, 0u);
  }
}

TEST(ActivationTest, Values) {
  Tape t;
  Var x = t.Constant(Tensor({1, 3}, {-1, 0, 2}));
  EXPECT_EQ(t.value(ops::Relu(t, x)).data, (std::vector<double>{0, 0, 2}));
  EXPECT_EQ(t.value(ops::Sigmoid(t, x))[1], 0.5);
  EXPECT_NEAR(t.value(ops::Softplus(t, x))[1], std::log(2.0), 1e-15);
  Var big = t.Constant(Tensor({1, 2}, {800, -800}));
  EXPECT_EQ(t.value(ops::Softplus(t, big)).data,
            (std::vector<double>{800, 0}));
  EXPECT_EQ(t.value(ops::Sigmoid(t, big)).data, (std::vector<double>{1, 0}));
}

TEST(ActivationTest, SoftplusGradientIsSigmoid) {
  std::mt19937_64 rng(3);
  Tensor x = RandomTensor({1, 20}, rng, 4.0);
  Tape t;
  Var xv = t.Constant(x);
  Var y = ops::Sum(t, ops::Softplus(t, xv));
  t.Backward(y);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_NEAR(t.grad(xv)[i], 1.0 / (1.0 + std::exp(-x[i])), 1e-9);
  }
}

TEST(ActivationTest, GradCheck) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed + 20);
    ParamStore s;
    s.Add("x", RandomTensor({2, 15}, rng, 2.0));
    auto r = GradCheck(s, [seed](Tape& t, ParamStore& p) {
      Var x = t.Param(p, "x");
      Var a = ops::Add(t, ops::Relu(t, x), ops::Sigmoid(t, x));
      return Project(t, ops::Add(t, a, ops::Softplus(t, x)), seed);
    });
    EXPECT_LT(r.max_relative_error, kGradTolerance);
  }
}

TEST(ReparameterizeTest, Examples) {
  Tape t;
  Var mu = t.Constant(Tensor({1, 2}, {1, -2}));
  Var sigma = t.Constant(Tensor({1, 2}, {3, 4}));
  EXPECT_EQ(t.value(ops::Reparameterize(t, mu, sigma, Tensor({1, 2}))).data,
            (std::vector<double>{1, -2}));
  Var zero = t.Constant(Tensor({1, 2}));
  EXPECT_EQ(t.value(ops::Reparameterize(t, mu, zero,
                                         Tensor({1, 2}, {0.3, 7})))
                .data,
            (std::vector<double>{1, -2}));
  Var neg = t.Constant(Tensor({1, 2}, {1, -0.1}));
  EXPECT_THROW(ops::Reparameterize(t, mu, neg, Tensor({1, 2})),
               std::invalid_argument);
}

TEST(ReparameterizeTest, MonteCarloMoments) {
  constexpr std::size_t kDraws = 100000;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  Tensor eps({kDraws, 1});
  for (auto& e : eps.data) e = nd(rng);
  Tape t;
  Var z = ops::Reparameterize(t, t.Constant(Tensor({kDraws, 1})),
                              t.Constant(Tensor({kDraws, 1},
                                                std::vector<double>(kDraws, 1.0))),
                              eps);
  double mean = 0, sq = 0;
  for (double v : t.value(z).data) mean += v;
  mean /= kDraws;
  for (double v : t.value(z).data) sq += (v - mean) * (v - mean);
  EXPECT_LT(std::abs(mean), 0.02);
  EXPECT_LT(std::abs(std::sqrt(sq / kDraws) - 1.0), 0.02);
}

TEST(ReparameterizeTest, GradCheck) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed + 30);
    ParamStore s;
    s.Add("mu", RandomTensor({2, 6}, rng));
    Tensor sig = RandomTensor({2, 6}, rng);
    for (auto& v : sig.data) v = std::abs(v) + 0.1;
    s.Add("sigma", sig);
    Tensor eps = RandomTensor({2, 6}, rng);
    auto r = GradCheck(s, [&, seed](Tape& t, ParamStore& p) {
      return Project(t,
                     ops::Reparameterize(t, t.Param(p, "mu"),
                                         t.Param(p, "sigma"), eps),
                     seed);
    });
    EXPECT_LT(r.max_relative_error, kGradTolerance);
  }
}

TEST(UpsampleTest, Examples) {
  Tape t;
  Var x = t.Constant(Tensor({1, 1, 1, 1}, {3}));
  Var y = ops::Upsample2x(t, x);
  EXPECT_EQ(t.shape(y), (Shape{1, 1, 2, 2}));
  EXPECT_EQ(t.value(y).data, (std::vector<double>{3, 3, 3, 3}));
  Var x2 = t.Constant(Tensor({1, 2, 2, 3}));
  Var y2 = ops::Upsample2x(t, x2);
  t.Backward(y2, std::vector<double>(t.value(y2).size(), 1.0));
  for (double g : t.grad(x2)) EXPECT_EQ(g, 4.0);
}

TEST(UpsampleTest, GradCheck) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed + 40);
    ParamStore s;
    s.Add("x", RandomTensor({2, 3, 3, 4}, rng));
    auto r = GradCheck(s, [seed](Tape& t, ParamStore& p) {
      return Project(t, ops::Upsample2x(t, t.Param(p, "x")), seed);
    });
    EXPECT_LT(r.max_relative_error, kGradTolerance);
  }
}

TEST(AvgPoolTest, FloorsOddSizesAndGradChecks) {
  Tape t;
  Var x = t.Constant(Tensor({1, 1, 3, 3}, {1, 2, 9, 3, 4, 9, 9, 9, 9}));
  Var y = ops::AvgPool2x(t, x);
  EXPECT_EQ(t.shape(y), (Shape{1, 1, 1, 1}));
  EXPECT_EQ(t.value(y)[0], 2.5);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed + 50);
    ParamStore s;
    s.Add("x", RandomTensor({2, 2, 5, 4}, rng));
    auto r = GradCheck(s, [seed](Tape& t, ParamStore& p) {
      return Project(t, ops::AvgPool2x(t, t.Param(p, "x")), seed);
    });
    EXPECT_LT(r.max_relative_error, kGradTolerance);
  }
}

TEST(ShapeOpsTest, GradCheck) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed + 60);
    ParamStore s;
    s.Add("x", RandomTensor({2, 4, 2, 3}, rng));
    s.Add("y", RandomTensor({2, 12}, rng));
    auto r = GradCheck(s, [seed](Tape& t, ParamStore& p) {
      Var x = t.Param(p, "x");
      Var head = ops::Reshape(t, ops::SliceAxis1(t, x, 0, 2), {2, 12});
      Var tail = ops::Reshape(t, ops::SliceAxis1(t, x, 2, 4), {2, 12});
      Var m = ops::Mix(t, head, tail, 0.3);
      Var masked = ops::MaskFeatures(
          t, ops::Add(t, m, t.Param(p, "y")),
          {1, 0, 1, 1, 0, 1, 1, 1, 1, 0, 1, 1});
      return Project(t, masked, seed);
    });
    EXPECT_LT(r.max_relative_error, kGradTolerance);
  }
}

TEST(MixTest, Examples) {
  Tape t;
  Var zc = t.Constant(Tensor({1, 2}, {1, 0}));
  Var zg = t.Constant(Tensor({1, 2}, {0, 1}));
  EXPECT_EQ(t.value(ops::Mix(t, zc, zg, 0.0)).data,
            (std::vector<double>{0, 1}));
  EXPECT_EQ(t.value(ops::Mix(t, zc, zg, 1.0)).data,
            (std::vector<double>{1, 0}));
  EXPECT_EQ(t.value(ops::Mix(t, zc, zg, 0.5)).data,
            (std::vector<double>{0.5, 0.5}));
  EXPECT_THROW(ops::Mix(t, zc, zg, 1.5), std::invalid_argument);
}

TEST(SymmetrizeTest, SymmetricZeroDiagonalAndGradCheck) {
  std::mt19937_64 rng(70);
  Tape t;
  Var y = ops::SymmetrizeZeroDiagonal(t, t.Constant(RandomTensor({2, 1, 4, 4}, rng)));
  const auto& v = t.value(y).data;
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_EQ(v[(s * 4 + i) * 4 + j], v[(s * 4 + j) * 4 + i]);
        if (i == j) {
          EXPECT_EQ(v[(s * 4 + i) * 4 + j], 0.0);
        }
      }
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ParamStore s;
    s.Add("x", RandomTensor({2, 5, 5}, rng));
    auto r = GradCheck(s, [seed](Tape& t, ParamStore& p) {
      return Project(t, ops::SymmetrizeZeroDiagonal(t, t.Param(p, "x")), seed);
    });
    EXPECT_LT(r.max_relative_error, kGradTolerance);
  }
}

TEST(LossOpsTest, BceValues) {
  Tape t;
  Tensor target({1, 3, 3}, {0, 1, 0, 1, 0, 1, 0, 1, 0});
  Var half = t.Constant(Tensor({1, 3, 3}, std::vector<double>(9, 0.5)));
  EXPECT_NEAR(t.value(ops::BceUpper(t, half, target))[0], std::log(2.0), 1e-15);
  Var exact = t.Constant(target);
  EXPECT_LT(t.value(ops::BceUpper(t, exact, target))[0], 2e-7);
  EXPECT_THROW(ops::BceUpper(t, half, Tensor({1, 2, 2})),
               std::invalid_argument);
}

TEST(LossOpsTest, W2AndMseValues) {
  Tape t;
  auto c = [&](std::vector<double> v) {
    const std::size_t n = v.size();
    return t.Constant(Tensor({1, n}, std::move(v)));
  };
  EXPECT_EQ(t.value(ops::W2Squared(t, c({1, 0}), c({1, 1}), c({0, 0}),
                                   c({1, 1})))[0],
            1.0);
  EXPECT_EQ(t.value(ops::W2Squared(t, c({0.5}), c({2}), c({0.5}), c({1})))[0],
            1.0);
  EXPECT_EQ(t.value(ops::W2Squared(t, c({0.5}), c({2}), c({0.5}), c({2})))[0],
            0.0);
  EXPECT_EQ(t.value(ops::Mse(t, c({1, 2}), Tensor({1, 2}, {1, 4})))[0], 2.0);
}

TEST(LossOpsTest, GradCheck) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed + 80);
    ParamStore s;
    s.Add("logits", RandomTensor({2, 4, 4}, rng));
    s.Add("mq", RandomTensor({2, 3}, rng));
    s.Add("sq", RandomTensor({2, 3}, rng));
    s.Add("mp", RandomTensor({2, 3}, rng));
    s.Add("sp", RandomTensor({2, 3}, rng));
    s.Add("pred", RandomTensor({2, 5}, rng));
    Tensor adj({2, 4, 4});
    for (auto& v : adj.data) v = rng() % 2;
    Tensor target = RandomTensor({2, 5}, rng);
    auto r = GradCheck(s, [&](Tape& t, ParamStore& p) {
      Var probs = ops::SymmetrizeZeroDiagonal(
          t, ops::Sigmoid(t, t.Param(p, "logits")));
      Var bce = ops::BceUpper(t, probs, adj);
      Var w2 = ops::W2Squared(t, t.Param(p, "mq"), t.Param(p, "sq"),
                              t.Param(p, "mp"), t.Param(p, "sp"));
      Var mse = ops::Mse(t, t.Param(p, "pred"), target);
      return ops::Add(t, bce, ops::Add(t, ops::Scale(t, w2, 0.7), mse));
    });
    EXPECT_LT(r.max_relative_error, kGradTolerance);
  }
}

TEST(GradCheckTest, QuadraticIsExact) {
  std::mt19937_64 rng(90);
  ParamStore s;
  s.Add("w", RandomTensor({1, 30}, rng));
  auto r = GradCheck(s, [](Tape& t, ParamStore& p) {
    return ops::SumSquares(t, t.Param(p, "w"));
  });
  EXPECT_LT(r.max_relative_error, 1e-8);
  EXPECT_EQ(r.checked, 30u);
}

TEST(GradCheckTest, DenseSigmoidCompositeAndSubsampling) {
  std::mt19937_64 rng(91);
  ParamStore s;
  s.Add("w1", RandomTensor({40, 10}, rng, 0.5));
  s.Add("b1", RandomTensor({40}, rng));
  s.Add("w2", RandomTensor({1, 40}, rng, 0.5));
  s.Add("b2", RandomTensor({1}, rng));
  Tensor x = RandomTensor({3, 10}, rng);
  GradCheckOptions opt;
  opt.max_coordinates = 200;
  auto r = GradCheck(
      s,
      [&](Tape& t, ParamStore& p) {
        Var h = ops::Sigmoid(t, ops::Dense(t, t.Constant(x), t.Param(p, "w1"),
                                           t.Param(p, "b1")));
        return ops::Mean(
            t, ops::Sigmoid(t, ops::Dense(t, h, t.Param(p, "w2"),
                                          t.Param(p, "b2"))));
      },
      opt);
  EXPECT_LT(r.max_relative_error, kGradTolerance);
  EXPECT_EQ(r.checked, 200u);
}

TEST(GradCheckTest, DetectsAWrongGradient) {
  ParamStore s;
  s.Add("w", Tensor({1, 3}, {1, 2, 3}));
  auto r = GradCheck(s, [](Tape& t, ParamStore& p) {
    Var w = t.Param(p, "w");
    // Forward is sum(w) but backward claims 2 per coordinate.
    Var y{t.size()};
    const auto& v = t.value(w).data;
    return t.Record(Tensor({1}, {v[0] + v[1] + v[2]}),
                    [w, y](Tape& tp) {
                      for (double& g : tp.MutableGrad(w)) g += 2 * tp.grad(y)[0];
                    });
  });
  EXPECT_NEAR(r.max_relative_error, 0.5, 1e-6);
}

TEST(GradCheckTest, SkipsReluKinks) {
  ParamStore s;
  s.Add("w", Tensor({1, 2}, {1e-7, 1.0}));
  auto r = GradCheck(s, [](Tape& t, ParamStore& p) {
    return ops::Sum(t, ops::Relu(t, t.Param(p, "w")));
  });
  EXPECT_EQ(r.skipped, 1u);
  EXPECT_EQ(r.checked, 1u);
}

TEST(TapeTest, DeterministicAndZeroGradInvariance) {
  auto run = [] {
    std::mt19937_64 rng(5);
    Tensor x = RandomTensor({2, 1, 8, 8}, rng);
    Tensor k = RandomTensor({4, 1, 5, 5}, rng);
    Tape t;
    Var y = ops::Conv2d(t, t.Constant(x), t.Constant(k),
                        t.Constant(Tensor({4})));
    return t.value(ops::Relu(t, y)).data;
  };
  EXPECT_EQ(run(), run());

  ParamStore s;
  s.Add("used", Tensor({1, 2}, {1, 2}));
  s.Add("unused", Tensor({1, 2}, {3, 4}));
  Tape t;
  t.Param(s, "unused");
  t.Backward(ops::SumSquares(t, t.Param(s, "used")));
  EXPECT_EQ(s.grad(1), (std::vector<double>{0, 0}));
  EXPECT_EQ(s.grad(0), (std::vector<double>{2, 4}));
  EXPECT_THROW(t.Backward(t.Param(s, "used")), std::invalid_argument);
}

}  // namespace
}  // namespace ctrlgraph
