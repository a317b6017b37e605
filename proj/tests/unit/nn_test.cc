/*
 * Copyright 2026 The CasNN Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "casnn/common/rng.h"
#include "casnn/nn/init.h"
#include "casnn/nn/layers.h"
#include "casnn/nn/loss.h"
#include "casnn/nn/network.h"
#include "casnn/nn/optimizer.h"
#include "casnn/nn/weights_io.h"
#include "support/gradcheck.h"

namespace casnn {
namespace {

using nn::Shape;
using nn::Tensor;
using testing::GradReport;
using testing::kGradTolerance;
using testing::random_tensor;

void expect_all_below(const std::vector<GradReport>& reports) {
  ASSERT_FALSE(reports.empty());
  for (const auto& r : reports) {
    EXPECT_LT(r.error, kGradTolerance) << r.name << " over " << r.coordinates << " coords";
  }
}

void randomize_parameters(std::vector<nn::Parameter<double>*> params, Rng& rng) {
  for (auto* p : params) p->value = random_tensor(p->value.shape(), rng, 0.5);
}

// Gradient check of a single layer under sum(out * probe).
std::vector<GradReport> check_layer(nn::Layer<double>& layer, Shape input, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<nn::Parameter<double>*> params;
  layer.collect_parameters(params);
  randomize_parameters(params, rng);
  const Tensor<double> x = random_tensor(input, rng);
  const Tensor<double> probe = random_tensor(layer.output_shape(input), rng);
  return testing::layer_check(layer, probe).run(x);
}

TEST(GradientTest, Conv3x3Stride1) {
  nn::Conv2d<double> conv(3, 4, 3, 1);
  expect_all_below(check_layer(conv, {2, 3, 7, 6}, 1));
}

TEST(GradientTest, Conv3x3Stride2OddExtent) {
  nn::Conv2d<double> conv(2, 3, 3, 2, /*bias=*/true);
  expect_all_below(check_layer(conv, {2, 2, 9, 7}, 2));
}

TEST(GradientTest, Conv1x1Projection) {
  nn::Conv2d<double> conv(4, 6, 1, 2);
  expect_all_below(check_layer(conv, {2, 4, 6, 6}, 3));
}

TEST(GradientTest, BatchNormTrainMode) {
  nn::BatchNorm<double> bn(3);
  expect_all_below(check_layer(bn, {4, 3, 3, 3}, 4));
}

TEST(GradientTest, Relu) {
  nn::Relu<double> relu;
  expect_all_below(check_layer(relu, {2, 3, 4, 4}, 5));
}

TEST(GradientTest, GlobalAvgPool) {
  nn::GlobalAvgPool<double> gap;
  expect_all_below(check_layer(gap, {3, 4, 5, 3}, 6));
}

TEST(GradientTest, SoftmaxClassifier) {
  nn::SoftmaxClassifier<double> head(5, 3);
  expect_all_below(check_layer(head, {4, 5, 1, 1}, 7));
}

TEST(GradientTest, ResidualBlockIdentitySkip) {
  auto block = nn::make_preact_block<double>(4, 4, 1);
  ASSERT_EQ(block->projection(), nullptr);
  expect_all_below(check_layer(*block, {3, 4, 5, 5}, 8));
}

TEST(GradientTest, ResidualBlockProjectionSkip) {
  auto block = nn::make_preact_block<double>(3, 5, 2);
  ASSERT_NE(block->projection(), nullptr);
  expect_all_below(check_layer(*block, {3, 3, 6, 6}, 9));
}

TEST(GradientTest, SoftmaxCrossEntropyLogits) {
  Rng rng(10);
  const Tensor<double> logits = random_tensor({5, 3, 1, 1}, rng, 2.0);
  const std::vector<int> targets{0, 2, 1, 1, 0};
  const auto result = nn::softmax_cross_entropy(logits, std::span<const int>(targets));
  std::vector<double> analytic(result.grad.data(), result.grad.data() + result.grad.size());
  std::vector<double> numeric;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    Tensor<double> up = logits, down = logits;
    up[i] += testing::kFiniteStep;
    down[i] -= testing::kFiniteStep;
    numeric.push_back((nn::softmax_cross_entropy(up, std::span<const int>(targets)).loss -
                       nn::softmax_cross_entropy(down, std::span<const int>(targets)).loss) /
                      (2 * testing::kFiniteStep));
  }
  EXPECT_LT(testing::relative_error(analytic, numeric), kGradTolerance);
}

TEST(GradientTest, NetworkThroughFrozenPrefix) {
  nn::Network<double> net({2, 3, 8, 8});
  net.emplace<nn::Conv2d<double>>(3, 4, 3, 1);
  net.emplace<nn::BatchNorm<double>>(4);
  net.emplace<nn::Relu<double>>();
  net.emplace<nn::GlobalAvgPool<double>>();
  net.emplace<nn::SoftmaxClassifier<double>>(4, 3);
  Rng rng(11);
  randomize_parameters(net.parameters(), rng);
  net.layer(0).set_trainable(false);
  net.layer(1).set_trainable(false);
  auto reports = testing::network_check(net, {0, 2}, false).run(random_tensor({2, 3, 8, 8}, rng));
  // Only the head's weight and bias are trainable; no input gradient exists.
  ASSERT_EQ(reports.size(), 2u);
  expect_all_below(reports);
}

// Reference cross-correlation with zero padding.
Tensor<double> naive_conv(const Tensor<double>& x, const Tensor<double>& w, std::size_t stride,
                          std::size_t pad) {
  const Shape xs = x.shape(), ws = w.shape();
  const std::size_t oh = (xs.h + 2 * pad - ws.h) / stride + 1;
  const std::size_t ow = (xs.w + 2 * pad - ws.w) / stride + 1;
  Tensor<double> y({xs.n, ws.n, oh, ow});
  for (std::size_t n = 0; n < xs.n; ++n)
    for (std::size_t o = 0; o < ws.n; ++o)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
          double s = 0;
          for (std::size_t c = 0; c < xs.c; ++c)
            for (std::size_t a = 0; a < ws.h; ++a)
              for (std::size_t b = 0; b < ws.w; ++b) {
                const long r = static_cast<long>(i * stride + a) - static_cast<long>(pad);
                const long q = static_cast<long>(j * stride + b) - static_cast<long>(pad);
                if (r < 0 || q < 0 || r >= static_cast<long>(xs.h) || q >= static_cast<long>(xs.w))
                  continue;
                s += x.at(n, c, r, q) * w.at(o, c, a, b);
              }
          y.at(n, o, i, j) = s;
        }
  return y;
}

double max_abs_diff(const Tensor<float>& a, const Tensor<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

struct ConvCase {
  std::size_t stride;
  std::size_t width;
  std::size_t cin;
  std::size_t cout;
};

class FloatConvTest : public ::testing::TestWithParam<ConvCase> {};

// Covers both the vectorised kernels (wide outputs) and the GEMM fallback.
TEST_P(FloatConvTest, MatchesNaiveForwardAndBackward) {
  const ConvCase p = GetParam();
  Rng rng(p.width * 7 + p.stride);
  const Shape in{2, p.cin, 11, p.width};
  const Tensor<double> x = random_tensor(in, rng);
  const Tensor<double> w = random_tensor({p.cout, p.cin, 3, 3}, rng, 0.3);

  nn::Conv2d<float> conv(p.cin, p.cout, 3, p.stride);
  conv.weight().value = w.cast<float>();
  const Tensor<float> y = conv.forward(x.cast<float>());
  const Tensor<double> ref = naive_conv(x, w, p.stride, 1);
  ASSERT_EQ(y.shape(), ref.shape());
  EXPECT_LT(max_abs_diff(y, ref), 1e-4);

  nn::Conv2d<double> exact(p.cin, p.cout, 3, p.stride);
  exact.weight().value = w;
  exact.forward(x);
  const Tensor<double> dy = random_tensor(ref.shape(), rng);
  const Tensor<double> dx_ref = exact.backward(dy, true);
  const Tensor<float> dx = conv.backward(dy.cast<float>(), true);
  EXPECT_LT(max_abs_diff(dx, dx_ref), 1e-4);
  EXPECT_LT(max_abs_diff(conv.weight().grad, exact.weight().grad), 1e-3);
}

INSTANTIATE_TEST_SUITE_P(Widths, FloatConvTest,
                         ::testing::Values(ConvCase{1, 24, 3, 8}, ConvCase{1, 37, 5, 9},
                                           ConvCase{1, 70, 8, 16}, ConvCase{2, 48, 4, 8},
                                           ConvCase{2, 69, 3, 11}, ConvCase{1, 9, 3, 4},
                                           ConvCase{2, 15, 2, 5}));

TEST(LayerTest, OutputShapesAndMismatchRejection) {
  nn::Conv2d<float> conv(3, 8, 3, 2);
  EXPECT_EQ(conv.output_shape({1, 3, 7, 8}), (Shape{1, 8, 4, 4}));
  EXPECT_THROW(conv.output_shape({1, 4, 7, 8}), ContractError);
  nn::Network<float> net({1, 3, 4, 4});
  net.emplace<nn::Conv2d<float>>(3, 4, 3, 2);
  EXPECT_THROW(net.emplace<nn::Conv2d<float>>(5, 4, 3, 1), ContractError);
  EXPECT_EQ(net.layer_count(), 1u);
}

TEST(LayerTest, BatchNormRunningStatistics) {
  nn::BatchNorm<double> bn(1);
  Tensor<double> x({4, 1, 1, 1}, std::vector<double>{1, 2, 3, 6});
  bn.forward(x);
  // Mean 3, biased variance 3.5; momentum 0.9 from (0, 1).
  EXPECT_NEAR(bn.running_mean()[0], 0.3, 1e-12);
  EXPECT_NEAR(bn.running_var()[0], 0.9 + 0.35, 1e-12);
  const Tensor<double> y = bn.infer(x);
  EXPECT_NEAR(y[0], (1 - 0.3) / std::sqrt(1.25 + 1e-5), 1e-12);
}

TEST(LayerTest, FrozenLayerKeepsNoActivations) {
  nn::Network<float> net({2, 3, 8, 8});
  net.emplace<nn::Conv2d<float>>(3, 4, 3, 1);
  net.emplace<nn::BatchNorm<float>>(4);
  net.emplace<nn::GlobalAvgPool<float>>();
  net.emplace<nn::SoftmaxClassifier<float>>(4, 3);
  net.layer(0).set_trainable(false);
  net.layer(1).set_trainable(false);
  const Tensor<float> mean_before = dynamic_cast<nn::BatchNorm<float>&>(net.layer(1)).running_mean();
  net.forward(Tensor<float>({2, 3, 8, 8}, 0.5f));
  EXPECT_FALSE(net.layer(0).has_cache());
  EXPECT_FALSE(net.layer(1).has_cache());
  EXPECT_EQ(dynamic_cast<nn::BatchNorm<float>&>(net.layer(1)).running_mean(), mean_before);
  EXPECT_EQ(net.trainable_parameters().size(), 2u);
}

TEST(OptimizerTest, NesterovUpdateRule) {
  nn::Parameter<double> p{"w", Tensor<double>({1, 1, 1, 1}, 1.0), Tensor<double>({1, 1, 1, 1}, 0.5)};
  nn::OptimizerState<double> state;
  state.learning_rate = 0.1;
  std::vector<nn::Parameter<double>*> params{&p};
  nn::nesterov_step<double>(params, state);
  EXPECT_DOUBLE_EQ(state.velocity[0][0], -0.05);
  EXPECT_DOUBLE_EQ(p.value[0], 0.95);
  nn::nesterov_step<double>(params, state);
  EXPECT_DOUBLE_EQ(state.velocity[0][0], 0.9 * -0.05 - 0.05);
}

TEST(OptimizerTest, LookaheadRestoresWeightsExactly) {
  nn::Parameter<float> p{"w", Tensor<float>({1, 1, 1, 3}, 0.3f), {}};
  nn::NesterovSgd<float> sgd({&p}, 0.05);
  p.grad = Tensor<float>({1, 1, 1, 3}, 1.0f);
  sgd.lookahead();
  sgd.step();
  const Tensor<float> w1 = p.value;
  sgd.lookahead();
  EXPECT_NE(p.value, w1);
  p.grad.fill(0.0f);
  sgd.step();
  // Zero gradient: w2 = w1 + mu * v1.
  EXPECT_FLOAT_EQ(p.value[0], w1[0] + 0.9f * (-0.05f));
}

TEST(InitTest, HeVarianceMatchesFanIn) {
  Rng rng(12);
  const Tensor<float> w = nn::he_init<float>({64, 32, 3, 3}, rng);
  double s = 0, s2 = 0;
  for (float v : w.values()) {
    s += v;
    s2 += double(v) * v;
  }
  const double n = static_cast<double>(w.size());
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 2.0 / (32 * 9), 0.1 * 2.0 / (32 * 9));
}

TEST(WeightsIoTest, RoundTripIsByteIdentical) {
  nn::Network<float> net({1, 3, 16, 16});
  net.emplace<nn::Conv2d<float>>(3, 8, 3, 2);
  net.add(nn::make_preact_block<float>(8, 16, 2));
  net.emplace<nn::BatchNorm<float>>(16);
  net.emplace<nn::GlobalAvgPool<float>>();
  net.emplace<nn::SoftmaxClassifier<float>>(16, 3);
  Rng rng(13);
  nn::initialize_he(net, rng);
  const std::string bytes = nn::encode_weights<float>({{"net", &net}}, {{"k", 1}});
  auto bundle = nn::decode_weights<float>(bytes);
  EXPECT_EQ(bundle.meta["k"], 1);
  nn::Network<float>& loaded = bundle.get("net");
  EXPECT_EQ(loaded.specs(), net.specs());
  EXPECT_EQ(nn::encode_weights<float>({{"net", &loaded}}, {{"k", 1}}), bytes);
  const Tensor<float> x({1, 3, 16, 16}, 0.25f);
  EXPECT_EQ(loaded.infer(x), net.infer(x));
}

TEST(WeightsIoTest, RejectsTruncatedPayload) {
  nn::Network<float> net({1, 3, 4, 4});
  net.emplace<nn::Conv2d<float>>(3, 2, 1, 1);
  std::string bytes = nn::encode_weights<float>({{"net", &net}}, nlohmann::json::object());
  bytes.pop_back();
  EXPECT_ANY_THROW(nn::decode_weights<float>(bytes));
}

}  // namespace
}  // namespace casnn
