/**
 * Copyright 2026 The Aesthetics Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <gtest/gtest.h>

#include <fstream>

#include "aesthetics/nn/archive.hpp"
#include "aesthetics/nn/layers.hpp"
#include "test_support.hpp"

namespace {

using namespace aesthetics;
using namespace aesthetics::nn;

Tensor random_tensor(std::vector<int> shape, std::uint64_t seed) {
  Tensor t(std::move(shape));
  Rng rng(seed);
  for (auto& v : t.values()) v = static_cast<float>(standard_normal(rng));
  return t;
}

// Scalar objective: weighted sum of outputs with fixed random weights.
double objective(Sequential& net, const Tensor& x, const Tensor& r) {
  const auto y = net.forward(x, false);
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += static_cast<double>(y[i]) * r[i];
  return s;
}

// Central differences in double precision against the analytic gradient of
// every parameter entry (subsampled) and of the input.
void check_gradients(Sequential& net, Tensor x, double tol) {
  const auto y = net.forward(x, true);
  const auto r = random_tensor(y.shape(), 99);
  for (auto* p : net.params()) p->zero_grad();
  const auto dx = net.backward(r, true);
  const float h = 1e-3f;
  int kinks = 0, probes = 0;
  for (auto* p : net.params()) {
    auto& v = p->value.values();
    for (std::size_t i = 0; i < v.size(); i += std::max<std::size_t>(1, v.size() / 23)) {
      ++probes;
      const float keep = v[i];
      const double mid = objective(net, x, r);
      v[i] = keep + h;
      const double up = objective(net, x, r);
      v[i] = keep - h;
      const double down = objective(net, x, r);
      v[i] = keep;
      const double numeric = (up - down) / (2.0 * h);
      // a probe that crosses a ReLU or pooling kink has unequal one-sided slopes
      const double fwd = (up - mid) / h, bwd = (mid - down) / h;
      if (std::abs(fwd - bwd) > tol * std::max(1.0, std::abs(numeric))) {
        ++kinks;
        continue;
      }
      EXPECT_NEAR(p->grad[i], numeric, tol * std::max(1.0, std::abs(numeric))) << p->name << "[" << i << "]";
    }
  }
  EXPECT_LT(kinks * 4, probes) << "too many probes skipped";
  for (std::size_t i = 0; i < x.size(); i += std::max<std::size_t>(1, x.size() / 31)) {
    const float keep = x[i];
    x[i] = keep + h;
    const double up = objective(net, x, r);
    x[i] = keep - h;
    const double down = objective(net, x, r);
    x[i] = keep;
    EXPECT_NEAR(dx[i], (up - down) / (2.0 * h), tol * std::max(1.0, std::abs((up - down) / (2.0 * h)))) << "input[" << i << "]";
  }
}

TEST(Gradients, LinearConvStridePad) {
  for (auto [stride, pad] : {std::pair{1, 0}, {1, 1}, {2, 1}, {2, 0}}) {
    Sequential net;
    net.add<Conv2d>("c", 3, 2, 3, stride, pad);
    net.initialize(11);
    for (auto& v : net.params()[1]->value.values()) v = 0.3f;
    check_gradients(net, random_tensor({2, 3, 7, 6}, 12), 5e-3);
  }
}

TEST(Gradients, ConvReluDense) {
  Sequential net;
  net.add<Conv2d>("c1", 2, 3, 3, 1, 1);
  net.add<ReLU>("r1");
  net.add<Conv2d>("c2", 3, 2, 3, 2, 0);
  net.add<Flatten>("f");
  net.add<Dense>("d", 2 * 3 * 3, 4);
  net.initialize(5);
  for (auto* p : net.params())
    for (auto& v : p->value.values()) v += 0.05f;  // nonzero biases
  check_gradients(net, random_tensor({2, 2, 7, 7}, 3), 2e-2);
}

TEST(Gradients, MaxPool) {
  Sequential net;
  net.add<Conv2d>("c", 1, 2, 3, 1, 1);
  net.add<MaxPool2d>("p", 2, 2);
  net.add<Flatten>("f");
  net.add<Dense>("d", 2 * 4 * 4, 3);
  net.initialize(8);
  // distinct values keep the pooling argmax stable under the probe step
  Tensor x({1, 1, 8, 8});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<float>((i * 37) % 64) * 0.5f;
  check_gradients(net, x, 2e-2);
}

TEST(Shapes, OutputShapesAndErrors) {
  Conv2d c("c", 3, 8, 3, 2, 1);
  EXPECT_EQ(c.output_shape({3, 224, 224}), (std::vector<int>{8, 112, 112}));
  MaxPool2d p("p", 4, 4);
  EXPECT_EQ(p.output_shape({8, 112, 112}), (std::vector<int>{8, 28, 28}));
  try {
    c.output_shape({4, 10, 10});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::bad_shape);
  }
}

TEST(Loss, CrossEntropyValueAndGradient) {
  Tensor z({2, 2}, std::vector<float>{2.0f, -1.0f, 0.5f, 0.5f});
  const auto r = cross_entropy(z, {0, 1});
  const double l0 = std::log(1 + std::exp(-3.0));
  const double l1 = std::log(2.0);
  EXPECT_NEAR(r.loss, (l0 + l1) / 2, 1e-7);
  const double p = 1 / (1 + std::exp(-3.0));
  EXPECT_NEAR(r.grad[0], (p - 1) / 2, 1e-7);
  EXPECT_NEAR(r.grad[1], (1 - p) / 2, 1e-7);
  EXPECT_NEAR(r.grad[2], 0.25, 1e-7);
  EXPECT_NEAR(r.grad[3], -0.25, 1e-7);
  const auto w = cross_entropy(z, {0, 1}, {1.0, 3.0});
  EXPECT_NEAR(w.loss, (l0 + 3 * l1) / 2, 1e-7);
}

TEST(Loss, SoftmaxExamples) {
  const float tie[] = {3.0f, 3.0f};
  const auto p = softmax(tie);
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
  const float big[] = {10.0f, -10.0f};
  const auto q = softmax(big);
  EXPECT_GT(q[0], 1.0 - 1e-8);
}

TEST(Optimizer, MomentumUpdateAndFrozenSkip) {
  Param a;
  a.value = Tensor({2}, std::vector<float>{1.0f, 2.0f});
  Param b;
  b.value = Tensor({1}, std::vector<float>{5.0f});
  b.trainable = false;
  a.grad = Tensor({2}, std::vector<float>{0.5f, -1.0f});
  b.grad = Tensor({1}, std::vector<float>{7.0f});
  const SgdMomentum opt{0.1, 0.9};
  opt.step({&a, &b});
  EXPECT_FLOAT_EQ(a.value[0], 1.0f - 0.1f * 0.5f);
  EXPECT_FLOAT_EQ(a.value[1], 2.0f + 0.1f);
  opt.step({&a, &b});
  // v2 = 0.9 * v1 + g
  EXPECT_FLOAT_EQ(a.value[0], 1.0f - 0.1f * 0.5f - 0.1f * (0.9f * 0.5f + 0.5f));
  EXPECT_EQ(b.value[0], 5.0f);
  EXPECT_TRUE(b.velocity.empty());
}

TEST(Sequential, CopiesAreDeep) {
  Sequential a;
  a.add<Dense>("d", 3, 2);
  a.initialize(1);
  Sequential b = a;
  b.params()[0]->value[0] += 1.0f;
  EXPECT_NE(a.params()[0]->value[0], b.params()[0]->value[0]);
}

TEST(Sequential, InitializationIsSeededByName) {
  Sequential a, b;
  a.add<Dense>("x", 10, 10);
  b.add<Dense>("x", 10, 10);
  a.initialize(3);
  b.initialize(3);
  EXPECT_EQ(a.params()[0]->value, b.params()[0]->value);
  b.initialize(4);
  EXPECT_NE(a.params()[0]->value, b.params()[0]->value);
}

TEST(Sequential, BatchRowsAreIndependent) {
  Sequential net;
  net.add<Conv2d>("c", 3, 4, 3, 2, 1);
  net.add<ReLU>("r");
  net.add<Flatten>("f");
  net.add<Dense>("d", 4 * 5 * 5, 2);
  net.initialize(2);
  const auto x = random_tensor({5, 3, 10, 10}, 4);
  const auto y = net.forward(x, false);
  for (int s = 0; s < 5; ++s) {
    Tensor one({1, 3, 10, 10});
    std::copy(x.row(s).begin(), x.row(s).end(), one.data());
    const auto ys = net.forward(one, false);
    for (int j = 0; j < 2; ++j) EXPECT_EQ(ys[j], y.row(s)[j]);
  }
}

TEST(Tensor, StackAndChecksum) {
  const Tensor a({2}, std::vector<float>{1, 2}), b({2}, std::vector<float>{3, 4});
  const std::vector<Tensor> v{a, b};
  const auto s = stack(v);
  EXPECT_EQ(s.shape(), (std::vector<int>{2, 2}));
  EXPECT_EQ(s.values(), (std::vector<float>{1, 2, 3, 4}));
  EXPECT_EQ(checksum(a), checksum(Tensor({2}, std::vector<float>{1, 2})));
  EXPECT_NE(checksum(a), checksum(b));
}

TEST(Archive, RoundTripIsBitwise) {
  testing_support::TempDir dir("archive");
  Archive a;
  a.meta = {{"k", "v"}, {"empty", ""}};
  a.tensors.emplace_back("t1", random_tensor({3, 4}, 1));
  a.tensors.emplace_back("t2", Tensor({0}));
  save_archive(dir.str("a.bin"), a);
  const auto b = load_archive(dir.str("a.bin"));
  EXPECT_EQ(b.meta, a.meta);
  ASSERT_EQ(b.tensors.size(), 2u);
  EXPECT_EQ(*b.find("t1"), a.tensors[0].second);
  EXPECT_EQ(b.find("t2")->shape(), (std::vector<int>{0}));
}

TEST(Archive, TruncationReportsOffset) {
  testing_support::TempDir dir("archive");
  Archive a;
  a.tensors.emplace_back("t", random_tensor({100}, 1));
  save_archive(dir.str("a.bin"), a);
  std::filesystem::resize_file(dir.str("a.bin"), 60);
  try {
    load_archive(dir.str("a.bin"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("truncated at byte"), std::string::npos) << e.what();
  }
  std::ofstream(dir.str("junk.bin")) << "not an archive";
  EXPECT_THROW(load_archive(dir.str("junk.bin")), Error);
}

}  // namespace
