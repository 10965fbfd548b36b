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
#pragma once

// Minimal CPU layer set (conv, dense, relu, max-pool, flatten) with explicit
// backward passes. Every per-sample computation is independent of the other
// samples in the batch, which keeps outputs bitwise equivariant under batch
// permutation and identical across batch sizes.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "aesthetics/error.hpp"
#include "aesthetics/nn/tensor.hpp"
#include "aesthetics/random.hpp"

namespace aesthetics::nn {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;
using VecMap = Eigen::Map<Eigen::VectorXf>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXf>;

enum class Init { he_uniform, normal_001, zeros };

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;      // allocated on first backward
  Tensor velocity;  // allocated on first optimizer step
  bool trainable = true;
  Init init = Init::zeros;
  int fan_in = 1;

  void ensure_grad() {
    if (grad.shape() != value.shape()) grad = Tensor(value.shape());
  }
  void zero_grad() {
    if (!grad.empty()) grad.fill(0.0f);
  }
};

inline void initialize(Param& p, std::uint64_t seed) {
  Rng rng(mix_seed(seed, p.name));
  auto& v = p.value.values();
  switch (p.init) {
    case Init::zeros:
      std::fill(v.begin(), v.end(), 0.0f);
      break;
    case Init::he_uniform: {
      const double bound = std::sqrt(6.0 / std::max(1, p.fan_in));
      for (auto& x : v) x = static_cast<float>((2.0 * uniform01(rng) - 1.0) * bound);
      break;
    }
    case Init::normal_001:
      for (auto& x : v) x = static_cast<float>(0.01 * standard_normal(rng));
      break;
  }
}

class Layer {
 public:
  explicit Layer(std::string name) : name_(std::move(name)) {}
  virtual ~Layer() = default;

  const std::string& name() const { return name_; }
  virtual std::string kind() const = 0;
  /// Per-sample output shape for a per-sample input shape.
  virtual std::vector<int> output_shape(const std::vector<int>& in) const = 0;
  /// `keep` retains what backward needs.
  virtual Tensor forward(const Tensor& x, bool keep) = 0;
  virtual Tensor backward(const Tensor& dy, bool need_dx) = 0;
  virtual std::vector<Param*> params() { return {}; }
  virtual std::unique_ptr<Layer> clone() const = 0;

  std::vector<const Param*> params() const {
    auto ps = const_cast<Layer*>(this)->params();
    return {ps.begin(), ps.end()};
  }
  bool has_trainable() {
    for (auto* p : params())
      if (p->trainable) return true;
    return false;
  }

 private:
  std::string name_;
};

// ---------------------------------------------------------------------------

class Conv2d final : public Layer {
 public:
  Conv2d(std::string name, int in_channels, int out_channels, int kernel, int stride = 1, int pad = 0,
         Init init = Init::he_uniform)
      : Layer(std::move(name)), in_(in_channels), out_(out_channels), k_(kernel), stride_(stride), pad_(pad) {
    if (in_ <= 0 || out_ <= 0 || k_ <= 0 || stride_ <= 0 || pad_ < 0) throw Error(Errc::bad_spec, "conv geometry");
    weight_.name = this->name() + ".weight";
    weight_.value = Tensor({out_, in_, k_, k_});
    weight_.init = init;
    weight_.fan_in = in_ * k_ * k_;
    bias_.name = this->name() + ".bias";
    bias_.value = Tensor({out_});
  }

  std::string kind() const override { return "conv"; }
  int in_channels() const { return in_; }
  int out_channels() const { return out_; }
  int kernel() const { return k_; }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    if (in.size() != 3 || in[0] != in_) throw Error(Errc::bad_shape, name() + ": expected (" + std::to_string(in_) + ",H,W), got " + shape_string(in));
    const int ho = (in[1] + 2 * pad_ - k_) / stride_ + 1;
    const int wo = (in[2] + 2 * pad_ - k_) / stride_ + 1;
    if (ho <= 0 || wo <= 0) throw Error(Errc::bad_shape, name() + ": input too small");
    return {out_, ho, wo};
  }

  Tensor forward(const Tensor& x, bool keep) override {
    const int n = x.dim(0);
    const auto os = output_shape({x.dim(1), x.dim(2), x.dim(3)});
    Tensor y({n, os[0], os[1], os[2]});
    const int spatial = os[1] * os[2];
    const int kdim = in_ * k_ * k_;
    ConstMatMap w(weight_.value.data(), out_, kdim);
    ConstVecMap b(bias_.value.data(), out_);
    RowMatrix cols(kdim, spatial);
    for (int s = 0; s < n; ++s) {
      im2col(x.row(s).data(), x.dim(2), x.dim(3), os[1], os[2], cols.data());
      MatMap ys(y.row(s).data(), out_, spatial);
      ys.noalias() = w * cols;
      ys.colwise() += b;
    }
    if (keep) input_ = x;
    return y;
  }

  Tensor backward(const Tensor& dy, bool need_dx) override {
    const int n = dy.dim(0);
    const int h = input_.dim(2), wd = input_.dim(3);
    const int ho = dy.dim(2), wo = dy.dim(3);
    const int spatial = ho * wo;
    const int kdim = in_ * k_ * k_;
    ConstMatMap w(weight_.value.data(), out_, kdim);
    RowMatrix cols(kdim, spatial);
    RowMatrix dcols;
    Tensor dx;
    if (need_dx) dx = Tensor(input_.shape());
    if (weight_.trainable) weight_.ensure_grad();
    if (bias_.trainable) bias_.ensure_grad();
    for (int s = 0; s < n; ++s) {
      ConstMatMap dys(dy.row(s).data(), out_, spatial);
      if (weight_.trainable) {
        im2col(input_.row(s).data(), h, wd, ho, wo, cols.data());
        MatMap dw(weight_.grad.data(), out_, kdim);
        dw.noalias() += dys * cols.transpose();
      }
      if (bias_.trainable) {
        VecMap db(bias_.grad.data(), out_);
        db += dys.rowwise().sum();
      }
      if (need_dx) {
        dcols.noalias() = w.transpose() * dys;
        col2im(dcols.data(), h, wd, ho, wo, dx.row(s).data());
      }
    }
    return dx;
  }

  std::vector<Param*> params() override { return {&weight_, &bias_}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2d>(*this); }

 private:
  void im2col(const float* img, int h, int w, int ho, int wo, float* cols) const {
    for (int c = 0; c < in_; ++c)
      for (int ky = 0; ky < k_; ++ky)
        for (int kx = 0; kx < k_; ++kx) {
          float* out = cols + static_cast<std::size_t>((c * k_ + ky) * k_ + kx) * ho * wo;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * stride_ - pad_ + ky;
            float* orow = out + oy * wo;
            if (iy < 0 || iy >= h) {
              std::fill(orow, orow + wo, 0.0f);
              continue;
            }
            const float* irow = img + (static_cast<std::size_t>(c) * h + iy) * w;
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * stride_ - pad_ + kx;
              orow[ox] = (ix >= 0 && ix < w) ? irow[ix] : 0.0f;
            }
          }
        }
  }

  void col2im(const float* cols, int h, int w, int ho, int wo, float* img) const {
    for (int c = 0; c < in_; ++c)
      for (int ky = 0; ky < k_; ++ky)
        for (int kx = 0; kx < k_; ++kx) {
          const float* in = cols + static_cast<std::size_t>((c * k_ + ky) * k_ + kx) * ho * wo;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * stride_ - pad_ + ky;
            if (iy < 0 || iy >= h) continue;
            float* irow = img + (static_cast<std::size_t>(c) * h + iy) * w;
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * stride_ - pad_ + kx;
              if (ix >= 0 && ix < w) irow[ix] += in[oy * wo + ox];
            }
          }
        }
  }

  int in_, out_, k_, stride_, pad_;
  Param weight_, bias_;
  Tensor input_;
};

// ---------------------------------------------------------------------------

class Dense final : public Layer {
 public:
  Dense(std::string name, int in_features, int out_features, Init init = Init::he_uniform)
      : Layer(std::move(name)), in_(in_features), out_(out_features) {
    if (in_ <= 0 || out_ <= 0) throw Error(Errc::bad_spec, "dense width must be positive");
    weight_.name = this->name() + ".weight";
    weight_.value = Tensor({out_, in_});
    weight_.init = init;
    weight_.fan_in = in_;
    bias_.name = this->name() + ".bias";
    bias_.value = Tensor({out_});
  }

  std::string kind() const override { return "dense"; }
  int in_features() const { return in_; }
  int out_features() const { return out_; }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    if (in.size() != 1 || in[0] != in_)
      throw Error(Errc::bad_shape, name() + ": expected (" + std::to_string(in_) + "), got " + shape_string(in));
    return {out_};
  }

  Tensor forward(const Tensor& x, bool keep) override {
    const int n = x.dim(0);
    if (x.stride0() != static_cast<std::size_t>(in_)) throw Error(Errc::bad_shape, name() + ": input width");
    Tensor y({n, out_});
    ConstMatMap w(weight_.value.data(), out_, in_);
    ConstVecMap b(bias_.value.data(), out_);
    for (int s = 0; s < n; ++s) {
      VecMap ys(y.row(s).data(), out_);
      ys.noalias() = w * ConstVecMap(x.row(s).data(), in_);
      ys += b;
    }
    if (keep) input_ = x;
    return y;
  }

  Tensor backward(const Tensor& dy, bool need_dx) override {
    const int n = dy.dim(0);
    ConstMatMap w(weight_.value.data(), out_, in_);
    Tensor dx;
    if (need_dx) dx = Tensor(input_.shape());
    if (weight_.trainable) weight_.ensure_grad();
    if (bias_.trainable) bias_.ensure_grad();
    for (int s = 0; s < n; ++s) {
      ConstVecMap dys(dy.row(s).data(), out_);
      if (weight_.trainable) {
        MatMap dw(weight_.grad.data(), out_, in_);
        dw.noalias() += dys * ConstVecMap(input_.row(s).data(), in_).transpose();
      }
      if (bias_.trainable) VecMap(bias_.grad.data(), out_) += dys;
      if (need_dx) VecMap(dx.row(s).data(), in_).noalias() = w.transpose() * dys;
    }
    return dx;
  }

  std::vector<Param*> params() override { return {&weight_, &bias_}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }

 private:
  int in_, out_;
  Param weight_, bias_;
  Tensor input_;
};

// ---------------------------------------------------------------------------

class ReLU final : public Layer {
 public:
  using Layer::Layer;
  std::string kind() const override { return "relu"; }
  std::vector<int> output_shape(const std::vector<int>& in) const override { return in; }

  Tensor forward(const Tensor& x, bool keep) override {
    Tensor y = x;
    for (auto& v : y.values()) v = v > 0.0f ? v : 0.0f;
    if (keep) output_ = y;
    return y;
  }
  Tensor backward(const Tensor& dy, bool need_dx) override {
    if (!need_dx) return {};
    Tensor dx = dy;
    for (std::size_t i = 0; i < dx.size(); ++i)
      if (!(output_[i] > 0.0f)) dx[i] = 0.0f;
    return dx;
  }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<ReLU>(*this); }

 private:
  Tensor output_;
};

class MaxPool2d final : public Layer {
 public:
  MaxPool2d(std::string name, int kernel, int stride) : Layer(std::move(name)), k_(kernel), stride_(stride) {
    if (k_ <= 0 || stride_ <= 0) throw Error(Errc::bad_spec, "pool geometry");
  }
  std::string kind() const override { return "maxpool"; }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    if (in.size() != 3) throw Error(Errc::bad_shape, name() + ": expected (C,H,W)");
    const int ho = (in[1] - k_) / stride_ + 1;
    const int wo = (in[2] - k_) / stride_ + 1;
    if (ho <= 0 || wo <= 0) throw Error(Errc::bad_shape, name() + ": input too small");
    return {in[0], ho, wo};
  }

  Tensor forward(const Tensor& x, bool keep) override {
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const auto os = output_shape({c, h, w});
    Tensor y({n, c, os[1], os[2]});
    if (keep) {
      argmax_.assign(y.size(), 0);
      in_shape_ = x.shape();
    }
    std::size_t o = 0;
    for (int s = 0; s < n; ++s)
      for (int ch = 0; ch < c; ++ch) {
        const std::size_t plane = (static_cast<std::size_t>(s) * c + ch) * h * w;
        for (int oy = 0; oy < os[1]; ++oy)
          for (int ox = 0; ox < os[2]; ++ox, ++o) {
            float best = -std::numeric_limits<float>::infinity();
            std::size_t best_i = plane + static_cast<std::size_t>(oy * stride_) * w + ox * stride_;
            for (int ky = 0; ky < k_; ++ky)
              for (int kx = 0; kx < k_; ++kx) {
                const std::size_t i = plane + static_cast<std::size_t>(oy * stride_ + ky) * w + ox * stride_ + kx;
                if (x[i] > best) {
                  best = x[i];
                  best_i = i;
                }
              }
            y[o] = best;
            if (keep) argmax_[o] = best_i;
          }
      }
    return y;
  }

  Tensor backward(const Tensor& dy, bool need_dx) override {
    if (!need_dx) return {};
    Tensor dx(in_shape_);
    for (std::size_t o = 0; o < dy.size(); ++o) dx[argmax_[o]] += dy[o];
    return dx;
  }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPool2d>(*this); }

 private:
  int k_, stride_;
  std::vector<std::size_t> argmax_;
  std::vector<int> in_shape_;
};

class Flatten final : public Layer {
 public:
  using Layer::Layer;
  std::string kind() const override { return "flatten"; }
  std::vector<int> output_shape(const std::vector<int>& in) const override {
    return {static_cast<int>(Tensor::count(in))};
  }
  Tensor forward(const Tensor& x, bool keep) override {
    if (keep) in_shape_ = x.shape();
    Tensor y = x;
    y.reshape({x.dim(0), static_cast<int>(x.stride0())});
    return y;
  }
  Tensor backward(const Tensor& dy, bool need_dx) override {
    if (!need_dx) return {};
    Tensor dx = dy;
    dx.reshape(in_shape_);
    return dx;
  }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Flatten>(*this); }

 private:
  std::vector<int> in_shape_;
};

// ---------------------------------------------------------------------------

/// Ordered layer stack with value semantics (copies are deep).
class Sequential {
 public:
  Sequential() = default;
  Sequential(const Sequential& other) {
    for (const auto& l : other.layers_) layers_.push_back(l->clone());
  }
  Sequential& operator=(const Sequential& other) {
    if (this != &other) {
      Sequential tmp(other);
      layers_ = std::move(tmp.layers_);
    }
    return *this;
  }
  Sequential(Sequential&&) noexcept = default;
  Sequential& operator=(Sequential&&) noexcept = default;

  template <typename L, typename... Args>
  L& add(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }

  std::size_t size() const { return layers_.size(); }
  bool empty() const { return layers_.empty(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }

  std::vector<int> output_shape(std::vector<int> in) const {
    for (const auto& l : layers_) in = l->output_shape(in);
    return in;
  }

  Tensor forward(Tensor x, bool keep) {
    for (auto& l : layers_) x = l->forward(x, keep);
    return x;
  }

  /// Backpropagates through the stack. Layers below the lowest one holding a
  /// trainable parameter are skipped unless `need_input_grad` is set.
  Tensor backward(Tensor dy, bool need_input_grad) {
    std::size_t stop = layers_.size();
    for (std::size_t i = 0; i < layers_.size(); ++i)
      if (layers_[i]->has_trainable()) {
        stop = i;
        break;
      }
    if (need_input_grad) stop = 0;
    if (stop == layers_.size()) return {};
    for (std::size_t i = layers_.size(); i-- > stop;) {
      const bool need_dx = i > stop || need_input_grad;
      dy = layers_[i]->backward(dy, need_dx);
    }
    return need_input_grad ? dy : Tensor{};
  }

  std::vector<Param*> params() {
    std::vector<Param*> out;
    for (auto& l : layers_)
      for (auto* p : l->params()) out.push_back(p);
    return out;
  }
  std::vector<const Param*> params() const {
    std::vector<const Param*> out;
    for (const auto& l : layers_)
      for (const auto* p : std::as_const(*l).params()) out.push_back(p);
    return out;
  }
  bool has_trainable() const {
    for (const auto* p : params())
      if (p->trainable) return true;
    return false;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto* p : params()) n += p->value.size();
    return n;
  }

  void initialize(std::uint64_t seed) {
    for (auto* p : params()) nn::initialize(*p, seed);
  }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

// ---------------------------------------------------------------------------

struct LossResult {
  double loss = 0.0;
  Tensor grad;  // d(mean loss)/d(logits)
};

/// Softmax cross-entropy averaged over the batch. `class_weights` (optional,
/// size = classes) scales each sample's term by the weight of its target.
inline LossResult cross_entropy(const Tensor& logits, const std::vector<int>& targets,
                                const std::vector<double>& class_weights = {}) {
  const int n = logits.dim(0), k = logits.dim(1);
  if (static_cast<int>(targets.size()) != n) throw Error(Errc::bad_shape, "targets/logits batch mismatch");
  LossResult r;
  r.grad = Tensor(logits.shape());
  double total = 0.0;
  for (int s = 0; s < n; ++s) {
    const auto z = logits.row(s);
    double zmax = z[0];
    for (int j = 1; j < k; ++j) zmax = std::max(zmax, static_cast<double>(z[j]));
    double denom = 0.0;
    for (int j = 0; j < k; ++j) denom += std::exp(z[j] - zmax);
    const double logz = zmax + std::log(denom);
    const double wgt = class_weights.empty() ? 1.0 : class_weights.at(targets[s]);
    total += wgt * (logz - z[targets[s]]);
    auto g = r.grad.row(s);
    for (int j = 0; j < k; ++j) {
      const double p = std::exp(z[j] - logz);
      g[j] = static_cast<float>(wgt * (p - (j == targets[s] ? 1.0 : 0.0)) / n);
    }
  }
  r.loss = total / n;
  return r;
}

inline std::vector<double> softmax(std::span<const float> z) {
  double zmax = z[0];
  for (float v : z) zmax = std::max(zmax, static_cast<double>(v));
  std::vector<double> p(z.size());
  double denom = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) denom += (p[j] = std::exp(z[j] - zmax));
  for (auto& v : p) v /= denom;
  return p;
}

/// SGD with classical momentum: v <- mu * v + g; w <- w - lr * v.
/// Frozen parameters are never touched.
struct SgdMomentum {
  double learning_rate = 1e-3;
  double momentum = 0.9;

  void step(const std::vector<Param*>& params) const {
    for (auto* p : params) {
      if (!p->trainable || p->grad.empty()) continue;
      if (p->velocity.shape() != p->value.shape()) p->velocity = Tensor(p->value.shape());
      auto& v = p->velocity.values();
      auto& w = p->value.values();
      const auto& g = p->grad.values();
      const auto mu = static_cast<float>(momentum);
      const auto lr = static_cast<float>(learning_rate);
      for (std::size_t i = 0; i < w.size(); ++i) {
        v[i] = mu * v[i] + g[i];
        w[i] -= lr * v[i];
      }
    }
  }
};

}  // namespace aesthetics::nn
