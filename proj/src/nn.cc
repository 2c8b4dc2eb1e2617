// Copyright 2026 The Pommer Authors.
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

#include "pommer/nn.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gemm.h"
#include "pommer/errors.h"
#include "pommer/rng.h"

namespace pommer {

using internal::GemmAccumulate;
using internal::Transpose;

std::string ShapeString(const Shape& shape) {
  std::ostringstream out;
  out << "[";
  for (size_t i = 0; i < shape.size(); ++i) out << (i ? ", " : "") << shape[i];
  out << "]";
  return out.str();
}

size_t ShapeCount(const Shape& shape) {
  size_t n = 1;
  for (int d : shape) n *= static_cast<size_t>(d);
  return n;
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), values_(ShapeCount(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != ShapeCount(shape_)) {
    throw ShapeError("tensor of shape " + ShapeString(shape_) + " given " +
                     std::to_string(values_.size()) + " values");
  }
}

void Tensor::Fill(double value) { std::fill(values_.begin(), values_.end(), value); }

Tensor Tensor::Reshaped(Shape shape) const {
  if (ShapeCount(shape) != values_.size()) {
    throw ShapeError("cannot reshape " + ShapeString(shape_) + " to " +
                     ShapeString(shape));
  }
  return Tensor(std::move(shape), values_);
}

LayerSpec LayerSpec::Conv2D(int filters, int kernel, int stride, int padding) {
  LayerSpec s;
  s.kind = LayerKind::kConv2D;
  s.filters = filters;
  s.kernel = kernel;
  s.stride = stride;
  s.padding = padding;
  return s;
}

LayerSpec LayerSpec::Dense(int units) {
  LayerSpec s;
  s.kind = LayerKind::kDense;
  s.units = units;
  return s;
}

LayerSpec LayerSpec::Recenter(int anchor, int window) {
  LayerSpec s;
  s.kind = LayerKind::kRecenter;
  s.anchor = anchor;
  s.kernel = window;
  return s;
}

std::string LayerSpec::ToString() const {
  switch (kind) {
    case LayerKind::kConv2D:
      return "Conv2D(" + std::to_string(filters) + ", " + std::to_string(kernel) +
             "x" + std::to_string(kernel) + ", stride " + std::to_string(stride) +
             ", pad " + std::to_string(padding) + ")";
    case LayerKind::kDense:
      return "Dense(" + std::to_string(units) + ")";
    case LayerKind::kReLU:
      return "ReLU";
    case LayerKind::kFlatten:
      return "Flatten";
    case LayerKind::kSoftmax:
      return "Softmax";
    case LayerKind::kRecenter:
      return "Recenter(anchor " + std::to_string(anchor) + ", " + std::to_string(kernel) +
             "x" + std::to_string(kernel) + ")";
  }
  return "?";
}

namespace {

Shape Batched(int batch, const Shape& shape) {
  Shape out{batch};
  out.insert(out.end(), shape.begin(), shape.end());
  return out;
}

void HeUniform(Tensor& t, int fan_in, Rng& rng) {
  const double limit = std::sqrt(6.0 / fan_in);
  for (double& v : t.values()) v = rng.Uniform(-limit, limit);
}

class Conv2DLayer : public Layer {
 public:
  Conv2DLayer(const LayerSpec& spec, const Shape& in, Rng* rng, int index)
      : Layer(spec, in, OutShape(spec, in)) {
    c_ = in[0];
    h_ = in[1];
    w_ = in[2];
    const Shape& out = output_shape();
    ho_ = out[1];
    wo_ = out[2];
    ckk_ = c_ * spec.kernel * spec.kernel;
    const std::string prefix = "layer" + std::to_string(index) + ".conv.";
    weight_ = {prefix + "weight", Tensor({spec.filters, c_, spec.kernel, spec.kernel}),
               Tensor({spec.filters, c_, spec.kernel, spec.kernel})};
    bias_ = {prefix + "bias", Tensor({spec.filters}), Tensor({spec.filters})};
    if (rng) HeUniform(weight_.value, ckk_, *rng);
  }

  static Shape OutShape(const LayerSpec& s, const Shape& in) {
    if (in.size() != 3) {
      throw ShapeError(s.ToString() + " needs a [channels, height, width] input, got " +
                       ShapeString(in));
    }
    if (s.filters <= 0 || s.kernel <= 0 || s.stride <= 0 || s.padding < 0) {
      throw ShapeError("invalid " + s.ToString());
    }
    const int ho = (in[1] + 2 * s.padding - s.kernel) / s.stride + 1;
    const int wo = (in[2] + 2 * s.padding - s.kernel) / s.stride + 1;
    if (in[1] + 2 * s.padding < s.kernel || in[2] + 2 * s.padding < s.kernel) {
      throw ShapeError(s.ToString() + " does not fit input " + ShapeString(in));
    }
    return {s.filters, ho, wo};
  }

  Tensor Forward(const Tensor& x) const override {
    const int batch = x.dim(0);
    const int f = spec().filters;
    const int p = ho_ * wo_;
    Tensor y(Batched(batch, output_shape()));
    std::vector<double> cols(static_cast<size_t>(ckk_) * p);
    for (int b = 0; b < batch; ++b) {
      Im2Col(x.data() + static_cast<size_t>(b) * c_ * h_ * w_, cols.data());
      double* yb = y.data() + static_cast<size_t>(b) * f * p;
      for (int o = 0; o < f; ++o) std::fill(yb + o * p, yb + (o + 1) * p, bias_.value[o]);
      GemmAccumulate(f, p, ckk_, weight_.value.data(), cols.data(), yb);
    }
    return y;
  }

  Tensor Backward(const Tensor& x, const Tensor&, const Tensor& dy) override {
    const int batch = x.dim(0);
    const int f = spec().filters;
    const int p = ho_ * wo_;
    Tensor dx(x.shape());
    std::vector<double> cols(static_cast<size_t>(ckk_) * p);
    std::vector<double> cols_t(cols.size());
    std::vector<double> dcols(cols.size());
    std::vector<double> w_t(static_cast<size_t>(ckk_) * f);
    Transpose(f, ckk_, weight_.value.data(), w_t.data());
    for (int b = 0; b < batch; ++b) {
      const double* dyb = dy.data() + static_cast<size_t>(b) * f * p;
      for (int o = 0; o < f; ++o) {
        double sum = 0.0;
        for (int i = 0; i < p; ++i) sum += dyb[o * p + i];
        bias_.grad[o] += sum;
      }
      Im2Col(x.data() + static_cast<size_t>(b) * c_ * h_ * w_, cols.data());
      Transpose(ckk_, p, cols.data(), cols_t.data());
      GemmAccumulate(f, ckk_, p, dyb, cols_t.data(), weight_.grad.data());
      std::fill(dcols.begin(), dcols.end(), 0.0);
      GemmAccumulate(ckk_, p, f, w_t.data(), dyb, dcols.data());
      Col2Im(dcols.data(), dx.data() + static_cast<size_t>(b) * c_ * h_ * w_);
    }
    return dx;
  }

  std::vector<Parameter*> Params() override { return {&weight_, &bias_}; }
  std::unique_ptr<Layer> Clone() const override {
    return std::make_unique<Conv2DLayer>(*this);
  }

 private:
  template <typename Visit>
  void ForEachPatch(Visit visit) const {
    const int k = spec().kernel, s = spec().stride, pad = spec().padding;
    for (int c = 0; c < c_; ++c) {
      for (int ki = 0; ki < k; ++ki) {
        for (int kj = 0; kj < k; ++kj) {
          const int row = (c * k + ki) * k + kj;
          for (int oh = 0; oh < ho_; ++oh) {
            const int ih = oh * s - pad + ki;
            for (int ow = 0; ow < wo_; ++ow) {
              const int iw = ow * s - pad + kj;
              const bool inside = ih >= 0 && ih < h_ && iw >= 0 && iw < w_;
              visit(static_cast<size_t>(row) * ho_ * wo_ + oh * wo_ + ow,
                    inside ? (c * h_ + ih) * w_ + iw : -1);
            }
          }
        }
      }
    }
  }

  void Im2Col(const double* x, double* cols) const {
    ForEachPatch([&](size_t col, int src) { cols[col] = src >= 0 ? x[src] : 0.0; });
  }

  void Col2Im(const double* cols, double* dx) const {
    ForEachPatch([&](size_t col, int src) {
      if (src >= 0) dx[src] += cols[col];
    });
  }

  int c_ = 0, h_ = 0, w_ = 0, ho_ = 0, wo_ = 0, ckk_ = 0;
  Parameter weight_;
  Parameter bias_;
};

class DenseLayer : public Layer {
 public:
  DenseLayer(const LayerSpec& spec, const Shape& in, Rng* rng, int index)
      : Layer(spec, in, OutShape(spec, in)) {
    d_ = in[0];
    const std::string prefix = "layer" + std::to_string(index) + ".dense.";
    weight_ = {prefix + "weight", Tensor({d_, spec.units}), Tensor({d_, spec.units})};
    bias_ = {prefix + "bias", Tensor({spec.units}), Tensor({spec.units})};
    if (rng) HeUniform(weight_.value, d_, *rng);
  }

  static Shape OutShape(const LayerSpec& s, const Shape& in) {
    if (in.size() != 1) {
      throw ShapeError(s.ToString() + " needs a flat input, got " + ShapeString(in));
    }
    if (s.units <= 0) throw ShapeError("invalid " + s.ToString());
    return {s.units};
  }

  Tensor Forward(const Tensor& x) const override {
    const int batch = x.dim(0);
    const int u = spec().units;
    Tensor y({batch, u});
    for (int b = 0; b < batch; ++b) {
      std::copy(bias_.value.data(), bias_.value.data() + u, y.data() + b * u);
    }
    GemmAccumulate(batch, u, d_, x.data(), weight_.value.data(), y.data());
    return y;
  }

  Tensor Backward(const Tensor& x, const Tensor&, const Tensor& dy) override {
    const int batch = x.dim(0);
    const int u = spec().units;
    for (int b = 0; b < batch; ++b) {
      for (int j = 0; j < u; ++j) bias_.grad[j] += dy[b * u + j];
    }
    std::vector<double> x_t(static_cast<size_t>(d_) * batch);
    Transpose(batch, d_, x.data(), x_t.data());
    GemmAccumulate(d_, u, batch, x_t.data(), dy.data(), weight_.grad.data());
    std::vector<double> w_t(static_cast<size_t>(u) * d_);
    Transpose(d_, u, weight_.value.data(), w_t.data());
    Tensor dx(x.shape());
    GemmAccumulate(batch, d_, u, dy.data(), w_t.data(), dx.data());
    return dx;
  }

  std::vector<Parameter*> Params() override { return {&weight_, &bias_}; }
  std::unique_ptr<Layer> Clone() const override {
    return std::make_unique<DenseLayer>(*this);
  }

 private:
  int d_ = 0;
  Parameter weight_;
  Parameter bias_;
};

class ReLULayer : public Layer {
 public:
  ReLULayer(const LayerSpec& spec, const Shape& in) : Layer(spec, in, in) {}

  Tensor Forward(const Tensor& x) const override {
    Tensor y = x;
    for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
    return y;
  }

  Tensor Backward(const Tensor& x, const Tensor&, const Tensor& dy) override {
    Tensor dx = dy;
    for (size_t i = 0; i < dx.size(); ++i) {
      if (!(x[i] > 0.0)) dx[i] = 0.0;
    }
    return dx;
  }

  std::unique_ptr<Layer> Clone() const override {
    return std::make_unique<ReLULayer>(*this);
  }
};

class FlattenLayer : public Layer {
 public:
  FlattenLayer(const LayerSpec& spec, const Shape& in)
      : Layer(spec, in, {static_cast<int>(ShapeCount(in))}) {}

  Tensor Forward(const Tensor& x) const override {
    return x.Reshaped(Batched(x.dim(0), output_shape()));
  }

  Tensor Backward(const Tensor& x, const Tensor&, const Tensor& dy) override {
    return dy.Reshaped(x.shape());
  }

  std::unique_ptr<Layer> Clone() const override {
    return std::make_unique<FlattenLayer>(*this);
  }
};

class SoftmaxLayer : public Layer {
 public:
  SoftmaxLayer(const LayerSpec& spec, const Shape& in) : Layer(spec, in, in) {
    if (in.size() != 1) {
      throw ShapeError("Softmax needs a flat input, got " + ShapeString(in));
    }
  }

  Tensor Forward(const Tensor& x) const override {
    Tensor y = x;
    const int k = input_shape()[0];
    for (int b = 0; b < x.dim(0); ++b) {
      double* row = y.data() + b * k;
      const double mx = *std::max_element(row, row + k);
      double sum = 0.0;
      for (int i = 0; i < k; ++i) sum += (row[i] = std::exp(row[i] - mx));
      for (int i = 0; i < k; ++i) row[i] /= sum;
    }
    return y;
  }

  Tensor Backward(const Tensor&, const Tensor& y, const Tensor& dy) override {
    Tensor dx(y.shape());
    const int k = input_shape()[0];
    for (int b = 0; b < y.dim(0); ++b) {
      const double* yr = y.data() + b * k;
      const double* gr = dy.data() + b * k;
      double dot = 0.0;
      for (int i = 0; i < k; ++i) dot += yr[i] * gr[i];
      for (int i = 0; i < k; ++i) dx[b * k + i] = yr[i] * (gr[i] - dot);
    }
    return dx;
  }

  std::unique_ptr<Layer> Clone() const override {
    return std::make_unique<SoftmaxLayer>(*this);
  }
};

class RecenterLayer : public Layer {
 public:
  RecenterLayer(const LayerSpec& spec, const Shape& in)
      : Layer(spec, in, OutputShape(spec, in)) {}

  Tensor Forward(const Tensor& x) const override {
    Tensor y(Batched(x.dim(0), output_shape()));
    Walk(
        x, [&](size_t from, size_t to) { y[to] = x[from]; },
        [&](size_t to) { y[to] = 1.0; });
    return y;
  }

  Tensor Backward(const Tensor& x, const Tensor&, const Tensor& dy) override {
    Tensor dx(x.shape());
    Walk(
        x, [&](size_t from, size_t to) { dx[from] += dy[to]; }, [](size_t) {});
    return dx;
  }

  std::unique_ptr<Layer> Clone() const override {
    return std::make_unique<RecenterLayer>(*this);
  }

 private:
  static Shape OutputShape(const LayerSpec& s, const Shape& in) {
    if (in.size() != 3) {
      throw ShapeError(s.ToString() + " needs a [channels, height, width] input, got " +
                       ShapeString(in));
    }
    if (s.kernel < 1 || s.kernel % 2 == 0 || s.anchor < 0 || s.anchor >= in[0]) {
      throw ShapeError("invalid " + s.ToString() + " for input " + ShapeString(in));
    }
    return {in[0] + 1, s.kernel, s.kernel};
  }

  // Visits every output cell that lies on the input: cell(from, to) per
  // data channel, mask(to) for the extra channel.
  template <typename Cell, typename Mask>
  void Walk(const Tensor& x, Cell cell, Mask mask) const {
    const int channels = input_shape()[0];
    const int h = input_shape()[1];
    const int w = input_shape()[2];
    const int k = spec().kernel;
    const size_t plane = static_cast<size_t>(h) * w;
    const size_t window = static_cast<size_t>(k) * k;
    for (int b = 0; b < x.dim(0); ++b) {
      const size_t in_base = static_cast<size_t>(b) * channels * plane;
      const size_t out_base = static_cast<size_t>(b) * (channels + 1) * window;
      const double* anchor = x.data() + in_base + spec().anchor * plane;
      const int at = static_cast<int>(std::max_element(anchor, anchor + plane) - anchor);
      const int r0 = at / w - k / 2;
      const int c0 = at % w - k / 2;
      for (int i = 0; i < k; ++i) {
        const int r = r0 + i;
        if (r < 0 || r >= h) continue;
        for (int j = 0; j < k; ++j) {
          const int c = c0 + j;
          if (c < 0 || c >= w) continue;
          const size_t src = in_base + static_cast<size_t>(r) * w + c;
          const size_t dst = out_base + static_cast<size_t>(i) * k + j;
          for (int ch = 0; ch < channels; ++ch) cell(src + ch * plane, dst + ch * window);
          mask(dst + channels * window);
        }
      }
    }
  }
};

std::unique_ptr<Layer> MakeLayer(const LayerSpec& spec, const Shape& in, Rng* rng,
                                 int index) {
  switch (spec.kind) {
    case LayerKind::kConv2D:
      return std::make_unique<Conv2DLayer>(spec, in, rng, index);
    case LayerKind::kDense:
      return std::make_unique<DenseLayer>(spec, in, rng, index);
    case LayerKind::kReLU:
      return std::make_unique<ReLULayer>(spec, in);
    case LayerKind::kFlatten:
      return std::make_unique<FlattenLayer>(spec, in);
    case LayerKind::kSoftmax:
      return std::make_unique<SoftmaxLayer>(spec, in);
    case LayerKind::kRecenter:
      return std::make_unique<RecenterLayer>(spec, in);
  }
  throw ShapeError("unknown layer kind " + std::to_string(static_cast<int>(spec.kind)));
}

}  // namespace

Network::Network(Shape input_shape, std::vector<LayerSpec> specs, uint64_t seed)
    : input_shape_(std::move(input_shape)), specs_(std::move(specs)) {
  if (input_shape_.empty()) throw ShapeError("network input shape is empty");
  for (int d : input_shape_) {
    if (d <= 0) throw ShapeError("network input shape " + ShapeString(input_shape_));
  }
  if (specs_.empty()) throw ShapeError("network has no layers");
  Shape shape = input_shape_;
  for (size_t i = 0; i < specs_.size(); ++i) {
    Rng rng(MixSeed(seed, i));
    try {
      layers_.push_back(MakeLayer(specs_[i], shape, &rng, static_cast<int>(i)));
    } catch (const ShapeError& e) {
      throw ShapeError("layer " + std::to_string(i) + ": " + e.what());
    }
    shape = layers_.back()->output_shape();
  }
}

Network::Network(const Network& other)
    : input_shape_(other.input_shape_), specs_(other.specs_) {
  for (const auto& l : other.layers_) layers_.push_back(l->Clone());
}

Network& Network::operator=(const Network& other) {
  if (this != &other) {
    Network copy(other);
    *this = std::move(copy);
  }
  return *this;
}

const Shape& Network::output_shape() const {
  if (layers_.empty()) throw ShapeError("empty network has no output");
  return layers_.back()->output_shape();
}

void Network::CheckInput(const Tensor& x) const {
  if (layers_.empty()) throw ShapeError("empty network");
  if (x.rank() != static_cast<int>(input_shape_.size()) + 1 || x.dim(0) <= 0 ||
      !std::equal(input_shape_.begin(), input_shape_.end(), x.shape().begin() + 1)) {
    throw ShapeError("network expects [batch] + " + ShapeString(input_shape_) +
                     ", got " + ShapeString(x.shape()));
  }
}

Tensor Network::Forward(const Tensor& x) {
  CheckInput(x);
  activations_.clear();
  activations_.push_back(x);
  for (const auto& l : layers_) activations_.push_back(l->Forward(activations_.back()));
  return activations_.back();
}

Tensor Network::Predict(const Tensor& x) const {
  CheckInput(x);
  Tensor a = x;
  for (const auto& l : layers_) a = l->Forward(a);
  return a;
}

Tensor Network::Backward(const Tensor& dy) {
  if (activations_.size() != layers_.size() + 1) {
    throw ShapeError("backward called before forward");
  }
  if (dy.shape() != activations_.back().shape()) {
    throw ShapeError("loss gradient shape " + ShapeString(dy.shape()) +
                     " does not match output " +
                     ShapeString(activations_.back().shape()));
  }
  Tensor grad = dy;
  for (int i = num_layers() - 1; i >= 0; --i) {
    grad = layers_[i]->Backward(activations_[i], activations_[i + 1], grad);
  }
  return grad;
}

void Network::ZeroGrad() {
  for (Parameter* p : Params()) p->grad.Fill(0.0);
}

std::vector<Parameter*> Network::Params() {
  std::vector<Parameter*> out;
  for (auto& l : layers_) {
    for (Parameter* p : l->Params()) out.push_back(p);
  }
  return out;
}

std::vector<const Parameter*> Network::Params() const {
  std::vector<const Parameter*> out;
  for (const auto& l : layers_) {
    for (Parameter* p : l->Params()) out.push_back(p);
  }
  return out;
}

size_t Network::ParameterCount() const {
  size_t n = 0;
  for (const Parameter* p : Params()) n += p->value.size();
  return n;
}

void Network::CopyParametersFrom(const Network& other) {
  if (other.input_shape_ != input_shape_ || other.specs_ != specs_) {
    throw ShapeError("cannot copy parameters between different architectures");
  }
  auto dst = Params();
  auto src = other.Params();
  for (size_t i = 0; i < dst.size(); ++i) dst[i]->value = src[i]->value;
}

std::vector<double> Network::FlatParameters() const {
  std::vector<double> flat;
  flat.reserve(ParameterCount());
  for (const Parameter* p : Params()) {
    flat.insert(flat.end(), p->value.values().begin(), p->value.values().end());
  }
  return flat;
}

void Network::SetFlatParameters(std::span<const double> values) {
  if (values.size() != ParameterCount()) {
    throw ShapeError("expected " + std::to_string(ParameterCount()) +
                     " parameters, got " + std::to_string(values.size()));
  }
  size_t offset = 0;
  for (Parameter* p : Params()) {
    std::copy(values.begin() + offset, values.begin() + offset + p->value.size(),
              p->value.values().begin());
    offset += p->value.size();
  }
}

LossResult CrossEntropyLoss(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2 || static_cast<int>(labels.size()) != logits.dim(0)) {
    throw ShapeError("cross-entropy wants [batch, classes] logits and one label "
                     "per row, got " + ShapeString(logits.shape()) + " and " +
                     std::to_string(labels.size()) + " labels");
  }
  const int batch = logits.dim(0), k = logits.dim(1);
  LossResult r{0.0, Tensor(logits.shape())};
  for (int b = 0; b < batch; ++b) {
    const int label = labels[b];
    if (label < 0 || label >= k) {
      throw std::out_of_range("label " + std::to_string(label) + " outside [0, " +
                              std::to_string(k) + ")");
    }
    const double* z = logits.data() + b * k;
    const double mx = *std::max_element(z, z + k);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) sum += std::exp(z[i] - mx);
    const double lse = mx + std::log(sum);
    r.value += lse - z[label];
    for (int i = 0; i < k; ++i) {
      r.grad[b * k + i] = (std::exp(z[i] - lse) - (i == label ? 1.0 : 0.0)) / batch;
    }
  }
  r.value /= batch;
  return r;
}

double Huber(double diff, double delta) {
  const double a = std::abs(diff);
  return a <= delta ? 0.5 * diff * diff : delta * (a - 0.5 * delta);
}

double HuberGrad(double diff, double delta) {
  return std::clamp(diff, -delta, delta);
}

LossResult HuberLoss(const Tensor& pred, const Tensor& target, double delta) {
  if (pred.shape() != target.shape()) {
    throw ShapeError("Huber shapes differ: " + ShapeString(pred.shape()) + " vs " +
                     ShapeString(target.shape()));
  }
  LossResult r{0.0, Tensor(pred.shape())};
  const double n = static_cast<double>(pred.size());
  for (size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    r.value += Huber(d, delta);
    r.grad[i] = HuberGrad(d, delta) / n;
  }
  r.value /= n;
  return r;
}

void Optimizer::Step(Network& net) {
  std::vector<Parameter*> params = net.Params();
  if (m_.empty()) {
    for (Parameter* p : params) {
      m_.emplace_back(p->value.size(), 0.0);
      v_.emplace_back(p->value.size(), 0.0);
    }
  }
  if (m_.size() != params.size()) {
    throw ShapeError("optimizer state belongs to a different network");
  }
  ++steps_;
  const double lr = config_.learning_rate;
  if (config_.kind == OptimizerKind::kSgd) {
    for (Parameter* p : params) {
      for (size_t i = 0; i < p->value.size(); ++i) p->value[i] -= lr * p->grad[i];
    }
    return;
  }
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (size_t k = 0; k < params.size(); ++k) {
    Parameter* p = params[k];
    if (m_[k].size() != p->value.size()) {
      throw ShapeError("optimizer moment shape does not match " + p->name);
    }
    double* m = m_[k].data();
    double* v = v_[k].data();
    for (size_t i = 0; i < p->value.size(); ++i) {
      const double g = p->grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      p->value[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.epsilon);
    }
  }
}

double RelativeError(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

GradientCheckResult CheckGradients(Network& net, const Tensor& x, const Tensor& w,
                                   double h) {
  net.ZeroGrad();
  const Tensor y = net.Forward(x);
  if (w.shape() != y.shape()) {
    throw ShapeError("gradient-check weights " + ShapeString(w.shape()) +
                     " do not match output " + ShapeString(y.shape()));
  }
  const Tensor dx = net.Backward(w);
  auto objective = [&](const Tensor& input) {
    const Tensor out = net.Predict(input);
    return std::inner_product(out.values().begin(), out.values().end(),
                              w.values().begin(), 0.0);
  };

  GradientCheckResult result;
  auto record = [&](double analytic, double numeric) {
    result.max_relative_error =
        std::max(result.max_relative_error, RelativeError(analytic, numeric));
    ++result.checked;
  };
  for (Parameter* p : net.Params()) {
    for (size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double plus = objective(x);
      p->value[i] = saved - h;
      const double minus = objective(x);
      p->value[i] = saved;
      record(p->grad[i], (plus - minus) / (2.0 * h));
    }
  }
  Tensor probe = x;
  for (size_t i = 0; i < probe.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double plus = objective(probe);
    probe[i] = saved - h;
    const double minus = objective(probe);
    probe[i] = saved;
    record(dx[i], (plus - minus) / (2.0 * h));
  }
  return result;
}

namespace {

constexpr char kMagic[4] = {'P', 'M', 'N', 'N'};
constexpr uint32_t kCheckpointVersion = 1;

class Writer {
 public:
  void U32(uint32_t v) { Bytes(v, 4); }
  void I32(int32_t v) { Bytes(static_cast<uint32_t>(v), 4); }
  void U64(uint64_t v) { Bytes(v, 8); }
  void F64(double v) { Bytes(std::bit_cast<uint64_t>(v), 8); }
  void Raw(const char* p, size_t n) { out_.append(p, n); }
  const std::string& str() const { return out_; }

 private:
  void Bytes(uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string out_;
};

class Reader {
 public:
  Reader(std::string data, std::string path) : data_(std::move(data)), path_(std::move(path)) {}
  uint32_t U32() { return static_cast<uint32_t>(Bytes(4)); }
  int32_t I32() { return static_cast<int32_t>(static_cast<uint32_t>(Bytes(4))); }
  uint64_t U64() { return Bytes(8); }
  double F64() { return std::bit_cast<double>(Bytes(8)); }
  void Raw(char* p, size_t n) {
    Need(n);
    std::memcpy(p, data_.data() + pos_, n);
    pos_ += n;
  }
  bool AtEnd() const { return pos_ == data_.size(); }
  size_t Remaining() const { return data_.size() - pos_; }
  [[noreturn]] void Fail(const std::string& why) const {
    throw CorruptFile(path_ + ": " + why);
  }

 private:
  void Need(size_t n) {
    if (data_.size() - pos_ < n) Fail("truncated checkpoint");
  }
  uint64_t Bytes(int n) {
    Need(n);
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += n;
    return v;
  }
  std::string data_;
  std::string path_;
  size_t pos_ = 0;
};

}  // namespace

void SaveNetwork(const Network& net, const std::string& path) {
  Writer w;
  w.Raw(kMagic, 4);
  w.U32(kCheckpointVersion);
  w.U32(static_cast<uint32_t>(net.input_shape().size()));
  for (int d : net.input_shape()) w.I32(d);
  w.U32(static_cast<uint32_t>(net.specs().size()));
  for (const LayerSpec& s : net.specs()) {
    w.U32(static_cast<uint32_t>(s.kind));
    w.I32(s.units);
    w.I32(s.filters);
    w.I32(s.kernel);
    w.I32(s.stride);
    w.I32(s.padding);
    w.I32(s.anchor);
  }
  const std::vector<double> flat = net.FlatParameters();
  w.U64(flat.size());
  for (double v : flat) w.F64(v);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError("cannot open " + path + " for writing");
  out.write(w.str().data(), static_cast<std::streamsize>(w.str().size()));
  if (!out) throw FileError("failed writing " + path);
}

Network LoadNetwork(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  Reader r(buf.str(), path);

  char magic[4];
  r.Raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) r.Fail("not a network checkpoint");
  const uint32_t version = r.U32();
  if (version != kCheckpointVersion) {
    r.Fail("unsupported checkpoint version " + std::to_string(version));
  }
  const uint32_t rank = r.U32();
  if (rank == 0 || rank > 8) r.Fail("bad input rank");
  Shape input(rank);
  for (int& d : input) d = r.I32();
  const uint32_t num_layers = r.U32();
  if (num_layers == 0 || num_layers > 1024) r.Fail("bad layer count");
  std::vector<LayerSpec> specs(num_layers);
  for (LayerSpec& s : specs) {
    const uint32_t kind = r.U32();
    if (kind > static_cast<uint32_t>(LayerKind::kRecenter)) r.Fail("unknown layer kind");
    s.kind = static_cast<LayerKind>(kind);
    s.units = r.I32();
    s.filters = r.I32();
    s.kernel = r.I32();
    s.stride = r.I32();
    s.padding = r.I32();
    s.anchor = r.I32();
  }
  Network net;
  try {
    net = Network(input, specs);
  } catch (const ShapeError& e) {
    r.Fail(std::string("inconsistent layer spec: ") + e.what());
  }
  const uint64_t count = r.U64();
  if (count != net.ParameterCount()) {
    r.Fail("parameter count " + std::to_string(count) + " does not match architecture (" +
           std::to_string(net.ParameterCount()) + ")");
  }
  if (r.Remaining() != count * 8) r.Fail("payload size mismatch");
  std::vector<double> flat(count);
  for (double& v : flat) v = r.F64();
  net.SetFlatParameters(flat);
  return net;
}

}  // namespace pommer
