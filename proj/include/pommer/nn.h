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

// Small feed-forward networks with explicit backward rules.
//
// Tensors are row-major float64. Network inputs and outputs carry a leading
// batch dimension; layer shapes below are per sample.

#ifndef POMMER_NN_H_
#define POMMER_NN_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pommer {

using Shape = std::vector<int>;

std::string ShapeString(const Shape& shape);
size_t ShapeCount(const Shape& shape);

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  // Throws ShapeError if values.size() != ShapeCount(shape).
  Tensor(Shape shape, std::vector<double> values);

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int axis) const { return shape_[axis]; }
  size_t size() const { return values_.size(); }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  double& operator[](size_t i) { return values_[i]; }
  double operator[](size_t i) const { return values_[i]; }

  void Fill(double value);
  // Same values, new shape with the same element count.
  Tensor Reshaped(Shape shape) const;

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> values_;
};

enum class LayerKind : int {
  kConv2D = 0,
  kDense = 1,
  kReLU = 2,
  kFlatten = 3,
  kSoftmax = 4,
  kRecenter = 5,
};

struct LayerSpec {
  LayerKind kind = LayerKind::kReLU;
  int units = 0;    // Dense
  int filters = 0;  // Conv2D
  int kernel = 0;
  int stride = 1;
  int padding = 0;
  int anchor = 0;   // Recenter; `kernel` holds the window size

  static LayerSpec Conv2D(int filters, int kernel, int stride = 1,
                          int padding = 0);
  static LayerSpec Dense(int units);
  static LayerSpec ReLU() { return {LayerKind::kReLU}; }
  static LayerSpec Flatten() { return {LayerKind::kFlatten}; }
  static LayerSpec Softmax() { return {LayerKind::kSoftmax}; }
  // [C, H, W] -> [C + 1, window, window] cut around the argmax cell of
  // channel `anchor` (lowest index on ties). Cells off the input read 0; the
  // extra channel is 1 on cells that lie on the input.
  static LayerSpec Recenter(int anchor, int window);

  std::string ToString() const;
  bool operator==(const LayerSpec&) const = default;
};

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

class Layer {
 public:
  virtual ~Layer() = default;

  const LayerSpec& spec() const { return spec_; }
  const Shape& input_shape() const { return input_shape_; }
  const Shape& output_shape() const { return output_shape_; }

  // x: [batch, input_shape...] -> [batch, output_shape...]
  virtual Tensor Forward(const Tensor& x) const = 0;
  // Given the input and output of Forward and dL/dy, returns dL/dx and adds
  // dL/dparam into the parameter gradients.
  virtual Tensor Backward(const Tensor& x, const Tensor& y, const Tensor& dy) = 0;
  virtual std::vector<Parameter*> Params() { return {}; }
  virtual std::unique_ptr<Layer> Clone() const = 0;

 protected:
  Layer(LayerSpec spec, Shape input_shape, Shape output_shape)
      : spec_(spec),
        input_shape_(std::move(input_shape)),
        output_shape_(std::move(output_shape)) {}

 private:
  LayerSpec spec_;
  Shape input_shape_;
  Shape output_shape_;
};

class Network {
 public:
  Network() = default;
  // Validates the whole stack; throws ShapeError on any incompatibility.
  // Weights use He-uniform initialization from `seed`, biases start at 0.
  Network(Shape input_shape, std::vector<LayerSpec> specs, uint64_t seed = 0);

  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  const Shape& input_shape() const { return input_shape_; }
  const Shape& output_shape() const;
  const std::vector<LayerSpec>& specs() const { return specs_; }
  int num_layers() const { return static_cast<int>(layers_.size()); }
  Layer& layer(int i) { return *layers_[i]; }

  // Caches activations for Backward().
  Tensor Forward(const Tensor& x);
  // Same result as Forward() without touching the cache; safe to call from
  // several threads on a network nobody is training.
  Tensor Predict(const Tensor& x) const;
  // Accumulates parameter gradients and returns dL/dx. Throws ShapeError
  // if no forward pass is cached or dy has the wrong shape.
  Tensor Backward(const Tensor& dy);

  void ZeroGrad();
  std::vector<Parameter*> Params();
  std::vector<const Parameter*> Params() const;
  size_t ParameterCount() const;
  // Copies parameter values from a network with identical architecture.
  void CopyParametersFrom(const Network& other);
  std::vector<double> FlatParameters() const;
  void SetFlatParameters(std::span<const double> values);

 private:
  void CheckInput(const Tensor& x) const;

  Shape input_shape_;
  std::vector<LayerSpec> specs_;
  std::vector<std::unique_ptr<Layer>> layers_;
  // activations_[i] is the input of layer i; the last entry is the output.
  std::vector<Tensor> activations_;
};

// Loss value and dLoss/dInput, averaged over the batch.
struct LossResult {
  double value = 0.0;
  Tensor grad;
};

// Softmax cross-entropy on raw logits [batch, classes]. Throws
// std::out_of_range for labels outside [0, classes).
LossResult CrossEntropyLoss(const Tensor& logits, std::span<const int> labels);

// Elementwise Huber, averaged over all elements.
LossResult HuberLoss(const Tensor& pred, const Tensor& target, double delta = 1.0);
double Huber(double diff, double delta = 1.0);
double HuberGrad(double diff, double delta = 1.0);

enum class OptimizerKind { kSgd, kAdam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config = {}) : config_(config) {}

  // Applies one update from the current gradients. Adam uses the
  // bias-corrected moments.
  void Step(Network& net);

  const OptimizerConfig& config() const { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }
  int64_t steps() const { return steps_; }

 private:
  OptimizerConfig config_;
  int64_t steps_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

// Compares backprop against central differences of L = sum(w * net(x)),
// covering every parameter and every input element.
struct GradientCheckResult {
  double max_relative_error = 0.0;
  size_t checked = 0;
};
GradientCheckResult CheckGradients(Network& net, const Tensor& x,
                                   const Tensor& w, double h = 1e-5);
// |a - b| / max(|a|, |b|, floor)
double RelativeError(double a, double b, double floor = 1e-8);

// Versioned little-endian checkpoint. Save throws FileError; Load throws
// FileError or CorruptFile.
void SaveNetwork(const Network& net, const std::string& path);
Network LoadNetwork(const std::string& path);

}  // namespace pommer

#endif  // POMMER_NN_H_
