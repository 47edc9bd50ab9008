#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "kta/nn/tensor.hpp"

namespace kta::nn {

enum class Mode { train, eval };

// Layers reference slices of the model's flat parameter vector by offset, so
// the whole model state that federation exchanges is one contiguous vector.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t weight_offset = 0;  // out x in, row-major
  std::size_t bias_offset = 0;    // out

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct ReluLayer {
  std::size_t width = 0;

  friend bool operator==(const ReluLayer&, const ReluLayer&) = default;
};

struct BatchNormLayer {
  std::size_t width = 0;
  std::size_t gamma_offset = 0;
  std::size_t beta_offset = 0;
  double momentum = 0.1;
  double eps = 1e-5;
  // Buffers, not parameters: never averaged or metered.
  std::vector<double> running_mean;
  std::vector<double> running_var;

  friend bool operator==(const BatchNormLayer&, const BatchNormLayer&) = default;
};

using Layer = std::variant<DenseLayer, ReluLayer, BatchNormLayer>;

// Hidden blocks are Dense -> [BatchNorm] -> ReLU; the head is a Dense layer
// of width `classes`.
struct ModelSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden;
  std::size_t classes = 0;
  bool batchnorm = false;
};

class MlpModel {
 public:
  explicit MlpModel(std::size_t input_dim);

  // Builds the layer stack for `spec` with He-normal dense weights, zero
  // biases, and identity BatchNorm affine parameters.
  static MlpModel build(const ModelSpec& spec, std::uint64_t seed);

  MlpModel& add_dense(std::size_t out);
  MlpModel& add_relu();
  MlpModel& add_batchnorm(double momentum = 0.1, double eps = 1e-5);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t class_count() const { return width_; }
  std::size_t parameter_count() const { return params_.size(); }
  bool has_batchnorm() const;

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  void set_parameters(std::span<const double> values);

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  friend bool operator==(const MlpModel&, const MlpModel&) = default;

 private:
  std::size_t input_dim_;
  std::size_t width_;
  std::vector<Layer> layers_;
  std::vector<double> params_;
};

// Per-layer activations retained by a train-mode forward for backward().
struct ForwardCache {
  std::vector<Tensor2> inputs;
  std::vector<Tensor2> normalized;  // BatchNorm x_hat, empty for other layers
  std::vector<std::vector<double>> inv_std;
};

// Train mode updates BatchNorm running statistics and requires batch.rows()
// >= 2 whenever the model has a BatchNorm layer; callers apply the
// batch-size skip rule before getting here. Eval mode delegates to infer().
Tensor2 forward(MlpModel& model, const Tensor2& batch, Mode mode, ForwardCache* cache = nullptr);

// Eval-mode forward: BatchNorm uses running statistics, nothing is mutated.
Tensor2 infer(const MlpModel& model, const Tensor2& batch);

// Gradient of the loss w.r.t. the flat parameter vector, given dL/dlogits for
// the batch that produced `cache`.
std::vector<double> backward(const MlpModel& model, const ForwardCache& cache,
                             const Tensor2& grad_logits);

}  // namespace kta::nn
