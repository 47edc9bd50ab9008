#include "kta/nn/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kta/common/error.hpp"
#include "kta/common/rng.hpp"
#include "kta/nn/kernels.hpp"

namespace kta::nn {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::span<const double> slice(std::span<const double> all, std::size_t offset, std::size_t n) {
  return all.subspan(offset, n);
}

Tensor2 dense_forward(const DenseLayer& d, std::span<const double> params, const Tensor2& x) {
  Tensor2 y(x.rows(), d.out);
  kernels::gemm_nt(x.values(), slice(params, d.weight_offset, d.in * d.out),
                   slice(params, d.bias_offset, d.out), y.values(), x.rows(), d.out, d.in);
  return y;
}

Tensor2 relu_forward(const Tensor2& x) {
  Tensor2 y = x;
  for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor2 batchnorm_eval(const BatchNormLayer& bn, std::span<const double> params, const Tensor2& x) {
  Tensor2 y(x.rows(), x.cols());
  const auto gamma = slice(params, bn.gamma_offset, bn.width);
  const auto beta = slice(params, bn.beta_offset, bn.width);
  for (std::size_t j = 0; j < bn.width; ++j) {
    const double inv = 1.0 / std::sqrt(bn.running_var[j] + bn.eps);
    for (std::size_t i = 0; i < x.rows(); ++i)
      y(i, j) = gamma[j] * (x(i, j) - bn.running_mean[j]) * inv + beta[j];
  }
  return y;
}

Tensor2 batchnorm_train(BatchNormLayer& bn, std::span<const double> params, const Tensor2& x,
                        Tensor2* normalized, std::vector<double>* inv_std_out) {
  const std::size_t n = x.rows();
  if (n <= 1)
    throw ContractViolation("train-mode BatchNorm forward with batch size " + std::to_string(n) +
                            " (<= 1); apply the batch-size skip rule first");
  const auto gamma = slice(params, bn.gamma_offset, bn.width);
  const auto beta = slice(params, bn.beta_offset, bn.width);
  Tensor2 xhat(n, bn.width);
  Tensor2 y(n, bn.width);
  std::vector<double> inv_std(bn.width);
  const double count = static_cast<double>(n);
  for (std::size_t j = 0; j < bn.width; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x(i, j);
    mean /= count;
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (x(i, j) - mean) * (x(i, j) - mean);
    var /= count;
    inv_std[j] = 1.0 / std::sqrt(var + bn.eps);
    for (std::size_t i = 0; i < n; ++i) {
      xhat(i, j) = (x(i, j) - mean) * inv_std[j];
      y(i, j) = gamma[j] * xhat(i, j) + beta[j];
    }
    // Running variance tracks the unbiased estimate.
    bn.running_mean[j] = (1.0 - bn.momentum) * bn.running_mean[j] + bn.momentum * mean;
    bn.running_var[j] =
        (1.0 - bn.momentum) * bn.running_var[j] + bn.momentum * var * count / (count - 1.0);
  }
  if (normalized) *normalized = std::move(xhat);
  if (inv_std_out) *inv_std_out = std::move(inv_std);
  return y;
}

}  // namespace

MlpModel::MlpModel(std::size_t input_dim) : input_dim_(input_dim), width_(input_dim) {
  KTA_REQUIRE(input_dim > 0, "MlpModel: input_dim must be positive");
}

MlpModel MlpModel::build(const ModelSpec& spec, std::uint64_t seed) {
  KTA_REQUIRE(spec.classes >= 2, "ModelSpec: need at least 2 classes");
  MlpModel model(spec.input_dim);
  for (std::size_t width : spec.hidden) {
    model.add_dense(width);
    if (spec.batchnorm) model.add_batchnorm();
    model.add_relu();
  }
  model.add_dense(spec.classes);

  Rng rng(seed);
  for (const auto& layer : model.layers_) {
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      const double scale = std::sqrt(2.0 / static_cast<double>(d->in));
      for (std::size_t i = 0; i < d->in * d->out; ++i)
        model.params_[d->weight_offset + i] = scale * rng.normal();
    }
  }
  return model;
}

MlpModel& MlpModel::add_dense(std::size_t out) {
  KTA_REQUIRE(out > 0, "add_dense: width must be positive");
  DenseLayer d{width_, out, params_.size(), params_.size() + width_ * out};
  params_.resize(params_.size() + width_ * out + out, 0.0);
  layers_.emplace_back(d);
  width_ = out;
  return *this;
}

MlpModel& MlpModel::add_relu() {
  layers_.emplace_back(ReluLayer{width_});
  return *this;
}

MlpModel& MlpModel::add_batchnorm(double momentum, double eps) {
  KTA_REQUIRE(momentum > 0.0 && momentum <= 1.0 && eps > 0.0, "add_batchnorm: bad momentum/eps");
  BatchNormLayer bn;
  bn.width = width_;
  bn.gamma_offset = params_.size();
  bn.beta_offset = params_.size() + width_;
  bn.momentum = momentum;
  bn.eps = eps;
  bn.running_mean.assign(width_, 0.0);
  bn.running_var.assign(width_, 1.0);
  params_.resize(params_.size() + width_, 1.0);
  params_.resize(params_.size() + width_, 0.0);
  layers_.emplace_back(std::move(bn));
  return *this;
}

bool MlpModel::has_batchnorm() const {
  return std::any_of(layers_.begin(), layers_.end(),
                     [](const Layer& l) { return std::holds_alternative<BatchNormLayer>(l); });
}

void MlpModel::set_parameters(std::span<const double> values) {
  KTA_REQUIRE(values.size() == params_.size(),
              "set_parameters: expected " + std::to_string(params_.size()) + " values, got " +
                  std::to_string(values.size()));
  std::copy(values.begin(), values.end(), params_.begin());
}

Tensor2 infer(const MlpModel& model, const Tensor2& batch) {
  KTA_REQUIRE(batch.cols() == model.input_dim(),
              "forward: batch has " + std::to_string(batch.cols()) + " columns, model expects " +
                  std::to_string(model.input_dim()));
  const auto params = model.parameters();
  Tensor2 x = batch;
  for (const auto& layer : model.layers()) {
    x = std::visit(Overloaded{
                       [&](const DenseLayer& d) { return dense_forward(d, params, x); },
                       [&](const ReluLayer&) { return relu_forward(x); },
                       [&](const BatchNormLayer& bn) { return batchnorm_eval(bn, params, x); },
                   },
                   layer);
  }
  return x;
}

Tensor2 forward(MlpModel& model, const Tensor2& batch, Mode mode, ForwardCache* cache) {
  if (mode == Mode::eval) return infer(model, batch);
  KTA_REQUIRE(batch.cols() == model.input_dim(),
              "forward: batch has " + std::to_string(batch.cols()) + " columns, model expects " +
                  std::to_string(model.input_dim()));
  const std::span<const double> params = model.parameters();
  if (cache) {
    cache->inputs.clear();
    cache->normalized.clear();
    cache->inv_std.clear();
  }
  Tensor2 x = batch;
  for (auto& layer : model.layers()) {
    Tensor2 xhat;
    std::vector<double> inv_std;
    Tensor2 y = std::visit(
        Overloaded{
            [&](const DenseLayer& d) { return dense_forward(d, params, x); },
            [&](const ReluLayer&) { return relu_forward(x); },
            [&](BatchNormLayer& bn) { return batchnorm_train(bn, params, x, &xhat, &inv_std); },
        },
        layer);
    if (cache) {
      cache->inputs.push_back(std::move(x));
      cache->normalized.push_back(std::move(xhat));
      cache->inv_std.push_back(std::move(inv_std));
    }
    x = std::move(y);
  }
  return x;
}

std::vector<double> backward(const MlpModel& model, const ForwardCache& cache,
                             const Tensor2& grad_logits) {
  const auto& layers = model.layers();
  KTA_REQUIRE(cache.inputs.size() == layers.size(), "backward: cache does not match model");
  KTA_REQUIRE(grad_logits.cols() == model.class_count(), "backward: gradient width mismatch");
  const auto params = model.parameters();
  std::vector<double> grad(model.parameter_count(), 0.0);
  Tensor2 g = grad_logits;
  for (std::size_t li = layers.size(); li-- > 0;) {
    const Tensor2& x = cache.inputs[li];
    KTA_REQUIRE(x.rows() == g.rows(), "backward: batch size mismatch");
    std::visit(
        Overloaded{
            [&](const DenseLayer& d) {
              std::span<double> gw(grad.data() + d.weight_offset, d.in * d.out);
              std::span<double> gb(grad.data() + d.bias_offset, d.out);
              kernels::gemm_tn(g.values(), x.values(), gw, x.rows(), d.out, d.in);
              kernels::column_sums(g.values(), gb, x.rows(), d.out);
              if (li == 0) return;
              Tensor2 gx(x.rows(), d.in);
              kernels::gemm_nn(g.values(), slice(params, d.weight_offset, d.in * d.out),
                               gx.values(), x.rows(), d.out, d.in);
              g = std::move(gx);
            },
            [&](const ReluLayer&) {
              auto gv = g.values();
              auto xv = x.values();
              for (std::size_t i = 0; i < gv.size(); ++i)
                if (!(xv[i] > 0.0)) gv[i] = 0.0;
            },
            [&](const BatchNormLayer& bn) {
              const Tensor2& xhat = cache.normalized[li];
              const auto& inv_std = cache.inv_std[li];
              const auto gamma = slice(params, bn.gamma_offset, bn.width);
              const std::size_t n = x.rows();
              const double count = static_cast<double>(n);
              Tensor2 gx(n, bn.width);
              for (std::size_t j = 0; j < bn.width; ++j) {
                double sum_dy = 0.0, sum_dy_xhat = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                  sum_dy += g(i, j);
                  sum_dy_xhat += g(i, j) * xhat(i, j);
                }
                grad[bn.gamma_offset + j] = sum_dy_xhat;
                grad[bn.beta_offset + j] = sum_dy;
                const double k = gamma[j] * inv_std[j] / count;
                for (std::size_t i = 0; i < n; ++i)
                  gx(i, j) = k * (count * g(i, j) - sum_dy - xhat(i, j) * sum_dy_xhat);
              }
              g = std::move(gx);
            },
        },
        layers[li]);
  }
  return grad;
}

}  // namespace kta::nn
