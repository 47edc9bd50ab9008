#pragma once

#include <span>
#include <vector>

#include "kta/nn/model.hpp"
#include "kta/nn/tensor.hpp"

namespace kta::nn {

// Temperature softmax with max subtraction.
std::vector<double> softmax_t(std::span<const double> logits_row, double temperature);

// Row-wise softmax_t of a whole matrix.
Tensor2 softmax_rows(const Tensor2& logits, double temperature);

// Mean loss over rows and dL/dlogits.
struct LossGrad {
  double loss = 0.0;
  Tensor2 grad;
};

LossGrad cross_entropy(const Tensor2& logits, std::span<const int> labels);

// Mean over rows of KL(p || q), p = softmax_t(student, T), q = teacher row.
// The teacher is a constant; q is clamped below at 1e-12 inside the log.
// No T^2 factor here, combined_loss applies it.
LossGrad kl_distill(const Tensor2& student_logits, const Tensor2& teacher_probs, double temperature);

struct LossSpec {
  double lambda = 0.5;
  double temperature = 2.0;
  double prox_mu = 0.0;

  void validate() const;
};

struct SupervisedPart {
  const Tensor2& features;
  std::span<const int> labels;
};

struct DistillPart {
  const Tensor2& features;
  const Tensor2& teacher;
};

struct LossTerms {
  double total = 0.0;
  double ce = 0.0;
  double kl = 0.0;
  double prox = 0.0;
  std::vector<double> grad;
};

// (1 - lambda) * CE + lambda * T^2 * KL + (mu / 2) * ||theta - theta_global||^2
// over whichever parts are supplied. When both parts share the same feature
// tensor a single forward pass is used. The prox term is active when
// global_params is non-empty.
LossTerms combined_loss(MlpModel& model, const SupervisedPart* supervised,
                        const DistillPart* distill, const LossSpec& spec,
                        std::span<const double> global_params = {}, Mode mode = Mode::train);

}  // namespace kta::nn
