#include "kta/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kta/common/error.hpp"

namespace kta::nn {

namespace {

constexpr double kTeacherFloor = 1e-12;

// log-softmax of row/T written into out; returns nothing, out.size()==row.size().
void log_softmax_t(std::span<const double> row, double temperature, std::span<double> out) {
  double top = row[0] / temperature;
  for (double v : row) top = std::max(top, v / temperature);
  double total = 0.0;
  for (double v : row) total += std::exp(v / temperature - top);
  const double log_total = std::log(total);
  for (std::size_t k = 0; k < row.size(); ++k) out[k] = row[k] / temperature - top - log_total;
}

}  // namespace

std::vector<double> softmax_t(std::span<const double> logits_row, double temperature) {
  KTA_REQUIRE(temperature > 0.0 && std::isfinite(temperature), "softmax_t: temperature must be > 0");
  KTA_REQUIRE(!logits_row.empty(), "softmax_t: empty row");
  for (double v : logits_row) KTA_REQUIRE(std::isfinite(v), "softmax_t: non-finite logit");
  double top = logits_row[0] / temperature;
  for (double v : logits_row) top = std::max(top, v / temperature);
  std::vector<double> out(logits_row.size());
  double total = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = std::exp(logits_row[k] / temperature - top);
    total += out[k];
  }
  for (double& p : out) p /= total;
  return out;
}

Tensor2 softmax_rows(const Tensor2& logits, double temperature) {
  Tensor2 out(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto p = softmax_t(logits.row(r), temperature);
    std::copy(p.begin(), p.end(), out.row(r).begin());
  }
  return out;
}

LossGrad cross_entropy(const Tensor2& logits, std::span<const int> labels) {
  KTA_REQUIRE(labels.size() == logits.rows(), "cross_entropy: label count != rows");
  KTA_REQUIRE(logits.rows() > 0, "cross_entropy: empty batch");
  const std::size_t k = logits.cols();
  const double n = static_cast<double>(logits.rows());
  LossGrad out{0.0, Tensor2(logits.rows(), k)};
  std::vector<double> logp(k);
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const int y = labels[r];
    KTA_REQUIRE(y >= 0 && static_cast<std::size_t>(y) < k,
                "cross_entropy: label " + std::to_string(y) + " outside [0, " +
                    std::to_string(k) + ")");
    log_softmax_t(logits.row(r), 1.0, logp);
    out.loss -= logp[static_cast<std::size_t>(y)];
    auto g = out.grad.row(r);
    for (std::size_t c = 0; c < k; ++c) g[c] = std::exp(logp[c]) / n;
    g[static_cast<std::size_t>(y)] -= 1.0 / n;
  }
  out.loss /= n;
  return out;
}

LossGrad kl_distill(const Tensor2& student_logits, const Tensor2& teacher_probs, double temperature) {
  KTA_REQUIRE(temperature > 0.0, "kl_distill: temperature must be > 0");
  KTA_REQUIRE(student_logits.rows() == teacher_probs.rows() &&
                  student_logits.cols() == teacher_probs.cols(),
              "kl_distill: student/teacher shape mismatch");
  KTA_REQUIRE(student_logits.rows() > 0, "kl_distill: empty batch");
  const std::size_t k = student_logits.cols();
  const double n = static_cast<double>(student_logits.rows());
  LossGrad out{0.0, Tensor2(student_logits.rows(), k)};
  std::vector<double> logp(k), p(k), term(k);
  for (std::size_t r = 0; r < student_logits.rows(); ++r) {
    const auto q = teacher_probs.row(r);
    double qsum = 0.0;
    for (double v : q) {
      KTA_REQUIRE(v >= 0.0, "kl_distill: negative teacher probability in row " + std::to_string(r));
      qsum += v;
    }
    KTA_REQUIRE(std::abs(qsum - 1.0) <= 1e-6,
                "kl_distill: teacher row " + std::to_string(r) + " is not normalized");
    log_softmax_t(student_logits.row(r), temperature, logp);
    double kl = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      p[c] = std::exp(logp[c]);
      term[c] = logp[c] - std::log(std::max(q[c], kTeacherFloor));
      kl += p[c] * term[c];
    }
    out.loss += kl;
    // d KL / d z_c = p_c (term_c - KL) / T
    auto g = out.grad.row(r);
    for (std::size_t c = 0; c < k; ++c) g[c] = p[c] * (term[c] - kl) / (temperature * n);
  }
  out.loss /= n;
  // Rounding can leave a tiny negative value when p == q.
  out.loss = std::max(out.loss, 0.0);
  return out;
}

void LossSpec::validate() const {
  KTA_REQUIRE(lambda >= 0.0 && lambda <= 1.0, "LossSpec: lambda must lie in [0, 1]");
  KTA_REQUIRE(temperature > 0.0 && std::isfinite(temperature), "LossSpec: temperature must be > 0");
  KTA_REQUIRE(prox_mu >= 0.0 && std::isfinite(prox_mu), "LossSpec: prox_mu must be >= 0");
}

LossTerms combined_loss(MlpModel& model, const SupervisedPart* supervised,
                        const DistillPart* distill, const LossSpec& spec,
                        std::span<const double> global_params, Mode mode) {
  spec.validate();
  const bool prox = !global_params.empty();
  if (!supervised && !distill && !prox)
    throw ContractViolation("combined_loss: no loss parts supplied");
  if (prox)
    KTA_REQUIRE(global_params.size() == model.parameter_count(),
                "combined_loss: global_params length mismatch");

  LossTerms out;
  out.grad.assign(model.parameter_count(), 0.0);
  const double w_ce = 1.0 - spec.lambda;
  const double w_kl = spec.lambda * spec.temperature * spec.temperature;

  // Eval mode yields loss values only; the gradient stays zero.
  auto accumulate = [&](const Tensor2& grad_logits, const ForwardCache& cache) {
    if (mode != Mode::train) return;
    const auto g = backward(model, cache, grad_logits);
    for (std::size_t i = 0; i < g.size(); ++i) out.grad[i] += g[i];
  };

  if (supervised && distill && &supervised->features == &distill->features) {
    ForwardCache cache;
    const Tensor2 logits = forward(model, supervised->features, mode, &cache);
    const auto ce = cross_entropy(logits, supervised->labels);
    const auto kl = kl_distill(logits, distill->teacher, spec.temperature);
    out.ce = ce.loss;
    out.kl = kl.loss;
    Tensor2 g(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < g.size(); ++i)
      g.values()[i] = w_ce * ce.grad.values()[i] + w_kl * kl.grad.values()[i];
    accumulate(g, cache);
  } else {
    if (supervised) {
      ForwardCache cache;
      const Tensor2 logits = forward(model, supervised->features, mode, &cache);
      auto ce = cross_entropy(logits, supervised->labels);
      out.ce = ce.loss;
      for (double& v : ce.grad.values()) v *= w_ce;
      accumulate(ce.grad, cache);
    }
    if (distill) {
      ForwardCache cache;
      const Tensor2 logits = forward(model, distill->features, mode, &cache);
      auto kl = kl_distill(logits, distill->teacher, spec.temperature);
      out.kl = kl.loss;
      for (double& v : kl.grad.values()) v *= w_kl;
      accumulate(kl.grad, cache);
    }
  }

  if (prox) {
    const auto theta = model.parameters();
    double sq = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double diff = theta[i] - global_params[i];
      sq += diff * diff;
      out.grad[i] += spec.prox_mu * diff;
    }
    out.prox = 0.5 * spec.prox_mu * sq;
  }

  out.total = (supervised ? w_ce * out.ce : 0.0) + (distill ? w_kl * out.kl : 0.0) + out.prox;
  return out;
}

}  // namespace kta::nn
