#include "kta/federation/federation.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "kta/common/error.hpp"
#include "kta/common/parallel.hpp"
#include "kta/nn/loss.hpp"

namespace kta::federation {

std::string_view algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::local: return "local";
    case Algorithm::fedavg: return "fedavg";
    case Algorithm::fedprox: return "fedprox";
    case Algorithm::fedmd: return "fedmd";
    case Algorithm::kta_v2: return "kta_v2";
  }
  return "?";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::local, Algorithm::fedavg, Algorithm::fedprox, Algorithm::fedmd,
                      Algorithm::kta_v2})
    if (algorithm_name(a) == name) return a;
  return std::nullopt;
}

bool exchanges_parameters(Algorithm a) { return a == Algorithm::fedavg || a == Algorithm::fedprox; }
bool exchanges_logits(Algorithm a) { return a == Algorithm::fedmd || a == Algorithm::kta_v2; }

void RoundPlan::validate() const {
  std::ostringstream err;
  if (local_epochs < 1) err << "local_epochs: must be >= 1\n";
  if (batch_size < 1) err << "batch_size: must be >= 1\n";
  if (!(lambda >= 0.0 && lambda <= 1.0)) err << "lambda: must lie in [0, 1]\n";
  if (!(temperature > 0.0)) err << "temperature: must be > 0\n";
  if (!(mu >= 0.0)) err << "mu: must be >= 0\n";
  if (market.policy.k && *market.policy.k < 1) err << "market.k: must be >= 1\n";
  if (!(market.epsilon > 0.0)) err << "market.epsilon: must be > 0\n";
  if (!(learning_rate >= 0.0)) err << "learning_rate: must be >= 0\n";
  if (workers < 0) err << "workers: must be >= 0\n";
  const std::string msg = err.str();
  if (!msg.empty()) throw ConfigError(msg.substr(0, msg.size() - 1));
}

std::size_t Federation::total_train_samples() const {
  std::size_t n = 0;
  for (const auto& c : clients) n += c.shard.size();
  return n;
}

namespace {

// Shuffled minibatch epochs over `pool`; step(batch indices) returns the
// gradient for one update.
template <class Step>
void run_epochs(ClientState& client, std::vector<std::size_t> order, std::size_t epochs,
                const RoundPlan& plan, Step&& step) {
  const std::size_t n = order.size();
  for (std::size_t e = 0; e < epochs; ++e) {
    client.rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += plan.batch_size) {
      const std::span<const std::size_t> batch(order.data() + start,
                                               std::min(plan.batch_size, n - start));
      if (plan.bn_safe && batch.size() <= 1) {
        ++client.skipped_updates;
        continue;
      }
      const auto grad = step(batch);
      nn::optimizer_step(client.optimizer, client.model.parameters(), grad);
      ++client.applied_updates;
    }
  }
}

std::vector<int> gather_labels(std::span<const int> labels, std::span<const std::size_t> idx) {
  std::vector<int> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = labels[idx[i]];
  return out;
}

}  // namespace

void local_phase(ClientState& client, const data::Dataset& train, const RoundPlan& plan,
                 std::span<const double> global_params) {
  KTA_REQUIRE(!client.shard.empty(), "local_phase: empty shard");
  KTA_REQUIRE(train.dim() == client.model.input_dim(), "local_phase: feature width mismatch");
  const nn::LossSpec spec{0.0, plan.temperature, global_params.empty() ? 0.0 : plan.mu};
  run_epochs(client, client.shard, plan.local_epochs, plan, [&](std::span<const std::size_t> b) {
    const nn::Tensor2 x = train.features.gather_rows(b);
    const auto y = gather_labels(train.labels, b);
    const nn::SupervisedPart sup{x, y};
    return nn::combined_loss(client.model, &sup, nullptr, spec, global_params).grad;
  });
}

market::LogitsMatrix evaluate_on_reference(const ClientState& client,
                                           const data::ReferenceSet& reference) {
  KTA_REQUIRE(reference.dataset.size() > 0, "evaluate_on_reference: empty reference set");
  KTA_REQUIRE(reference.dataset.dim() == client.model.input_dim(),
              "evaluate_on_reference: feature width mismatch");
  return nn::infer(client.model, reference.dataset.features);
}

void distill_phase(ClientState& client, const nn::Tensor2& teacher,
                   const data::ReferenceSet& reference, const RoundPlan& plan) {
  const auto& ref = reference.dataset;
  KTA_REQUIRE(teacher.rows() == ref.size() && teacher.cols() == client.model.class_count(),
              "distill_phase: teacher shape does not match the reference set");
  if (plan.distill_epochs == 0) return;
  const nn::LossSpec spec{plan.lambda, plan.temperature, 0.0};
  std::vector<std::size_t> pool(ref.size());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  run_epochs(client, std::move(pool), plan.distill_epochs, plan,
             [&](std::span<const std::size_t> b) {
               const nn::Tensor2 x = ref.features.gather_rows(b);
               const nn::Tensor2 q = teacher.gather_rows(b);
               const auto y = gather_labels(ref.labels, b);
               const nn::SupervisedPart sup{x, y};
               const nn::DistillPart dis{x, q};
               return nn::combined_loss(client.model, &sup, &dis, spec).grad;
             });
}

std::vector<double> fedavg_aggregate(std::span<const std::vector<double>> params,
                                     std::span<const std::size_t> sizes) {
  KTA_REQUIRE(!params.empty() && params.size() == sizes.size(),
              "fedavg_aggregate: need one size per parameter vector");
  const std::size_t p = params[0].size();
  std::size_t total = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    KTA_REQUIRE(params[i].size() == p, "fedavg_aggregate: parameter length mismatch");
    KTA_REQUIRE(sizes[i] > 0, "fedavg_aggregate: sizes must be positive");
    total += sizes[i];
  }
  std::vector<double> out(p, 0.0);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double w = static_cast<double>(sizes[i]) / static_cast<double>(total);
    for (std::size_t e = 0; e < p; ++e) out[e] += w * params[i][e];
  }
  return out;
}

double logit_dispersion(std::span<const market::LogitsMatrix> logits,
                        const market::MarketGraph& graph) {
  KTA_REQUIRE(logits.size() == graph.clients, "logit_dispersion: client count mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < graph.clients; ++i)
    for (std::size_t m = 0; m < graph.neighbors[i].size(); ++m) {
      const auto& zi = logits[i];
      const auto& zj = logits[graph.neighbors[i][m]];
      KTA_REQUIRE(zi.rows() == zj.rows() && zi.cols() == zj.cols(),
                  "logit_dispersion: logits shape mismatch");
      double sq = 0.0;
      for (std::size_t e = 0; e < zi.size(); ++e) {
        const double d = zi.values()[e] - zj.values()[e];
        sq += d * d;
      }
      total += graph.weights[i][m] * sq;
    }
  return total;
}

std::pair<double, double> consensus_diagnostic(std::span<const market::LogitsMatrix> before,
                                               std::span<const market::LogitsMatrix> after,
                                               const market::MarketGraph& graph) {
  return {logit_dispersion(before, graph), logit_dispersion(after, graph)};
}

namespace {

double accuracy(const nn::Tensor2& logits, std::span<const int> labels) {
  return market::reference_accuracy(logits, labels);
}

ClientMetrics evaluate_model(const nn::MlpModel& model, const Federation& fed) {
  ClientMetrics m;
  const auto logits = nn::infer(model, fed.test.features);
  m.test_acc = accuracy(logits, fed.test.labels);
  m.test_loss = nn::cross_entropy(logits, fed.test.labels).loss;
  m.ref_acc = accuracy(nn::infer(model, fed.reference.dataset.features), fed.reference.dataset.labels);
  return m;
}

}  // namespace

RoundMetrics evaluate_round(const Federation& fed, const RoundPlan& plan, std::size_t round) {
  const std::size_t c = fed.clients.size();
  KTA_REQUIRE(c > 0, "evaluate_round: no clients");
  RoundMetrics out;
  out.round = round;
  out.clients.resize(c);
  parallel_for(c, plan.workers,
               [&](std::size_t i) { out.clients[i] = evaluate_model(fed.clients[i].model, fed); });

  const double n_total = static_cast<double>(fed.total_train_samples());
  for (std::size_t i = 0; i < c; ++i) {
    const auto& m = out.clients[i];
    const double w = static_cast<double>(fed.clients[i].shard.size()) / n_total;
    out.mean_acc += m.test_acc / static_cast<double>(c);
    out.mean_ref_acc += m.ref_acc / static_cast<double>(c);
    out.weighted_acc += w * m.test_acc;
    out.weighted_loss += w * m.test_loss;
    out.applied_updates += fed.clients[i].applied_updates;
    out.skipped_updates += fed.clients[i].skipped_updates;
  }
  double mean_loss = 0.0;
  for (const auto& m : out.clients) {
    out.acc_variance += (m.test_acc - out.mean_acc) * (m.test_acc - out.mean_acc);
    mean_loss += m.test_loss / static_cast<double>(c);
  }
  out.acc_variance /= static_cast<double>(c);

  if (exchanges_parameters(plan.algorithm) && !fed.global_params.empty()) {
    // Global parameters with each client's own BatchNorm buffers.
    std::vector<ClientMetrics> global(c);
    parallel_for(c, plan.workers, [&](std::size_t i) {
      nn::MlpModel m = fed.clients[i].model;
      m.set_parameters(fed.global_params);
      global[i] = evaluate_model(m, fed);
    });
    for (std::size_t i = 0; i < c; ++i) {
      const double w = static_cast<double>(fed.clients[i].shard.size()) / n_total;
      out.agg_acc += w * global[i].test_acc;
      out.agg_loss += w * global[i].test_loss;
    }
  } else {
    out.agg_acc = out.mean_acc;
    out.agg_loss = mean_loss;
  }
  out.comm_up_cum = fed.ledger.uplink(round);
  out.comm_down_cum = fed.ledger.downlink(round);
  return out;
}

namespace {

RoundMetrics round_body(Federation& fed, const RoundPlan& plan, std::size_t round) {
  const std::size_t c = fed.clients.size();
  KTA_REQUIRE(c > 0, "run_round: no clients");
  auto& clients = fed.clients;
  std::optional<std::pair<double, double>> dispersion;

  switch (plan.algorithm) {
    case Algorithm::local:
      parallel_for(c, plan.workers, [&](std::size_t i) { local_phase(clients[i], fed.train, plan); });
      break;

    case Algorithm::fedavg:
    case Algorithm::fedprox: {
      const std::size_t p = clients[0].model.parameter_count();
      KTA_REQUIRE(fed.global_params.size() == p, "run_round: global parameters not initialised");
      for (std::size_t i = 0; i < c; ++i) {
        fed.ledger.record(round, i, Payload::params_down, p);
        clients[i].model.set_parameters(fed.global_params);
        if (plan.reset_optimizer_on_install) clients[i].optimizer.reset();
      }
      const std::span<const double> anchor =
          plan.algorithm == Algorithm::fedprox ? std::span<const double>(fed.global_params)
                                               : std::span<const double>();
      parallel_for(c, plan.workers,
                   [&](std::size_t i) { local_phase(clients[i], fed.train, plan, anchor); });
      std::vector<std::vector<double>> params(c);
      std::vector<std::size_t> sizes(c);
      for (std::size_t i = 0; i < c; ++i) {
        fed.ledger.record(round, i, Payload::params_up, p);
        const auto theta = clients[i].model.parameters();
        params[i].assign(theta.begin(), theta.end());
        sizes[i] = clients[i].shard.size();
      }
      fed.global_params = fedavg_aggregate(params, sizes);
      break;
    }

    case Algorithm::fedmd:
    case Algorithm::kta_v2: {
      parallel_for(c, plan.workers, [&](std::size_t i) { local_phase(clients[i], fed.train, plan); });
      std::vector<market::LogitsMatrix> logits(c);
      parallel_for(c, plan.workers,
                   [&](std::size_t i) { logits[i] = evaluate_on_reference(clients[i], fed.reference); });
      const std::size_t payload = logits[0].size();
      for (std::size_t i = 0; i < c; ++i) fed.ledger.record(round, i, Payload::logits_up, payload);

      // Barrier: every logits matrix is in before any teacher is built.
      const auto& labels = fed.reference.dataset.labels;
      std::optional<market::MarketGraph> graph;
      std::vector<nn::Tensor2> teachers;
      if (plan.algorithm == Algorithm::kta_v2) {
        graph = market::build_market(logits, labels, plan.market);
        teachers = market::build_teachers(*graph, logits, plan.temperature).teachers;
      } else {
        teachers.assign(c, market::fedmd_global_teacher(logits, plan.temperature));
        if (plan.track_consensus)
          graph = market::build_market(
              logits, labels, {market::NeighborPolicy::full(true), market::Weighting::uniform, 1e-3});
      }
      for (std::size_t i = 0; i < c; ++i) fed.ledger.record(round, i, Payload::teacher_down, payload);

      parallel_for(c, plan.workers, [&](std::size_t i) {
        distill_phase(clients[i], teachers[i], fed.reference, plan);
      });
      if (plan.track_consensus) {
        std::vector<market::LogitsMatrix> after(c);
        parallel_for(c, plan.workers,
                     [&](std::size_t i) { after[i] = evaluate_on_reference(clients[i], fed.reference); });
        dispersion = consensus_diagnostic(logits, after, *graph);
      }
      break;
    }
  }

  auto metrics = evaluate_round(fed, plan, round);
  metrics.dispersion = dispersion;
  return metrics;
}

}  // namespace

RoundMetrics run_round(Federation& fed, const RoundPlan& plan, std::size_t round) {
  plan.validate();
  const auto clients = fed.clients;
  const auto global = fed.global_params;
  const std::size_t ledger_size = fed.ledger.size();
  try {
    return round_body(fed, plan, round);
  } catch (...) {
    fed.clients = clients;
    fed.global_params = global;
    fed.ledger.truncate(ledger_size);
    throw;
  }
}

}  // namespace kta::federation
