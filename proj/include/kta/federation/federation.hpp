#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "kta/common/rng.hpp"
#include "kta/data/dataset.hpp"
#include "kta/data/partition.hpp"
#include "kta/federation/ledger.hpp"
#include "kta/market/market.hpp"
#include "kta/nn/model.hpp"
#include "kta/nn/optimizer.hpp"

namespace kta::federation {

enum class Algorithm { local, fedavg, fedprox, fedmd, kta_v2 };

std::string_view algorithm_name(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view name);
bool exchanges_parameters(Algorithm algorithm);
bool exchanges_logits(Algorithm algorithm);

struct RoundPlan {
  Algorithm algorithm = Algorithm::kta_v2;
  std::size_t local_epochs = 1;
  std::size_t distill_epochs = 5;
  std::size_t batch_size = 64;
  double lambda = 0.5;
  double temperature = 2.0;
  double mu = 0.01;
  market::MarketConfig market;
  nn::OptimizerKind optimizer = nn::OptimizerKind::adam;
  double learning_rate = 1e-3;
  bool reset_optimizer_on_install = true;
  bool bn_safe = true;
  bool track_consensus = false;
  std::size_t rounds = 10;
  int workers = 1;

  // Throws ConfigError listing every violated field.
  void validate() const;
};

struct ClientState {
  std::size_t id = 0;
  nn::MlpModel model{1};
  nn::OptimizerState optimizer;
  std::vector<std::size_t> shard;  // indices into the federation's training set
  Rng rng{0};
  std::size_t applied_updates = 0;
  std::size_t skipped_updates = 0;
};

struct ClientMetrics {
  double test_acc = 0.0;
  double test_loss = 0.0;
  double ref_acc = 0.0;
};

struct RoundMetrics {
  std::size_t round = 0;
  std::vector<ClientMetrics> clients;
  // Headline: the aggregated global model for fedavg/fedprox, otherwise the
  // client mean.
  double agg_acc = 0.0;
  double agg_loss = 0.0;
  double mean_acc = 0.0;
  double weighted_acc = 0.0;  // data-size weighted
  double weighted_loss = 0.0;
  double mean_ref_acc = 0.0;
  double acc_variance = 0.0;  // population variance of clients[].test_acc
  std::uint64_t comm_up_cum = 0;
  std::uint64_t comm_down_cum = 0;
  std::size_t applied_updates = 0;
  std::size_t skipped_updates = 0;
  std::optional<std::pair<double, double>> dispersion;  // before, after distillation
};

struct Federation {
  data::Dataset train;
  data::Dataset test;
  data::ReferenceSet reference;
  std::vector<ClientState> clients;
  std::vector<double> global_params;  // fedavg / fedprox only
  CommLedger ledger;

  std::size_t total_train_samples() const;
};

// E epochs of shuffled minibatch CE training on the client's shard; with
// global_params the FedProx term anchors at them. Batches of size <= 1 are
// skipped and counted when plan.bn_safe is set.
void local_phase(ClientState& client, const data::Dataset& train, const RoundPlan& plan,
                 std::span<const double> global_params = {});

market::LogitsMatrix evaluate_on_reference(const ClientState& client,
                                           const data::ReferenceSet& reference);

// E_distill epochs over the reference set minimizing
// (1 - lambda) CE(reference labels) + lambda T^2 KL(student || teacher rows).
void distill_phase(ClientState& client, const nn::Tensor2& teacher,
                   const data::ReferenceSet& reference, const RoundPlan& plan);

std::vector<double> fedavg_aggregate(std::span<const std::vector<double>> params,
                                     std::span<const std::size_t> sizes);

// sum_i sum_{j in N(i)} w_ij ||Z_i - Z_j||^2
double logit_dispersion(std::span<const market::LogitsMatrix> logits,
                        const market::MarketGraph& graph);
std::pair<double, double> consensus_diagnostic(std::span<const market::LogitsMatrix> before,
                                               std::span<const market::LogitsMatrix> after,
                                               const market::MarketGraph& graph);

RoundMetrics evaluate_round(const Federation& fed, const RoundPlan& plan, std::size_t round);

// One full round; on any error every client, the global parameters and the
// ledger are restored to their round-start values before rethrowing.
RoundMetrics run_round(Federation& fed, const RoundPlan& plan, std::size_t round);

}  // namespace kta::federation
