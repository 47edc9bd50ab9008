#include "kta/federation/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "kta/common/error.hpp"
#include "kta/common/rng.hpp"

namespace kta::federation {

void ExperimentConfig::validate() const {
  std::ostringstream err;
  if (data.source == DataSource::synthetic) {
    if (data.classes < 2) err << "data.classes: must be >= 2\n";
    if (data.dim < 2) err << "data.dim: must be >= 2\n";
    if (data.per_class < 1) err << "data.per_class: must be >= 1\n";
    if (!(data.spread > 0.0)) err << "data.spread: must be > 0\n";
  } else if (data.path.empty()) {
    err << "data.path: required for file data\n";
  } else if (data.source == DataSource::idx && data.labels_path.empty()) {
    err << "data.labels_path: required for idx data\n";
  }
  if (clients < 1) err << "clients: must be >= 1\n";
  if (!(alpha > 0.0) || !std::isfinite(alpha)) err << "alpha: must be finite and > 0\n";
  if (n_ref < 1) err << "n_ref: must be >= 1\n";
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) err << "test_fraction: must lie in (0, 1)\n";
  if (min_client_samples < 1) err << "min_client_samples: must be >= 1\n";
  for (std::size_t w : hidden)
    if (w < 1) err << "model.hidden: widths must be >= 1\n";
  if (seeds.empty()) err << "seeds: at least one seed is required\n";
  if (data.source == DataSource::synthetic) {
    const std::size_t n = data.classes * data.per_class;
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    if (n_test < 1 || n_test + n_ref + clients * min_client_samples > n)
      err << "n_ref: test split, reference set and client minimums exceed the " << n
          << " synthetic samples\n";
  }
  try {
    plan.validate();
  } catch (const ConfigError& e) {
    std::istringstream lines(e.what());
    for (std::string line; std::getline(lines, line);) err << "plan." << line << '\n';
  }
  const std::string msg = err.str();
  if (!msg.empty()) throw ConfigError(msg.substr(0, msg.size() - 1));
}

data::Dataset make_dataset(const ExperimentConfig& config, std::uint64_t seed) {
  switch (config.data.source) {
    case DataSource::synthetic:
      return data::synth_blobs(config.data.classes, config.data.dim, config.data.per_class,
                               config.data.spread, derive_seed(seed, streams::kData));
    case DataSource::csv:
      return data::load_numeric(config.data.path, data::FileFormat::csv);
    case DataSource::idx:
      return data::load_numeric(config.data.path, data::FileFormat::idx, config.data.labels_path);
  }
  throw ContractViolation("make_dataset: unknown source");
}

Federation make_federation(const ExperimentConfig& config, const data::Dataset& full,
                           std::uint64_t seed) {
  const auto n_test =
      static_cast<std::size_t>(std::llround(config.test_fraction * static_cast<double>(full.size())));
  KTA_REQUIRE(n_test >= 1 && n_test < full.size(), "make_federation: test split is empty or total");
  auto split = data::holdout_reference(full, n_test, derive_seed(seed, streams::kTestSplit));
  KTA_REQUIRE(config.n_ref < split.remainder.size(),
              "make_federation: reference set leaves no training data");
  auto ref = data::holdout_reference(split.remainder, config.n_ref, derive_seed(seed, streams::kHoldout));

  Federation fed;
  fed.test = std::move(split.reference.dataset);
  fed.reference = std::move(ref.reference);
  fed.train = std::move(ref.remainder);
  const auto partition = data::dirichlet_partition(fed.train, config.clients, config.alpha,
                                                   derive_seed(seed, streams::kPartition),
                                                   config.min_client_samples);

  const nn::ModelSpec spec{full.dim(), config.hidden, full.class_count, config.batchnorm};
  const bool shared_init = exchanges_parameters(config.plan.algorithm);
  fed.clients.resize(config.clients);
  for (std::size_t i = 0; i < config.clients; ++i) {
    auto& c = fed.clients[i];
    c.id = i;
    c.model = nn::MlpModel::build(spec, derive_seed(seed, streams::kModelInit, shared_init ? 0 : i));
    c.optimizer = config.plan.optimizer == nn::OptimizerKind::adam
                      ? nn::OptimizerState::adam(config.plan.learning_rate)
                      : nn::OptimizerState::sgd(config.plan.learning_rate);
    c.shard = partition.client_shards[i];
    c.rng = Rng(derive_seed(seed, streams::kClientTrain, i));
  }
  if (shared_init) {
    const auto p = fed.clients[0].model.parameters();
    fed.global_params.assign(p.begin(), p.end());
  }
  return fed;
}

SeedRun run_federation(Federation& fed, const RoundPlan& plan, std::uint64_t seed,
                       const RoundCallback& on_round) {
  SeedRun run;
  run.seed = seed;
  run.clients = fed.clients.size();
  run.rounds.push_back(evaluate_round(fed, plan, 0));
  if (on_round) on_round(seed, run.rounds.back());
  for (std::size_t r = 1; r <= plan.rounds; ++r) {
    run.rounds.push_back(run_round(fed, plan, r));
    if (on_round) on_round(seed, run.rounds.back());
  }
  run.ledger = fed.ledger;
  return run;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RoundCallback& on_round) {
  config.validate();
  ExperimentResult result;
  for (std::uint64_t seed : config.seeds) {
    const auto full = make_dataset(config, seed);
    auto fed = make_federation(config, full, seed);
    result.runs.push_back(run_federation(fed, config.plan, seed, on_round));
  }
  return result;
}

MeanStd mean_std(const std::vector<double>& values) {
  KTA_REQUIRE(!values.empty(), "mean_std: no values");
  MeanStd out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(values.size()));
  return out;
}

std::string format_mean_std(const MeanStd& value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f ± %.*f", decimals, value.mean, decimals, value.std);
  return buf;
}

std::vector<double> final_accuracies(const ExperimentResult& result) {
  std::vector<double> out;
  for (const auto& run : result.runs) out.push_back(run.rounds.back().agg_acc);
  return out;
}

}  // namespace kta::federation
