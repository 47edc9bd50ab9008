#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "kta/data/dataset.hpp"
#include "kta/federation/federation.hpp"

namespace kta::federation {

enum class DataSource { synthetic, csv, idx };

struct DataConfig {
  DataSource source = DataSource::synthetic;
  std::size_t classes = 3;
  std::size_t dim = 8;
  std::size_t per_class = 600;
  double spread = 0.6;
  std::filesystem::path path;
  std::filesystem::path labels_path;
};

struct ExperimentConfig {
  DataConfig data;
  std::size_t clients = 8;
  double alpha = 0.3;
  std::size_t n_ref = 300;
  double test_fraction = 0.2;
  std::size_t min_client_samples = data::kDefaultMinClientSamples;
  std::vector<std::size_t> hidden{64, 64};
  bool batchnorm = false;
  RoundPlan plan;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  MeteringView metering = MeteringView::both;

  // Checks every field and throws one ConfigError listing all problems.
  void validate() const;
};

// The dataset for one seed: synthetic data is regenerated per seed, file data
// is the same for every seed.
data::Dataset make_dataset(const ExperimentConfig& config, std::uint64_t seed);

// Test split, reference holdout, Dirichlet partition and client models for
// one seed. Parameter-averaging algorithms share one initialisation.
Federation make_federation(const ExperimentConfig& config, const data::Dataset& full,
                           std::uint64_t seed);

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<RoundMetrics> rounds;  // rounds[0] is the initial evaluation
  CommLedger ledger;
  std::size_t clients = 0;
};

struct ExperimentResult {
  std::vector<SeedRun> runs;
};

using RoundCallback = std::function<void(std::uint64_t seed, const RoundMetrics&)>;

// Runs plan.rounds rounds for every seed in order.
ExperimentResult run_experiment(const ExperimentConfig& config, const RoundCallback& on_round = {});

// Runs the rounds of an already-built federation (round 0 evaluation first).
SeedRun run_federation(Federation& fed, const RoundPlan& plan, std::uint64_t seed,
                       const RoundCallback& on_round = {});

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

MeanStd mean_std(const std::vector<double>& values);

// "0.720 ± 0.016"
std::string format_mean_std(const MeanStd& value, int decimals = 3);

// Final-round headline accuracy of every seed.
std::vector<double> final_accuracies(const ExperimentResult& result);

}  // namespace kta::federation
