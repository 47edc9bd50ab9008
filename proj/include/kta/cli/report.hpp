#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kta/federation/experiment.hpp"

namespace kta::cli {

// %.6g, the float format of every CSV column.
std::string fmt6(double value);

// seed, round, client_id (or AGG / WAGG), test_acc, test_loss, ref_acc,
// comm_up_bytes_cum, comm_down_bytes_cum, acc_variance
void write_metrics_header(std::ostream& out);
void write_metrics_rows(std::ostream& out, std::uint64_t seed, const federation::RoundMetrics& m);
void write_metrics_csv(std::ostream& out, const federation::ExperimentResult& result);

void write_ledger_csv(std::ostream& out, const federation::ExperimentResult& result,
                      std::size_t rounds);

struct RunSummary {
  std::string method;
  federation::MeanStd final_acc;
  double comm_mb = 0.0;  // per seed, in the configured metering view
  std::size_t skipped_updates = 0;
  std::size_t total_updates = 0;
};

RunSummary summarize(const federation::ExperimentConfig& config,
                     const federation::ExperimentResult& result);
void write_summary(std::ostream& out, const federation::ExperimentConfig& config,
                   const RunSummary& summary);

struct TradeoffRow {
  std::string sweep_value;
  RunSummary summary;
};

void write_tradeoff_csv(std::ostream& out, const std::vector<TradeoffRow>& rows);

}  // namespace kta::cli
