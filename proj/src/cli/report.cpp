#include "kta/cli/report.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace kta::cli {

using namespace federation;

std::string fmt6(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

void write_metrics_header(std::ostream& out) {
  out << "seed,round,client_id,test_acc,test_loss,ref_acc,comm_up_bytes_cum,comm_down_bytes_cum,"
         "acc_variance\n";
}

void write_metrics_rows(std::ostream& out, std::uint64_t seed, const RoundMetrics& m) {
  auto row = [&](const std::string& id, double acc, double loss, double ref) {
    out << seed << ',' << m.round << ',' << id << ',' << fmt6(acc) << ',' << fmt6(loss) << ','
        << fmt6(ref) << ',' << m.comm_up_cum << ',' << m.comm_down_cum << ',' << fmt6(m.acc_variance)
        << '\n';
  };
  for (std::size_t i = 0; i < m.clients.size(); ++i)
    row(std::to_string(i), m.clients[i].test_acc, m.clients[i].test_loss, m.clients[i].ref_acc);
  row("AGG", m.agg_acc, m.agg_loss, m.mean_ref_acc);
  row("WAGG", m.weighted_acc, m.weighted_loss, m.mean_ref_acc);
}

void write_metrics_csv(std::ostream& out, const ExperimentResult& result) {
  write_metrics_header(out);
  for (const auto& run : result.runs)
    for (const auto& m : run.rounds) write_metrics_rows(out, run.seed, m);
}

void write_ledger_csv(std::ostream& out, const ExperimentResult& result, std::size_t rounds) {
  CommLedger::write_csv_header(out);
  for (const auto& run : result.runs) run.ledger.write_csv(out, rounds, run.clients, run.seed);
}

RunSummary summarize(const ExperimentConfig& config, const ExperimentResult& result) {
  RunSummary s;
  s.method = std::string(algorithm_name(config.plan.algorithm));
  s.final_acc = mean_std(final_accuracies(result));
  double mb = 0.0;
  for (const auto& run : result.runs) {
    mb += megabytes(run.ledger.total(config.metering));
    s.skipped_updates += run.rounds.back().skipped_updates;
    s.total_updates += run.rounds.back().skipped_updates + run.rounds.back().applied_updates;
  }
  s.comm_mb = mb / static_cast<double>(result.runs.size());
  return s;
}

void write_summary(std::ostream& out, const ExperimentConfig& config, const RunSummary& s) {
  char line[256];
  out << "seeds " << config.seeds.size() << ", rounds " << config.plan.rounds << ", clients "
      << config.clients << ", alpha " << fmt6(config.alpha) << ", metering "
      << (config.metering == MeteringView::both ? "both" : "uplink_only") << '\n';
  std::snprintf(line, sizeof line, "%-8s  %-15s  %s\n", "method", "final_acc", "comm_mb");
  out << line;
  std::string acc = format_mean_std(s.final_acc);
  acc.resize(acc.size() + 15 - std::min<std::size_t>(15, acc.size() - 1), ' ');  // "±" is two bytes
  std::snprintf(line, sizeof line, "%-8s  %s  %.3f\n", s.method.c_str(), acc.c_str(), s.comm_mb);
  out << line;
  const double pct =
      s.total_updates ? 100.0 * static_cast<double>(s.skipped_updates) / static_cast<double>(s.total_updates) : 0.0;
  std::snprintf(line, sizeof line, "skipped updates %zu of %zu (%.2f%%)\n", s.skipped_updates,
                s.total_updates, pct);
  out << line;
}

void write_tradeoff_csv(std::ostream& out, const std::vector<TradeoffRow>& rows) {
  out << "sweep_value,method,final_acc_mean,final_acc_std,comm_mb\n";
  for (const auto& r : rows)
    out << r.sweep_value << ',' << r.summary.method << ',' << fmt6(r.summary.final_acc.mean) << ','
        << fmt6(r.summary.final_acc.std) << ',' << fmt6(r.summary.comm_mb) << '\n';
}

}  // namespace kta::cli
