#include "kta/cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "kta/cli/config.hpp"
#include "kta/cli/report.hpp"
#include "kta/common/error.hpp"
#include "kta/federation/checkpoint.hpp"

namespace kta::cli {

namespace fs = std::filesystem;
using namespace federation;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string seeds;
  std::string metering;
  int workers = -1;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "config file (flat key = value)");
  cmd->add_option("--seeds", o.seeds, "comma-separated seeds, overrides run.seeds");
  cmd->add_option("--workers", o.workers, "client-parallel threads, overrides run.workers")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--metering", o.metering, "both | uplink_only, overrides run.metering");
}

ExperimentConfig resolve(const CommonOptions& o) {
  const auto env = environment_overrides();
  ExperimentConfig c = o.config_path.empty() ? parse_config("", env) : load_config(o.config_path, env);
  std::vector<std::string> errors;
  auto flag = [&](const char* key, const std::string& value) {
    try {
      set_key(c, key, value);
    } catch (const ConfigError& e) {
      errors.push_back(e.what());
    }
  };
  if (!o.seeds.empty()) flag("run.seeds", o.seeds);
  if (!o.metering.empty()) flag("run.metering", o.metering);
  if (o.workers >= 0) flag("run.workers", std::to_string(o.workers));
  if (errors.empty()) {
    try {
      c.validate();
    } catch (const ConfigError& e) {
      errors.push_back(e.what());
    }
  }
  if (!errors.empty()) {
    std::string msg;
    for (const auto& e : errors) msg += (msg.empty() ? "" : "\n") + e;
    throw ConfigError(msg);
  }
  return c;
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f << contents;
  if (!f) throw DataError("write failed for " + path.string());
}

RunSummary run_into(const ExperimentConfig& config, const fs::path& dir, bool checkpoint,
                    std::ostream& out) {
  fs::create_directories(dir);
  ExperimentResult result;
  const std::string dump = dump_config(config);
  for (std::uint64_t seed : config.seeds) {
    const auto full = make_dataset(config, seed);
    auto fed = make_federation(config, full, seed);
    result.runs.push_back(run_federation(fed, config.plan, seed));
    if (checkpoint)
      write_checkpoint(dir / ("checkpoint_seed" + std::to_string(seed) + ".bin"),
                       capture_checkpoint(fed, fnv1a64(dump), config.plan.rounds));
    out << "seed " << seed << " " << algorithm_name(config.plan.algorithm) << " final_acc "
        << fmt6(result.runs.back().rounds.back().agg_acc) << '\n';
  }
  std::ostringstream metrics, ledger, summary;
  write_metrics_csv(metrics, result);
  write_ledger_csv(ledger, result, config.plan.rounds);
  const auto s = summarize(config, result);
  write_summary(summary, config, s);
  write_file(dir / "metrics.csv", metrics.str());
  write_file(dir / "ledger.csv", ledger.str());
  write_file(dir / "summary.txt", summary.str());
  write_file(dir / "config.txt", dump);
  return s;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void partition_inspect(const ExperimentConfig& config, std::ostream& out) {
  const std::uint64_t seed = config.seeds.front();
  const auto full = make_dataset(config, seed);
  const auto fed = make_federation(config, full, seed);
  const std::size_t k = fed.train.class_count;
  std::vector<std::size_t> column(k, 0);
  double mean_share = 0.0;
  char buf[64];
  out << "client";
  for (std::size_t j = 0; j < k; ++j) out << ",c" << j;
  out << ",total,max_share\n";
  for (const auto& c : fed.clients) {
    std::vector<std::size_t> row(k, 0);
    for (std::size_t idx : c.shard) ++row[static_cast<std::size_t>(fed.train.labels[idx])];
    out << c.id;
    for (std::size_t j = 0; j < k; ++j) {
      out << ',' << row[j];
      column[j] += row[j];
    }
    const double share = static_cast<double>(*std::max_element(row.begin(), row.end())) /
                         static_cast<double>(c.shard.size());
    mean_share += share / static_cast<double>(fed.clients.size());
    std::snprintf(buf, sizeof buf, "%.3f", share);
    out << ',' << c.shard.size() << ',' << buf << '\n';
  }
  const auto expected = fed.train.class_counts();
  out << "total";
  for (std::size_t j = 0; j < k; ++j) out << ',' << column[j];
  out << ',' << fed.total_train_samples() << ",\n";
  out << "dataset";
  for (std::size_t j = 0; j < k; ++j) out << ',' << expected[j];
  out << ',' << fed.train.size() << ",\n";
  out << "conservation " << (column == expected ? "ok" : "FAILED") << '\n';
  const double uniform = 1.0 / static_cast<double>(k);
  const char* label = mean_share >= 0.5                               ? "high skew"
                      : mean_share <= uniform + 0.1 * (1.0 - uniform) ? "low skew"
                                                                      : "moderate skew";
  std::snprintf(buf, sizeof buf, "%.3f", mean_share);
  out << "mean max-class share " << buf << " (" << label << ")\n";
}

std::string one_line(std::string text) {
  for (std::size_t p; (p = text.find('\n')) != std::string::npos;) text.replace(p, 1, "; ");
  for (std::size_t p = 0; (p = text.find('"', p)) != std::string::npos; p += 2) text.replace(p, 1, "\\\"");
  return text;
}

int fail(std::ostream& err, const char* kind, const std::string& message, int code) {
  err << "error kind=" << kind << " message=\"" << one_line(message) << "\"\n";
  return code;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prediction-space federated learning simulator"};
  app.require_subcommand(1);

  CommonOptions run_opts, sweep_opts, inspect_opts, print_opts;
  std::string run_out = "out", sweep_out = "sweep";
  bool checkpoint = false;
  auto* run = app.add_subcommand("run", "run one experiment over every seed");
  add_common(run, run_opts);
  run->add_option("--out", run_out, "output directory");
  run->add_flag("--checkpoint", checkpoint, "write the final round state per seed");

  std::string param, values, methods;
  auto* sweep = app.add_subcommand("sweep", "run a base config once per value of one key");
  add_common(sweep, sweep_opts);
  sweep->add_option("--out", sweep_out, "output directory");
  sweep->add_option("--param", param, "config key to sweep")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();
  sweep->add_option("--methods", methods, "comma-separated algorithms (default: train.algorithm)");

  auto* inspect = app.add_subcommand("partition-inspect", "class histogram of the client partition");
  add_common(inspect, inspect_opts);
  auto* print = app.add_subcommand("print-config", "dump the resolved config with documentation");
  add_common(print, print_opts);
  auto* version = app.add_subcommand("version", "print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return fail(err, "usage", e.what(), kExitConfig);
  }

  try {
    if (*version) {
      out << "kta " << kVersion << '\n';
    } else if (*print) {
      out << dump_config(resolve(print_opts), true);
    } else if (*inspect) {
      partition_inspect(resolve(inspect_opts), out);
    } else if (*run) {
      const auto config = resolve(run_opts);
      const auto s = run_into(config, run_out, checkpoint, out);
      write_summary(out, config, s);
    } else if (*sweep) {
      const auto base = resolve(sweep_opts);
      if (!find_key(param)) throw ConfigError("sweep: unknown parameter '" + param + "'");
      const auto value_list = split_list(values);
      if (value_list.empty()) throw ConfigError("sweep: empty value list for '" + param + "'");
      auto method_list = split_list(methods);
      std::vector<std::pair<std::string, ExperimentConfig>> plan;
      std::vector<std::string> errors;
      for (const auto& v : value_list) {
        for (std::size_t m = 0; m < std::max<std::size_t>(1, method_list.size()); ++m) {
          ExperimentConfig c = base;
          fs::path dir = param + "=" + v;
          try {
            set_key(c, param, v);
            if (!method_list.empty()) {
              set_key(c, "train.algorithm", method_list[m]);
              dir /= method_list[m];
            }
            c.validate();
            plan.emplace_back(dir.string(), c);
          } catch (const ConfigError& e) {
            errors.push_back(dir.string() + ": " + e.what());
          }
        }
      }
      if (!errors.empty()) {
        std::string msg;
        for (const auto& e : errors) msg += (msg.empty() ? "" : "\n") + e;
        throw ConfigError(msg);
      }
      std::vector<TradeoffRow> rows;
      for (std::size_t i = 0; i < plan.size(); ++i) {
        const auto& [dir, c] = plan[i];
        const std::string value = value_list[i / std::max<std::size_t>(1, method_list.size())];
        rows.push_back({value, run_into(c, fs::path(sweep_out) / dir, false, out)});
      }
      std::ostringstream trade;
      write_tradeoff_csv(trade, rows);
      write_file(fs::path(sweep_out) / "tradeoff.csv", trade.str());
      out << trade.str();
    }
  } catch (const ConfigError& e) {
    return fail(err, "config", e.what(), kExitConfig);
  } catch (const DataError& e) {
    return fail(err, "data", e.what(), kExitRuntime);
  } catch (const std::exception& e) {
    return fail(err, "runtime", e.what(), kExitRuntime);
  }
  return kExitOk;
}

}  // namespace kta::cli
