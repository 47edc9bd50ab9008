#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "kta/cli/commands.hpp"
#include "kta/cli/config.hpp"
#include "kta/cli/report.hpp"
#include "kta/common/error.hpp"

#ifndef KTA_GOLDEN_DIR
#error "KTA_GOLDEN_DIR must point at tests/golden"
#endif

using namespace kta;
using namespace kta::cli;
namespace fs = std::filesystem;

namespace {

const char* kSmall =
    "data.per_class = 60\n"
    "partition.clients = 4\n"
    "reference.size = 40\n"
    "model.hidden = 8\n"
    "train.rounds = 2\n"
    "train.distill_epochs = 2\n"
    "train.batch_size = 16\n"
    "run.seeds = 3\n";

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "kta");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("kta_cli_" + name);
  fs::remove_all(p);
  return p;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const auto p = fs::temp_directory_path() / ("kta_cli_" + name + ".cfg");
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing and overrides") {
  const auto c = parse_config("# comment\ntrain.lambda = 0.25  # trailing\n\npartition.clients=5\n");
  CHECK(c.plan.lambda == 0.25);
  CHECK(c.clients == 5);
  CHECK(c.plan.distill_epochs == 5);

  const auto e = parse_config("train.lambda = 0.25\n", {{"KTA_TRAIN__LAMBDA", "0.75"}, {"KTA_MARKET__K", "all"}});
  CHECK(e.plan.lambda == 0.75);
  CHECK_FALSE(e.plan.market.policy.k.has_value());
  CHECK(env_name("market.include_self") == "KTA_MARKET__INCLUDE_SELF");

  try {
    parse_config("nonsense\nfoo.bar = 1\ntrain.rounds = -3\ntrain.rounds = 4\n", {{"KTA_NOPE", "1"}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    const std::string msg = err.what();
    CHECK(msg.find("line 1: expected key = value") != std::string::npos);
    CHECK(msg.find("line 2: unknown key 'foo.bar'") != std::string::npos);
    CHECK(msg.find("line 3: train.rounds") != std::string::npos);
    CHECK(msg.find("line 4: duplicate key") != std::string::npos);
    CHECK(msg.find("KTA_NOPE") != std::string::npos);
  }
}

TEST_CASE("dump_config round trips and documents every key") {
  auto c = parse_config("model.hidden = 32,16\nrun.seeds = 4,5\ntrain.algorithm = fedprox\nmarket.k = all\n");
  const auto dump = dump_config(c);
  CHECK(dump_config(parse_config(dump)) == dump);
  const auto documented = dump_config(c, true);
  for (const auto& k : config_schema()) CHECK(documented.find(k.name + " = ") != std::string::npos);
  CHECK(dump_config(parse_config("")).find("train.batch_size = 64\n") != std::string::npos);
  CHECK(dump_config(parse_config("")).find("train.mu = 0.01\n") != std::string::npos);
  CHECK(dump_config(parse_config("")).find("train.learning_rate = 0.001\n") != std::string::npos);
  CHECK(dump_config(parse_config("")).find("market.k = 5\n") != std::string::npos);
}

TEST_CASE("summary of planted accuracies") {
  federation::ExperimentConfig c;
  c.seeds = {1, 2, 3};
  RunSummary s{"kta_v2", federation::mean_std({0.70, 0.72, 0.74}), 0.576, 0, 10};
  std::ostringstream out;
  write_summary(out, c, s);
  CHECK(out.str().find("kta_v2    0.720 ± 0.016    0.576\n") != std::string::npos);

  std::ostringstream t;
  write_tradeoff_csv(t, {{"0.1", s}});
  CHECK(t.str() == "sweep_value,method,final_acc_mean,final_acc_std,comm_mb\n0.1,kta_v2,0.72,0.0163299,0.576\n");
}

TEST_CASE("cli exit codes and error lines") {
  CHECK(invoke({"version"}).out == std::string("kta ") + kVersion + "\n");
  const auto none = invoke({});
  CHECK(none.code == kExitConfig);
  CHECK(none.err.rfind("error kind=usage message=", 0) == 0);

  const auto bad = invoke({"print-config", "--config", write_config("bad", "train.lambda = 3\nx = 1\n").string()});
  CHECK(bad.code == kExitConfig);
  CHECK(std::count(bad.err.begin(), bad.err.end(), '\n') == 1);
  CHECK(bad.err.find("unknown key 'x'") != std::string::npos);
  CHECK(bad.err.find("lambda") != std::string::npos);

  const auto missing = invoke({"run", "--config", "/nonexistent/kta.cfg"});
  CHECK(missing.code == kExitConfig);

  const auto data = invoke({"run", "--config",
                         write_config("data", "data.source = csv\ndata.path = /nonexistent.csv\n").string(),
                         "--out", scratch("data").string()});
  CHECK(data.code == kExitRuntime);
  CHECK(data.err.rfind("error kind=data", 0) == 0);
}

TEST_CASE("run outputs: golden metrics, zero ledger for local, twin seeds, workers") {
  const auto cfg = write_config("small", kSmall);
  const auto dir = scratch("run");
  REQUIRE(invoke({"run", "--config", cfg.string(), "--out", dir.string()}).code == 0);
  const auto metrics = slurp(dir / "metrics.csv");
  CHECK(metrics == slurp(fs::path(KTA_GOLDEN_DIR) / "metrics_small.csv"));
  CHECK(metrics.rfind(
            "seed,round,client_id,test_acc,test_loss,ref_acc,comm_up_bytes_cum,comm_down_bytes_cum,acc_variance\n",
            0) == 0);
  CHECK(fs::exists(dir / "summary.txt"));
  CHECK(fs::exists(dir / "ledger.csv"));

  const auto par = scratch("run_par");
  REQUIRE(invoke({"run", "--config", cfg.string(), "--out", par.string(), "--workers", "4"}).code == 0);
  CHECK(slurp(par / "metrics.csv") == metrics);

  const auto twin = scratch("twin");
  REQUIRE(invoke({"run", "--config", cfg.string(), "--out", twin.string(), "--seeds", "3,3"}).code == 0);
  const auto both = slurp(twin / "metrics.csv");
  const auto body = metrics.substr(metrics.find('\n') + 1);
  CHECK(both == metrics + body);

  const auto local = scratch("local");
  REQUIRE(invoke({"run", "--config", write_config("local", std::string(kSmall) + "train.algorithm = local\n").string(),
               "--out", local.string()})
              .code == 0);
  std::istringstream ledger(slurp(local / "ledger.csv"));
  std::string line;
  std::getline(ledger, line);
  std::size_t rows = 0;
  while (std::getline(ledger, line)) {
    ++rows;
    CHECK(line.substr(line.rfind(',') + 1) == "0");
  }
  CHECK(rows == 2 * 4 * 4);
}

TEST_CASE("sweep: directories, tradeoff, validation before work") {
  const auto cfg = write_config("sweep", kSmall);
  const auto dir = scratch("sweep");
  const auto r = invoke({"sweep", "--config", cfg.string(), "--out", dir.string(), "--param", "partition.alpha",
                      "--values", "0.1,0.5,1.0"});
  REQUIRE(r.code == 0);
  for (const char* v : {"0.1", "0.5", "1.0"})
    CHECK(fs::exists(dir / (std::string("partition.alpha=") + v) / "metrics.csv"));
  const auto trade = slurp(dir / "tradeoff.csv");
  CHECK(std::count(trade.begin(), trade.end(), '\n') == 4);

  const auto bad = invoke({"sweep", "--config", cfg.string(), "--out", scratch("sweep_bad").string(), "--param",
                        "train.nonsense", "--values", "1"});
  CHECK(bad.code == kExitConfig);
  CHECK(bad.err.find("train.nonsense") != std::string::npos);

  const auto empty_dir = scratch("sweep_empty");
  const auto empty = invoke({"sweep", "--config", cfg.string(), "--out", empty_dir.string(), "--param",
                          "partition.alpha", "--values", ","});
  CHECK(empty.code == kExitConfig);
  CHECK_FALSE(fs::exists(empty_dir));

  const auto invalid = invoke({"sweep", "--config", cfg.string(), "--out", empty_dir.string(), "--param",
                            "partition.alpha", "--values", "0.5,-1"});
  CHECK(invalid.code == kExitConfig);
  CHECK_FALSE(fs::exists(empty_dir));
}

TEST_CASE("partition-inspect") {
  const auto low = invoke({"partition-inspect", "--config",
                        write_config("pi_low", "partition.alpha = 1000\n").string()});
  REQUIRE(low.code == 0);
  CHECK(low.out.find("conservation ok") != std::string::npos);
  CHECK(low.out.find("(low skew)") != std::string::npos);

  const auto high = invoke({"partition-inspect", "--config",
                         write_config("pi_high",
                                      "partition.alpha = 0.1\npartition.clients = 10\ndata.classes = 10\n"
                                      "data.dim = 10\ndata.per_class = 130\n")
                             .string()});
  REQUIRE(high.code == 0);
  CHECK(high.out.find("(high skew)") != std::string::npos);
}
