#include "kta/cli/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "kta/common/error.hpp"

extern char** environ;

namespace kta::cli {

using federation::Algorithm;
using federation::DataSource;
using federation::MeteringView;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::size_t to_size(std::string_view s) {
  s = trim(s);
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw std::invalid_argument("expected a non-negative integer, got '" + std::string(s) + "'");
  return v;
}

double to_double(std::string_view s) {
  s = trim(s);
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw std::invalid_argument("expected a number, got '" + std::string(s) + "'");
  return v;
}

bool to_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument("expected true or false, got '" + std::string(s) + "'");
}

template <class T, class Fn>
std::vector<T> to_list(std::string_view s, Fn&& parse) {
  std::vector<T> out;
  s = trim(s);
  if (s.empty()) return out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(parse(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

template <class T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::string b(bool v) { return v ? "true" : "false"; }

std::vector<ConfigKey> build_schema() {
  std::vector<ConfigKey> k;
  auto add = [&](std::string name, std::string help, auto get, auto set) {
    k.push_back({std::move(name), std::move(help), get, set});
  };
  using C = ExperimentConfig;
  using SV = std::string_view;

  add("data.source", "synthetic | csv | idx",
      [](const C& c) -> std::string {
        switch (c.data.source) {
          case DataSource::synthetic: return "synthetic";
          case DataSource::csv: return "csv";
          case DataSource::idx: return "idx";
        }
        return "?";
      },
      [](C& c, SV v) {
        v = trim(v);
        if (v == "synthetic") c.data.source = DataSource::synthetic;
        else if (v == "csv") c.data.source = DataSource::csv;
        else if (v == "idx") c.data.source = DataSource::idx;
        else throw std::invalid_argument("expected synthetic, csv or idx");
      });
  add("data.classes", "synthetic: number of blobs K",
      [](const C& c) { return std::to_string(c.data.classes); },
      [](C& c, SV v) { c.data.classes = to_size(v); });
  add("data.dim", "synthetic: feature dimension d",
      [](const C& c) { return std::to_string(c.data.dim); },
      [](C& c, SV v) { c.data.dim = to_size(v); });
  add("data.per_class", "synthetic: samples per class",
      [](const C& c) { return std::to_string(c.data.per_class); },
      [](C& c, SV v) { c.data.per_class = to_size(v); });
  add("data.spread", "synthetic: isotropic noise std around unit-norm centres",
      [](const C& c) { return format_double(c.data.spread); },
      [](C& c, SV v) { c.data.spread = to_double(v); });
  add("data.path", "csv or idx feature file",
      [](const C& c) { return c.data.path.string(); },
      [](C& c, SV v) { c.data.path = std::string(trim(v)); });
  add("data.labels_path", "idx label file",
      [](const C& c) { return c.data.labels_path.string(); },
      [](C& c, SV v) { c.data.labels_path = std::string(trim(v)); });
  add("split.test_fraction", "share of the data held out as the shared test set",
      [](const C& c) { return format_double(c.test_fraction); },
      [](C& c, SV v) { c.test_fraction = to_double(v); });
  add("reference.size", "N_ref, labelled reference rows shared by all clients",
      [](const C& c) { return std::to_string(c.n_ref); },
      [](C& c, SV v) { c.n_ref = to_size(v); });
  add("partition.clients", "number of clients C",
      [](const C& c) { return std::to_string(c.clients); },
      [](C& c, SV v) { c.clients = to_size(v); });
  add("partition.alpha", "Dirichlet concentration; smaller is more skewed",
      [](const C& c) { return format_double(c.alpha); },
      [](C& c, SV v) { c.alpha = to_double(v); });
  add("partition.min_client_samples", "repair floor for starved clients",
      [](const C& c) { return std::to_string(c.min_client_samples); },
      [](C& c, SV v) { c.min_client_samples = to_size(v); });
  add("model.hidden", "comma-separated hidden widths (empty for a linear model)",
      [](const C& c) { return join(c.hidden); },
      [](C& c, SV v) { c.hidden = to_list<std::size_t>(v, to_size); });
  add("model.batchnorm", "BatchNorm after every hidden dense layer",
      [](const C& c) { return b(c.batchnorm); },
      [](C& c, SV v) { c.batchnorm = to_bool(v); });
  add("train.algorithm", "local | fedavg | fedprox | fedmd | kta_v2",
      [](const C& c) { return std::string(federation::algorithm_name(c.plan.algorithm)); },
      [](C& c, SV v) {
        auto a = federation::parse_algorithm(trim(v));
        if (!a) throw std::invalid_argument("expected local, fedavg, fedprox, fedmd or kta_v2");
        c.plan.algorithm = *a;
      });
  add("train.rounds", "communication rounds",
      [](const C& c) { return std::to_string(c.plan.rounds); },
      [](C& c, SV v) { c.plan.rounds = to_size(v); });
  add("train.local_epochs", "supervised epochs on the private shard per round",
      [](const C& c) { return std::to_string(c.plan.local_epochs); },
      [](C& c, SV v) { c.plan.local_epochs = to_size(v); });
  add("train.distill_epochs", "distillation epochs on the reference set per round",
      [](const C& c) { return std::to_string(c.plan.distill_epochs); },
      [](C& c, SV v) { c.plan.distill_epochs = to_size(v); });
  add("train.batch_size", "minibatch size",
      [](const C& c) { return std::to_string(c.plan.batch_size); },
      [](C& c, SV v) { c.plan.batch_size = to_size(v); });
  add("train.lambda", "distillation weight in [0, 1]",
      [](const C& c) { return format_double(c.plan.lambda); },
      [](C& c, SV v) { c.plan.lambda = to_double(v); });
  add("train.temperature", "softmax temperature T",
      [](const C& c) { return format_double(c.plan.temperature); },
      [](C& c, SV v) { c.plan.temperature = to_double(v); });
  add("train.mu", "FedProx proximal weight",
      [](const C& c) { return format_double(c.plan.mu); },
      [](C& c, SV v) { c.plan.mu = to_double(v); });
  add("train.optimizer", "adam | sgd",
      [](const C& c) { return std::string(c.plan.optimizer == nn::OptimizerKind::adam ? "adam" : "sgd"); },
      [](C& c, SV v) {
        v = trim(v);
        if (v == "adam") c.plan.optimizer = nn::OptimizerKind::adam;
        else if (v == "sgd") c.plan.optimizer = nn::OptimizerKind::sgd;
        else throw std::invalid_argument("expected adam or sgd");
      });
  add("train.learning_rate", "optimizer step size",
      [](const C& c) { return format_double(c.plan.learning_rate); },
      [](C& c, SV v) { c.plan.learning_rate = to_double(v); });
  add("train.reset_optimizer_on_install", "fedavg/fedprox: clear Adam moments when global params arrive",
      [](const C& c) { return b(c.plan.reset_optimizer_on_install); },
      [](C& c, SV v) { c.plan.reset_optimizer_on_install = to_bool(v); });
  add("train.bn_safe", "skip updates on batches of one sample",
      [](const C& c) { return b(c.plan.bn_safe); },
      [](C& c, SV v) { c.plan.bn_safe = to_bool(v); });
  add("train.track_consensus", "record logit dispersion around each distill phase",
      [](const C& c) { return b(c.plan.track_consensus); },
      [](C& c, SV v) { c.plan.track_consensus = to_bool(v); });
  add("market.k", "neighbors per client, or 'all'",
      [](const C& c) { return c.plan.market.policy.k ? std::to_string(*c.plan.market.policy.k) : std::string("all"); },
      [](C& c, SV v) {
        if (trim(v) == "all") c.plan.market.policy.k.reset();
        else c.plan.market.policy.k = to_size(v);
      });
  add("market.include_self", "client is its own neighbor",
      [](const C& c) { return b(c.plan.market.policy.include_self); },
      [](C& c, SV v) { c.plan.market.policy.include_self = to_bool(v); });
  add("market.weighting", "similarity_accuracy | uniform",
      [](const C& c) {
        return std::string(c.plan.market.weighting == market::Weighting::uniform ? "uniform" : "similarity_accuracy");
      },
      [](C& c, SV v) {
        v = trim(v);
        if (v == "uniform") c.plan.market.weighting = market::Weighting::uniform;
        else if (v == "similarity_accuracy") c.plan.market.weighting = market::Weighting::similarity_accuracy;
        else throw std::invalid_argument("expected similarity_accuracy or uniform");
      });
  add("market.epsilon", "accuracy floor in the weights",
      [](const C& c) { return format_double(c.plan.market.epsilon); },
      [](C& c, SV v) { c.plan.market.epsilon = to_double(v); });
  add("run.seeds", "comma-separated seed list",
      [](const C& c) { return join(c.seeds); },
      [](C& c, SV v) {
        c.seeds = to_list<std::uint64_t>(v, [](SV s) { return static_cast<std::uint64_t>(to_size(s)); });
      });
  add("run.workers", "client-parallel threads (0 = OpenMP default)",
      [](const C& c) { return std::to_string(c.plan.workers); },
      [](C& c, SV v) { c.plan.workers = static_cast<int>(to_size(v)); });
  add("run.metering", "both | uplink_only, view used in summary and tradeoff",
      [](const C& c) { return std::string(c.metering == MeteringView::both ? "both" : "uplink_only"); },
      [](C& c, SV v) {
        v = trim(v);
        if (v == "both") c.metering = MeteringView::both;
        else if (v == "uplink_only") c.metering = MeteringView::uplink_only;
        else throw std::invalid_argument("expected both or uplink_only");
      });
  return k;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, p);
}

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = build_schema();
  return schema;
}

const ConfigKey* find_key(std::string_view name) {
  for (const auto& k : config_schema())
    if (k.name == name) return &k;
  return nullptr;
}

std::string env_name(std::string_view key) {
  std::string out = "KTA_";
  for (char ch : key) {
    if (ch == '.') out += "__";
    else out += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  }
  return out;
}

std::map<std::string, std::string> environment_overrides() {
  std::map<std::string, std::string> out;
  for (char** e = environ; e && *e; ++e) {
    std::string_view kv(*e);
    if (kv.substr(0, 4) != "KTA_") continue;
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) continue;
    out.emplace(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
  }
  return out;
}

void set_key(ExperimentConfig& config, std::string_view key, std::string_view value) {
  const auto* k = find_key(key);
  if (!k) throw ConfigError("unknown key '" + std::string(key) + "'");
  try {
    k->set(config, value);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

ExperimentConfig parse_config(std::string_view text, const std::map<std::string, std::string>& env) {
  ExperimentConfig config;
  std::vector<std::string> errors;
  std::map<std::string, std::size_t> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = "line " + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back(where + "expected key = value");
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    if (auto [it, fresh] = seen.emplace(key, line_no); !fresh) {
      errors.push_back(where + "duplicate key '" + key + "' (first on line " + std::to_string(it->second) + ")");
      continue;
    }
    try {
      set_key(config, key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      errors.push_back(where + e.what());
    }
  }
  for (const auto& k : config_schema()) {
    auto it = env.find(env_name(k.name));
    if (it == env.end()) continue;
    try {
      set_key(config, k.name, it->second);
    } catch (const ConfigError& e) {
      errors.push_back(it->first + ": " + e.what());
    }
  }
  for (const auto& [name, value] : env) {
    bool known = false;
    for (const auto& k : config_schema()) known = known || env_name(k.name) == name;
    if (!known) errors.push_back(name + ": no config key maps to this variable");
  }
  try {
    config.validate();
  } catch (const ConfigError& e) {
    std::istringstream lines(e.what());
    for (std::string l; std::getline(lines, l);) errors.push_back(l);
  }
  if (!errors.empty()) {
    std::string msg;
    for (const auto& e : errors) msg += (msg.empty() ? "" : "\n") + e;
    throw ConfigError(msg);
  }
  return config;
}

ExperimentConfig load_config(const std::string& path, const std::map<std::string, std::string>& env) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), env);
}

std::string dump_config(const ExperimentConfig& config, bool with_help) {
  std::string out;
  for (const auto& k : config_schema()) {
    out += k.name + " = " + k.get(config);
    if (with_help) out += "  # " + k.help;
    out += '\n';
  }
  return out;
}

}  // namespace kta::cli
