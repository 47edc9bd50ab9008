// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails. Pass criterion numbers as
// arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kta/cli/commands.hpp"
#include "kta/common/error.hpp"
#include "kta/common/rng.hpp"
#include "kta/data/partition.hpp"
#include "kta/federation/experiment.hpp"
#include "kta/market/market.hpp"
#include "kta/nn/gradcheck.hpp"
#include "kta/nn/loss.hpp"

using namespace kta;
using namespace kta::federation;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

nn::Tensor2 random_tensor(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
  nn::Tensor2 t(r, c);
  for (double& v : t.values()) v = scale * rng.normal();
  return t;
}

std::vector<int> random_labels(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<int> y(n);
  for (int& v : y) v = static_cast<int>(rng.uniform_index(k));
  return y;
}

// The desk-scale synthetic benchmark: K = 3 blobs in d = 8, C = 8 clients.
ExperimentConfig benchmark(Algorithm algorithm, double alpha) {
  ExperimentConfig c;
  c.data.classes = 3;
  c.data.dim = 8;
  c.clients = 8;
  c.alpha = alpha;
  c.plan.algorithm = algorithm;
  c.plan.rounds = 10;
  c.seeds = {1, 2, 3};
  return c;
}

Outcome gradient_oracle() {
  Rng rng(2024);
  double worst = 0.0;
  int checks = 0;
  for (int cfg = 0; cfg < 20; ++cfg) {
    const std::size_t d = 2 + rng.uniform_index(5), k = 2 + rng.uniform_index(4);
    std::vector<std::size_t> hidden(1 + rng.uniform_index(2));
    for (auto& h : hidden) h = 3 + rng.uniform_index(6);
    const bool bn = cfg % 2 == 1;
    auto model = nn::MlpModel::build({d, hidden, k, bn}, 100 + cfg);
    const std::size_t n = 4 + rng.uniform_index(8);
    const auto x = random_tensor(n, d, rng);
    const auto y = random_labels(n, k, rng);
    const auto teacher = nn::softmax_rows(random_tensor(n, k, rng, 2.0), 1.0);
    std::vector<double> anchor(model.parameters().begin(), model.parameters().end());
    for (double& v : anchor) v += 0.1 * rng.normal();
    const double t = 0.5 + 3.0 * rng.uniform(), lambda = rng.uniform(), mu = 0.01 + rng.uniform();

    const nn::SupervisedPart sup{x, y};
    const nn::DistillPart dis{x, teacher};
    const std::vector<nn::LossClosure> parts{
        [&](nn::MlpModel& m) { return nn::combined_loss(m, &sup, nullptr, {0.0, t, 0.0}); },
        [&](nn::MlpModel& m) { return nn::combined_loss(m, nullptr, &dis, {1.0, t, 0.0}); },
        [&](nn::MlpModel& m) { return nn::combined_loss(m, nullptr, nullptr, {0.0, t, mu}, anchor); },
        [&](nn::MlpModel& m) { return nn::combined_loss(m, &sup, &dis, {lambda, t, mu}, anchor); },
    };
    for (const auto& loss : parts) {
      worst = std::max(worst, nn::gradient_check(model, loss));
      ++checks;
    }
  }
  return {worst <= 1e-4, fmt("max relative error %.2e over %d checks (20 models, 4 loss variants)", worst, checks)};
}

Outcome fedmd_reduction() {
  auto md = benchmark(Algorithm::fedmd, 0.3);
  md.plan.rounds = 3;
  auto kta = md;
  kta.plan.algorithm = Algorithm::kta_v2;
  kta.plan.market = {market::NeighborPolicy::full(true), market::Weighting::uniform, 1e-3};

  // Teachers round by round on live client states.
  double worst = 0.0;
  const std::uint64_t seed = 1;
  const auto full = make_dataset(md, seed);
  auto a = make_federation(md, full, seed), b = make_federation(kta, full, seed);
  for (std::size_t r = 1; r <= md.plan.rounds; ++r) {
    std::vector<market::LogitsMatrix> la, lb;
    for (std::size_t i = 0; i < a.clients.size(); ++i) {
      local_phase(a.clients[i], a.train, md.plan);
      local_phase(b.clients[i], b.train, kta.plan);
      la.push_back(evaluate_on_reference(a.clients[i], a.reference));
      lb.push_back(evaluate_on_reference(b.clients[i], b.reference));
    }
    const auto global = market::fedmd_global_teacher(la, md.plan.temperature);
    const auto graph = market::build_market(lb, b.reference.dataset.labels, kta.plan.market);
    const auto teachers = market::build_teachers(graph, lb, kta.plan.temperature);
    for (std::size_t i = 0; i < a.clients.size(); ++i) {
      for (std::size_t e = 0; e < global.size(); ++e)
        worst = std::max(worst, std::abs(global.values()[e] - teachers.teachers[i].values()[e]));
      distill_phase(a.clients[i], global, a.reference, md.plan);
      distill_phase(b.clients[i], teachers.teachers[i], b.reference, kta.plan);
    }
  }
  bool same_params = true;
  for (std::size_t i = 0; i < a.clients.size(); ++i)
    same_params = same_params && std::ranges::equal(a.clients[i].model.parameters(), b.clients[i].model.parameters());

  // Full runs through the round driver.
  const auto ra = run_experiment(md), rb = run_experiment(kta);
  bool same_metrics = true;
  for (std::size_t s = 0; s < ra.runs.size(); ++s)
    for (std::size_t r = 0; r < ra.runs[s].rounds.size(); ++r)
      for (std::size_t i = 0; i < md.clients; ++i) {
        const auto& x = ra.runs[s].rounds[r].clients[i];
        const auto& y = rb.runs[s].rounds[r].clients[i];
        same_metrics = same_metrics && x.test_acc == y.test_acc && x.test_loss == y.test_loss && x.ref_acc == y.ref_acc;
      }
  return {worst <= 1e-12 && same_params && same_metrics,
          fmt("max teacher difference %.1e; parameters %s; metrics over 3 seeds x 3 rounds %s", worst,
              same_params ? "bit-identical" : "DIFFER", same_metrics ? "bit-identical" : "DIFFER")};
}

Outcome market_arithmetic() {
  using namespace market;
  bool ok = true;
  std::string failed;
  auto expect = [&](bool cond, const char* what) {
    if (!cond) {
      ok = false;
      failed += std::string(" ") + what;
    }
  };
  const auto unit = flatten_normalize(nn::Tensor2::from_rows({{3, 4}}));
  expect(std::abs(unit[0] - 0.6) <= 1e-15 && std::abs(unit[1] - 0.8) <= 1e-15, "normalize");
  const std::vector<std::vector<double>> pair{flatten_normalize(nn::Tensor2::from_rows({{1, 0}, {0, 1}})),
                                              flatten_normalize(nn::Tensor2::from_rows({{1, 0}, {1, 0}}))};
  expect(std::abs(similarity_matrix(pair)[1] - 0.5) <= 1e-15, "similarity");
  expect(reference_accuracy(nn::Tensor2::from_rows({{2, 1}, {0, 3}, {5, 1}, {1, 1}}),
                            std::vector<int>{0, 1, 1, 0}) == 0.75,
         "accuracy");
  std::vector<double> s4(16, 0.0);
  s4[1] = 0.9, s4[2] = 0.9, s4[3] = 0.1;
  expect(select_neighbors(s4, 4, 0, {2, false}) == std::vector<std::size_t>{1, 2}, "neighbors");

  const std::vector<std::size_t> two{0, 1};
  const auto w = market_weights(std::vector<double>{0.8, 0.6}, std::vector<double>{0.5, 1.0}, two, 1e-3,
                                Weighting::similarity_accuracy);
  expect(!w.fallback && std::abs(w.weights[0] - 0.4) <= 1e-15 && std::abs(w.weights[1] - 0.6) <= 1e-15,
         "(0.4,0.6)");
  const auto fb = market_weights(std::vector<double>{-0.2, 0.0}, std::vector<double>{0.9, 0.9}, two, 1e-3,
                                 Weighting::similarity_accuracy);
  expect(fb.fallback && fb.weights == std::vector<double>{0.5, 0.5}, "fallback");

  const auto za = nn::Tensor2::from_rows({{std::log(2.0), 0.0}});
  const auto zb = nn::Tensor2::from_rows({{0.0, std::log(2.0)}});
  const std::vector<const LogitsMatrix*> mirror{&za, &zb};
  const auto q = teacher_ensemble(mirror, std::vector<double>{0.5, 0.5}, 1.0);
  expect(std::abs(q(0, 0) - 0.5) <= 1e-15 && std::abs(q(0, 1) - 0.5) <= 1e-15, "mirror");

  Rng rng(7);
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t c = 1 + rng.uniform_index(30);
    std::vector<double> row(c), acc(c);
    for (double& s : row) s = 2.0 * rng.uniform() - 1.0;
    for (double& a : acc) a = rng.uniform() < 0.1 ? 0.0 : rng.uniform();
    std::vector<std::size_t> nbrs;
    for (std::size_t j = 0; j < c; ++j)
      if (rng.uniform() < 0.6) nbrs.push_back(j);
    if (nbrs.empty()) nbrs.push_back(rng.uniform_index(c));
    const auto r = market_weights(row, acc, nbrs, 1e-3, Weighting::similarity_accuracy);
    double total = 0.0;
    for (double x : r.weights) total += x;
    worst = std::max(worst, std::abs(total - 1.0));
  }
  expect(worst <= 1e-12, "normalization");
  return {ok, fmt("unit examples %s; weight sums within %.1e of 1 over 10000 trials", ok ? "exact" : "FAILED",
                  worst) + failed};
}

std::uint64_t closed_form(Algorithm a, std::size_t rounds, std::size_t c, std::size_t p, std::size_t n_ref,
                          std::size_t k, MeteringView view) {
  const std::uint64_t directions = view == MeteringView::both ? 2 : 1;
  if (exchanges_parameters(a)) return rounds * c * directions * p * kBytesPerScalar;
  if (exchanges_logits(a)) return rounds * c * directions * n_ref * k * kBytesPerScalar;
  return 0;
}

Outcome communication_accounting() {
  Rng rng(4);
  int configs = 0, mismatches = 0;
  for (int trial = 0; trial < 25; ++trial) {
    ExperimentConfig c;
    c.data.classes = 2 + rng.uniform_index(4);
    c.data.dim = 2 + rng.uniform_index(6);
    c.data.per_class = 40 + rng.uniform_index(40);
    c.clients = 2 + rng.uniform_index(5);
    c.n_ref = 10 + rng.uniform_index(30);
    c.hidden = {2 + rng.uniform_index(8)};
    c.alpha = 0.2 + rng.uniform();
    c.plan.rounds = 1 + rng.uniform_index(3);
    c.plan.distill_epochs = 1;
    c.plan.batch_size = 32;
    c.seeds = {rng.next_u64() % 1000};
    for (Algorithm a : {Algorithm::local, Algorithm::fedavg, Algorithm::fedprox, Algorithm::fedmd,
                        Algorithm::kta_v2}) {
      c.plan.algorithm = a;
      const auto r = run_experiment(c);
      const auto& run = r.runs[0];
      const std::size_t p = nn::MlpModel::build({c.data.dim, c.hidden, c.data.classes, false}, 0).parameter_count();
      const auto& last = run.rounds.back();
      ++configs;
      if (run.ledger.total() != closed_form(a, c.plan.rounds, c.clients, p, c.n_ref, c.data.classes, MeteringView::both) ||
          run.ledger.total(MeteringView::uplink_only) !=
              closed_form(a, c.plan.rounds, c.clients, p, c.n_ref, c.data.classes, MeteringView::uplink_only) ||
          last.comm_up_cum + last.comm_down_cum != run.ledger.total())
        ++mismatches;
    }
  }

  // Uplink metering of real logit-exchange runs at N_ref = 2000 against fixed targets.
  struct Shape {
    const char* name;
    std::size_t rounds, clients, n_ref, classes;
    double target_mb;
  };
  std::string cross;
  bool within = true;
  for (const Shape& s : {Shape{"R10 C10 K4", 10, 10, 2000, 4, 3.1}, Shape{"R5 C10 K10", 5, 10, 2000, 10, 3.8},
                         Shape{"R10 C20 K62", 10, 20, 2000, 62, 94.6}}) {
    ExperimentConfig c;
    c.data.classes = s.classes;
    c.data.dim = 4;
    c.data.per_class = (2000 + 600) / s.classes + 8 * s.clients;
    c.clients = s.clients;
    c.n_ref = s.n_ref;
    c.alpha = 1.0;
    c.hidden = {4};
    c.plan.algorithm = Algorithm::kta_v2;
    c.plan.rounds = s.rounds;
    c.plan.distill_epochs = 1;
    c.plan.batch_size = 256;
    c.seeds = {1};
    const auto r = run_experiment(c);
    const double mb = megabytes(r.runs[0].ledger.total(MeteringView::uplink_only));
    const double rel = std::abs(mb - s.target_mb) / s.target_mb;
    within = within && rel <= 0.10;
    const auto expect = closed_form(Algorithm::kta_v2, s.rounds, s.clients, 0, s.n_ref, s.classes, MeteringView::uplink_only);
    within = within && r.runs[0].ledger.total(MeteringView::uplink_only) == expect;
    cross += fmt("; %s %.3f MB vs %.1f (%.1f%%)", s.name, mb, s.target_mb, 100.0 * rel);
  }
  return {mismatches == 0 && within,
          fmt("%d/%d randomized runs integer-exact", configs - mismatches, configs) + cross};
}

Outcome dirichlet_partitioner() {
  Rng rng(5);
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 2 + rng.uniform_index(9);
    const auto d = data::synth_blobs(k, 4, 5 + rng.uniform_index(40), 0.5, rng.next_u64());
    const std::size_t c = std::min<std::size_t>(2 + rng.uniform_index(15), d.size() / data::kDefaultMinClientSamples);
    const double alpha = std::exp(rng.uniform() * 9.0 - 4.5);
    const auto p = data::dirichlet_partition(d, c, alpha, rng.next_u64());
    std::vector<int> seen(d.size(), 0);
    for (const auto& shard : p.client_shards)
      for (std::size_t idx : shard) ++seen[idx];
    if (!std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; })) ++bad;
  }

  Rng draws(2024);
  std::vector<double> xs(10000);
  for (double& x : xs) x = draws.dirichlet(1.0, 2)[0];
  std::sort(xs.begin(), xs.end());
  double ks = 0.0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    ks = std::max({ks, std::abs(static_cast<double>(i + 1) / n - xs[i]), std::abs(xs[i] - static_cast<double>(i) / n)});

  const auto d = data::synth_blobs(10, 10, 100, 0.5, 1);
  int skewed = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    double share = 0.0;
    for (const auto& row : data::dirichlet_partition(d, 10, 0.1, seed).histogram(d)) {
      const auto total = std::accumulate(row.begin(), row.end(), std::size_t{0});
      share += static_cast<double>(*std::max_element(row.begin(), row.end())) / static_cast<double>(total);
    }
    skewed += share / 10.0 >= 0.5;
  }
  return {bad == 0 && ks < 0.05 && skewed >= 90,
          fmt("conservation holds on %d/1000 configs; KS %.4f; alpha=0.1 skew on %d/100 seeds", 1000 - bad, ks, skewed)};
}

Outcome consensus_property() {
  auto c = benchmark(Algorithm::kta_v2, 0.3);
  c.plan.lambda = 1.0;
  c.plan.optimizer = nn::OptimizerKind::sgd;
  c.plan.learning_rate = 1e-3;
  c.plan.track_consensus = true;
  int decreased = 0, total = 0;
  run_experiment(c, [&](std::uint64_t, const RoundMetrics& m) {
    if (!m.dispersion) return;
    ++total;
    decreased += m.dispersion->second < m.dispersion->first;
  });
  return {total == 30 && decreased >= 27,
          fmt("dispersion decreased in %d/%d (round, seed) pairs (SGD, lr 1e-3, lambda 1)", decreased, total)};
}

struct OrderingRuns {
  ExperimentResult local, fedavg, fedmd, kta;
  std::size_t params = 0;
};

const OrderingRuns& ordering_runs() {
  static const OrderingRuns runs = [] {
    OrderingRuns r;
    auto c = benchmark(Algorithm::local, 0.3);
    c.hidden = {256, 192};
    r.params = nn::MlpModel::build({c.data.dim, c.hidden, c.data.classes, c.batchnorm}, 0).parameter_count();
    r.local = run_experiment(c);
    c.plan.algorithm = Algorithm::fedavg;
    r.fedavg = run_experiment(c);
    c.plan.algorithm = Algorithm::fedmd;
    r.fedmd = run_experiment(c);
    c.plan.algorithm = Algorithm::kta_v2;
    r.kta = run_experiment(c);
    return r;
  }();
  return runs;
}

Outcome qualitative_ordering() {
  const auto& r = ordering_runs();
  const auto c = benchmark(Algorithm::kta_v2, 0.3);
  const bool precondition = r.params * 2 >= 10 * c.n_ref * c.data.classes * 2;
  const double local = mean_std(final_accuracies(r.local)).mean;
  const double fedmd = mean_std(final_accuracies(r.fedmd)).mean;
  const double kta = mean_std(final_accuracies(r.kta)).mean;
  const auto kta_bytes = r.kta.runs[0].ledger.total();
  const auto avg_bytes = r.fedavg.runs[0].ledger.total();
  const bool a = kta - local >= 0.05;
  const bool b = precondition && kta_bytes * 10 <= avg_bytes;
  const bool cc = kta >= fedmd - 0.01;
  return {r.params >= 50000 && a && b && cc,
          fmt("P=%zu; (a) KTA %.4f vs Local %.4f %s; (b) comm %.3f MB vs FedAvg %.3f MB (1/%.1f) %s; "
              "(c) vs FedMD %.4f %s",
              r.params, kta, local, a ? "ok" : "FAIL", megabytes(kta_bytes), megabytes(avg_bytes),
              static_cast<double>(avg_bytes) / static_cast<double>(kta_bytes), b ? "ok" : "FAIL", fedmd,
              cc ? "ok" : "FAIL")};
}

Outcome heterogeneity_trend() {
  double avg[2], kta[2];
  const double alphas[2] = {0.1, 1.0};
  std::string extra;
  for (int i = 0; i < 2; ++i) {
    avg[i] = mean_std(final_accuracies(run_experiment(benchmark(Algorithm::fedavg, alphas[i])))).mean;
    kta[i] = mean_std(final_accuracies(run_experiment(benchmark(Algorithm::kta_v2, alphas[i])))).mean;
  }
  const double avg_mid = mean_std(final_accuracies(run_experiment(benchmark(Algorithm::fedavg, 0.5)))).mean;
  const double kta_mid = mean_std(final_accuracies(run_experiment(benchmark(Algorithm::kta_v2, 0.5)))).mean;
  const bool a = avg[1] - avg[0] >= 0.03;
  const bool b = std::abs(kta[1] - kta[0]) <= 0.05;
  return {a && b, fmt("FedAvg %.4f / %.4f / %.4f, KTA %.4f / %.4f / %.4f at alpha 0.1 / 0.5 / 1.0", avg[0], avg_mid,
                      avg[1], kta[0], kta_mid, kta[1])};
}

Outcome drift_variance() {
  const auto& r = ordering_runs();
  int wins = 0;
  std::string detail;
  for (std::size_t s = 0; s < r.kta.runs.size(); ++s) {
    double vk = 0.0, va = 0.0;
    const auto& rk = r.kta.runs[s].rounds;
    const auto& ra = r.fedavg.runs[s].rounds;
    for (std::size_t t = 1; t < rk.size(); ++t) {
      vk += rk[t].acc_variance;
      va += ra[t].acc_variance;
    }
    vk /= static_cast<double>(rk.size() - 1);
    va /= static_cast<double>(ra.size() - 1);
    wins += vk <= va;
    detail += fmt("%sseed %llu: %.2e vs %.2e", s ? "; " : "", static_cast<unsigned long long>(r.kta.runs[s].seed), vk, va);
  }
  return {wins >= 2, fmt("KTA variance <= FedAvg in %d/3 seeds (", wins) + detail + ")"};
}

Outcome bn_safe_rule() {
  std::string detail;
  bool ok = true;
  for (Algorithm a : {Algorithm::local, Algorithm::fedavg, Algorithm::fedprox, Algorithm::fedmd, Algorithm::kta_v2}) {
    auto c = benchmark(a, 0.3);
    c.batchnorm = true;
    c.plan.rounds = 3;
    c.seeds = {1};
    const auto full = make_dataset(c, 1);
    auto fed = make_federation(c, full, 1);
    fed.clients[0].shard.resize(1);
    std::size_t skipped = 0;
    try {
      const auto run = run_federation(fed, c.plan, 1);
      skipped = run.rounds.back().skipped_updates;
    } catch (const std::exception& e) {
      ok = false;
      detail += fmt(" %s threw: %s;", std::string(algorithm_name(a)).c_str(), e.what());
      continue;
    }
    ok = ok && skipped > 0;

    auto unsafe = c.plan;
    unsafe.bn_safe = false;
    auto fresh = make_federation(c, full, 1);
    fresh.clients[0].shard.resize(1);
    const auto before = fresh.clients;
    bool violated = false;
    try {
      run_round(fresh, unsafe, 1);
    } catch (const ContractViolation& e) {
      violated = std::string(e.what()).find("BatchNorm") != std::string::npos;
    }
    bool rolled_back = true;
    for (std::size_t i = 0; i < before.size(); ++i)
      rolled_back = rolled_back && fresh.clients[i].model == before[i].model;
    ok = ok && violated && rolled_back;
    detail += fmt(" %s skipped %zu, unguarded %s;", std::string(algorithm_name(a)).c_str(), skipped,
                  violated ? "violates" : "NO VIOLATION");
  }
  return {ok, "single-sample client:" + detail};
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "kta_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  bool same = true;
  std::string detail;
  const std::vector<std::pair<const char*, const char*>> configs{
      {"kta_v2", "train.rounds = 3\nrun.seeds = 1,2\n"},
      {"fedavg_bn", "train.algorithm = fedavg\nmodel.batchnorm = true\ntrain.rounds = 3\nrun.seeds = 4\n"},
      {"fedmd", "train.algorithm = fedmd\ntrain.rounds = 2\nmarket.k = 3\nrun.seeds = 5\n"},
  };
  for (const auto& [name, text] : configs) {
    const auto cfg = root / (std::string(name) + ".cfg");
    std::ofstream(cfg) << text;
    std::string outputs[2];
    int i = 0;
    for (const char* workers : {"1", "8"}) {
      const auto dir = root / (std::string(name) + "_w" + workers);
      const std::string cfg_s = cfg.string(), dir_s = dir.string();
      const char* argv[] = {"kta", "run", "--config", cfg_s.c_str(), "--out", dir_s.c_str(), "--workers", workers};
      std::ostringstream out, err;
      if (cli::run_cli(8, argv, out, err) != 0) same = false;
      std::ifstream f(dir / "metrics.csv", std::ios::binary);
      std::stringstream ss;
      ss << f.rdbuf();
      outputs[i++] = ss.str();
    }
    const bool eq = !outputs[0].empty() && outputs[0] == outputs[1];
    same = same && eq;
    detail += fmt("%s%s %zu bytes %s", detail.empty() ? "" : "; ", name, outputs[0].size(), eq ? "identical" : "DIFFER");
  }
  return {same, "--workers 1 vs 8: " + detail};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "gradient oracle", gradient_oracle},
      {2, "FedMD reduction identity", fedmd_reduction},
      {3, "market-weight arithmetic", market_arithmetic},
      {4, "communication accounting", communication_accounting},
      {5, "Dirichlet partitioner", dirichlet_partitioner},
      {6, "consensus property", consensus_property},
      {7, "qualitative ordering", qualitative_ordering},
      {8, "heterogeneity trend", heterogeneity_trend},
      {9, "drift variance", drift_variance},
      {10, "BN-safe rule", bn_safe_rule},
      {11, "determinism across workers", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::printf("criterion %2d %s  %s: %s [%.1f s]\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
