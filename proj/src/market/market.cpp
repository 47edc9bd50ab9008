#include "kta/market/market.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <string>

#include "kta/common/error.hpp"
#include "kta/common/parallel.hpp"
#include "kta/nn/kernels.hpp"
#include "kta/nn/loss.hpp"

namespace kta::market {

namespace {

nn::Tensor2 mix_softmax(std::span<const LogitsMatrix* const> logits, std::span<const double> weights,
                        double temperature) {
  KTA_REQUIRE(!logits.empty(), "teacher: no contributing clients");
  KTA_REQUIRE(logits.size() == weights.size(), "teacher: weight count != neighbor count");
  const std::size_t rows = logits.front()->rows();
  const std::size_t cols = logits.front()->cols();
  std::vector<nn::Tensor2> probs;
  probs.reserve(logits.size());
  for (const auto* z : logits) {
    KTA_REQUIRE(z->rows() == rows && z->cols() == cols, "teacher: logits shape mismatch");
    probs.push_back(nn::softmax_rows(*z, temperature));
  }
  std::vector<std::span<const double>> inputs;
  for (const auto& p : probs) inputs.push_back(p.values());
  nn::Tensor2 out(rows, cols);
  kernels::weighted_sum(inputs, weights, out.values());
  return out;
}

}  // namespace

std::vector<double> flatten_normalize(const LogitsMatrix& logits) {
  KTA_REQUIRE(logits.all_finite(), "flatten_normalize: non-finite logits");
  const auto v = logits.values();
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (sq == 0.0) throw DegenerateLogits("flatten_normalize: all-zero logits");
  const double norm = std::sqrt(sq);
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= norm;
  return out;
}

std::vector<double> similarity_matrix(std::span<const std::vector<double>> unit_vectors) {
  const std::size_t c = unit_vectors.size();
  KTA_REQUIRE(c >= 1, "similarity_matrix: no vectors");
  const std::size_t len = unit_vectors.front().size();
  std::vector<double> packed;
  packed.reserve(c * len);
  for (const auto& v : unit_vectors) {
    KTA_REQUIRE(v.size() == len, "similarity_matrix: vector length mismatch");
    double sq = 0.0;
    for (double x : v) sq += x * x;
    KTA_REQUIRE(std::abs(std::sqrt(sq) - 1.0) <= 1e-6, "similarity_matrix: vector is not unit norm");
    packed.insert(packed.end(), v.begin(), v.end());
  }
  std::vector<double> s(c * c);
  kernels::gram(packed, s, c, len);
  for (std::size_t i = 0; i < c; ++i) {
    s[i * c + i] = 1.0;
    for (std::size_t j = 0; j < c; ++j) s[i * c + j] = std::clamp(s[i * c + j], -1.0, 1.0);
  }
  return s;
}

double reference_accuracy(const LogitsMatrix& logits, std::span<const int> labels) {
  KTA_REQUIRE(labels.size() == logits.rows(), "reference_accuracy: label count != rows");
  KTA_REQUIRE(logits.rows() > 0, "reference_accuracy: empty reference set");
  std::size_t correct = 0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto row = logits.row(r);
    // max_element returns the first maximum: lowest index wins ties.
    const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best == labels[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

std::vector<std::size_t> select_neighbors(std::span<const double> similarity, std::size_t clients,
                                          std::size_t i, const NeighborPolicy& policy) {
  KTA_REQUIRE(clients >= 2, "select_neighbors: need at least 2 clients");
  KTA_REQUIRE(i < clients, "select_neighbors: client index out of range");
  KTA_REQUIRE(similarity.size() == clients * clients, "select_neighbors: similarity shape");
  if (policy.k) KTA_REQUIRE(*policy.k > 0, "select_neighbors: k must be positive");

  std::vector<std::size_t> peers;
  for (std::size_t j = 0; j < clients; ++j)
    if (j != i) peers.push_back(j);
  if (policy.k && *policy.k < peers.size()) {
    const auto row = similarity.subspan(i * clients, clients);
    std::stable_sort(peers.begin(), peers.end(),
                     [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
    peers.resize(*policy.k);
  }
  if (policy.include_self) peers.push_back(i);
  std::sort(peers.begin(), peers.end());
  return peers;
}

WeightResult market_weights(std::span<const double> similarity_row,
                            std::span<const double> accuracy,
                            std::span<const std::size_t> neighbors, double epsilon,
                            Weighting weighting) {
  KTA_REQUIRE(!neighbors.empty(), "market_weights: empty neighbor set");
  KTA_REQUIRE(epsilon > 0.0, "market_weights: epsilon must be > 0");
  for (std::size_t j : neighbors)
    KTA_REQUIRE(j < similarity_row.size() && j < accuracy.size(),
                "market_weights: neighbor index out of range");
  const double n = static_cast<double>(neighbors.size());
  WeightResult out;
  out.weights.assign(neighbors.size(), 1.0 / n);
  if (weighting == Weighting::uniform) return out;

  std::vector<double> raw(neighbors.size());
  double total = 0.0;
  for (std::size_t m = 0; m < neighbors.size(); ++m) {
    const std::size_t j = neighbors[m];
    raw[m] = std::max(similarity_row[j], 0.0) * std::max(accuracy[j], epsilon);
    total += raw[m];
  }
  if (total <= 0.0) {
    out.fallback = true;
    return out;
  }
  for (std::size_t m = 0; m < raw.size(); ++m) out.weights[m] = raw[m] / total;
  return out;
}

nn::Tensor2 teacher_ensemble(std::span<const LogitsMatrix* const> neighbor_logits,
                             std::span<const double> weights, double temperature) {
  double total = 0.0;
  for (double w : weights) {
    KTA_REQUIRE(w >= 0.0, "teacher_ensemble: negative weight");
    total += w;
  }
  KTA_REQUIRE(std::abs(total - 1.0) <= 1e-9, "teacher_ensemble: weights do not sum to 1");
  return mix_softmax(neighbor_logits, weights, temperature);
}

nn::Tensor2 fedmd_global_teacher(std::span<const LogitsMatrix> logits, double temperature) {
  KTA_REQUIRE(!logits.empty(), "fedmd_global_teacher: no clients");
  std::vector<const LogitsMatrix*> ptrs;
  for (const auto& z : logits) ptrs.push_back(&z);
  const std::vector<double> weights(logits.size(), 1.0 / static_cast<double>(logits.size()));
  return mix_softmax(ptrs, weights, temperature);
}

MarketGraph build_market(std::span<const LogitsMatrix> logits, std::span<const int> reference_labels,
                         const MarketConfig& config) {
  const std::size_t c = logits.size();
  KTA_REQUIRE(c >= 1, "build_market: no clients");
  MarketGraph g;
  g.clients = c;
  g.config = config;
  g.degenerate.assign(c, false);

  std::vector<std::vector<double>> unit;
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < c; ++i) {
    KTA_REQUIRE(logits[i].rows() == logits[0].rows() && logits[i].cols() == logits[0].cols(),
                "build_market: logits shape mismatch");
    try {
      unit.push_back(flatten_normalize(logits[i]));
      live.push_back(i);
    } catch (const DegenerateLogits&) {
      g.degenerate[i] = true;
    }
  }
  // Degenerate clients have zero similarity to everyone but themselves.
  g.similarity.assign(c * c, 0.0);
  for (std::size_t i = 0; i < c; ++i) g.similarity[i * c + i] = 1.0;
  if (!live.empty()) {
    const auto s_live = similarity_matrix(unit);
    for (std::size_t a = 0; a < live.size(); ++a)
      for (std::size_t b = 0; b < live.size(); ++b)
        g.similarity[live[a] * c + live[b]] = s_live[a * live.size() + b];
  }

  g.accuracy.resize(c);
  for (std::size_t i = 0; i < c; ++i) g.accuracy[i] = reference_accuracy(logits[i], reference_labels);

  g.neighbors.resize(c);
  g.weights.resize(c);
  for (std::size_t i = 0; i < c; ++i) {
    if (c == 1) {
      g.neighbors[i] = {i};
    } else {
      g.neighbors[i] = select_neighbors(g.similarity, c, i, config.policy);
    }
    if (g.neighbors[i].empty()) continue;
    auto w = market_weights(g.similarity_row(i), g.accuracy, g.neighbors[i], config.epsilon,
                            config.weighting);
    g.weights[i] = std::move(w.weights);
    if (w.fallback) ++g.fallback_count;
  }
  return g;
}

TeacherSet build_teachers(const MarketGraph& graph, std::span<const LogitsMatrix> logits,
                          double temperature) {
  KTA_REQUIRE(logits.size() == graph.clients, "build_teachers: client count mismatch");
  TeacherSet out;
  out.temperature = temperature;
  out.teachers.resize(graph.clients);
  // Per-client teachers are independent once the graph is fixed.
  parallel_for(graph.clients, 0, [&](std::size_t i) {
    std::vector<const LogitsMatrix*> ptrs;
    for (std::size_t j : graph.neighbors[i]) ptrs.push_back(&logits[j]);
    out.teachers[i] = teacher_ensemble(ptrs, graph.weights[i], temperature);
  });
  return out;
}

void write_similarity_csv(std::ostream& out, const MarketGraph& graph) {
  out << std::setprecision(6);
  for (std::size_t i = 0; i < graph.clients; ++i) {
    for (std::size_t j = 0; j < graph.clients; ++j) out << (j ? "," : "") << graph.s(i, j);
    out << '\n';
  }
}

void write_weights_csv(std::ostream& out, const MarketGraph& graph) {
  out << std::setprecision(6) << "client,neighbor,similarity,accuracy,weight\n";
  for (std::size_t i = 0; i < graph.clients; ++i)
    for (std::size_t m = 0; m < graph.neighbors[i].size(); ++m) {
      const std::size_t j = graph.neighbors[i][m];
      out << i << ',' << j << ',' << graph.s(i, j) << ',' << graph.accuracy[j] << ','
          << graph.weights[i][m] << '\n';
    }
}

}  // namespace kta::market
