#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "kta/nn/tensor.hpp"

// Prediction-space knowledge market. Every client contributes its logits on
// the shared reference set; the server turns them into a cosine-similarity
// graph, scores each client by reference accuracy, and builds a personal
// teacher distribution per client from its best-matching peers.
namespace kta::market {

using LogitsMatrix = nn::Tensor2;

enum class Weighting { similarity_accuracy, uniform };

struct NeighborPolicy {
  std::optional<std::size_t> k = 5;  // nullopt selects every other client
  bool include_self = false;

  static NeighborPolicy full(bool include_self) { return {std::nullopt, include_self}; }
};

struct MarketConfig {
  NeighborPolicy policy;
  Weighting weighting = Weighting::similarity_accuracy;
  double epsilon = 1e-3;
};

struct MarketGraph {
  std::size_t clients = 0;
  std::vector<double> similarity;  // C x C, row-major
  std::vector<double> accuracy;    // alpha_j
  std::vector<std::vector<std::size_t>> neighbors;
  std::vector<std::vector<double>> weights;  // aligned with neighbors
  std::vector<bool> degenerate;              // all-zero logits, excluded from the similarity graph
  std::size_t fallback_count = 0;            // clients whose weights fell back to uniform
  MarketConfig config;

  double s(std::size_t i, std::size_t j) const { return similarity[i * clients + j]; }
  std::span<const double> similarity_row(std::size_t i) const {
    return {similarity.data() + i * clients, clients};
  }
};

struct TeacherSet {
  std::vector<nn::Tensor2> teachers;  // per client, N_ref x K probability rows
  double temperature = 1.0;
};

class DegenerateLogits : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Row-major flatten, L2-normalized. Throws DegenerateLogits for an all-zero
// matrix.
std::vector<double> flatten_normalize(const LogitsMatrix& logits);

// S_ij = <v_i, v_j> with unit diagonal, exact symmetry, entries clamped to
// [-1, 1]. Rejects inputs whose norm is off by more than 1e-6.
std::vector<double> similarity_matrix(std::span<const std::vector<double>> unit_vectors);

// Fraction of rows whose argmax (lowest index on ties) equals the label.
double reference_accuracy(const LogitsMatrix& logits, std::span<const int> labels);

// Neighbor set of client i, ascending by client index. kNN keeps the k
// largest S_ij (j != i; lowest index on ties), k capped at C - 1.
std::vector<std::size_t> select_neighbors(std::span<const double> similarity, std::size_t clients,
                                          std::size_t i, const NeighborPolicy& policy);

struct WeightResult {
  std::vector<double> weights;
  bool fallback = false;  // every similarity clipped to zero
};

// similarity_accuracy: w_ij proportional to max(S_ij, 0) * max(alpha_j, eps),
// uniform over N(i) when all of those vanish. uniform: 1 / |N(i)|.
WeightResult market_weights(std::span<const double> similarity_row,
                            std::span<const double> accuracy,
                            std::span<const std::size_t> neighbors, double epsilon,
                            Weighting weighting);

// q_i(r, .) = sum_j w_j softmax_t(Z_j(r, .), T), neighbors summed in order.
nn::Tensor2 teacher_ensemble(std::span<const LogitsMatrix* const> neighbor_logits,
                             std::span<const double> weights, double temperature);

// (1/C) sum_c softmax_t(Z_c, T): the single shared teacher.
nn::Tensor2 fedmd_global_teacher(std::span<const LogitsMatrix> logits, double temperature);

// Full server-side market step for one round.
MarketGraph build_market(std::span<const LogitsMatrix> logits, std::span<const int> reference_labels,
                         const MarketConfig& config);

TeacherSet build_teachers(const MarketGraph& graph, std::span<const LogitsMatrix> logits,
                          double temperature);

// CSV dumps for offline inspection: S as a C x C grid; per-client alpha and
// neighbor weights as (client, neighbor, similarity, accuracy, weight) rows.
void write_similarity_csv(std::ostream& out, const MarketGraph& graph);
void write_weights_csv(std::ostream& out, const MarketGraph& graph);

}  // namespace kta::market
