#pragma once

#include "cosam/graph.hpp"
#include "cosam/optimizer.hpp"
#include "cosam/sampler.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace cosam {

struct RecommenderConfig {
    std::int32_t dim = 32;
    double lambda = 1e-5;
    double init_scale = 0.1;
};

// Matrix factorization with a Bernoulli likelihood: f_r(u,i) is the sigmoid
// of the embedding dot product, clamped away from {0,1} so log terms stay
// finite.
class RecommenderModel {
  public:
    static constexpr double kClampEps = 1e-7;

    RecommenderModel() = default;
    static RecommenderModel init(std::int32_t n, std::int32_t m, const RecommenderConfig& cfg,
                                 std::uint64_t seed);

    std::int32_t num_users() const { return n_; }
    std::int32_t num_items() const { return m_; }
    std::int32_t dim() const { return d_; }
    double lambda() const { return lambda_; }

    std::span<const double> user_embedding(std::int32_t u) const;
    std::span<const double> item_embedding(std::int32_t i) const;
    std::vector<double>& user_parameters() { return user_emb_; }
    std::vector<double>& item_parameters() { return item_emb_; }
    const std::vector<double>& user_parameters() const { return user_emb_; }
    const std::vector<double>& item_parameters() const { return item_emb_; }

    double predict_fr(std::int32_t u, std::int32_t i) const;

    // e_ui = (1 - x_ui) * log(1 - f_r): zero for train positives, increasingly
    // negative the more confidently the recommender scores a non-positive.
    double reward(const InteractionGraph& graph, std::int32_t u, std::int32_t i) const;

    // Sum over batch users of  sum_{i in X_u} log f_r(u,i)
    //                        + sum_{a in G_u} (1 - x_ua) * log(1 - f_r(u,a)).
    double objective(const InteractionGraph& graph, std::span<const SampleBatch> batches) const;

    // Same quantity minus lambda * ||touched embeddings||^2; this is the
    // function the gradient below differentiates.
    double regularized_objective(const InteractionGraph& graph,
                                 std::span<const SampleBatch> batches) const;

    // Exact gradient of regularized_objective. Accumulates into dense
    // per-matrix buffers (n*d and m*d); untouched rows stay zero.
    void gradient(const InteractionGraph& graph, std::span<const SampleBatch> batches,
                  std::vector<double>& user_grad, std::vector<double>& item_grad) const;

    void apply_gradient(const std::vector<double>& user_grad, const std::vector<double>& item_grad,
                        AdamOptimizer& user_opt, AdamOptimizer& item_opt);

  private:
    void check_ids(std::int32_t u, std::int32_t i) const;
    void touched_rows(const InteractionGraph& graph, std::span<const SampleBatch> batches,
                      std::vector<std::int32_t>& users, std::vector<std::int32_t>& items) const;

    std::int32_t n_ = 0, m_ = 0, d_ = 0;
    double lambda_ = 1e-5;
    std::vector<double> user_emb_; // n x d row-major
    std::vector<double> item_emb_; // m x d row-major
};

} // namespace cosam
