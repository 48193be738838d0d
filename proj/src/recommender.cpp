#include "cosam/recommender.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cosam {

RecommenderModel RecommenderModel::init(std::int32_t n, std::int32_t m,
                                        const RecommenderConfig& cfg, std::uint64_t seed) {
    if (cfg.dim < 1) throw std::invalid_argument("recommender: dim must be >= 1");
    if (n < 0 || m < 0) throw std::invalid_argument("recommender: negative dimensions");
    RecommenderModel model;
    model.n_ = n;
    model.m_ = m;
    model.d_ = cfg.dim;
    model.lambda_ = cfg.lambda;
    model.user_emb_.resize(static_cast<std::size_t>(n) * cfg.dim);
    model.item_emb_.resize(static_cast<std::size_t>(m) * cfg.dim);
    SplitMix64 rng(make_stream(seed, kRngInitEmbeddings, 0, 0));
    for (double& x : model.user_emb_) x = cfg.init_scale * rng.next_gaussian();
    for (double& x : model.item_emb_) x = cfg.init_scale * rng.next_gaussian();
    return model;
}

void RecommenderModel::check_ids(std::int32_t u, std::int32_t i) const {
    if (u < 0 || u >= n_)
        throw std::out_of_range("recommender: user " + std::to_string(u) + " out of range");
    if (i < 0 || i >= m_)
        throw std::out_of_range("recommender: item " + std::to_string(i) + " out of range");
}

std::span<const double> RecommenderModel::user_embedding(std::int32_t u) const {
    check_ids(u, 0);
    return {user_emb_.data() + static_cast<std::size_t>(u) * d_, static_cast<std::size_t>(d_)};
}

std::span<const double> RecommenderModel::item_embedding(std::int32_t i) const {
    check_ids(0, i);
    return {item_emb_.data() + static_cast<std::size_t>(i) * d_, static_cast<std::size_t>(d_)};
}

double RecommenderModel::predict_fr(std::int32_t u, std::int32_t i) const {
    check_ids(u, i);
    const double* p = user_emb_.data() + static_cast<std::size_t>(u) * d_;
    const double* q = item_emb_.data() + static_cast<std::size_t>(i) * d_;
    double dot = 0.0;
    for (std::int32_t k = 0; k < d_; ++k) dot += p[k] * q[k];
    const double f = 1.0 / (1.0 + std::exp(-dot));
    return std::clamp(f, kClampEps, 1.0 - kClampEps);
}

double RecommenderModel::reward(const InteractionGraph& graph, std::int32_t u,
                                std::int32_t i) const {
    if (graph.has_edge(u, i)) return 0.0;
    return std::log(1.0 - predict_fr(u, i));
}

double RecommenderModel::objective(const InteractionGraph& graph,
                                   std::span<const SampleBatch> batches) const {
    double total = 0.0;
    for (const SampleBatch& batch : batches) {
        const std::int32_t u = batch.user;
        for (std::int32_t i : graph.user_neighbors(u)) total += std::log(predict_fr(u, i));
        for (std::int32_t k : batch.rest_idx)
            total += std::log(1.0 - predict_fr(u, batch.items[k]));
    }
    return total;
}

void RecommenderModel::touched_rows(const InteractionGraph& graph,
                                    std::span<const SampleBatch> batches,
                                    std::vector<std::int32_t>& users,
                                    std::vector<std::int32_t>& items) const {
    users.clear();
    items.clear();
    for (const SampleBatch& batch : batches) {
        users.push_back(batch.user);
        auto row = graph.user_neighbors(batch.user);
        items.insert(items.end(), row.begin(), row.end());
        items.insert(items.end(), batch.items.begin(), batch.items.end());
    }
    std::sort(users.begin(), users.end());
    users.erase(std::unique(users.begin(), users.end()), users.end());
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
}

double RecommenderModel::regularized_objective(const InteractionGraph& graph,
                                               std::span<const SampleBatch> batches) const {
    double total = objective(graph, batches);
    std::vector<std::int32_t> users, items;
    touched_rows(graph, batches, users, items);
    double sq = 0.0;
    for (std::int32_t u : users)
        for (double x : user_embedding(u)) sq += x * x;
    for (std::int32_t i : items)
        for (double x : item_embedding(i)) sq += x * x;
    return total - lambda_ * sq;
}

void RecommenderModel::gradient(const InteractionGraph& graph,
                                std::span<const SampleBatch> batches,
                                std::vector<double>& user_grad,
                                std::vector<double>& item_grad) const {
    if (user_grad.size() != user_emb_.size() || item_grad.size() != item_emb_.size())
        throw std::invalid_argument("recommender: gradient buffer size mismatch");
    auto axpy = [this](double a, const double* x, double* y) {
        for (std::int32_t k = 0; k < d_; ++k) y[k] += a * x[k];
    };
    for (const SampleBatch& batch : batches) {
        const std::int32_t u = batch.user;
        const double* p = user_emb_.data() + static_cast<std::size_t>(u) * d_;
        double* gp = user_grad.data() + static_cast<std::size_t>(u) * d_;
        for (std::int32_t i : graph.user_neighbors(u)) {
            const double coef = 1.0 - predict_fr(u, i);
            axpy(coef, item_emb_.data() + static_cast<std::size_t>(i) * d_, gp);
            axpy(coef, p, item_grad.data() + static_cast<std::size_t>(i) * d_);
        }
        for (std::int32_t k : batch.rest_idx) {
            const std::int32_t i = batch.items[k];
            const double coef = -predict_fr(u, i);
            axpy(coef, item_emb_.data() + static_cast<std::size_t>(i) * d_, gp);
            axpy(coef, p, item_grad.data() + static_cast<std::size_t>(i) * d_);
        }
    }
    std::vector<std::int32_t> users, items;
    touched_rows(graph, batches, users, items);
    for (std::int32_t u : users)
        axpy(-2.0 * lambda_, user_emb_.data() + static_cast<std::size_t>(u) * d_,
             user_grad.data() + static_cast<std::size_t>(u) * d_);
    for (std::int32_t i : items)
        axpy(-2.0 * lambda_, item_emb_.data() + static_cast<std::size_t>(i) * d_,
             item_grad.data() + static_cast<std::size_t>(i) * d_);
}

void RecommenderModel::apply_gradient(const std::vector<double>& user_grad,
                                      const std::vector<double>& item_grad,
                                      AdamOptimizer& user_opt, AdamOptimizer& item_opt) {
    user_opt.ascend(user_emb_, user_grad);
    item_opt.ascend(item_emb_, item_grad);
}

} // namespace cosam
