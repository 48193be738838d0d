#include "cosam/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace cosam {

InteractionGraph InteractionGraph::build(const ImplicitDataset& train) {
    InteractionGraph g;
    g.n_ = train.n;
    g.m_ = train.m;
    if (g.n_ < 1 || g.m_ < 1)
        throw std::invalid_argument("graph: need at least one user and one item");

    std::vector<std::pair<std::int32_t, std::int32_t>> pairs = train.pairs;
    for (auto [u, i] : pairs) {
        if (u < 0 || u >= g.n_ || i < 0 || i >= g.m_)
            throw std::out_of_range("graph: pair (" + std::to_string(u) + ", " +
                                    std::to_string(i) + ") outside vocab range");
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    g.user_ptr_.assign(g.n_ + 1, 0);
    g.item_ptr_.assign(g.m_ + 1, 0);
    for (auto [u, i] : pairs) {
        ++g.user_ptr_[u + 1];
        ++g.item_ptr_[i + 1];
    }
    for (std::int32_t u = 0; u < g.n_; ++u) g.user_ptr_[u + 1] += g.user_ptr_[u];
    for (std::int32_t i = 0; i < g.m_; ++i) g.item_ptr_[i + 1] += g.item_ptr_[i];

    g.user_items_.resize(pairs.size());
    g.item_users_.resize(pairs.size());
    std::vector<std::int64_t> ucur(g.user_ptr_.begin(), g.user_ptr_.end() - 1);
    std::vector<std::int64_t> icur(g.item_ptr_.begin(), g.item_ptr_.end() - 1);
    for (auto [u, i] : pairs) {
        g.user_items_[ucur[u]++] = i;
        g.item_users_[icur[i]++] = u; // pairs sorted by u, so each item row ends up sorted
    }
    return g;
}

void InteractionGraph::check_user(std::int32_t u) const {
    if (u < 0 || u >= n_)
        throw std::out_of_range("graph: user " + std::to_string(u) + " out of range [0, " +
                                std::to_string(n_) + ")");
}

void InteractionGraph::check_item(std::int32_t i) const {
    if (i < 0 || i >= m_)
        throw std::out_of_range("graph: item " + std::to_string(i) + " out of range [0, " +
                                std::to_string(m_) + ")");
}

std::span<const std::int32_t> InteractionGraph::user_neighbors(std::int32_t u) const {
    check_user(u);
    return {user_items_.data() + user_ptr_[u],
            static_cast<std::size_t>(user_ptr_[u + 1] - user_ptr_[u])};
}

std::span<const std::int32_t> InteractionGraph::item_neighbors(std::int32_t i) const {
    check_item(i);
    return {item_users_.data() + item_ptr_[i],
            static_cast<std::size_t>(item_ptr_[i + 1] - item_ptr_[i])};
}

std::int32_t InteractionGraph::user_degree(std::int32_t u) const {
    check_user(u);
    return static_cast<std::int32_t>(user_ptr_[u + 1] - user_ptr_[u]);
}

std::int32_t InteractionGraph::item_degree(std::int32_t i) const {
    check_item(i);
    return static_cast<std::int32_t>(item_ptr_[i + 1] - item_ptr_[i]);
}

std::span<const std::int32_t> InteractionGraph::neighbors(std::int32_t node) const {
    if (node < 0 || node >= num_nodes())
        throw std::out_of_range("graph: node " + std::to_string(node) + " out of range");
    return node < n_ ? user_neighbors(node) : item_neighbors(node - n_);
}

std::int32_t InteractionGraph::degree(std::int32_t node) const {
    if (node < 0 || node >= num_nodes())
        throw std::out_of_range("graph: node " + std::to_string(node) + " out of range");
    return node < n_ ? user_degree(node) : item_degree(node - n_);
}

bool InteractionGraph::has_edge(std::int32_t u, std::int32_t i) const {
    check_user(u);
    check_item(i);
    auto row = user_neighbors(u);
    return std::binary_search(row.begin(), row.end(), i);
}

} // namespace cosam
