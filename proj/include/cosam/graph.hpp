#pragma once

#include "cosam/dataset.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace cosam {

// Immutable bipartite interaction graph over train positives, stored as CSR
// in both directions. Nodes live in a single id space [0, n + m): users
// first, items offset by n. Adjacency rows are sorted and duplicate-free.
class InteractionGraph {
  public:
    InteractionGraph() = default;

    static InteractionGraph build(const ImplicitDataset& train);

    std::int32_t num_users() const { return n_; }
    std::int32_t num_items() const { return m_; }
    std::int64_t num_edges() const { return static_cast<std::int64_t>(user_items_.size()); }
    std::int32_t num_nodes() const { return n_ + m_; }

    bool is_user_node(std::int32_t node) const { return node < n_; }
    std::int32_t item_node(std::int32_t item) const { return n_ + item; }
    std::int32_t item_of_node(std::int32_t node) const { return node - n_; }

    // Rows store local indices: a user's row holds item ids in [0, m), an
    // item's row holds user ids in [0, n).
    std::span<const std::int32_t> user_neighbors(std::int32_t u) const;
    std::span<const std::int32_t> item_neighbors(std::int32_t i) const;
    std::int32_t user_degree(std::int32_t u) const;
    std::int32_t item_degree(std::int32_t i) const;

    // Node-id dispatch over the same local rows: a user node's row still
    // holds item ids in [0, m) and an item node's row user ids in [0, n).
    // Walk code stepping user -> item must map targets through item_node.
    std::span<const std::int32_t> neighbors(std::int32_t node) const;
    std::int32_t degree(std::int32_t node) const;

    bool has_edge(std::int32_t u, std::int32_t i) const;

    // Offset of the k-th edge in a row, addressing the directed-edge arrays:
    // user->item edges occupy [0, E), item->user edges [E, 2E).
    std::int64_t user_edge_offset(std::int32_t u) const { return user_ptr_[u]; }
    std::int64_t item_edge_offset(std::int32_t i) const {
        return num_edges() + item_ptr_[i];
    }
    std::int64_t edge_offset(std::int32_t node) const {
        return is_user_node(node) ? user_edge_offset(node) : item_edge_offset(node - n_);
    }
    std::int64_t num_directed_edges() const { return 2 * num_edges(); }

  private:
    void check_user(std::int32_t u) const;
    void check_item(std::int32_t i) const;

    std::int32_t n_ = 0;
    std::int32_t m_ = 0;
    std::vector<std::int64_t> user_ptr_; // n+1
    std::vector<std::int32_t> user_items_;
    std::vector<std::int64_t> item_ptr_; // m+1
    std::vector<std::int32_t> item_users_;
};

} // namespace cosam
