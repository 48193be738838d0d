#include "doctest.h"

#include "cosam/graph.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <vector>

using cosam::ImplicitDataset;
using cosam::InteractionGraph;

namespace {

ImplicitDataset tiny(std::int32_t n, std::int32_t m,
                     std::vector<std::pair<std::int32_t, std::int32_t>> pairs) {
    ImplicitDataset ds;
    ds.n = n;
    ds.m = m;
    ds.pairs = std::move(pairs);
    return ds;
}

} // namespace

TEST_CASE("build transposes pairs into both adjacency directions") {
    const auto g = InteractionGraph::build(tiny(2, 2, {{0, 0}, {0, 1}, {1, 1}}));
    CHECK(g.user_degree(0) == 2);
    CHECK(g.user_degree(1) == 1);
    CHECK(g.item_degree(0) == 1);
    CHECK(g.item_degree(1) == 2);
    const auto u0 = g.user_neighbors(0);
    CHECK(std::vector<std::int32_t>(u0.begin(), u0.end()) == std::vector<std::int32_t>{0, 1});
    const auto i1 = g.item_neighbors(1);
    CHECK(std::vector<std::int32_t>(i1.begin(), i1.end()) == std::vector<std::int32_t>{0, 1});
}

TEST_CASE("single pair gives degree one on both sides") {
    const auto g = InteractionGraph::build(tiny(1, 1, {{0, 0}}));
    CHECK(g.user_degree(0) == 1);
    CHECK(g.item_degree(0) == 1);
    CHECK(g.num_edges() == 1);
}

TEST_CASE("duplicate pairs collapse to one edge") {
    const auto g = InteractionGraph::build(tiny(1, 2, {{0, 1}, {0, 1}, {0, 0}}));
    CHECK(g.num_edges() == 2);
    CHECK(g.user_degree(0) == 2);
}

TEST_CASE("membership matches has_edge") {
    const auto ds = oracle::random_dataset(8, 9, 0.3, 4);
    const auto g = InteractionGraph::build(ds);
    std::vector<std::vector<bool>> x(ds.n, std::vector<bool>(ds.m, false));
    for (auto [u, i] : ds.pairs) x[u][i] = true;
    for (std::int32_t u = 0; u < ds.n; ++u)
        for (std::int32_t i = 0; i < ds.m; ++i) CHECK(g.has_edge(u, i) == x[u][i]);
}

TEST_CASE("transposition identity") {
    const auto ds = oracle::random_dataset(7, 5, 0.4, 11);
    const auto g = InteractionGraph::build(ds);

    ImplicitDataset t;
    t.n = ds.m;
    t.m = ds.n;
    for (auto [u, i] : ds.pairs) t.pairs.emplace_back(i, u);
    const auto gt = InteractionGraph::build(t);

    for (std::int32_t u = 0; u < ds.n; ++u) {
        const auto a = g.user_neighbors(u);
        const auto b = gt.item_neighbors(u);
        REQUIRE(a.size() == b.size());
        for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j] == b[j]);
    }
}

TEST_CASE("neighbors of an isolated node are empty") {
    const auto g = InteractionGraph::build(tiny(3, 3, {{0, 0}, {1, 1}}));
    CHECK(g.user_degree(2) == 0);
    CHECK(g.user_neighbors(2).empty());
    CHECK(g.item_degree(2) == 0);
}

TEST_CASE("out-of-range ids are rejected") {
    const auto g = InteractionGraph::build(tiny(2, 2, {{0, 0}}));
    CHECK_THROWS_AS(g.user_neighbors(2), std::exception);
    CHECK_THROWS_AS(g.item_neighbors(-1), std::exception);
    CHECK_THROWS_AS(g.degree(4), std::exception);
    CHECK_THROWS_AS((void)g.neighbors(-1), std::exception);
}

TEST_CASE("build rejects out-of-range pairs and empty input") {
    CHECK_THROWS_AS(InteractionGraph::build(tiny(2, 2, {{0, 2}})), std::exception);
    CHECK_THROWS_AS(InteractionGraph::build(tiny(0, 0, {})), std::exception);
}

TEST_CASE("edge offsets index directed edges consistently") {
    const auto ds = oracle::random_dataset(6, 7, 0.35, 3);
    const auto g = InteractionGraph::build(ds);
    CHECK(g.num_directed_edges() == 2 * g.num_edges());
    // User rows tile [0, E), item rows tile [E, 2E), each row contiguous.
    std::vector<bool> covered(g.num_directed_edges(), false);
    for (std::int32_t v = 0; v < g.num_nodes(); ++v) {
        const auto base = g.edge_offset(v);
        for (std::int32_t j = 0; j < g.degree(v); ++j) {
            REQUIRE(base + j < g.num_directed_edges());
            CHECK_FALSE(covered[base + j]);
            covered[base + j] = true;
        }
    }
    CHECK(std::count(covered.begin(), covered.end(), false) == 0);
}
