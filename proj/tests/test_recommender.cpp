#include "doctest.h"

#include "cosam/recommender.hpp"

#include "oracles.hpp"

#include <cmath>
#include <vector>

using cosam::InteractionGraph;
using cosam::RecommenderConfig;
using cosam::RecommenderModel;
using cosam::SampleBatch;
using cosam::SamplerModel;

namespace {

struct Toy {
    cosam::ImplicitDataset ds;
    InteractionGraph graph;
};

Toy toy(std::int32_t n, std::int32_t m, double density, std::uint64_t seed) {
    auto ds = oracle::random_dataset(n, m, density, seed);
    auto graph = InteractionGraph::build(ds);
    return {std::move(ds), std::move(graph)};
}

RecommenderModel with_dot(double dot) {
    RecommenderConfig cfg;
    cfg.dim = 1;
    auto rec = RecommenderModel::init(1, 1, cfg, 0);
    rec.user_parameters()[0] = 1.0;
    rec.item_parameters()[0] = dot;
    return rec;
}

SampleBatch pathless_batch(const InteractionGraph& g, std::int32_t u,
                           std::vector<std::int32_t> items) {
    SampleBatch b;
    b.user = u;
    b.items = std::move(items);
    cosam::split_sample_batch(g, b);
    return b;
}

} // namespace

TEST_CASE("init is seeded and keeps predictions inside the clamp") {
    RecommenderConfig cfg;
    const auto a = RecommenderModel::init(6, 7, cfg, 42);
    const auto b = RecommenderModel::init(6, 7, cfg, 42);
    const auto c = RecommenderModel::init(6, 7, cfg, 43);
    CHECK(a.user_parameters() == b.user_parameters());
    CHECK(a.item_parameters() == b.item_parameters());
    CHECK(a.user_parameters() != c.user_parameters());
    for (std::int32_t u = 0; u < 6; ++u)
        for (std::int32_t i = 0; i < 7; ++i) {
            const double f = a.predict_fr(u, i);
            CHECK(f >= RecommenderModel::kClampEps);
            CHECK(f <= 1.0 - RecommenderModel::kClampEps);
        }
    cfg.dim = 0;
    CHECK_THROWS_AS(RecommenderModel::init(2, 2, cfg, 1), std::exception);
}

TEST_CASE("predict_fr closed forms") {
    RecommenderConfig cfg;
    cfg.dim = 4;
    cfg.init_scale = 0.0;
    const auto zero = RecommenderModel::init(2, 2, cfg, 1);
    CHECK(zero.predict_fr(0, 0) == doctest::Approx(0.5).epsilon(1e-12));

    CHECK(with_dot(std::log(3.0)).predict_fr(0, 0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(with_dot(1000.0).predict_fr(0, 0) == 1.0 - RecommenderModel::kClampEps);
    CHECK(with_dot(-1000.0).predict_fr(0, 0) == RecommenderModel::kClampEps);
    CHECK_THROWS_AS(zero.predict_fr(5, 0), std::exception);
}

TEST_CASE("reward vanishes on positives and tracks hardness on the rest") {
    cosam::ImplicitDataset ds;
    ds.n = 1;
    ds.m = 2;
    ds.pairs = {{0, 0}};
    const auto g = InteractionGraph::build(ds);

    RecommenderConfig cfg;
    cfg.dim = 2;
    cfg.init_scale = 0.0;
    const auto rec = RecommenderModel::init(1, 2, cfg, 0);
    CHECK(rec.reward(g, 0, 0) == 0.0);
    CHECK(rec.reward(g, 0, 1) == doctest::Approx(std::log(0.5)).epsilon(1e-12));

    // Higher preference on a non-positive means a more negative reward.
    RecommenderConfig c2;
    c2.dim = 1;
    auto rec2 = RecommenderModel::init(1, 2, c2, 0);
    rec2.user_parameters() = {1.0};
    rec2.item_parameters() = {0.0, 0.5};
    auto rec3 = rec2;
    rec3.item_parameters() = {0.0, 2.0};
    CHECK(rec3.reward(g, 0, 1) < rec2.reward(g, 0, 1));

    // The clamp keeps even extreme scores finite.
    rec3.item_parameters() = {0.0, 1000.0};
    CHECK(std::isfinite(rec3.reward(g, 0, 1)));
    CHECK(rec3.reward(g, 0, 1) == doctest::Approx(std::log(RecommenderModel::kClampEps)));
}

TEST_CASE("objective closed form at the sigmoid midpoint") {
    const auto t = toy(4, 6, 0.4, 31);
    RecommenderConfig cfg;
    cfg.init_scale = 0.0;
    const auto rec = RecommenderModel::init(4, 6, cfg, 0);

    std::vector<SampleBatch> batches;
    std::size_t pos_total = 0, rest_total = 0;
    for (std::int32_t u = 0; u < 4; ++u) {
        std::vector<std::int32_t> items;
        for (std::int32_t k = 0; k < 5; ++k) items.push_back((u + k) % 6);
        batches.push_back(pathless_batch(t.graph, u, items));
        pos_total += t.graph.user_degree(u);
        rest_total += batches.back().rest_idx.size();
    }
    const double expect = (pos_total + rest_total) * std::log(0.5);
    CHECK(rec.objective(t.graph, batches) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("sampled positives drop out of the negative term") {
    cosam::ImplicitDataset ds;
    ds.n = 1;
    ds.m = 3;
    ds.pairs = {{0, 0}, {0, 1}};
    const auto g = InteractionGraph::build(ds);
    RecommenderConfig cfg;
    cfg.init_scale = 0.0;
    const auto rec = RecommenderModel::init(1, 3, cfg, 0);

    const auto only_pos = pathless_batch(g, 0, {0, 1, 0});
    CHECK(only_pos.rest_idx.empty());
    // Only the two train positives contribute log f terms.
    CHECK(rec.objective(g, std::span<const SampleBatch>(&only_pos, 1)) ==
          doctest::Approx(2 * std::log(0.5)).epsilon(1e-12));

    SampleBatch empty;
    empty.user = 0;
    cosam::split_sample_batch(g, empty);
    // No draws: only the user's positives remain.
    CHECK(rec.objective(g, std::span<const SampleBatch>(&empty, 1)) ==
          doctest::Approx(2 * std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("gradient matches central finite differences") {
    const auto t = toy(5, 7, 0.4, 33);
    RecommenderConfig cfg;
    cfg.dim = 3;
    cfg.lambda = 1e-3;
    auto rec = RecommenderModel::init(5, 7, cfg, 9);

    std::vector<SampleBatch> batches;
    cosam::SplitMix64 rng(cosam::mix64(55));
    for (std::int32_t u = 0; u < 4; ++u) {
        std::vector<std::int32_t> items;
        for (int k = 0; k < 6; ++k) items.push_back(static_cast<std::int32_t>(rng.next_below(7)));
        batches.push_back(pathless_batch(t.graph, u, items));
    }

    std::vector<double> ug(rec.user_parameters().size(), 0.0);
    std::vector<double> ig(rec.item_parameters().size(), 0.0);
    rec.gradient(t.graph, batches, ug, ig);

    const double h = 1e-6;
    auto fd = [&](std::vector<double>& params, std::size_t k) {
        const double keep = params[k];
        params[k] = keep + h;
        const double plus = rec.regularized_objective(t.graph, batches);
        params[k] = keep - h;
        const double minus = rec.regularized_objective(t.graph, batches);
        params[k] = keep;
        return (plus - minus) / (2 * h);
    };
    for (std::size_t k = 0; k < ug.size(); k += 4) {
        const double numeric = fd(rec.user_parameters(), k);
        CHECK(std::abs(numeric - ug[k]) <=
              1e-4 * std::max({std::abs(numeric), std::abs(ug[k]), 1e-6}));
    }
    for (std::size_t k = 0; k < ig.size(); k += 5) {
        const double numeric = fd(rec.item_parameters(), k);
        CHECK(std::abs(numeric - ig[k]) <=
              1e-4 * std::max({std::abs(numeric), std::abs(ig[k]), 1e-6}));
    }
}

TEST_CASE("gradient touches only batch users and their items") {
    const auto t = toy(6, 8, 0.35, 34);
    RecommenderConfig cfg;
    cfg.dim = 2;
    auto rec = RecommenderModel::init(6, 8, cfg, 3);

    const auto batch = pathless_batch(t.graph, 2, {1, 3});
    std::vector<double> ug(rec.user_parameters().size(), 0.0);
    std::vector<double> ig(rec.item_parameters().size(), 0.0);
    rec.gradient(t.graph, std::span<const SampleBatch>(&batch, 1), ug, ig);

    std::vector<bool> item_touched(8, false);
    item_touched[1] = item_touched[3] = true;
    for (auto v : t.graph.user_neighbors(2)) item_touched[v] = true;
    for (std::int32_t u = 0; u < 6; ++u)
        for (std::int32_t k = 0; k < 2; ++k)
            if (u != 2) CHECK(ug[u * 2 + k] == 0.0);
    for (std::int32_t i = 0; i < 8; ++i)
        for (std::int32_t k = 0; k < 2; ++k)
            if (!item_touched[i]) CHECK(ig[i * 2 + k] == 0.0);
}

TEST_CASE("user gradient equals the logistic residual form") {
    // With lambda = 0, d objective / d user_emb = sum (target - f) * item_emb.
    cosam::ImplicitDataset ds;
    ds.n = 1;
    ds.m = 2;
    ds.pairs = {{0, 0}};
    const auto g = InteractionGraph::build(ds);
    RecommenderConfig cfg;
    cfg.dim = 2;
    cfg.lambda = 0.0;
    auto rec = RecommenderModel::init(1, 2, cfg, 5);
    rec.user_parameters() = {0.3, -0.2};
    rec.item_parameters() = {0.5, 0.1, -0.4, 0.8};

    const auto batch = pathless_batch(g, 0, {1});
    std::vector<double> ug(2, 0.0), ig(4, 0.0);
    rec.gradient(g, std::span<const SampleBatch>(&batch, 1), ug, ig);

    const double f0 = rec.predict_fr(0, 0), f1 = rec.predict_fr(0, 1);
    for (int k = 0; k < 2; ++k) {
        const double expect =
            (1.0 - f0) * rec.item_embedding(0)[k] + (0.0 - f1) * rec.item_embedding(1)[k];
        CHECK(ug[k] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("adam steps are pure, bounded, and ascend") {
    cosam::AdamOptimizer opt(3, 0.1);
    std::vector<double> params = {1.0, -2.0, 0.5};
    const auto before = params;
    std::vector<double> zero(3, 0.0);
    opt.ascend(params, zero);
    CHECK(params == before);

    cosam::AdamOptimizer o1(2, 0.1), o2(2, 0.1);
    std::vector<double> p1 = {0.0, 0.0}, p2 = {0.0, 0.0};
    const std::vector<double> grad = {1.0, -0.5};
    o1.ascend(p1, grad);
    o2.ascend(p2, grad);
    CHECK(p1 == p2);
    CHECK(p1[0] > 0.0);  // ascends along a positive gradient
    CHECK(p1[1] < 0.0);
    CHECK(std::abs(p1[0]) <= 0.1 + 1e-9); // first Adam step is at most lr

    // Constant gradient keeps steps near lr in magnitude.
    for (int k = 0; k < 50; ++k) {
        const auto prev = p1;
        o1.ascend(p1, grad);
        CHECK(std::abs(p1[0] - prev[0]) <= 0.1 * 1.2);
    }
}

TEST_CASE("sampled negative term converges to its expectation under the walk") {
    const auto t = toy(3, 6, 0.45, 36);
    cosam::SamplerConfig scfg;
    scfg.c1 = scfg.c2 = 0.5;
    SamplerModel sampler(t.graph, scfg);
    RecommenderConfig cfg;
    cfg.dim = 2;
    auto rec = RecommenderModel::init(3, 6, cfg, 11);

    const std::int32_t u = 0;
    const auto rho = sampler.exact_rho(u, 1e-12, 400);
    double expect_per_draw = 0.0;
    for (std::int32_t i = 0; i < 6; ++i)
        expect_per_draw += rho.rho[i] * rec.reward(t.graph, u, i);

    const std::int32_t n_u = sampler.candidate_count(u);
    const int reps = 4000;
    double sum = 0.0, sq = 0.0;
    for (int r = 0; r < reps; ++r) {
        const auto batch = sampler.draw_candidate_set(u, 1000 + r, 0);
        double neg = 0.0;
        for (auto k : batch.rest_idx) neg += std::log(1.0 - rec.predict_fr(u, batch.items[k]));
        sum += neg;
        sq += neg * neg;
    }
    const double mean = sum / reps;
    const double se = std::sqrt((sq / reps - mean * mean) / reps);
    CHECK(std::abs(mean - n_u * expect_per_draw) <= 3.5 * se + 1e-9);
}
