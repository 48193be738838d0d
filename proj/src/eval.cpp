#include "cosam/eval.hpp"

#include "cosam/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cosam {

double integrated_score(const SamplingDistribution& rho, const RecommenderModel& rec,
                        std::int32_t u, std::int32_t i) {
    return rho.rho.at(static_cast<std::size_t>(i)) * rec.predict_fr(u, i);
}

RankedList rank_items(const SamplerModel* sampler, const RecommenderModel& rec,
                      const InteractionGraph& graph, std::int32_t u) {
    const std::int32_t m = graph.num_items();
    RankedList out;
    out.user = u;
    SamplingDistribution rho;
    if (sampler) rho = sampler->exact_rho(u);

    auto train_row = graph.user_neighbors(u);
    out.items.reserve(m - train_row.size());
    for (std::int32_t i = 0; i < m; ++i) {
        if (std::binary_search(train_row.begin(), train_row.end(), i)) continue;
        out.items.push_back(i);
    }
    out.scores.resize(out.items.size());
    for (std::size_t k = 0; k < out.items.size(); ++k) {
        const std::int32_t i = out.items[k];
        out.scores[k] = sampler ? integrated_score(rho, rec, u, i) : rec.predict_fr(u, i);
    }
    std::vector<std::int32_t> order(out.items.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
        if (out.scores[a] != out.scores[b]) return out.scores[a] > out.scores[b];
        return out.items[a] < out.items[b];
    });
    RankedList sorted;
    sorted.user = u;
    sorted.items.reserve(order.size());
    sorted.scores.reserve(order.size());
    for (std::int32_t idx : order) {
        sorted.items.push_back(out.items[idx]);
        sorted.scores.push_back(out.scores[idx]);
    }
    return sorted;
}

// Test-positive lists arrive in caller order and may repeat; work on a
// sorted, deduplicated copy.
static std::vector<std::int32_t> sorted_unique(const std::vector<std::int32_t>& con) {
    std::vector<std::int32_t> s(con);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

static std::int32_t hits_in_top_k(const RankedList& ranked,
                                  const std::vector<std::int32_t>& con, std::int32_t k) {
    const std::size_t upto = std::min<std::size_t>(ranked.items.size(), static_cast<std::size_t>(k));
    std::int32_t hits = 0;
    for (std::size_t j = 0; j < upto; ++j)
        if (std::binary_search(con.begin(), con.end(), ranked.items[j])) ++hits;
    return hits;
}

double precision_at_k(const RankedList& ranked, const std::vector<std::int32_t>& con,
                      std::int32_t k) {
    if (k < 1) throw std::invalid_argument("eval: K must be >= 1");
    return static_cast<double>(hits_in_top_k(ranked, sorted_unique(con), k)) / k;
}

double recall_at_k(const RankedList& ranked, const std::vector<std::int32_t>& con,
                   std::int32_t k) {
    if (k < 1) throw std::invalid_argument("eval: K must be >= 1");
    if (con.empty()) throw std::invalid_argument("eval: recall undefined for empty test set");
    const auto s = sorted_unique(con);
    return static_cast<double>(hits_in_top_k(ranked, s, k)) / s.size();
}

double ndcg_full(const RankedList& ranked, const std::vector<std::int32_t>& con) {
    if (con.empty()) throw std::invalid_argument("eval: NDCG undefined for empty test set");
    const auto s = sorted_unique(con);
    double dcg = 0.0;
    std::size_t found = 0;
    for (std::size_t j = 0; j < ranked.items.size(); ++j) {
        if (std::binary_search(s.begin(), s.end(), ranked.items[j])) {
            dcg += 1.0 / std::log2(static_cast<double>(j + 2)); // rank j+1, 1-based
            ++found;
        }
    }
    if (found != s.size())
        throw std::invalid_argument("eval: test positive missing from the candidate ranking");
    double idcg = 0.0;
    for (std::size_t r = 1; r <= s.size(); ++r)
        idcg += 1.0 / std::log2(static_cast<double>(r + 1));
    return dcg / idcg;
}

std::vector<std::vector<std::int32_t>> test_positives(const SplitDataset& split) {
    std::vector<std::vector<std::int32_t>> con(split.train.n);
    for (auto [u, i] : split.test.pairs) {
        if (u < 0 || u >= split.train.n || i < 0 || i >= split.train.m)
            throw std::out_of_range("eval: test pair outside train vocab range");
        con[u].push_back(i);
    }
    for (auto& row : con) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    return con;
}

EvalReport evaluate(const SamplerModel* sampler, const RecommenderModel& rec,
                    const InteractionGraph& graph, const SplitDataset& split,
                    std::span<const std::int32_t> k_list, int threads, bool keep_per_user) {
    const auto t0 = std::chrono::steady_clock::now();
    EvalReport report;
    report.k_list.assign(k_list.begin(), k_list.end());
    report.precision.assign(k_list.size(), 0.0);
    report.recall.assign(k_list.size(), 0.0);

    const auto con = test_positives(split);
    const std::int32_t n = graph.num_users();

    struct Slot {
        bool evaluated = false;
        UserMetrics metrics;
    };
    std::vector<Slot> slots(n);
    parallel_for(0, n, threads, [&](std::int64_t uu) {
        const auto u = static_cast<std::int32_t>(uu);
        if (con[u].empty()) return;
        // A test item could only be missing from the candidates if it also
        // appeared in train; such users are skipped rather than scored.
        for (std::int32_t i : con[u])
            if (graph.has_edge(u, i)) return;
        RankedList ranked = rank_items(sampler, rec, graph, u);
        Slot& slot = slots[u];
        slot.evaluated = true;
        slot.metrics.user = u;
        slot.metrics.precision.reserve(k_list.size());
        slot.metrics.recall.reserve(k_list.size());
        for (std::int32_t k : k_list) {
            slot.metrics.precision.push_back(precision_at_k(ranked, con[u], k));
            slot.metrics.recall.push_back(recall_at_k(ranked, con[u], k));
        }
        slot.metrics.ndcg = ndcg_full(ranked, con[u]);
    });

    for (std::int32_t u = 0; u < n; ++u) {
        if (!slots[u].evaluated) {
            ++report.skipped_users;
            continue;
        }
        ++report.evaluated_users;
        const UserMetrics& um = slots[u].metrics;
        for (std::size_t j = 0; j < k_list.size(); ++j) {
            report.precision[j] += um.precision[j];
            report.recall[j] += um.recall[j];
        }
        report.ndcg += um.ndcg;
        if (keep_per_user) report.per_user.push_back(um);
    }
    if (report.evaluated_users > 0) {
        for (std::size_t j = 0; j < k_list.size(); ++j) {
            report.precision[j] /= report.evaluated_users;
            report.recall[j] /= report.evaluated_users;
        }
        report.ndcg /= report.evaluated_users;
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

} // namespace cosam
