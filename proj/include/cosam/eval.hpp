#pragma once

#include "cosam/dataset.hpp"
#include "cosam/graph.hpp"
#include "cosam/recommender.hpp"
#include "cosam/sampler.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace cosam {

// Candidate items for one user sorted by descending score, ties broken by
// ascending item id; train positives are excluded up front.
struct RankedList {
    std::int32_t user = -1;
    std::vector<std::int32_t> items;
    std::vector<double> scores;
};

struct UserMetrics {
    std::int32_t user = -1;
    std::vector<double> precision; // aligned with the K list
    std::vector<double> recall;
    double ndcg = 0.0;
};

struct EvalReport {
    std::vector<std::int32_t> k_list;
    std::vector<double> precision;
    std::vector<double> recall;
    double ndcg = 0.0;
    std::int32_t evaluated_users = 0;
    std::int32_t skipped_users = 0;
    double wall_seconds = 0.0;
    std::vector<UserMetrics> per_user; // filled only on request
};

// Joint score rho_ui * f_r(u,i); rho comes from exact_rho computed once per
// user. Baseline-trained models carry no sampler and score by f_r alone.
double integrated_score(const SamplingDistribution& rho, const RecommenderModel& rec,
                        std::int32_t u, std::int32_t i);

RankedList rank_items(const SamplerModel* sampler, const RecommenderModel& rec,
                      const InteractionGraph& graph, std::int32_t u);

// Metrics over one ranked list. `con` holds the user's test positives in any
// order; duplicates count once.
double precision_at_k(const RankedList& ranked, const std::vector<std::int32_t>& con,
                      std::int32_t k);
double recall_at_k(const RankedList& ranked, const std::vector<std::int32_t>& con,
                   std::int32_t k);
double ndcg_full(const RankedList& ranked, const std::vector<std::int32_t>& con);

// Per-user test positives, indexed by user id.
std::vector<std::vector<std::int32_t>> test_positives(const SplitDataset& split);

EvalReport evaluate(const SamplerModel* sampler, const RecommenderModel& rec,
                    const InteractionGraph& graph, const SplitDataset& split,
                    std::span<const std::int32_t> k_list, int threads = 1,
                    bool keep_per_user = false);

} // namespace cosam
