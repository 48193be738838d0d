#pragma once

#include "cosam/dataset.hpp"
#include "cosam/eval.hpp"
#include "cosam/graph.hpp"
#include "cosam/recommender.hpp"
#include "cosam/sampler.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cosam {

enum class SamplerKind { cosam, uniform, popularity };

std::string sampler_kind_name(SamplerKind kind);
SamplerKind parse_sampler_kind(const std::string& name);

struct TrainConfig {
    std::int32_t epochs = 50;
    std::int32_t batch_size = 128;
    std::uint64_t seed = 42;
    SamplerKind sampler = SamplerKind::cosam;
    SamplerConfig sampler_cfg;
    RecommenderConfig rec_cfg;
    double lr = 0.01;         // recommender Adam rate
    double sampler_lr = 0.01; // edge-logit Adam rate; 0 freezes the sampler
    double alpha = 1.0;       // popularity exponent
    std::int32_t eval_every = 0; // 0 = no mid-training evaluation
    int threads = 1;

    void validate() const;
};

struct EpochLog {
    std::int32_t epoch = 0;
    double objective = 0.0;
    double seconds = 0.0;
    bool has_metrics = false;
    double pre5 = 0.0;
    double rec5 = 0.0;
    double ndcg = 0.0;
};

// Monotone event counters recording the in-batch ordering: draw samples,
// update phi, compute rewards against the new phi, update theta. Baseline
// runs leave the last two at zero.
struct BatchTrace {
    std::int64_t sampled = 0;
    std::int64_t phi_updated = 0;
    std::int64_t rewards_done = 0;
    std::int64_t theta_updated = 0;
};

struct TrainedModel {
    std::shared_ptr<InteractionGraph> graph;
    std::optional<SamplerModel> sampler; // engaged only for the cosam kind
    RecommenderModel recommender;
    TrainConfig config;
    std::vector<EpochLog> log;
    std::vector<BatchTrace> traces;
};

// Cumulative table over item popularity xi_i^alpha (train degree).
class PopularityTable {
  public:
    PopularityTable() = default;
    PopularityTable(const InteractionGraph& graph, double alpha);
    std::int32_t draw(SplitMix64& rng) const;
    bool degenerate() const { return degenerate_; }

  private:
    std::vector<double> cum_;
    bool degenerate_ = false;
    std::int32_t m_ = 0;
};

SampleBatch uniform_sample(const InteractionGraph& graph, std::int32_t u, std::int32_t count,
                           SplitMix64& rng);
SampleBatch popularity_sample(const InteractionGraph& graph, const PopularityTable& table,
                              std::int32_t u, std::int32_t count, SplitMix64& rng);

std::int32_t candidate_count_for(const InteractionGraph& graph, std::int32_t u,
                                 double multiplier);

using EpochCallback = std::function<void(const EpochLog&)>;

TrainedModel train(const SplitDataset& split, const TrainConfig& config,
                   const EpochCallback& progress = {});

// Monte-Carlo value of the Jensen lower bound over train users: exact
// log-sampling-probability and log-preference of each positive, plus N_u
// times the sampled mean of (1-x)*log(1-f_r).
double lower_bound_estimate(const SamplerModel& sampler, const RecommenderModel& rec,
                            const SplitDataset& split, std::int32_t sample_count,
                            std::uint64_t seed);

struct ProbeReport {
    double grad_variance = 0.0;    // mean per-coordinate variance of the unit-norm gradient
    double mean_sampled_loss = 0.0; // mean over draws of -(1-x)*log(1-f_r)
    std::int32_t repeats = 0;
};

// Redraws `repeats` independent mini-batches against frozen models and
// measures the spread of the normalized recommender gradient plus how hard
// the sampled instances are.
ProbeReport variance_probe(const TrainedModel& model, std::int32_t repeats,
                           std::int32_t batch_size, std::uint64_t seed);

} // namespace cosam
