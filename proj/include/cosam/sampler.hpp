#pragma once

#include "cosam/graph.hpp"
#include "cosam/optimizer.hpp"
#include "cosam/rng.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace cosam {

struct SamplerConfig {
    double c1 = 0.6;
    double c2 = 0.6;
    std::int32_t l_max = 10;
    double candidate_multiplier = 5.0;

    void validate() const;

    // Bias of the length-capped walk versus the fixed point, shrinks
    // geometrically with the cap.
    double tail_mass() const;
};

enum class TerminalKind : std::uint8_t {
    user_terminal, // stopped at a user node, emitted an item uniform over [0, m)
    item_terminal, // stopped at an item node, emitted that item
    truncated,     // forced stop at the step cap (or an unwalkable start node)
};

struct WalkPath {
    std::vector<std::int32_t> nodes;      // unified ids, begins at the query user
    std::vector<std::int32_t> edge_picks; // neighbor index chosen at each non-final node
    TerminalKind terminal = TerminalKind::user_terminal;
    std::int32_t emitted_item = -1;

    std::int32_t length() const { return static_cast<std::int32_t>(edge_picks.size()); }
};

struct SamplingDistribution {
    std::int32_t user = -1;
    std::vector<double> rho;
    std::int32_t sweeps = 0;
    bool converged = true;
};

// One user's candidate draws: the item multiset G_u, the walk paths that
// produced it, and index views splitting draws into train positives and the
// rest. Pathless samplers (uniform, popularity) leave paths empty.
struct SampleBatch {
    std::int32_t user = -1;
    std::vector<std::int32_t> items;
    std::vector<WalkPath> paths;
    std::vector<std::int32_t> pos_idx;
    std::vector<std::int32_t> rest_idx;
};

// Fills pos_idx/rest_idx from train membership.
void split_sample_batch(const InteractionGraph& graph, SampleBatch& batch);

class SamplerModel {
  public:
    SamplerModel(const InteractionGraph& graph, SamplerConfig config);

    const SamplerConfig& config() const { return cfg_; }
    const InteractionGraph& graph() const { return *graph_; }

    const std::vector<double>& logits() const { return logits_; }
    void set_logits(std::vector<double> logits);
    void add_to_logit(std::int64_t edge, double delta);

    // Softmax of the node's logit row; throws for isolated nodes.
    std::span<const double> transition_weights(std::int32_t node) const;

    // Weight-independent floor (1-c1)/(1-c1*c2)/m that every item receives.
    double uniform_component_p0() const;

    // One adaptive random walk from u. At a user node terminate with prob
    // 1-c1 emitting a uniform item, at an item node terminate with prob 1-c2
    // emitting that item, otherwise transfer by transition_weights. Reaching
    // l_max forces termination with the same two emission rules. An isolated
    // start user emits uniformly at length 0.
    WalkPath arw_sample(std::int32_t u, SplitMix64& rng) const;

    std::int32_t candidate_count(std::int32_t u) const;

    // N_u independent walks with per-(user, epoch, draw) RNG streams, split
    // against train positives.
    SampleBatch draw_candidate_set(std::int32_t u, std::uint64_t seed,
                                   std::int32_t epoch) const;

    // Fixed-point sampling distribution of the walk, computed as Jacobi
    // iterates restricted to u's row. Every returned iterate is itself a
    // probability distribution, so the result is normalized even when the
    // sweep cap is hit (converged flags whether the residual beat tol).
    SamplingDistribution exact_rho(std::int32_t u, double tol = 1e-8,
                                   std::int32_t max_sweeps = 200) const;

    // Probability that the walk realizes exactly this (path, emission) event.
    double path_strength(const WalkPath& path) const;

    // d log path_strength / d logits as (directed edge index, value) pairs,
    // duplicates merged. Termination factors are constant in the logits.
    std::vector<std::pair<std::int64_t, double>> log_path_grad(const WalkPath& path) const;

    // Adds scale * d log path_strength / d logits into a dense gradient.
    void accumulate_log_path_grad(const WalkPath& path, double scale,
                                  std::vector<double>& grad) const;

    // Policy gradient of the sampled lower bound: per user, each positive i
    // contributes the log-path gradients of draws that emitted i scaled by
    // 1/(N_u*p0 + count), and every draw contributes its log-path gradient
    // scaled by its reward. Accumulates the sum over users into grad.
    void policy_gradient(std::span<const SampleBatch> batches,
                         std::span<const std::vector<double>> rewards,
                         std::vector<double>& grad) const;

    void apply_gradient(const std::vector<double>& grad, AdamOptimizer& opt);

  private:
    void refresh_weights();
    std::int32_t pick_neighbor(std::int32_t node, SplitMix64& rng) const;

    const InteractionGraph* graph_ = nullptr;
    SamplerConfig cfg_;
    std::vector<double> logits_;  // one per directed edge, CSR order
    std::vector<double> weights_; // per-row softmax of logits_
};

} // namespace cosam
