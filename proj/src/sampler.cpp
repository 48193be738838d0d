#include "cosam/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace cosam {

void SamplerConfig::validate() const {
    if (!(c1 >= 0.0 && c1 <= 1.0) || !(c2 >= 0.0 && c2 <= 1.0))
        throw std::invalid_argument("sampler config: c1 and c2 must lie in [0, 1]");
    if (std::min(c1, c2) >= 1.0)
        throw std::invalid_argument("sampler config: min(c1, c2) must be < 1, walks would never terminate");
    if (l_max < 1)
        throw std::invalid_argument("sampler config: l_max must be >= 1");
    if (!(candidate_multiplier > 0.0))
        throw std::invalid_argument("sampler config: candidate_multiplier must be > 0");
}

double SamplerConfig::tail_mass() const {
    return std::pow(c1 * c2, static_cast<double>(l_max / 2));
}

void split_sample_batch(const InteractionGraph& graph, SampleBatch& batch) {
    batch.pos_idx.clear();
    batch.rest_idx.clear();
    for (std::size_t k = 0; k < batch.items.size(); ++k) {
        if (graph.has_edge(batch.user, batch.items[k]))
            batch.pos_idx.push_back(static_cast<std::int32_t>(k));
        else
            batch.rest_idx.push_back(static_cast<std::int32_t>(k));
    }
}

SamplerModel::SamplerModel(const InteractionGraph& graph, SamplerConfig config)
    : graph_(&graph), cfg_(config) {
    cfg_.validate();
    logits_.assign(static_cast<std::size_t>(graph.num_directed_edges()), 0.0);
    weights_.resize(logits_.size());
    refresh_weights();
}

void SamplerModel::set_logits(std::vector<double> logits) {
    if (logits.size() != logits_.size())
        throw std::invalid_argument("sampler: logit array size mismatch");
    logits_ = std::move(logits);
    refresh_weights();
}

void SamplerModel::add_to_logit(std::int64_t edge, double delta) {
    logits_.at(static_cast<std::size_t>(edge)) += delta;
    refresh_weights();
}

void SamplerModel::refresh_weights() {
    const auto& g = *graph_;
    for (std::int32_t node = 0; node < g.num_nodes(); ++node) {
        const std::int32_t deg = g.degree(node);
        if (deg == 0) continue;
        const std::int64_t off = g.edge_offset(node);
        double hi = logits_[off];
        for (std::int32_t k = 1; k < deg; ++k) hi = std::max(hi, logits_[off + k]);
        double z = 0.0;
        for (std::int32_t k = 0; k < deg; ++k) {
            weights_[off + k] = std::exp(logits_[off + k] - hi);
            z += weights_[off + k];
        }
        for (std::int32_t k = 0; k < deg; ++k) weights_[off + k] /= z;
    }
}

std::span<const double> SamplerModel::transition_weights(std::int32_t node) const {
    const std::int32_t deg = graph_->degree(node);
    if (deg == 0)
        throw std::domain_error("sampler: node " + std::to_string(node) +
                                " is isolated, no transition weights");
    return {weights_.data() + graph_->edge_offset(node), static_cast<std::size_t>(deg)};
}

double SamplerModel::uniform_component_p0() const {
    return (1.0 - cfg_.c1) / (1.0 - cfg_.c1 * cfg_.c2) / graph_->num_items();
}

std::int32_t SamplerModel::pick_neighbor(std::int32_t node, SplitMix64& rng) const {
    auto w = transition_weights(node);
    const double r = rng.next_double();
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < w.size(); ++k) {
        acc += w[k];
        if (r < acc) return static_cast<std::int32_t>(k);
    }
    return static_cast<std::int32_t>(w.size() - 1);
}

WalkPath SamplerModel::arw_sample(std::int32_t u, SplitMix64& rng) const {
    const auto& g = *graph_;
    const std::int32_t m = g.num_items();
    if (u < 0 || u >= g.num_users())
        throw std::out_of_range("sampler: user " + std::to_string(u) + " out of range");

    WalkPath path;
    path.nodes.push_back(u);
    if (g.user_degree(u) == 0) {
        path.terminal = TerminalKind::user_terminal;
        path.emitted_item = static_cast<std::int32_t>(rng.next_below(static_cast<std::uint64_t>(m)));
        return path;
    }

    std::int32_t cur = u;
    for (;;) {
        const bool at_user = g.is_user_node(cur);
        if (path.length() == cfg_.l_max || g.degree(cur) == 0) {
            path.terminal = TerminalKind::truncated;
            path.emitted_item =
                at_user ? static_cast<std::int32_t>(rng.next_below(static_cast<std::uint64_t>(m)))
                        : g.item_of_node(cur);
            return path;
        }
        const double keep = at_user ? cfg_.c1 : cfg_.c2;
        if (!rng.bernoulli(keep)) {
            path.terminal = at_user ? TerminalKind::user_terminal : TerminalKind::item_terminal;
            path.emitted_item =
                at_user ? static_cast<std::int32_t>(rng.next_below(static_cast<std::uint64_t>(m)))
                        : g.item_of_node(cur);
            return path;
        }
        const std::int32_t pick = pick_neighbor(cur, rng);
        path.edge_picks.push_back(pick);
        const std::int32_t nb = g.neighbors(cur)[pick];
        cur = at_user ? g.item_node(nb) : nb;
        path.nodes.push_back(cur);
    }
}

std::int32_t SamplerModel::candidate_count(std::int32_t u) const {
    const double raw = cfg_.candidate_multiplier * graph_->user_degree(u);
    return std::max<std::int32_t>(1, static_cast<std::int32_t>(std::llround(raw)));
}

SampleBatch SamplerModel::draw_candidate_set(std::int32_t u, std::uint64_t seed,
                                             std::int32_t epoch) const {
    const std::int32_t count = candidate_count(u);
    SampleBatch batch;
    batch.user = u;
    batch.items.reserve(count);
    batch.paths.reserve(count);
    const std::uint64_t lane = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(epoch)) << 32) |
                               static_cast<std::uint32_t>(u);
    for (std::int32_t k = 0; k < count; ++k) {
        SplitMix64 rng(make_stream(seed, kRngSample, lane, static_cast<std::uint64_t>(k)));
        WalkPath p = arw_sample(u, rng);
        batch.items.push_back(p.emitted_item);
        batch.paths.push_back(std::move(p));
    }
    split_sample_batch(*graph_, batch);
    return batch;
}

SamplingDistribution SamplerModel::exact_rho(std::int32_t u, double tol,
                                             std::int32_t max_sweeps) const {
    const auto& g = *graph_;
    const std::int32_t n = g.num_users();
    const std::int32_t m = g.num_items();
    if (u < 0 || u >= n)
        throw std::out_of_range("sampler: user " + std::to_string(u) + " out of range");

    SamplingDistribution out;
    out.user = u;
    out.rho.assign(m, 0.0);
    if (g.user_degree(u) == 0) {
        // The walk stops at u immediately, so the emission law is uniform.
        std::fill(out.rho.begin(), out.rho.end(), 1.0 / m);
        return out;
    }

    // Adjoint view of the Jacobi iteration: v_k carries the probability that
    // the walk is still alive at each node after k transitions. Mass absorbed
    // at user nodes spreads (1-c1)/m over all items; mass absorbed at item
    // nodes lands on that item. Adding the in-flight remainder through the
    // initial vectors reproduces the k-th Jacobi iterate exactly, which keeps
    // every result normalized no matter where the sweep loop stops.
    std::vector<double> cur(g.num_nodes(), 0.0), nxt(g.num_nodes(), 0.0);
    std::vector<std::int32_t> frontier{u}, next_frontier;
    cur[u] = 1.0;
    double uniform_acc = 0.0;
    std::int32_t sweep = 0;
    const double c1 = cfg_.c1, c2 = cfg_.c2;

    for (;;) {
        double mass = 0.0;
        for (std::int32_t node : frontier) mass += cur[node];
        if (mass < tol || sweep == max_sweeps) {
            for (std::int32_t node : frontier) {
                if (g.is_user_node(node)) uniform_acc += cur[node];
                else out.rho[g.item_of_node(node)] += cur[node];
            }
            out.converged = mass < tol;
            break;
        }
        next_frontier.clear();
        for (std::int32_t node : frontier) {
            const double v = cur[node];
            const bool at_user = g.is_user_node(node);
            if (at_user) uniform_acc += (1.0 - c1) * v;
            else out.rho[g.item_of_node(node)] += (1.0 - c2) * v;
            const double keep = at_user ? c1 : c2;
            if (keep == 0.0) continue;
            const auto nbrs = g.neighbors(node);
            const double* w = weights_.data() + g.edge_offset(node);
            const double base = v * keep;
            for (std::size_t k = 0; k < nbrs.size(); ++k) {
                const std::int32_t target = at_user ? g.item_node(nbrs[k]) : nbrs[k];
                if (nxt[target] == 0.0) next_frontier.push_back(target);
                nxt[target] += base * w[k];
            }
        }
        for (std::int32_t node : frontier) cur[node] = 0.0;
        std::swap(cur, nxt);
        frontier.swap(next_frontier);
        ++sweep;
    }

    const double floor = uniform_acc / m;
    for (double& r : out.rho) r += floor;
    out.sweeps = sweep;
    return out;
}

double SamplerModel::path_strength(const WalkPath& path) const {
    const auto& g = *graph_;
    const std::int32_t m = g.num_items();
    if (path.nodes.empty() || path.nodes.size() != path.edge_picks.size() + 1)
        throw std::invalid_argument("sampler: malformed walk path");
    if (!g.is_user_node(path.nodes.front()))
        throw std::invalid_argument("sampler: walk path must start at a user node");

    double strength = 1.0;
    for (std::size_t k = 0; k < path.edge_picks.size(); ++k) {
        const std::int32_t node = path.nodes[k];
        const bool at_user = g.is_user_node(node);
        auto w = transition_weights(node);
        const std::int32_t pick = path.edge_picks[k];
        if (pick < 0 || static_cast<std::size_t>(pick) >= w.size())
            throw std::invalid_argument("sampler: edge pick out of range in walk path");
        strength *= (at_user ? cfg_.c1 : cfg_.c2) * w[pick];
    }
    const bool last_user = g.is_user_node(path.nodes.back());
    switch (path.terminal) {
        case TerminalKind::user_terminal: strength *= (1.0 - cfg_.c1) / m; break;
        case TerminalKind::item_terminal: strength *= 1.0 - cfg_.c2; break;
        case TerminalKind::truncated:
            if (last_user) strength *= 1.0 / m;
            break;
    }
    return strength;
}

void SamplerModel::accumulate_log_path_grad(const WalkPath& path, double scale,
                                            std::vector<double>& grad) const {
    if (scale == 0.0) return;
    const auto& g = *graph_;
    for (std::size_t k = 0; k < path.edge_picks.size(); ++k) {
        const std::int32_t node = path.nodes[k];
        const std::int64_t off = g.edge_offset(node);
        auto w = transition_weights(node);
        const std::int32_t pick = path.edge_picks[k];
        for (std::size_t j = 0; j < w.size(); ++j) grad[off + j] -= scale * w[j];
        grad[off + pick] += scale;
    }
}

std::vector<std::pair<std::int64_t, double>> SamplerModel::log_path_grad(
    const WalkPath& path) const {
    std::unordered_map<std::int64_t, double> acc;
    const auto& g = *graph_;
    for (std::size_t k = 0; k < path.edge_picks.size(); ++k) {
        const std::int32_t node = path.nodes[k];
        const std::int64_t off = g.edge_offset(node);
        auto w = transition_weights(node);
        const std::int32_t pick = path.edge_picks[k];
        for (std::size_t j = 0; j < w.size(); ++j) acc[off + static_cast<std::int64_t>(j)] -= w[j];
        acc[off + pick] += 1.0;
    }
    std::vector<std::pair<std::int64_t, double>> out(acc.begin(), acc.end());
    std::sort(out.begin(), out.end());
    return out;
}

void SamplerModel::policy_gradient(std::span<const SampleBatch> batches,
                                   std::span<const std::vector<double>> rewards,
                                   std::vector<double>& grad) const {
    if (batches.size() != rewards.size())
        throw std::invalid_argument("sampler: one reward vector per batch required");
    if (grad.size() != logits_.size())
        throw std::invalid_argument("sampler: gradient accumulator size mismatch");
    const double p0 = uniform_component_p0();
    std::unordered_map<std::int32_t, std::int32_t> hit_count;
    for (std::size_t b = 0; b < batches.size(); ++b) {
        const SampleBatch& batch = batches[b];
        const std::vector<double>& reward = rewards[b];
        if (reward.size() != batch.items.size())
            throw std::invalid_argument("sampler: reward count must match draw count");
        if (batch.paths.size() != batch.items.size())
            throw std::invalid_argument("sampler: policy gradient needs walk paths");
        const double denom_base = static_cast<double>(batch.items.size()) * p0;
        hit_count.clear();
        for (std::int32_t k : batch.pos_idx) ++hit_count[batch.items[k]];
        std::vector<double> scale(reward.begin(), reward.end());
        for (std::int32_t k : batch.pos_idx)
            scale[k] += 1.0 / (denom_base + hit_count[batch.items[k]]);
        for (std::size_t k = 0; k < batch.paths.size(); ++k)
            accumulate_log_path_grad(batch.paths[k], scale[k], grad);
    }
}

void SamplerModel::apply_gradient(const std::vector<double>& grad, AdamOptimizer& opt) {
    opt.ascend(logits_, grad);
    refresh_weights();
}

} // namespace cosam
