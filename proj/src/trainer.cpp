#include "cosam/trainer.hpp"

#include "cosam/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cosam {

std::string sampler_kind_name(SamplerKind kind) {
    switch (kind) {
        case SamplerKind::cosam: return "cosam";
        case SamplerKind::uniform: return "uniform";
        case SamplerKind::popularity: return "pop";
    }
    throw std::logic_error("trainer: unknown sampler kind");
}

SamplerKind parse_sampler_kind(const std::string& name) {
    if (name == "cosam") return SamplerKind::cosam;
    if (name == "uniform") return SamplerKind::uniform;
    if (name == "pop" || name == "popularity") return SamplerKind::popularity;
    throw std::invalid_argument("trainer: unknown sampler kind '" + name +
                                "' (expected cosam, uniform, or pop)");
}

void TrainConfig::validate() const {
    if (epochs < 0) throw std::invalid_argument("train config: epochs must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("train config: lr must be > 0");
    if (sampler_lr < 0.0) throw std::invalid_argument("train config: sampler_lr must be >= 0");
    if (alpha < 0.0) throw std::invalid_argument("train config: alpha must be >= 0");
    if (eval_every < 0) throw std::invalid_argument("train config: eval_every must be >= 0");
    if (threads < 1) throw std::invalid_argument("train config: threads must be >= 1");
    if (rec_cfg.dim < 1) throw std::invalid_argument("train config: dim must be >= 1");
    if (rec_cfg.lambda < 0.0) throw std::invalid_argument("train config: lambda must be >= 0");
    sampler_cfg.validate();
}

PopularityTable::PopularityTable(const InteractionGraph& graph, double alpha) {
    m_ = graph.num_items();
    cum_.resize(m_);
    double acc = 0.0;
    for (std::int32_t i = 0; i < m_; ++i) {
        acc += std::pow(static_cast<double>(graph.item_degree(i)), alpha);
        cum_[i] = acc;
    }
    degenerate_ = !(acc > 0.0);
}

std::int32_t PopularityTable::draw(SplitMix64& rng) const {
    if (degenerate_) return static_cast<std::int32_t>(rng.next_below(m_));
    const double r = rng.next_double() * cum_.back();
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), r);
    return static_cast<std::int32_t>(std::min<std::ptrdiff_t>(it - cum_.begin(), m_ - 1));
}

SampleBatch uniform_sample(const InteractionGraph& graph, std::int32_t u, std::int32_t count,
                           SplitMix64& rng) {
    SampleBatch batch;
    batch.user = u;
    batch.items.reserve(count);
    for (std::int32_t k = 0; k < count; ++k)
        batch.items.push_back(static_cast<std::int32_t>(rng.next_below(graph.num_items())));
    split_sample_batch(graph, batch);
    return batch;
}

SampleBatch popularity_sample(const InteractionGraph& graph, const PopularityTable& table,
                              std::int32_t u, std::int32_t count, SplitMix64& rng) {
    SampleBatch batch;
    batch.user = u;
    batch.items.reserve(count);
    for (std::int32_t k = 0; k < count; ++k) batch.items.push_back(table.draw(rng));
    split_sample_batch(graph, batch);
    return batch;
}

std::int32_t candidate_count_for(const InteractionGraph& graph, std::int32_t u,
                                 double multiplier) {
    const double raw = multiplier * graph.user_degree(u);
    return std::max<std::int32_t>(1, static_cast<std::int32_t>(std::llround(raw)));
}

namespace {

SampleBatch draw_batch_for(const TrainConfig& cfg, const InteractionGraph& g,
                           const SamplerModel* sampler, const PopularityTable* pop,
                           std::int32_t u, std::uint64_t seed, std::int32_t epoch) {
    if (cfg.sampler == SamplerKind::cosam) return sampler->draw_candidate_set(u, seed, epoch);
    const std::int32_t count = candidate_count_for(g, u, cfg.sampler_cfg.candidate_multiplier);
    const std::uint64_t lane =
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(epoch)) << 32) |
        static_cast<std::uint32_t>(u);
    SplitMix64 rng(make_stream(seed, kRngSample, lane, 0));
    if (cfg.sampler == SamplerKind::uniform) return uniform_sample(g, u, count, rng);
    return popularity_sample(g, *pop, u, count, rng);
}

} // namespace

TrainedModel train(const SplitDataset& split, const TrainConfig& config,
                   const EpochCallback& progress) {
    config.validate();
    TrainedModel out;
    out.config = config;
    out.graph = std::make_shared<InteractionGraph>(InteractionGraph::build(split.train));
    const InteractionGraph& g = *out.graph;
    out.recommender =
        RecommenderModel::init(g.num_users(), g.num_items(), config.rec_cfg, config.seed);

    AdamOptimizer user_opt(out.recommender.user_parameters().size(), config.lr);
    AdamOptimizer item_opt(out.recommender.item_parameters().size(), config.lr);
    std::optional<AdamOptimizer> theta_opt;
    PopularityTable pop;
    if (config.sampler == SamplerKind::cosam) {
        out.sampler.emplace(g, config.sampler_cfg);
        theta_opt.emplace(out.sampler->logits().size(), config.sampler_lr);
    } else if (config.sampler == SamplerKind::popularity) {
        pop = PopularityTable(g, config.alpha);
    }

    std::vector<std::int32_t> users(g.num_users());
    std::iota(users.begin(), users.end(), 0);

    std::vector<double> user_grad(out.recommender.user_parameters().size());
    std::vector<double> item_grad(out.recommender.item_parameters().size());
    std::vector<double> theta_grad(out.sampler ? out.sampler->logits().size() : 0);
    const std::int32_t k5 = 5;

    std::int64_t tick = 0;
    for (std::int32_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<std::int32_t> order = users;
        SplitMix64 shuffle_rng(make_stream(config.seed, kRngShuffle, epoch, 0));
        for (std::size_t j = order.size() - 1; j > 0; --j)
            std::swap(order[j], order[shuffle_rng.next_below(j + 1)]);

        double epoch_objective = 0.0;
        std::int32_t batch_id = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_id) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            const std::size_t count = stop - start;

            std::vector<SampleBatch> batches(count);
            parallel_for(0, static_cast<std::int64_t>(count), config.threads, [&](std::int64_t b) {
                batches[b] = draw_batch_for(config, g, out.sampler ? &*out.sampler : nullptr,
                                            &pop, order[start + b], config.seed, epoch);
            });
            BatchTrace trace;
            trace.sampled = ++tick;

            std::fill(user_grad.begin(), user_grad.end(), 0.0);
            std::fill(item_grad.begin(), item_grad.end(), 0.0);
            out.recommender.gradient(g, batches, user_grad, item_grad);
            out.recommender.apply_gradient(user_grad, item_grad, user_opt, item_opt);
            trace.phi_updated = ++tick;

            const double batch_objective = out.recommender.objective(g, batches);
            if (!std::isfinite(batch_objective))
                throw std::runtime_error("training diverged: non-finite objective at epoch " +
                                         std::to_string(epoch + 1) + ", batch " +
                                         std::to_string(batch_id));
            epoch_objective += batch_objective;

            if (out.sampler) {
                std::vector<std::vector<double>> rewards(count);
                parallel_for(0, static_cast<std::int64_t>(count), config.threads,
                             [&](std::int64_t b) {
                                 const SampleBatch& batch = batches[b];
                                 rewards[b].resize(batch.items.size());
                                 for (std::size_t k = 0; k < batch.items.size(); ++k)
                                     rewards[b][k] =
                                         out.recommender.reward(g, batch.user, batch.items[k]);
                             });
                trace.rewards_done = ++tick;
                std::fill(theta_grad.begin(), theta_grad.end(), 0.0);
                out.sampler->policy_gradient(batches, rewards, theta_grad);
                out.sampler->apply_gradient(theta_grad, *theta_opt);
                trace.theta_updated = ++tick;
            }
            out.traces.push_back(trace);
        }

        EpochLog el;
        el.epoch = epoch + 1;
        el.objective = epoch_objective;
        if (config.eval_every > 0 && (epoch + 1) % config.eval_every == 0) {
            EvalReport rep = evaluate(out.sampler ? &*out.sampler : nullptr, out.recommender, g,
                                      split, std::span<const std::int32_t>(&k5, 1),
                                      config.threads, false);
            el.has_metrics = true;
            el.pre5 = rep.precision[0];
            el.rec5 = rep.recall[0];
            el.ndcg = rep.ndcg;
        }
        el.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.log.push_back(el);
        if (progress) progress(el);
    }
    return out;
}

double lower_bound_estimate(const SamplerModel& sampler, const RecommenderModel& rec,
                            const SplitDataset& split, std::int32_t sample_count,
                            std::uint64_t seed) {
    if (sample_count < 1)
        throw std::invalid_argument("lower bound: sample_count must be >= 1");
    const InteractionGraph& g = sampler.graph();
    if (split.train.n != g.num_users() || split.train.m != g.num_items())
        throw std::invalid_argument("lower bound: split does not match the sampler's graph");
    double total = 0.0;
    for (std::int32_t u = 0; u < g.num_users(); ++u) {
        const auto positives = g.user_neighbors(u);
        if (positives.empty()) continue;
        const SamplingDistribution rho = sampler.exact_rho(u);
        for (std::int32_t i : positives)
            total += std::log(rho.rho[i]) + std::log(rec.predict_fr(u, i));
        double mean_neg = 0.0;
        for (std::int32_t s = 0; s < sample_count; ++s) {
            SplitMix64 rng(make_stream(seed, kRngEval, static_cast<std::uint64_t>(u),
                                       static_cast<std::uint64_t>(s)));
            const WalkPath path = sampler.arw_sample(u, rng);
            mean_neg += rec.reward(g, u, path.emitted_item);
        }
        mean_neg /= sample_count;
        total += sampler.candidate_count(u) * mean_neg;
    }
    return total;
}

ProbeReport variance_probe(const TrainedModel& model, std::int32_t repeats,
                           std::int32_t batch_size, std::uint64_t seed) {
    if (repeats < 1) throw std::invalid_argument("probe: repeats must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("probe: batch size must be >= 1");
    const InteractionGraph& g = *model.graph;
    const TrainConfig& cfg = model.config;
    PopularityTable pop;
    if (cfg.sampler == SamplerKind::popularity) pop = PopularityTable(g, cfg.alpha);

    const std::size_t dim_total =
        model.recommender.user_parameters().size() + model.recommender.item_parameters().size();
    std::vector<double> mean(dim_total, 0.0), m2(dim_total, 0.0);
    std::vector<double> user_grad(model.recommender.user_parameters().size());
    std::vector<double> item_grad(model.recommender.item_parameters().size());

    double loss_sum = 0.0;
    std::int64_t loss_count = 0;
    std::vector<std::int32_t> users(g.num_users());
    std::iota(users.begin(), users.end(), 0);

    for (std::int32_t r = 0; r < repeats; ++r) {
        SplitMix64 pick_rng(make_stream(seed, kRngProbe, static_cast<std::uint64_t>(r), 0));
        const std::size_t take = std::min<std::size_t>(batch_size, users.size());
        for (std::size_t j = 0; j < take; ++j) {
            const std::size_t swap_with = j + pick_rng.next_below(users.size() - j);
            std::swap(users[j], users[swap_with]);
        }

        std::vector<SampleBatch> batches(take);
        parallel_for(0, static_cast<std::int64_t>(take), cfg.threads, [&](std::int64_t b) {
            batches[b] = draw_batch_for(cfg, g, model.sampler ? &*model.sampler : nullptr, &pop,
                                        users[b], seed + 1, r);
        });
        for (const SampleBatch& batch : batches) {
            for (std::int32_t i : batch.items) {
                loss_sum += -model.recommender.reward(g, batch.user, i);
                ++loss_count;
            }
        }

        std::fill(user_grad.begin(), user_grad.end(), 0.0);
        std::fill(item_grad.begin(), item_grad.end(), 0.0);
        model.recommender.gradient(g, batches, user_grad, item_grad);
        double norm_sq = 0.0;
        for (double x : user_grad) norm_sq += x * x;
        for (double x : item_grad) norm_sq += x * x;
        const double inv_norm = norm_sq > 0.0 ? 1.0 / std::sqrt(norm_sq) : 0.0;

        const double nr = r + 1;
        for (std::size_t k = 0; k < dim_total; ++k) {
            const double x = (k < user_grad.size() ? user_grad[k]
                                                   : item_grad[k - user_grad.size()]) *
                             inv_norm;
            const double delta = x - mean[k];
            mean[k] += delta / nr;
            m2[k] += delta * (x - mean[k]);
        }
    }

    ProbeReport report;
    report.repeats = repeats;
    if (repeats > 1) {
        double var_sum = 0.0;
        for (double v : m2) var_sum += v / (repeats - 1);
        report.grad_variance = var_sum / static_cast<double>(dim_total);
    }
    report.mean_sampled_loss = loss_count > 0 ? loss_sum / loss_count : 0.0;
    return report;
}

} // namespace cosam
