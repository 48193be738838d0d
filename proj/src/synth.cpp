#include "cosam/synth.hpp"

#include "cosam/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

namespace cosam {

void SynthConfig::validate() const {
    if (users < 1 || items < 1)
        throw std::invalid_argument("synth: users and items must be >= 1");
    if (positives < users)
        throw std::invalid_argument("synth: need at least one positive per user");
    if (clusters < 1 || clusters > std::min(users, items))
        throw std::invalid_argument("synth: clusters must be in [1, min(users, items)]");
    if (noise < 0.0 || noise > 1.0)
        throw std::invalid_argument("synth: noise must lie in [0, 1]");
    if (zipf < 0.0) throw std::invalid_argument("synth: zipf must be >= 0");
}

ImplicitDataset synth_dataset(const SynthConfig& cfg) {
    cfg.validate();
    SplitMix64 rng(make_stream(cfg.seed, kRngSynth, 0, 0));

    std::vector<std::vector<std::int32_t>> cluster_items(cfg.clusters);
    for (std::int32_t i = 0; i < cfg.items; ++i) cluster_items[i % cfg.clusters].push_back(i);

    // Users read from a personal window of their cluster's item list, with a
    // Zipf skew anchored at the window start. Two users overlap only as far
    // as their windows do, which puts recoverable structure below the
    // cluster level.
    std::vector<std::vector<double>> cluster_cum(cfg.clusters);
    for (std::int32_t c = 0; c < cfg.clusters; ++c) {
        const auto len = static_cast<std::int32_t>(cluster_items[c].size());
        const std::int32_t width = std::min(len, std::max<std::int32_t>(8, len / 6));
        double acc = 0.0;
        cluster_cum[c].reserve(width);
        for (std::int32_t r = 0; r < width; ++r) {
            acc += 1.0 / std::pow(static_cast<double>(r + 1), cfg.zipf);
            cluster_cum[c].push_back(acc);
        }
    }
    auto draw_in_cluster = [&](std::int32_t c, std::int32_t center) {
        const auto& pool = cluster_items[c];
        const auto& cum = cluster_cum[c];
        const double r = rng.next_double() * cum.back();
        const auto it = std::upper_bound(cum.begin(), cum.end(), r);
        const std::size_t off = std::min<std::size_t>(it - cum.begin(), cum.size() - 1);
        return pool[(static_cast<std::size_t>(center) + off) % pool.size()];
    };

    std::vector<double> raw(cfg.users);
    double raw_sum = 0.0;
    const double base = static_cast<double>(cfg.positives) / cfg.users;
    for (std::int32_t u = 0; u < cfg.users; ++u) {
        raw[u] = base * std::exp(0.6 * rng.next_gaussian() - 0.18);
        raw_sum += raw[u];
    }
    const double scale = static_cast<double>(cfg.positives) / raw_sum;
    const std::int32_t deg_cap = std::max<std::int32_t>(3, cfg.items / 2);

    ImplicitDataset ds;
    ds.n = cfg.users;
    ds.m = cfg.items;
    std::unordered_set<std::int32_t> seen;
    for (std::int32_t u = 0; u < cfg.users; ++u) {
        const std::int32_t home = u % cfg.clusters;
        const auto center = static_cast<std::int32_t>(
            rng.next_below(cluster_items[home].size()));
        const std::int32_t deg = std::clamp<std::int32_t>(
            static_cast<std::int32_t>(std::llround(raw[u] * scale)), 3, deg_cap);
        seen.clear();
        std::int64_t attempts = 0;
        const std::int64_t attempt_cap = 50LL * deg + 200;
        while (static_cast<std::int32_t>(seen.size()) < deg && attempts < attempt_cap) {
            ++attempts;
            const std::int32_t i = rng.bernoulli(cfg.noise)
                                       ? static_cast<std::int32_t>(rng.next_below(cfg.items))
                                       : draw_in_cluster(home, center);
            if (seen.insert(i).second) ds.pairs.emplace_back(u, i);
        }
    }

    ds.user_tokens.reserve(cfg.users);
    ds.item_tokens.reserve(cfg.items);
    for (std::int32_t u = 0; u < cfg.users; ++u) {
        ds.user_tokens.push_back("u" + std::to_string(u));
        ds.user_ids.emplace(ds.user_tokens.back(), u);
    }
    for (std::int32_t i = 0; i < cfg.items; ++i) {
        ds.item_tokens.push_back("i" + std::to_string(i));
        ds.item_ids.emplace(ds.item_tokens.back(), i);
    }
    return ds;
}

void write_synth_tsv(const std::string& path, const ImplicitDataset& ds) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("synth: cannot open '" + path + "' for writing");
    for (auto [u, i] : ds.pairs)
        out << ds.user_tokens[u] << '\t' << ds.item_tokens[i] << '\n';
    if (!out) throw std::runtime_error("synth: write to '" + path + "' failed");
}

} // namespace cosam
