// Acceptance gate: one self-contained check per release criterion, each
// printing a single PASS/FAIL line with its measured numbers. Run all with no
// arguments or a single criterion with --only N. Exit code 0 only if every
// executed criterion passed.

#include "cosam/checkpoint.hpp"
#include "cosam/eval.hpp"
#include "cosam/synth.hpp"
#include "cosam/trainer.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <sys/wait.h>

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof(buf), pattern, args);
    va_end(args);
    return buf;
}

std::vector<double> random_logits(const cosam::InteractionGraph& g, std::uint64_t seed,
                                  double scale) {
    cosam::SplitMix64 rng(cosam::mix64(seed));
    std::vector<double> logits(g.num_directed_edges());
    for (double& v : logits) v = scale * rng.next_gaussian();
    return logits;
}

// ---------------------------------------------------------------- criterion 1

Outcome criterion_normalization() {
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        cosam::SplitMix64 meta(cosam::mix64(4000 + t));
        const auto n = static_cast<std::int32_t>(1 + meta.next_below(30));
        const auto m = static_cast<std::int32_t>(1 + meta.next_below(30));
        const double density = 0.05 + 0.4 * meta.next_double();
        auto ds = oracle::random_dataset(n, m, density, 7000 + t);
        if (t % 7 == 0) ds.n += 1; // keep one edgeless user in the node space
        const auto g = cosam::InteractionGraph::build(ds);

        cosam::SamplerConfig cfg;
        cfg.c1 = t % 9 == 0 ? 0.0 : 0.98 * meta.next_double();
        cfg.c2 = 0.98 * meta.next_double();
        cfg.l_max = static_cast<std::int32_t>(5 + meta.next_below(20));
        cosam::SamplerModel sampler(g, cfg);
        sampler.set_logits(random_logits(g, 11000 + t, 1.2));

        for (std::int32_t u = 0; u < ds.n; ++u) {
            const auto dist = sampler.exact_rho(u);
            double sum = 0.0;
            for (double v : dist.rho) sum += v;
            worst = std::max(worst, std::abs(sum - 1.0));
        }
    }
    return {worst < 1e-9, fmt("200 graphs, max |sum(rho)-1| = %.3e (< 1e-9)", worst)};
}

// ---------------------------------------------------------------- criterion 2

Outcome criterion_sampler_agreement() {
    double worst_tv = 0.0;
    for (int t = 0; t < 10; ++t) {
        cosam::SplitMix64 meta(cosam::mix64(5200 + t));
        const auto n = static_cast<std::int32_t>(3 + meta.next_below(18));
        const auto m = static_cast<std::int32_t>(
            3 + meta.next_below(std::min<std::uint64_t>(23, 50 - n - 2)));
        const auto ds = oracle::random_dataset(n, m, 0.3, 5300 + t);
        const auto g = cosam::InteractionGraph::build(ds);

        cosam::SamplerConfig cfg;
        cfg.c1 = 0.3 + 0.5 * meta.next_double();
        cfg.c2 = 0.3 + 0.5 * meta.next_double();
        cfg.l_max = 10;
        cosam::SamplerModel sampler(g, cfg);
        const auto logits = random_logits(g, 5400 + t, 1.0);
        sampler.set_logits(logits);

        const auto u = static_cast<std::int32_t>(meta.next_below(n));
        const auto ref = oracle::truncated_rho(g, logits, cfg.c1, cfg.c2, cfg.l_max, u);

        const int n_draws = 100000;
        std::vector<double> emp(m, 0.0);
        auto rng = cosam::make_stream(5500 + t, cosam::kRngEval, t, 0);
        for (int k = 0; k < n_draws; ++k) emp[sampler.arw_sample(u, rng).emitted_item] += 1.0;

        double tv = 0.0;
        for (std::int32_t i = 0; i < m; ++i) tv += std::abs(emp[i] / n_draws - ref[i]);
        worst_tv = std::max(worst_tv, 0.5 * tv);
    }
    return {worst_tv < 0.01,
            fmt("10 graphs x 1e5 draws, max TV(walk, solver) = %.5f (< 0.01)", worst_tv)};
}

// ---------------------------------------------------------------- criterion 3

Outcome criterion_path_decomposition() {
    double worst = 0.0, allowed = 0.0;
    for (int t = 0; t < 5; ++t) {
        const auto n = static_cast<std::int32_t>(3 + t);
        const auto m = static_cast<std::int32_t>(4 + t);
        const auto ds = oracle::random_dataset(n, m, 0.45, 6100 + t, 3);
        const auto g = cosam::InteractionGraph::build(ds);

        cosam::SamplerConfig cfg;
        cfg.c1 = 0.5;
        cfg.c2 = 0.55;
        cfg.l_max = 6;
        cosam::SamplerModel sampler(g, cfg);
        const auto logits = random_logits(g, 6200 + t, 0.8);
        sampler.set_logits(logits);

        const double p0 = sampler.uniform_component_p0();
        allowed = 1e-8 + cfg.tail_mass();
        for (std::int32_t u = 0; u < n; ++u) {
            const auto events =
                oracle::enumerate_events(g, logits, cfg.c1, cfg.c2, cfg.l_max, u);
            std::vector<double> ending_at(m, 0.0);
            for (const auto& e : events) {
                if (g.is_user_node(e.path.nodes.back())) continue;
                ending_at[e.path.emitted_item] += sampler.path_strength(e.path);
            }
            const auto dist = sampler.exact_rho(u);
            for (std::int32_t i = 0; i < m; ++i)
                worst = std::max(worst, std::abs(p0 + ending_at[i] - dist.rho[i]));
        }
    }
    return {worst <= allowed,
            fmt("max |p0 + sum(path strengths) - rho| = %.3e (<= %.3e)", worst, allowed)};
}

// ---------------------------------------------------------------- criterion 4

Outcome criterion_walk_length() {
    const auto ds = oracle::random_dataset(25, 25, 0.2, 4040);
    const auto g = cosam::InteractionGraph::build(ds);
    double worst_margin = -1e9;
    std::string worst_label;
    for (double c1 : {0.4, 0.6, 0.8}) {
        for (double c2 : {0.4, 0.6, 0.8}) {
            cosam::SamplerConfig cfg;
            cfg.c1 = c1;
            cfg.c2 = c2;
            cfg.l_max = 100;
            cosam::SamplerModel sampler(g, cfg);
            sampler.set_logits(random_logits(g, 4100, 1.0));

            const int n_draws = 100000;
            auto rng = cosam::make_stream(4200, cosam::kRngEval,
                                          static_cast<std::uint64_t>(c1 * 10),
                                          static_cast<std::uint64_t>(c2 * 10));
            double sum = 0.0, sum_sq = 0.0;
            for (int k = 0; k < n_draws; ++k) {
                const auto path = sampler.arw_sample(k % 25, rng);
                const double len = path.length();
                sum += len;
                sum_sq += len * len;
            }
            const double mean = sum / n_draws;
            const double var = std::max(0.0, sum_sq / n_draws - mean * mean);
            const double se = std::sqrt(var / n_draws);
            const double bound = 2.0 / (1.0 - std::min(c1, c2));
            const double margin = mean - (bound + 3.0 * se);
            if (margin > worst_margin) {
                worst_margin = margin;
                worst_label = fmt("c1=%.1f c2=%.1f mean=%.3f bound=%.3f+3*%.4f", c1, c2, mean,
                                  bound, se);
            }
        }
    }
    return {worst_margin <= 0.0, fmt("tightest case %s (margin %.3f <= 0)", worst_label.c_str(),
                                     worst_margin)};
}

// ---------------------------------------------------------------- criterion 5

double rel_err(double a, double b, double floor_at) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor_at});
}

double log_path_fd_err(const cosam::InteractionGraph& g, const cosam::SamplerModel& sampler,
                       const std::vector<double>& logits, const cosam::WalkPath& path) {
    const double h = 1e-5;
    double worst = 0.0;
    std::map<std::int64_t, double> ana;
    for (const auto& [edge, value] : sampler.log_path_grad(path)) ana[edge] = value;

    cosam::SamplerModel probe = sampler;
    for (std::int32_t step = 0; step < path.length(); ++step) {
        const std::int32_t node = path.nodes[step];
        const std::int64_t row = g.edge_offset(node);
        for (std::int32_t j = 0; j < g.degree(node); ++j) {
            const std::int64_t edge = row + j;
            auto bumped = logits;
            bumped[edge] += h;
            probe.set_logits(bumped);
            const double up = std::log(probe.path_strength(path));
            bumped[edge] -= 2 * h;
            probe.set_logits(bumped);
            const double down = std::log(probe.path_strength(path));
            const double num = (up - down) / (2 * h);
            const auto it = ana.find(edge);
            worst = std::max(worst, rel_err(num, it == ana.end() ? 0.0 : it->second, 1e-6));
        }
    }
    return worst;
}

Outcome criterion_gradient_oracles() {
    // log path strength against central differences
    double worst_path = 0.0;
    {
        const auto ds = oracle::random_dataset(4, 5, 0.5, 5050, 3);
        const auto g = cosam::InteractionGraph::build(ds);
        cosam::SamplerConfig cfg;
        cfg.c1 = 0.5;
        cfg.c2 = 0.5;
        cfg.l_max = 8;
        cosam::SamplerModel sampler(g, cfg);
        const auto logits = random_logits(g, 5060, 0.8);
        sampler.set_logits(logits);
        auto rng = cosam::make_stream(5070, cosam::kRngEval, 0, 0);
        for (int k = 0; k < 12; ++k) {
            const auto path = sampler.arw_sample(k % 4, rng);
            worst_path = std::max(worst_path, log_path_fd_err(g, sampler, logits, path));
        }
    }

    // recommender gradient against central differences
    double worst_rec = 0.0;
    {
        const auto ds = oracle::random_dataset(4, 6, 0.45, 5080);
        const auto g = cosam::InteractionGraph::build(ds);
        cosam::SamplerModel sampler(g, {});
        sampler.set_logits(random_logits(g, 5090, 0.6));
        std::vector<cosam::SampleBatch> batches;
        for (std::int32_t u = 0; u < 3; ++u)
            batches.push_back(sampler.draw_candidate_set(u, 5100, 0));

        cosam::RecommenderConfig rcfg;
        rcfg.dim = 3;
        rcfg.lambda = 1e-3;
        rcfg.init_scale = 0.3;
        const auto rec = cosam::RecommenderModel::init(4, 6, rcfg, 5110);
        std::vector<double> ug(rec.user_parameters().size(), 0.0);
        std::vector<double> ig(rec.item_parameters().size(), 0.0);
        rec.gradient(g, batches, ug, ig);

        const double h = 1e-6;
        auto fd = [&](bool user_side, std::size_t k) {
            auto up = rec;
            auto down = rec;
            (user_side ? up.user_parameters() : up.item_parameters())[k] += h;
            (user_side ? down.user_parameters() : down.item_parameters())[k] -= h;
            return (up.regularized_objective(g, batches) -
                    down.regularized_objective(g, batches)) /
                   (2 * h);
        };
        for (std::size_t k = 0; k < ug.size(); ++k)
            worst_rec = std::max(worst_rec, rel_err(fd(true, k), ug[k], 1e-6));
        for (std::size_t k = 0; k < ig.size(); ++k)
            worst_rec = std::max(worst_rec, rel_err(fd(false, k), ig[k], 1e-6));
    }

    // exact-expectation policy gradient against differences of the bound
    double worst_pol = 0.0;
    {
        cosam::ImplicitDataset ds;
        ds.n = 3;
        ds.m = 4;
        ds.pairs = {{0, 0}, {0, 1}, {1, 1}, {1, 2}, {2, 3}};
        const auto g = cosam::InteractionGraph::build(ds);
        cosam::SamplerConfig cfg;
        cfg.c1 = 0.55;
        cfg.c2 = 0.45;
        cfg.l_max = 6;
        cosam::SamplerModel sampler(g, cfg);
        const auto logits = random_logits(g, 5120, 0.6);
        sampler.set_logits(logits);

        cosam::RecommenderConfig rcfg;
        rcfg.dim = 4;
        rcfg.init_scale = 0.4;
        const auto rec = cosam::RecommenderModel::init(3, 4, rcfg, 5130);
        const double p0 = sampler.uniform_component_p0();

        // bound value at given logits, from the independent forward solver
        auto bound_at = [&](const std::vector<double>& theta) {
            double total = 0.0;
            for (std::int32_t u = 0; u < 3; ++u) {
                const auto rho =
                    oracle::truncated_rho(g, theta, cfg.c1, cfg.c2, cfg.l_max, u);
                const double nu = sampler.candidate_count(u);
                for (std::int32_t i : g.user_neighbors(u)) total += std::log(p0 + rho[i]);
                for (std::int32_t i = 0; i < 4; ++i)
                    total += nu * rho[i] * rec.reward(g, u, i);
            }
            return total;
        };

        std::vector<double> ana(g.num_directed_edges(), 0.0);
        for (std::int32_t u = 0; u < 3; ++u) {
            const auto rho = oracle::truncated_rho(g, logits, cfg.c1, cfg.c2, cfg.l_max, u);
            const double nu = sampler.candidate_count(u);
            const auto events =
                oracle::enumerate_events(g, logits, cfg.c1, cfg.c2, cfg.l_max, u);
            for (const auto& e : events) {
                const std::int32_t i = e.path.emitted_item;
                double scale = nu * rec.reward(g, u, i);
                if (g.has_edge(u, i)) scale += 1.0 / (p0 + rho[i]);
                sampler.accumulate_log_path_grad(e.path, e.prob * scale, ana);
            }
        }

        const double h = 1e-5;
        for (std::int64_t edge = 0; edge < g.num_directed_edges(); ++edge) {
            auto bumped = logits;
            bumped[edge] += h;
            const double up = bound_at(bumped);
            bumped[edge] -= 2 * h;
            const double down = bound_at(bumped);
            worst_pol = std::max(worst_pol, rel_err((up - down) / (2 * h), ana[edge], 1e-8));
        }
    }

    const bool pass = worst_path < 1e-4 && worst_rec < 1e-4 && worst_pol < 1e-3;
    return {pass, fmt("max rel err: log-path %.2e (< 1e-4), recommender %.2e (< 1e-4), "
                      "policy %.2e (< 1e-3)",
                      worst_path, worst_rec, worst_pol)};
}

// ---------------------------------------------------------------- criterion 6

Outcome criterion_metric_oracle() {
    cosam::SplitMix64 rng(cosam::mix64(6001));
    const std::vector<std::int32_t> ks = {1, 3, 5, 10};
    int mismatches = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const auto m = static_cast<std::int32_t>(5 + rng.next_below(30));
        std::vector<double> scores(m);
        for (double& v : scores) v = rng.next_double();
        if (rep % 3 == 0)
            for (double& v : scores) v = std::floor(v * 4) / 4;

        std::vector<std::int32_t> train_pos, con;
        for (std::int32_t i = 0; i < m; ++i) {
            const auto coin = rng.next_below(5);
            if (coin == 0) train_pos.push_back(i);
            else if (coin == 1) con.push_back(i);
        }
        if (con.empty()) {
            std::int32_t pick = 0;
            while (std::binary_search(train_pos.begin(), train_pos.end(), pick)) ++pick;
            if (pick == m) continue; // every item landed in train
            con.push_back(pick);
        }

        cosam::RankedList r;
        r.user = 0;
        std::vector<bool> in_train(m, false);
        for (auto i : train_pos) in_train[i] = true;
        for (std::int32_t i = 0; i < m; ++i)
            if (!in_train[i]) r.items.push_back(i);
        std::stable_sort(r.items.begin(), r.items.end(), [&](std::int32_t a, std::int32_t b) {
            if (scores[a] != scores[b]) return scores[a] > scores[b];
            return a < b;
        });
        for (auto i : r.items) r.scores.push_back(scores[i]);

        const auto brute = oracle::brute_metrics(scores, train_pos, con, ks);
        for (std::size_t j = 0; j < ks.size(); ++j) {
            if (cosam::precision_at_k(r, con, ks[j]) != brute.precision[j]) ++mismatches;
            if (cosam::recall_at_k(r, con, ks[j]) != brute.recall[j]) ++mismatches;
        }
        if (cosam::ndcg_full(r, con) != brute.ndcg) ++mismatches;
    }

    cosam::RankedList worked;
    worked.user = 0;
    worked.items = {7, 4, 9, 2, 5};
    worked.scores.assign(5, 0.0);
    const double ndcg = cosam::ndcg_full(worked, {7, 9});
    const double ex_err = std::abs(ndcg - 0.91972);

    const bool pass = mismatches == 0 && ex_err < 0.5e-5;
    return {pass, fmt("100 cases, %d mismatches; worked example ndcg=%.7f (|err|=%.1e < 5e-6)",
                      mismatches, ndcg, ex_err)};
}

// ---------------------------------------------------------------- criterion 7

Outcome criterion_end_to_end() {
    const int threads =
        std::max(1, std::min(8, static_cast<int>(std::thread::hardware_concurrency())));
    cosam::SynthConfig synth_cfg; // defaults replicate the target corpus scale
    const auto ds = cosam::synth_dataset(synth_cfg);
    const auto split = cosam::split_holdout(ds, 0.2, 42);

    cosam::TrainConfig base;
    base.epochs = 30;
    base.batch_size = 128;
    base.seed = 7;
    base.threads = threads;

    auto run = [&](cosam::SamplerKind kind) {
        auto cfg = base;
        cfg.sampler = kind;
        return cosam::train(split, cfg);
    };
    const auto model_c = run(cosam::SamplerKind::cosam);
    const auto model_u = run(cosam::SamplerKind::uniform);

    const std::int32_t k5 = 5;
    const auto span5 = std::span<const std::int32_t>(&k5, 1);
    const auto rep_c = cosam::evaluate(&*model_c.sampler, model_c.recommender, *model_c.graph,
                                       split, span5, threads);
    const auto rep_u = cosam::evaluate(nullptr, model_u.recommender, *model_u.graph, split,
                                       span5, threads);

    const auto probe_c = cosam::variance_probe(model_c, 200, 64, 99);
    const auto probe_u = cosam::variance_probe(model_u, 200, 64, 99);

    const double pre_c = rep_c.precision[0], pre_u = rep_u.precision[0];
    const double ratio = pre_u > 0.0 ? pre_c / pre_u : 1e9;
    const bool pass = pre_c > pre_u && pre_c >= 1.10 * pre_u &&
                      probe_c.mean_sampled_loss > probe_u.mean_sampled_loss;
    return {pass,
            fmt("pre@5 cosam=%.4f uniform=%.4f (ratio %.3f >= 1.10); sampled loss "
                "%.4f > %.4f; %d threads",
                pre_c, pre_u, ratio, probe_c.mean_sampled_loss, probe_u.mean_sampled_loss,
                threads)};
}

// ---------------------------------------------------------------- criterion 8

double sampling_seconds(const cosam::InteractionGraph& g, const cosam::SamplerConfig& cfg) {
    cosam::SamplerModel sampler(g, cfg);
    double best = 1e300;
    std::size_t sink = 0;
    for (int rep = 0; rep < 3; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        for (std::int32_t u = 0; u < g.num_users(); ++u)
            sink += sampler.draw_candidate_set(u, 11, rep).items.size();
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        best = std::min(best, dt.count());
    }
    if (sink == 0) return -1.0;
    return best;
}

Outcome criterion_complexity() {
    cosam::SynthConfig cfg_a;
    cosam::SynthConfig cfg_b = cfg_a;
    cfg_b.users *= 2;
    cfg_b.positives *= 2;

    const auto ds_a = cosam::synth_dataset(cfg_a);
    const auto ds_b = cosam::synth_dataset(cfg_b);
    auto ds_c = ds_a; // same interactions, twice the item space
    ds_c.m *= 2;

    const auto g_a = cosam::InteractionGraph::build(ds_a);
    const auto g_b = cosam::InteractionGraph::build(ds_b);
    const auto g_c = cosam::InteractionGraph::build(ds_c);

    const cosam::SamplerConfig walk_cfg; // identical walk settings everywhere
    const double t_a = sampling_seconds(g_a, walk_cfg);
    const double t_b = sampling_seconds(g_b, walk_cfg);
    const double t_c = sampling_seconds(g_c, walk_cfg);

    const double r_pos = t_b / t_a;
    const double r_items = t_c / t_a;
    const bool pass = r_pos >= 1.4 && r_pos <= 2.6 && r_items >= 0.7 && r_items <= 1.3;
    return {pass,
            fmt("2x positives: %.2fx (in [1.4, 2.6]); 2x items: %.2fx (in [0.7, 1.3]); "
                "base pass %.3fs",
                r_pos, r_items, t_a)};
}

// ---------------------------------------------------------------- criterion 9

Outcome criterion_determinism() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "cosam_acceptance_9";
    fs::remove_all(dir);
    fs::create_directories(dir);

    const std::string bin = COSAM_BIN_PATH;
    auto run = [&](const std::string& args) {
        const std::string cmd = bin + " " + args + " 2>/dev/null";
        const int status = std::system(cmd.c_str());
        return status != -1 && WIFEXITED(status) && WEXITSTATUS(status) == 0;
    };
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
    };

    const std::string raw = (dir / "raw.tsv").string();
    const std::string data = (dir / "data").string();
    if (!run("synth --users 80 --items 50 --positives 600 --clusters 5 --seed 11 --out " + raw))
        return {false, "synth step failed"};
    if (!run("prepare --input " + raw + " --min-item-degree 1 --seed 3 --out-dir " + data))
        return {false, "prepare step failed"};

    const std::string train_args =
        "train --data-dir " + data + " --threads 1 --seed 4242 --epochs 4 --eval-every 2";
    if (!run(train_args + " --out " + (dir / "a.ckpt").string()))
        return {false, "first training run failed"};
    if (!run(train_args + " --out " + (dir / "b.ckpt").string()))
        return {false, "second training run failed"};

    const std::string log_a = slurp(dir / "a.ckpt.log.csv");
    const std::string log_b = slurp(dir / "b.ckpt.log.csv");
    const bool logs_match = !log_a.empty() && log_a == log_b;
    const bool has_epochs = log_a.find("\n4,") != std::string::npos;
    const bool ckpt_match = slurp(dir / "a.ckpt") == slurp(dir / "b.ckpt");
    return {logs_match && has_epochs && ckpt_match,
            fmt("training log %zu bytes, logs %s, checkpoints %s", log_a.size(),
                logs_match ? "identical" : "DIFFER", ckpt_match ? "identical" : "DIFFER")};
}

// -------------------------------------------------------------------- driver

struct Criterion {
    int id;
    const char* name;
    double time_limit; // seconds, 0 = none stated
    std::function<Outcome()> fn;
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int a = 1; a < argc; ++a) {
        if (std::strcmp(argv[a], "--only") == 0 && a + 1 < argc) {
            only = std::atoi(argv[++a]);
        } else {
            std::fprintf(stderr, "usage: %s [--only N]\n", argv[0]);
            return 1;
        }
    }

    const std::vector<Criterion> table = {
        {1, "normalization", 10.0, criterion_normalization},
        {2, "sampler matches solver", 30.0, criterion_sampler_agreement},
        {3, "path decomposition", 10.0, criterion_path_decomposition},
        {4, "walk length bound", 20.0, criterion_walk_length},
        {5, "gradient oracles", 60.0, criterion_gradient_oracles},
        {6, "metric oracle", 5.0, criterion_metric_oracle},
        {7, "end-to-end comparison", 900.0, criterion_end_to_end},
        {8, "complexity contract", 0.0, criterion_complexity},
        {9, "determinism", 0.0, criterion_determinism},
    };

    bool all_pass = true;
    int ran = 0;
    for (const auto& c : table) {
        if (only != 0 && c.id != only) continue;
        ++ran;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.fn();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        bool pass = outcome.pass;
        std::string note;
        if (c.time_limit > 0.0 && dt.count() >= c.time_limit) {
            pass = false;
            note = fmt(" [over %.0fs limit]", c.time_limit);
        }
        std::printf("%s criterion %d (%s): %s [%.1fs]%s\n", pass ? "PASS" : "FAIL", c.id,
                    c.name, outcome.detail.c_str(), dt.count(), note.c_str());
        std::fflush(stdout);
        all_pass = all_pass && pass;
    }
    if (ran == 0) {
        std::fprintf(stderr, "no criterion numbered %d\n", only);
        return 1;
    }
    return all_pass ? 0 : 1;
}
