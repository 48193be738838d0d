// cosam command line driver.
//
// Subcommands: prepare, synth, train, evaluate, probe, inspect.
// Human-readable output goes to stderr; machine-readable CSV/JSON goes to
// stdout or to the file named by the relevant option.
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include "CLI11.hpp"
#include "json.hpp"

#include "cosam/checkpoint.hpp"
#include "cosam/config.hpp"
#include "cosam/dataset.hpp"
#include "cosam/eval.hpp"
#include "cosam/synth.hpp"
#include "cosam/trainer.hpp"

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

std::string format_real(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

cosam::LineFormat format_from_name(const std::string& name) {
    if (name == "tab") return cosam::LineFormat{'\t'};
    if (name == "comma") return cosam::LineFormat{','};
    throw std::invalid_argument("unknown format: " + name);
}

void write_training_log(const std::string& path, const std::vector<cosam::EpochLog>& log,
                        bool timing) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write training log: " + path);
    out << "epoch,objective,seconds,pre5,rec5,ndcg\n";
    for (const auto& row : log) {
        out << row.epoch << ',' << format_real(row.objective, 6) << ','
            << (timing ? format_real(row.seconds, 3) : std::string("0.000")) << ',';
        if (row.has_metrics) {
            out << format_real(row.pre5, 6) << ',' << format_real(row.rec5, 6) << ','
                << format_real(row.ndcg, 6);
        } else {
            out << ",,";
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("failed writing training log: " + path);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file: " + path);
    return out;
}

// Streams CSV either to stdout or to a file, depending on whether a path was given.
struct CsvSink {
    explicit CsvSink(const std::string& path) {
        if (!path.empty()) {
            file = open_out(path);
            stream = &file;
        } else {
            stream = &std::cout;
        }
    }
    std::ostream& out() { return *stream; }
    std::ofstream file;
    std::ostream* stream = nullptr;
};

int cmd_prepare(const std::string& input, const std::string& format_name, int min_item_degree,
                double test_fraction, int folds, int fold_index, std::uint64_t seed,
                const std::string& out_dir) {
    std::fprintf(stderr, "seed=%" PRIu64 "\n", seed);
    cosam::RawInteractions raw = cosam::load_interactions(input, format_from_name(format_name));
    cosam::ImplicitDataset ds = cosam::binarize_and_filter(raw, min_item_degree);
    cosam::SplitDataset split = folds > 0 ? cosam::split_fold(ds, folds, fold_index, seed)
                                   : cosam::split_holdout(ds, test_fraction, seed);
    std::filesystem::create_directories(out_dir);
    cosam::save_split_dir(out_dir, split);
    std::fprintf(stderr, "users=%d items=%d positives=%zu density=%.6f\n", ds.n, ds.m,
                 ds.pairs.size(), ds.density());
    std::fprintf(stderr, "malformed_lines=%zu blank_lines=%zu\n", raw.malformed_lines,
                 raw.blank_lines);
    std::fprintf(stderr, "train_pairs=%zu test_pairs=%zu\n", split.train.pairs.size(),
                 split.test.pairs.size());
    std::fprintf(stderr, "wrote %s\n", out_dir.c_str());
    return 0;
}

int cmd_synth(const cosam::SynthConfig& cfg, const std::string& out_path) {
    std::fprintf(stderr, "seed=%" PRIu64 "\n", cfg.seed);
    cosam::ImplicitDataset ds = cosam::synth_dataset(cfg);
    cosam::write_synth_tsv(out_path, ds);
    std::fprintf(stderr, "users=%d items=%d positives=%zu density=%.6f\n", ds.n, ds.m,
                 ds.pairs.size(), ds.density());
    std::fprintf(stderr, "wrote %s\n", out_path.c_str());
    return 0;
}

int cmd_train(const std::string& data_dir, const std::string& config_path, CLI::App* sub,
              const std::string& sampler_name, int epochs, std::uint64_t seed, int threads,
              int eval_every, bool timing, const std::string& out_path, std::string log_path) {
    std::map<std::string, std::string> kv;
    if (!config_path.empty()) kv = cosam::parse_config_file(config_path);
    cosam::TrainConfig cfg = cosam::train_config_from_map(kv);
    if (sub->count("--sampler") > 0) cfg.sampler = cosam::parse_sampler_kind(sampler_name);
    if (sub->count("--epochs") > 0) cfg.epochs = epochs;
    if (sub->count("--seed") > 0) cfg.seed = seed;
    if (sub->count("--eval-every") > 0) cfg.eval_every = eval_every;
    cfg.threads = threads;
    cfg.validate();

    std::fprintf(stderr, "seed=%" PRIu64 "\n", cfg.seed);
    std::fprintf(stderr, "sampler=%s epochs=%d batch_size=%d threads=%d\n",
                 cosam::sampler_kind_name(cfg.sampler).c_str(), cfg.epochs, cfg.batch_size,
                 cfg.threads);

    cosam::SplitDataset split = cosam::load_split_dir(data_dir);
    std::fprintf(stderr, "train_pairs=%zu test_pairs=%zu users=%d items=%d\n",
                 split.train.pairs.size(), split.test.pairs.size(), split.train.n, split.train.m);

    cosam::TrainedModel model =
        cosam::train(split, cfg, [&](const cosam::EpochLog& row) {
            if (row.has_metrics) {
                std::fprintf(stderr,
                             "epoch %d objective=%.6f seconds=%.3f pre5=%.4f rec5=%.4f "
                             "ndcg=%.4f\n",
                             row.epoch, row.objective, row.seconds, row.pre5, row.rec5, row.ndcg);
            } else {
                std::fprintf(stderr, "epoch %d objective=%.6f seconds=%.3f\n", row.epoch,
                             row.objective, row.seconds);
            }
        });

    std::uint64_t fp = cosam::dataset_fingerprint(data_dir);
    cosam::CheckpointData ckpt = cosam::to_checkpoint(model, fp);
    cosam::save_checkpoint(out_path, ckpt);
    std::fprintf(stderr, "checkpoint written to %s\n", out_path.c_str());

    if (log_path.empty()) log_path = out_path + ".log.csv";
    write_training_log(log_path, model.log, timing);
    std::fprintf(stderr, "training log written to %s\n", log_path.c_str());
    return 0;
}

int cmd_evaluate(const std::string& data_dir, const std::string& ckpt_path,
                 std::vector<std::int32_t> k_list, const std::string& out_path,
                 const std::string& json_path, int threads) {
    cosam::SplitDataset split = cosam::load_split_dir(data_dir);
    cosam::CheckpointData ckpt = cosam::load_checkpoint(ckpt_path);
    std::uint64_t fp = cosam::dataset_fingerprint(data_dir);
    cosam::TrainedModel model = cosam::restore_model(ckpt, split, fp, threads);

    if (k_list.empty()) k_list = {5, 10, 20};
    const cosam::SamplerModel* sampler =
        model.sampler.has_value() ? &model.sampler.value() : nullptr;
    cosam::EvalReport report = cosam::evaluate(sampler, model.recommender, *model.graph, split,
                                               k_list, threads, !json_path.empty());

    CsvSink sink(out_path);
    sink.out() << "metric,k,value\n";
    for (std::size_t j = 0; j < report.k_list.size(); ++j) {
        sink.out() << "precision," << report.k_list[j] << ','
                   << format_real(report.precision[j], 6) << '\n';
        sink.out() << "recall," << report.k_list[j] << ',' << format_real(report.recall[j], 6)
                   << '\n';
    }
    sink.out() << "ndcg,," << format_real(report.ndcg, 6) << '\n';
    sink.out() << "evaluated_users,," << report.evaluated_users << '\n';
    sink.out() << "skipped_users,," << report.skipped_users << '\n';
    sink.out() << "wall_seconds,," << format_real(report.wall_seconds, 3) << '\n';

    if (!json_path.empty()) {
        nlohmann::json j;
        j["k"] = report.k_list;
        j["precision"] = report.precision;
        j["recall"] = report.recall;
        j["ndcg"] = report.ndcg;
        j["evaluated_users"] = report.evaluated_users;
        j["skipped_users"] = report.skipped_users;
        j["wall_seconds"] = report.wall_seconds;
        nlohmann::json per_user = nlohmann::json::array();
        for (const auto& um : report.per_user) {
            nlohmann::json e;
            e["user"] = um.user;
            e["precision"] = um.precision;
            e["recall"] = um.recall;
            e["ndcg"] = um.ndcg;
            per_user.push_back(std::move(e));
        }
        j["per_user"] = std::move(per_user);
        std::ofstream jf = open_out(json_path);
        jf << j.dump(2) << '\n';
    }
    std::fprintf(stderr, "evaluated %d users, skipped %d\n", report.evaluated_users,
                 report.skipped_users);
    return 0;
}

int cmd_probe(const std::string& data_dir, const std::string& ckpt_path, int repeats,
              int batch_size, std::uint64_t seed, int threads, const std::string& out_path) {
    std::fprintf(stderr, "seed=%" PRIu64 "\n", seed);
    cosam::SplitDataset split = cosam::load_split_dir(data_dir);
    cosam::CheckpointData ckpt = cosam::load_checkpoint(ckpt_path);
    std::uint64_t fp = cosam::dataset_fingerprint(data_dir);
    cosam::TrainedModel model = cosam::restore_model(ckpt, split, fp, threads);

    cosam::ProbeReport report = cosam::variance_probe(model, repeats, batch_size, seed);
    CsvSink sink(out_path);
    sink.out() << "metric,value\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9e", report.grad_variance);
    sink.out() << "grad_variance," << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%.9e", report.mean_sampled_loss);
    sink.out() << "mean_sampled_loss," << buf << '\n';
    sink.out() << "repeats," << report.repeats << '\n';
    return 0;
}

int cmd_inspect(const std::string& data_dir, const std::string& ckpt_path,
                const std::string& user_token, int top, int threads) {
    cosam::SplitDataset split = cosam::load_split_dir(data_dir);
    cosam::CheckpointData ckpt = cosam::load_checkpoint(ckpt_path);
    std::uint64_t fp = cosam::dataset_fingerprint(data_dir);
    cosam::TrainedModel model = cosam::restore_model(ckpt, split, fp, threads);
    if (!model.sampler.has_value()) {
        throw std::runtime_error("inspect: checkpoint has no sampler state");
    }

    auto it = split.train.user_ids.find(user_token);
    if (it == split.train.user_ids.end()) {
        throw std::runtime_error("inspect: unknown user token: " + user_token);
    }
    std::int32_t u = it->second;

    cosam::SamplingDistribution dist = model.sampler->exact_rho(u);
    const std::int32_t m = split.train.m;
    std::vector<std::int32_t> order(m);
    for (std::int32_t i = 0; i < m; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
        if (dist.rho[a] != dist.rho[b]) return dist.rho[a] > dist.rho[b];
        return a < b;
    });

    std::fprintf(stderr, "user=%s id=%d degree=%d\n", user_token.c_str(), u,
                 model.graph->user_degree(u));
    std::fprintf(stderr, "p0=%.9e tail_mass=%.9e sweeps=%d converged=%s\n",
                 model.sampler->uniform_component_p0(), model.sampler->config().tail_mass(),
                 dist.sweeps, dist.converged ? "true" : "false");

    std::cout << "rank,item,rho,fr,score\n";
    const std::int32_t shown = std::min<std::int32_t>(top > 0 ? top : m, m);
    for (std::int32_t r = 0; r < shown; ++r) {
        std::int32_t i = order[r];
        double fr = model.recommender.predict_fr(u, i);
        char rho_buf[64], fr_buf[64], score_buf[64];
        std::snprintf(rho_buf, sizeof(rho_buf), "%.9e", dist.rho[i]);
        std::snprintf(fr_buf, sizeof(fr_buf), "%.9e", fr);
        std::snprintf(score_buf, sizeof(score_buf), "%.9e", dist.rho[i] * fr);
        std::cout << (r + 1) << ',' << split.train.item_tokens[i] << ',' << rho_buf << ','
                  << fr_buf << ',' << score_buf << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cosam: adaptive collaborative sampling for implicit-feedback recommendation"};
    app.require_subcommand(1);

    // prepare
    auto* prep = app.add_subcommand("prepare", "ingest raw interactions and write a split directory");
    std::string prep_input, prep_format = "tab", prep_out;
    int prep_min_deg = 3, prep_folds = 0, prep_fold_index = 0;
    double prep_test_fraction = 0.2;
    std::uint64_t prep_seed = 42;
    prep->add_option("--input", prep_input, "raw interaction file")->required();
    prep->add_option("--format", prep_format, "input delimiter: tab or comma")
        ->check(CLI::IsMember({"tab", "comma"}));
    prep->add_option("--min-item-degree", prep_min_deg, "drop items with fewer interactions")
        ->check(CLI::PositiveNumber);
    prep->add_option("--test-fraction", prep_test_fraction, "held-out fraction per user");
    prep->add_option("--folds", prep_folds, "use k-fold splitting instead of holdout");
    prep->add_option("--fold-index", prep_fold_index, "which fold becomes the test set");
    prep->add_option("--seed", prep_seed, "split seed");
    prep->add_option("--out-dir", prep_out, "output data directory")->required();

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic clustered dataset");
    cosam::SynthConfig synth_cfg;
    std::string synth_out;
    synth->add_option("--users", synth_cfg.users);
    synth->add_option("--items", synth_cfg.items);
    synth->add_option("--positives", synth_cfg.positives);
    synth->add_option("--clusters", synth_cfg.clusters);
    synth->add_option("--noise", synth_cfg.noise);
    synth->add_option("--zipf", synth_cfg.zipf);
    synth->add_option("--seed", synth_cfg.seed);
    synth->add_option("--out", synth_out, "output TSV file")->required();

    // train
    auto* train = app.add_subcommand("train", "train a recommender with a sampling strategy");
    std::string train_data, train_config, train_sampler = "cosam", train_out, train_log;
    int train_epochs = 0, train_threads = 1, train_eval_every = 0;
    std::uint64_t train_seed = 42;
    bool train_timing = false;
    train->add_option("--data-dir", train_data, "prepared data directory")->required();
    train->add_option("--config", train_config, "key=value config file");
    train->add_option("--sampler", train_sampler, "cosam, uniform, or pop")
        ->check(CLI::IsMember({"cosam", "uniform", "pop", "popularity"}));
    train->add_option("--epochs", train_epochs, "training epochs");
    train->add_option("--seed", train_seed, "master seed");
    train->add_option("--threads", train_threads, "worker threads")->check(CLI::PositiveNumber);
    train->add_option("--eval-every", train_eval_every, "evaluate every N epochs (0 = never)");
    train->add_flag("--timing", train_timing, "record real wall-clock seconds in the log");
    train->add_option("--out", train_out, "checkpoint output path")->required();
    train->add_option("--log", train_log, "training log CSV path (default <out>.log.csv)");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "rank held-out items and report metrics");
    std::string eval_data, eval_ckpt, eval_out, eval_json;
    std::vector<int> eval_k;
    int eval_threads = 1;
    eval->add_option("--data-dir", eval_data, "prepared data directory")->required();
    eval->add_option("--checkpoint", eval_ckpt, "trained checkpoint")->required();
    eval->add_option("--k", eval_k, "cutoffs, e.g. --k 5,10,20")->delimiter(',');
    eval->add_option("--out", eval_out, "CSV output path (default stdout)");
    eval->add_option("--json", eval_json, "also write a JSON report here");
    eval->add_option("--threads", eval_threads, "worker threads")->check(CLI::PositiveNumber);

    // probe
    auto* probe = app.add_subcommand("probe", "estimate gradient variance under the sampler");
    std::string probe_data, probe_ckpt, probe_out;
    int probe_repeats = 200, probe_batch = 64, probe_threads = 1;
    std::uint64_t probe_seed = 42;
    probe->add_option("--data-dir", probe_data, "prepared data directory")->required();
    probe->add_option("--checkpoint", probe_ckpt, "trained checkpoint")->required();
    probe->add_option("--repeats", probe_repeats, "independent mini-batches")
        ->check(CLI::PositiveNumber);
    probe->add_option("--batch-size", probe_batch, "users per mini-batch")
        ->check(CLI::PositiveNumber);
    probe->add_option("--seed", probe_seed, "probe seed");
    probe->add_option("--threads", probe_threads, "worker threads")->check(CLI::PositiveNumber);
    probe->add_option("--out", probe_out, "CSV output path (default stdout)");

    // inspect
    auto* inspect = app.add_subcommand("inspect", "print a user's sampling distribution");
    std::string ins_data, ins_ckpt, ins_user;
    int ins_top = 20, ins_threads = 1;
    inspect->add_option("--data-dir", ins_data, "prepared data directory")->required();
    inspect->add_option("--checkpoint", ins_ckpt, "trained checkpoint")->required();
    inspect->add_option("--user", ins_user, "user token to inspect")->required();
    inspect->add_option("--top", ins_top, "how many items to print (0 = all)");
    inspect->add_option("--threads", ins_threads, "worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (prep->parsed()) {
            return cmd_prepare(prep_input, prep_format, prep_min_deg, prep_test_fraction,
                               prep_folds, prep_fold_index, prep_seed, prep_out);
        }
        if (synth->parsed()) {
            return cmd_synth(synth_cfg, synth_out);
        }
        if (train->parsed()) {
            return cmd_train(train_data, train_config, train, train_sampler, train_epochs,
                             train_seed, train_threads, train_eval_every, train_timing, train_out,
                             train_log);
        }
        if (eval->parsed()) {
            return cmd_evaluate(eval_data, eval_ckpt, eval_k, eval_out, eval_json, eval_threads);
        }
        if (probe->parsed()) {
            return cmd_probe(probe_data, probe_ckpt, probe_repeats, probe_batch, probe_seed,
                             probe_threads, probe_out);
        }
        if (inspect->parsed()) {
            return cmd_inspect(ins_data, ins_ckpt, ins_user, ins_top, ins_threads);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
