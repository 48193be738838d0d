#include "cosam/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cosam {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const std::int64_t v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: key '" + key + "' needs an integer, got '" +
                                    value + "'");
    }
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(value, &used);
        if (used != value.size() || value.find('-') != std::string::npos)
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: key '" + key +
                                    "' needs a non-negative integer, got '" + value + "'");
    }
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: key '" + key + "' needs a number, got '" + value +
                                    "'");
    }
}

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                        " has no '=': '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config: empty key at line " + std::to_string(line_no));
        if (!kv.emplace(key, value).second)
            throw std::invalid_argument("config: duplicate key '" + key + "'");
    }
    return kv;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

TrainConfig train_config_from_map(const std::map<std::string, std::string>& kv) {
    TrainConfig cfg;
    for (const auto& [key, value] : kv) {
        if (key == "epochs") cfg.epochs = static_cast<std::int32_t>(parse_int(key, value));
        else if (key == "batch_size") cfg.batch_size = static_cast<std::int32_t>(parse_int(key, value));
        else if (key == "seed") cfg.seed = parse_uint(key, value);
        else if (key == "sampler") cfg.sampler = parse_sampler_kind(value);
        else if (key == "c1") cfg.sampler_cfg.c1 = parse_real(key, value);
        else if (key == "c2") cfg.sampler_cfg.c2 = parse_real(key, value);
        else if (key == "l_max") cfg.sampler_cfg.l_max = static_cast<std::int32_t>(parse_int(key, value));
        else if (key == "multiplier") cfg.sampler_cfg.candidate_multiplier = parse_real(key, value);
        else if (key == "dim") cfg.rec_cfg.dim = static_cast<std::int32_t>(parse_int(key, value));
        else if (key == "lr") cfg.lr = parse_real(key, value);
        else if (key == "sampler_lr") cfg.sampler_lr = parse_real(key, value);
        else if (key == "lambda") cfg.rec_cfg.lambda = parse_real(key, value);
        else if (key == "alpha") cfg.alpha = parse_real(key, value);
        else if (key == "eval_every") cfg.eval_every = static_cast<std::int32_t>(parse_int(key, value));
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

std::string serialize_train_config(const TrainConfig& config) {
    std::ostringstream out;
    out << "epochs = " << config.epochs << "\n";
    out << "batch_size = " << config.batch_size << "\n";
    out << "seed = " << config.seed << "\n";
    out << "sampler = " << sampler_kind_name(config.sampler) << "\n";
    out << "c1 = " << format_real(config.sampler_cfg.c1) << "\n";
    out << "c2 = " << format_real(config.sampler_cfg.c2) << "\n";
    out << "l_max = " << config.sampler_cfg.l_max << "\n";
    out << "multiplier = " << format_real(config.sampler_cfg.candidate_multiplier) << "\n";
    out << "dim = " << config.rec_cfg.dim << "\n";
    out << "lr = " << format_real(config.lr) << "\n";
    out << "sampler_lr = " << format_real(config.sampler_lr) << "\n";
    out << "lambda = " << format_real(config.rec_cfg.lambda) << "\n";
    out << "alpha = " << format_real(config.alpha) << "\n";
    out << "eval_every = " << config.eval_every << "\n";
    return out.str();
}

} // namespace cosam
