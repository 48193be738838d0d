#include "cosam/dataset.hpp"

#include "cosam/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace cosam {

namespace {

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= line.size()) {
        const std::size_t pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

bool parse_double(std::string_view s, double& out) {
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && p == end;
}

bool parse_int64(std::string_view s, std::int64_t& out) {
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && p == end;
}

} // namespace

RawInteractions load_interactions(const std::string& path, const LineFormat& format) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open interaction file: " + path);

    RawInteractions raw;
    std::string line;
    std::size_t non_blank = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty()) {
            raw.blank_lines++;
            continue;
        }
        if (line[0] == '#')
            continue;
        non_blank++;
        const auto fields = split_fields(line, format.delimiter);
        if (fields.size() < 2 || fields[0].empty() || fields[1].empty()) {
            raw.malformed_lines++;
            continue;
        }
        RawRecord rec;
        rec.user_token = std::string(fields[0]);
        rec.item_token = std::string(fields[1]);
        bool ok = true;
        if (fields.size() >= 3 && !fields[2].empty()) {
            double r;
            if (parse_double(fields[2], r))
                rec.rating = r;
            else
                ok = false;
        }
        if (ok && fields.size() >= 4 && !fields[3].empty()) {
            std::int64_t t;
            if (parse_int64(fields[3], t))
                rec.timestamp = t;
            else
                ok = false;
        }
        if (!ok) {
            raw.malformed_lines++;
            continue;
        }
        raw.records.push_back(std::move(rec));
    }
    if (non_blank > 0 && raw.records.empty())
        throw std::runtime_error("all lines malformed in " + path);
    if (raw.records.empty())
        std::fprintf(stderr, "warning: no interactions in %s\n", path.c_str());
    return raw;
}

ImplicitDataset binarize_and_filter(const RawInteractions& raw, int min_item_degree) {
    if (min_item_degree < 1)
        throw std::invalid_argument("min_item_degree must be >= 1");

    // First pass: collapse duplicates, count distinct users per item.
    std::unordered_map<std::string, std::unordered_set<std::string>> item_users;
    std::unordered_set<std::string> seen;
    seen.reserve(raw.records.size() * 2);
    for (const auto& rec : raw.records) {
        std::string key = rec.user_token;
        key.push_back('\x1f');
        key += rec.item_token;
        if (!seen.insert(std::move(key)).second)
            continue;
        item_users[rec.item_token].insert(rec.user_token);
    }

    ImplicitDataset ds;
    std::unordered_set<std::string> emitted;
    emitted.reserve(seen.size());
    for (const auto& rec : raw.records) {
        auto it = item_users.find(rec.item_token);
        if (it == item_users.end() ||
            it->second.size() < static_cast<std::size_t>(min_item_degree))
            continue;
        std::string key = rec.user_token;
        key.push_back('\x1f');
        key += rec.item_token;
        if (!emitted.insert(std::move(key)).second)
            continue;
        auto [uit, unew] = ds.user_ids.try_emplace(rec.user_token, ds.n);
        if (unew) {
            ds.user_tokens.push_back(rec.user_token);
            ds.n++;
        }
        auto [iit, inew] = ds.item_ids.try_emplace(rec.item_token, ds.m);
        if (inew) {
            ds.item_tokens.push_back(rec.item_token);
            ds.m++;
        }
        ds.pairs.emplace_back(uit->second, iit->second);
    }
    if (ds.pairs.empty())
        throw std::runtime_error("no interactions left after item-degree filter");
    return ds;
}

namespace {

ImplicitDataset view_with_pairs(const ImplicitDataset& ds,
                                std::vector<std::pair<std::int32_t, std::int32_t>> pairs) {
    ImplicitDataset out;
    out.n = ds.n;
    out.m = ds.m;
    out.user_tokens = ds.user_tokens;
    out.item_tokens = ds.item_tokens;
    out.user_ids = ds.user_ids;
    out.item_ids = ds.item_ids;
    out.pairs = std::move(pairs);
    return out;
}

std::vector<std::vector<std::int32_t>> items_by_user(const ImplicitDataset& ds) {
    std::vector<std::vector<std::int32_t>> by_user(ds.n);
    for (const auto& [u, i] : ds.pairs)
        by_user[u].push_back(i);
    for (auto& v : by_user)
        std::sort(v.begin(), v.end());
    return by_user;
}

// Seed-only per-user shuffle so fold rotation reuses the same permutation.
void shuffle_items(std::vector<std::int32_t>& items, std::uint64_t seed, std::int32_t u) {
    SplitMix64 rng = make_stream(seed, kRngSplit, static_cast<std::uint64_t>(u));
    for (std::size_t k = items.size(); k > 1; --k)
        std::swap(items[k - 1], items[rng.next_below(k)]);
}

} // namespace

SplitDataset split_holdout(const ImplicitDataset& ds, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw std::invalid_argument("test_fraction must be in (0,1)");

    auto by_user = items_by_user(ds);
    std::vector<std::pair<std::int32_t, std::int32_t>> train_pairs, test_pairs;
    train_pairs.reserve(ds.pairs.size());
    for (std::int32_t u = 0; u < ds.n; ++u) {
        auto items = by_user[u];
        const auto deg = items.size();
        if (deg == 0)
            continue;
        auto k = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(deg)));
        if (k >= deg)
            k = deg - 1; // at least one positive stays in train
        shuffle_items(items, seed, u);
        for (std::size_t idx = 0; idx < deg; ++idx) {
            if (idx < k)
                test_pairs.emplace_back(u, items[idx]);
            else
                train_pairs.emplace_back(u, items[idx]);
        }
    }

    SplitDataset split;
    split.seed = seed;
    split.train = view_with_pairs(ds, std::move(train_pairs));
    split.test = view_with_pairs(ds, std::move(test_pairs));
    return split;
}

SplitDataset split_fold(const ImplicitDataset& ds, int n_folds, int fold_index,
                        std::uint64_t seed) {
    if (n_folds < 2)
        throw std::invalid_argument("n_folds must be >= 2");
    if (fold_index < 0 || fold_index >= n_folds)
        throw std::invalid_argument("fold_index out of range");

    auto by_user = items_by_user(ds);
    std::vector<std::pair<std::int32_t, std::int32_t>> train_pairs, test_pairs;
    for (std::int32_t u = 0; u < ds.n; ++u) {
        auto items = by_user[u];
        if (items.empty())
            continue;
        shuffle_items(items, seed, u);
        std::size_t in_train = 0;
        std::vector<bool> is_test(items.size());
        for (std::size_t idx = 0; idx < items.size(); ++idx) {
            is_test[idx] = static_cast<int>(idx % static_cast<std::size_t>(n_folds)) == fold_index;
            if (!is_test[idx])
                in_train++;
        }
        if (in_train == 0)
            is_test[0] = false; // keep one positive in train
        for (std::size_t idx = 0; idx < items.size(); ++idx) {
            if (is_test[idx])
                test_pairs.emplace_back(u, items[idx]);
            else
                train_pairs.emplace_back(u, items[idx]);
        }
    }

    SplitDataset split;
    split.seed = seed;
    split.train = view_with_pairs(ds, std::move(train_pairs));
    split.test = view_with_pairs(ds, std::move(test_pairs));
    return split;
}

void save_vocab(const std::string& path, const std::vector<std::string>& tokens,
                const std::string& kind) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write vocab file: " + path);
    out << "#cosam-vocab v1 kind=" << kind << " count=" << tokens.size() << "\n";
    for (std::size_t i = 0; i < tokens.size(); ++i)
        out << i << '\t' << tokens[i] << '\n';
    if (!out)
        throw std::runtime_error("failed writing vocab file: " + path);
}

std::vector<std::string> load_vocab(const std::string& path, const std::string& expected_kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open vocab file: " + path);
    std::string header;
    if (!std::getline(in, header))
        throw std::runtime_error("empty vocab file: " + path);
    std::size_t count = 0;
    {
        if (!header.empty() && header.back() == '\r')
            header.pop_back();
        std::istringstream hs(header);
        std::string magic, version, kindkv, countkv;
        hs >> magic >> version >> kindkv >> countkv;
        if (magic != "#cosam-vocab")
            throw std::runtime_error("not a vocab file: " + path);
        if (version != "v1")
            throw std::runtime_error("vocab version mismatch in " + path + " (" + version + ")");
        if (kindkv != "kind=" + expected_kind)
            throw std::runtime_error("vocab kind mismatch in " + path + " (" + kindkv + ")");
        if (countkv.rfind("count=", 0) != 0)
            throw std::runtime_error("vocab header missing count in " + path);
        count = std::stoull(countkv.substr(6));
    }

    std::vector<std::string> tokens(count);
    std::vector<bool> filled(count, false);
    std::unordered_set<std::string> unique;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error("malformed vocab line in " + path);
        const std::size_t idx = std::stoull(line.substr(0, tab));
        std::string token = line.substr(tab + 1);
        if (idx >= count || filled[idx])
            throw std::runtime_error("bad or duplicate index in vocab " + path);
        if (!unique.insert(token).second)
            throw std::runtime_error("duplicate token in vocab " + path + ": " + token);
        tokens[idx] = std::move(token);
        filled[idx] = true;
    }
    for (std::size_t i = 0; i < count; ++i)
        if (!filled[i])
            throw std::runtime_error("missing index in vocab " + path);
    return tokens;
}

void save_pairs(const std::string& path,
                const std::vector<std::pair<std::int32_t, std::int32_t>>& pairs) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write pair file: " + path);
    for (const auto& [u, i] : pairs)
        out << u << '\t' << i << '\n';
    if (!out)
        throw std::runtime_error("failed writing pair file: " + path);
}

std::vector<std::pair<std::int32_t, std::int32_t>> load_pairs(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open pair file: " + path);
    std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error("malformed pair line in " + path);
        pairs.emplace_back(static_cast<std::int32_t>(std::stol(line.substr(0, tab))),
                           static_cast<std::int32_t>(std::stol(line.substr(tab + 1))));
    }
    return pairs;
}

void save_split_dir(const std::string& dir, const SplitDataset& split) {
    save_vocab(dir + "/user_vocab.tsv", split.train.user_tokens, "user");
    save_vocab(dir + "/item_vocab.tsv", split.train.item_tokens, "item");
    save_pairs(dir + "/train.tsv", split.train.pairs);
    save_pairs(dir + "/test.tsv", split.test.pairs);
}

SplitDataset load_split_dir(const std::string& dir) {
    SplitDataset split;
    auto users = load_vocab(dir + "/user_vocab.tsv", "user");
    auto items = load_vocab(dir + "/item_vocab.tsv", "item");

    ImplicitDataset base;
    base.n = static_cast<std::int32_t>(users.size());
    base.m = static_cast<std::int32_t>(items.size());
    base.user_tokens = std::move(users);
    base.item_tokens = std::move(items);
    for (std::int32_t u = 0; u < base.n; ++u)
        base.user_ids.emplace(base.user_tokens[u], u);
    for (std::int32_t i = 0; i < base.m; ++i)
        base.item_ids.emplace(base.item_tokens[i], i);

    auto check = [&](const std::vector<std::pair<std::int32_t, std::int32_t>>& pairs,
                     const char* which) {
        for (const auto& [u, i] : pairs)
            if (u < 0 || u >= base.n || i < 0 || i >= base.m)
                throw std::runtime_error(std::string("pair index out of vocab range in ") + which);
    };
    auto train_pairs = load_pairs(dir + "/train.tsv");
    auto test_pairs = load_pairs(dir + "/test.tsv");
    check(train_pairs, "train.tsv");
    check(test_pairs, "test.tsv");

    split.train = view_with_pairs(base, std::move(train_pairs));
    split.test = view_with_pairs(base, std::move(test_pairs));
    return split;
}

} // namespace cosam
