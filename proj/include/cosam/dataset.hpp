#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace cosam {

struct RawRecord {
    std::string user_token;
    std::string item_token;
    std::optional<double> rating;
    std::optional<std::int64_t> timestamp;
};

struct RawInteractions {
    std::vector<RawRecord> records;
    std::size_t malformed_lines = 0;
    std::size_t blank_lines = 0;
};

// Dense binary implicit-feedback dataset. Pairs are unique and indices are
// assigned in first-appearance order of the surviving tokens.
struct ImplicitDataset {
    std::int32_t n = 0;
    std::int32_t m = 0;
    std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
    std::vector<std::string> user_tokens; // index -> token
    std::vector<std::string> item_tokens;
    std::unordered_map<std::string, std::int32_t> user_ids; // token -> index
    std::unordered_map<std::string, std::int32_t> item_ids;

    std::size_t positives() const { return pairs.size(); }
    double density() const {
        return n > 0 && m > 0 ? static_cast<double>(pairs.size()) / (static_cast<double>(n) * m)
                              : 0.0;
    }
};

// Disjoint per-user holdout over an ImplicitDataset's pairs. Both folds share
// the parent's vocabularies and index space.
struct SplitDataset {
    ImplicitDataset train;
    ImplicitDataset test;
    std::uint64_t seed = 0;
};

struct LineFormat {
    char delimiter = '\t';
};

// Reads one interaction per line: user SEP item [SEP rating] [SEP timestamp].
// Blank lines and '#' comments are skipped; lines with fewer than two fields,
// empty tokens or unparseable numeric fields are counted as malformed.
// Throws if the file cannot be opened or every non-blank line is malformed.
RawInteractions load_interactions(const std::string& path, const LineFormat& format = {});

// Collapses duplicates, drops items interacted with by fewer than
// min_item_degree distinct users, then drops users left without positives.
// Throws if nothing survives.
ImplicitDataset binarize_and_filter(const RawInteractions& raw, int min_item_degree = 3);

// Moves round(test_fraction * |X_u|) of each user's positives to test,
// keeping at least one in train. Deterministic given seed.
SplitDataset split_holdout(const ImplicitDataset& ds, double test_fraction, std::uint64_t seed);

// K-fold variant: each user's positives are dealt into n_folds slices with a
// seed-only shuffle, fold_index becomes test. Rotating fold_index over
// [0, n_folds) with the same seed covers every pair exactly once.
SplitDataset split_fold(const ImplicitDataset& ds, int n_folds, int fold_index,
                        std::uint64_t seed);

void save_vocab(const std::string& path, const std::vector<std::string>& tokens,
                const std::string& kind);
std::vector<std::string> load_vocab(const std::string& path, const std::string& expected_kind);

// Pair files: one "user_index<TAB>item_index" line per positive.
void save_pairs(const std::string& path,
                const std::vector<std::pair<std::int32_t, std::int32_t>>& pairs);
std::vector<std::pair<std::int32_t, std::int32_t>> load_pairs(const std::string& path);

// Reassembles the two pair files + vocabs written by the prepare command.
SplitDataset load_split_dir(const std::string& dir);
void save_split_dir(const std::string& dir, const SplitDataset& split);

} // namespace cosam
