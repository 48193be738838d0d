#pragma once

#include "cosam/dataset.hpp"

#include <cstdint>
#include <string>

namespace cosam {

// Seeded generator for benchmark datasets with collaborative structure:
// users and items are grouped into clusters, each user interacts mostly
// inside a personal Zipf-skewed window of their home cluster, and a small
// noise fraction crosses clusters.
struct SynthConfig {
    std::int32_t users = 1892;
    std::int32_t items = 4476;
    std::int64_t positives = 52627;
    std::int32_t clusters = 24;
    double noise = 0.08;
    double zipf = 0.8;
    std::uint64_t seed = 1;

    void validate() const;
};

ImplicitDataset synth_dataset(const SynthConfig& cfg);

// Raw interaction lines ("u<id>\ti<id>") for the prepare command.
void write_synth_tsv(const std::string& path, const ImplicitDataset& ds);

} // namespace cosam
