#pragma once

#include "cosam/sampler.hpp"
#include "cosam/trainer.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cosam {

// On-disk model bundle. Layout: 8-byte magic "COSAM01\0", version u32,
// section count u32, then a table of (id u32, pad u32, offset u64, length
// u64) entries followed by the payloads. Section 1 is the config echo text,
// 2 the dataset fingerprint, 3 the recommender (d,n,m then both embedding
// matrices row-major as little-endian f32), 4 the sampler (c1, c2,
// multiplier as f64, l_max i32, edge count u64, logits as little-endian f32
// in CSR order). Section 4 is absent for baseline-trained models.
struct CheckpointData {
    std::string config_text;
    std::uint64_t fingerprint = 0;
    std::int32_t n = 0, m = 0, d = 0;
    std::vector<double> user_emb;
    std::vector<double> item_emb;
    bool has_sampler = false;
    SamplerConfig sampler_cfg;
    std::vector<double> logits;
};

void save_checkpoint(const std::string& path, const CheckpointData& data);
CheckpointData load_checkpoint(const std::string& path);

// FNV-1a over the two vocab files, user vocab first.
std::uint64_t dataset_fingerprint(const std::string& data_dir);

CheckpointData to_checkpoint(const TrainedModel& model, std::uint64_t fingerprint);

// Rebuilds runnable models from a checkpoint over the split's train fold.
// Throws if the fingerprint or shapes do not match the data.
TrainedModel restore_model(const CheckpointData& data, const SplitDataset& split,
                           std::uint64_t expected_fingerprint, int threads = 1);

} // namespace cosam
