#pragma once

#include "cosam/trainer.hpp"

#include <map>
#include <string>

namespace cosam {

// Flat key=value text; '#' starts a comment, blank lines ignored.
// Keys: epochs, batch_size, seed, sampler, c1, c2, l_max, multiplier, dim,
// lr, sampler_lr, lambda, alpha, eval_every. Unknown keys are rejected.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> parse_config_file(const std::string& path);

TrainConfig train_config_from_map(const std::map<std::string, std::string>& kv);

// Canonical one-key-per-line form, stable across runs; used as the
// checkpoint's config echo.
std::string serialize_train_config(const TrainConfig& config);

} // namespace cosam
