#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace swvae {

// Everything a training run needs; defaults target the micro dataset.
struct ExperimentConfig {
    std::string dataset = "micro";  // "micro" or an archive path
    std::string variant = "sim-bce";  // sim-mse | sim-bce | gan
    std::string supervision = "max-k";  // max-k | exact-k
    int k_max = 2;
    double gamma = 1.0;
    double beta = 1.0;
    int d_z = 10;
    int epochs = 30;
    int batch_size = 64;
    double learning_rate = 1e-4;
    int seed = 0;
    bool isf = true;
    bool igf = true;
    std::string kl_mode = "standard";  // standard | paper
    std::string out_dir;
    std::vector<int> conv_channels = {32, 32, 64};
    int dense_units = 256;
    std::string disc_positives = "paired";  // paired | none (gan variant)
    int threads = 1;
    int pairs_per_epoch = 0;  // 0: one pair per archive image

    bool operator==(const ExperimentConfig&) const = default;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Flat key=value text, '#' comments. Unknown keys are rejected.
KeyValues parse_config_text(const std::string& text);
ExperimentConfig config_from_entries(const KeyValues& entries);
ExperimentConfig load_config_file(const std::filesystem::path& path);
void apply_config_entry(ExperimentConfig& config, const std::string& key, const std::string& value);

// Validates value ranges and enums (data-dependent bounds are checked when
// the dataset is opened). Throws ConfigError.
void validate_config(const ExperimentConfig& config);

// Canonical serialization; a saved snapshot replays the run.
std::string serialize_config(const ExperimentConfig& config);
void save_config(const ExperimentConfig& config, const std::filesystem::path& path);

// FNV-1a hash of the canonical serialization, as hex.
std::string config_digest(const ExperimentConfig& config);

}  // namespace swvae
