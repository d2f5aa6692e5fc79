#include "swvae/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "swvae/errors.hpp"
#include "swvae/pairs.hpp"
#include "swvae/swap_detect.hpp"

namespace swvae {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("invalid integer for " + key + ": " + value);
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("invalid number for " + key + ": " + value);
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("invalid boolean for " + key + ": " + value);
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    std::stringstream ss(value);
    std::string tok;
    while (std::getline(ss, tok, ','))
        out.push_back(parse_int(key, trim(tok)));
    if (out.empty()) throw ConfigError("empty list for " + key);
    return out;
}

std::string join_ints(const std::vector<int>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(values[i]);
    }
    return out;
}

}  // namespace

KeyValues parse_config_text(const std::string& text) {
    KeyValues entries;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + " is not key=value");
        entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return entries;
}

void apply_config_entry(ExperimentConfig& config, const std::string& key, const std::string& value) {
    if (key == "dataset") config.dataset = value;
    else if (key == "variant") config.variant = value;
    else if (key == "supervision") config.supervision = value;
    else if (key == "k_max") config.k_max = parse_int(key, value);
    else if (key == "gamma") config.gamma = parse_double(key, value);
    else if (key == "beta") config.beta = parse_double(key, value);
    else if (key == "d_z") config.d_z = parse_int(key, value);
    else if (key == "epochs") config.epochs = parse_int(key, value);
    else if (key == "batch_size") config.batch_size = parse_int(key, value);
    else if (key == "learning_rate") config.learning_rate = parse_double(key, value);
    else if (key == "seed") config.seed = parse_int(key, value);
    else if (key == "isf") config.isf = parse_bool(key, value);
    else if (key == "igf") config.igf = parse_bool(key, value);
    else if (key == "kl_mode") config.kl_mode = value;
    else if (key == "out_dir") config.out_dir = value;
    else if (key == "conv_channels") config.conv_channels = parse_int_list(key, value);
    else if (key == "dense_units") config.dense_units = parse_int(key, value);
    else if (key == "disc_positives") config.disc_positives = value;
    else if (key == "threads") config.threads = parse_int(key, value);
    else if (key == "pairs_per_epoch") config.pairs_per_epoch = parse_int(key, value);
    else throw ConfigError("unknown config key: " + key);
}

ExperimentConfig config_from_entries(const KeyValues& entries) {
    ExperimentConfig config;
    for (const auto& [key, value] : entries) apply_config_entry(config, key, value);
    return config;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return config_from_entries(parse_config_text(buffer.str()));
}

void validate_config(const ExperimentConfig& config) {
    parse_supervision(config.supervision);
    parse_kl_mode(config.kl_mode);
    if (config.variant != "sim-mse" && config.variant != "sim-bce" && config.variant != "gan")
        throw ConfigError("unknown variant: " + config.variant);
    if (config.disc_positives != "paired" && config.disc_positives != "none")
        throw ConfigError("disc_positives must be paired or none");
    if (config.dataset.empty()) throw ConfigError("dataset must be set");
    if (config.k_max < 1) throw ConfigError("k_max must be >= 1");
    if (config.gamma < 0) throw ConfigError("gamma must be >= 0");
    if (config.beta < 0) throw ConfigError("beta must be >= 0");
    if (config.d_z < 1) throw ConfigError("d_z must be >= 1");
    if (config.epochs < 1) throw ConfigError("epochs must be >= 1");
    if (config.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (config.learning_rate <= 0) throw ConfigError("learning_rate must be > 0");
    if (config.threads < 1) throw ConfigError("threads must be >= 1");
    if (config.pairs_per_epoch < 0) throw ConfigError("pairs_per_epoch must be >= 0");
    if (config.dense_units < 1) throw ConfigError("dense_units must be >= 1");
    if (config.conv_channels.empty()) throw ConfigError("conv_channels must be nonempty");
    for (int c : config.conv_channels)
        if (c < 1) throw ConfigError("conv_channels entries must be >= 1");
}

std::string serialize_config(const ExperimentConfig& c) {
    std::ostringstream out;
    out << "dataset = " << c.dataset << '\n'
        << "variant = " << c.variant << '\n'
        << "supervision = " << c.supervision << '\n'
        << "k_max = " << c.k_max << '\n'
        << "gamma = " << fmt_double(c.gamma) << '\n'
        << "beta = " << fmt_double(c.beta) << '\n'
        << "d_z = " << c.d_z << '\n'
        << "epochs = " << c.epochs << '\n'
        << "batch_size = " << c.batch_size << '\n'
        << "learning_rate = " << fmt_double(c.learning_rate) << '\n'
        << "seed = " << c.seed << '\n'
        << "isf = " << (c.isf ? "true" : "false") << '\n'
        << "igf = " << (c.igf ? "true" : "false") << '\n'
        << "kl_mode = " << c.kl_mode << '\n'
        << "out_dir = " << c.out_dir << '\n'
        << "conv_channels = " << join_ints(c.conv_channels) << '\n'
        << "dense_units = " << c.dense_units << '\n'
        << "disc_positives = " << c.disc_positives << '\n'
        << "threads = " << c.threads << '\n'
        << "pairs_per_epoch = " << c.pairs_per_epoch << '\n';
    return out.str();
}

void save_config(const ExperimentConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config snapshot: " + path.string());
    out << serialize_config(config);
    if (!out) throw IoError("failed writing config snapshot: " + path.string());
}

std::string config_digest(const ExperimentConfig& config) {
    // The digest identifies the experiment; where its artifacts land is
    // irrelevant, so the out_dir line is masked.
    ExperimentConfig keyed = config;
    keyed.out_dir.clear();
    const std::string text = serialize_config(keyed);
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace swvae
