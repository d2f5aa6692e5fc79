#include "swvae/trainer.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "swvae/errors.hpp"
#include "swvae/swap_detect.hpp"

namespace swvae {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL + (salt << 1));
    x ^= x >> 30; x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27; x *= 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::vector<char>& bytes) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (char c : bytes) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::vector<char> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

Trainer::Trainer(ExperimentConfig config) : config_(std::move(config)) {
    validate_config(config_);
    variant_ = parse_variant(config_.variant);
    supervision_ = parse_supervision(config_.supervision);
    kl_mode_ = parse_kl_mode(config_.kl_mode);

    at::set_num_threads(config_.threads);

    if (config_.dataset == "micro") {
        archive_ = std::make_shared<DatasetArchive>(build_micro_archive());
    } else {
        archive_ = std::make_shared<DatasetArchive>(load_archive(config_.dataset));
    }
    if (!archive_->exhaustive())
        throw DataError("training requires an exhaustive factor-annotated archive");
    space_ = std::make_shared<FactorSpace>(archive_->factor_space());

    const int v = space_->num_factors();
    if (config_.k_max > v)
        throw ConfigError("k_max=" + std::to_string(config_.k_max) + " exceeds the dataset's " +
                          std::to_string(v) + " factors");
    if (config_.d_z < v)
        throw ConfigError("d_z must be at least the number of generative factors");
    if (config_.d_z <= config_.k_max)
        throw ConfigError("d_z must exceed k_max so at least one dimension can be swapped");

    torch::manual_seed(static_cast<std::uint64_t>(config_.seed));
    ModelConfig mc;
    mc.d_z = config_.d_z;
    mc.beta = config_.beta;
    mc.image = archive_->descriptor().image;
    mc.conv_channels = config_.conv_channels;
    mc.dense_units = config_.dense_units;
    model_ = SwVaeModel(mc);
    opt_model_ = std::make_unique<torch::optim::Adam>(model_->parameters(),
                                                      torch::optim::AdamOptions(config_.learning_rate));
    if (variant_ == Variant::kGan) {
        disc_ = PairDiscriminator(mc.image);
        opt_disc_ = std::make_unique<torch::optim::Adam>(
            disc_->parameters(), torch::optim::AdamOptions(config_.learning_rate));
    }
}

int Trainer::k_for_epoch(int epoch) const {
    return config_.igf ? igf_schedule(epoch, config_.epochs, config_.k_max) : config_.k_max;
}

int Trainer::s_for_epoch(int epoch, int k_t) const {
    return config_.isf ? isf_schedule(epoch, config_.epochs, config_.d_z, k_t)
                       : config_.d_z - k_t;
}

int Trainer::steps_per_epoch() const {
    const std::int64_t pairs =
        config_.pairs_per_epoch > 0 ? config_.pairs_per_epoch : archive_->count();
    return static_cast<int>((pairs + config_.batch_size - 1) / config_.batch_size);
}

std::vector<ObservationPair> Trainer::sample_batch(int count, int k_t, Rng& rng) const {
    const ObservationFn render = [this](const std::vector<int>& factors) {
        return archive_->observation(space_->index_of(factors));
    };
    std::vector<ObservationPair> batch;
    batch.reserve(count);
    for (int i = 0; i < count; ++i)
        batch.push_back(sample_pair(*space_, render, supervision_, k_t, rng));
    return batch;
}

torch::Tensor Trainer::batch_tensor(const std::vector<Observation>& observations) const {
    const auto& img = archive_->descriptor().image;
    const std::int64_t np = img.pixel_count();
    torch::Tensor x = torch::empty({static_cast<std::int64_t>(observations.size()), np});
    auto acc = x.accessor<float, 2>();
    for (std::size_t i = 0; i < observations.size(); ++i) {
        if (static_cast<std::int64_t>(observations[i].pixels.size()) != np)
            throw DataError("observation pixel count does not match the descriptor");
        for (std::int64_t p = 0; p < np; ++p) acc[i][p] = observations[i].pixels[p];
    }
    // archives store HWC; the model runs on CHW
    return x.view({-1, img.height, img.width, img.channels}).permute({0, 3, 1, 2}).contiguous();
}

StepResult Trainer::train_step(const std::vector<ObservationPair>& batch, int epoch) {
    if (batch.empty()) throw DataError("empty training batch");
    const int k_signal = batch.front().k_signal;
    std::vector<Observation> left, right;
    left.reserve(batch.size());
    right.reserve(batch.size());
    for (const auto& pair : batch) {
        if (pair.k_signal != k_signal)
            throw DataError("k_signal must be uniform within a batch");
        if (pair.supervision == Supervision::kExactK && pair.num_changed != pair.k_signal)
            throw DataError("exact-k pair with k_signal != differing count");
        left.push_back(pair.left);
        right.push_back(pair.right);
    }
    const torch::Tensor x_l = batch_tensor(left);
    const torch::Tensor x_m = batch_tensor(right);

    const int s = s_for_epoch(epoch, k_signal);

    const LatentPosterior post_l = model_->encode(x_l);
    const LatentPosterior post_m = model_->encode(x_m);
    const torch::Tensor z_l = reparameterize(post_l, torch::randn_like(post_l.mu));
    const torch::Tensor z_m = reparameterize(post_m, torch::randn_like(post_m.mu));
    const torch::Tensor logits_l = model_->decode(z_l);
    const torch::Tensor logits_m = model_->decode(z_m);

    const auto plans = plan_batch_swaps(post_l, post_m, k_signal, s, kl_mode_);
    std::vector<std::vector<int>> swap_sets;
    swap_sets.reserve(plans.size());
    for (const auto& plan : plans) {
        if (static_cast<int>(plan.df_set.size()) != k_signal ||
            static_cast<int>(plan.swap_set.size()) != s)
            throw NumericError("swap plan sizes violate the schedule coupling");
        swap_sets.push_back(plan.swap_set);
    }
    const torch::Tensor mask = swap_mask_from_sets(swap_sets, config_.d_z);
    const auto [z_hat_l, z_hat_m] = swap_latents(z_l, z_m, mask);
    const torch::Tensor logits_hat_l = model_->decode(z_hat_l);
    const torch::Tensor logits_hat_m = model_->decode(z_hat_m);

    const PairVaeTerms vae_terms{vae_loss(x_l, logits_l, post_l, config_.beta),
                                 vae_loss(x_m, logits_m, post_m, config_.beta)};
    const torch::Tensor rec_l = torch::sigmoid(logits_l);
    const torch::Tensor rec_m = torch::sigmoid(logits_m);

    StepResult result;
    switch (variant_) {
        case Variant::kSimMse:
            result.breakdown = sim_mse_loss(rec_l, torch::sigmoid(logits_hat_l), rec_m,
                                            torch::sigmoid(logits_hat_m), vae_terms, config_.gamma);
            break;
        case Variant::kSimBce:
            result.breakdown =
                sim_bce_loss(rec_l, logits_hat_l, rec_m, logits_hat_m, vae_terms, config_.gamma);
            break;
        case Variant::kGan:
            result.breakdown =
                gan_generator_loss(disc_, rec_l, torch::sigmoid(logits_hat_l), rec_m,
                                   torch::sigmoid(logits_hat_m), vae_terms, config_.gamma);
            break;
    }
    if (!std::isfinite(result.breakdown.total.item<double>()))
        throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch));

    opt_model_->zero_grad();
    result.breakdown.total.backward();
    opt_model_->step();

    if (variant_ == Variant::kGan) {
        const torch::Tensor disc_loss =
            gan_discriminator_loss(disc_, rec_l, torch::sigmoid(logits_hat_l), rec_m,
                                   torch::sigmoid(logits_hat_m),
                                   config_.disc_positives == "paired");
        opt_disc_->zero_grad();
        disc_loss.backward();
        opt_disc_->step();
        result.disc_loss = disc_loss.item<double>();
        if (!std::isfinite(result.disc_loss))
            throw NumericError("training diverged: non-finite discriminator loss");
    }

    result.df_size = k_signal;
    result.swap_size = s;
    return result;
}

RunArtifacts Trainer::train() {
    if (config_.out_dir.empty()) throw ConfigError("out_dir must be set for training");
    const std::filesystem::path out_dir(config_.out_dir);
    std::filesystem::create_directories(out_dir);
    save_config(config_, out_dir / "config.snapshot");

    const auto t_start = std::chrono::steady_clock::now();
    std::ofstream trace_out;
    const auto trace_path = out_dir / "trace.csv";
    if (next_epoch_ == 0) {
        trace_out.open(trace_path);
        trace_out << "epoch,k_t,s,total,vae_l,vae_m,swap_term,recon_loss,kl_loss,disc_loss\n";
    } else {
        trace_out.open(trace_path, std::ios::app);
    }
    if (!trace_out) throw IoError("cannot write " + trace_path.string());

    RunArtifacts artifacts;
    artifacts.out_dir = out_dir;
    artifacts.config = config_;

    const int steps = steps_per_epoch();
    std::optional<EpochStats> last;
    for (int epoch = next_epoch_; epoch < config_.epochs; ++epoch) {
        const int k_t = k_for_epoch(epoch);
        torch::manual_seed(mix_seed(config_.seed, static_cast<std::uint64_t>(epoch) * 2 + 1));
        Rng pair_rng = Rng(config_.seed).fork(static_cast<std::uint64_t>(epoch) * 2);

        EpochStats stats;
        stats.epoch = epoch;
        stats.k_t = k_t;
        stats.s = s_for_epoch(epoch, k_t);
        for (int step = 0; step < steps; ++step) {
            const auto batch = sample_batch(config_.batch_size, k_t, pair_rng);
            const StepResult result = train_step(batch, epoch);
            stats.total += result.breakdown.total.item<double>();
            stats.vae_l += result.breakdown.vae_l;
            stats.vae_m += result.breakdown.vae_m;
            stats.swap_term += result.breakdown.swap_term;
            stats.recon += result.breakdown.recon_l + result.breakdown.recon_m;
            stats.kl += result.breakdown.kl_l + result.breakdown.kl_m;
            stats.disc_loss += result.disc_loss;
        }
        stats.total /= steps;
        stats.vae_l /= steps;
        stats.vae_m /= steps;
        stats.swap_term /= steps;
        stats.recon /= steps;
        stats.kl /= steps;
        stats.disc_loss /= steps;
        artifacts.trace.push_back(stats);
        last = stats;

        trace_out << stats.epoch << ',' << stats.k_t << ',' << stats.s << ',' << fmt_g(stats.total)
                  << ',' << fmt_g(stats.vae_l) << ',' << fmt_g(stats.vae_m) << ','
                  << fmt_g(stats.swap_term) << ',' << fmt_g(stats.recon) << ',' << fmt_g(stats.kl)
                  << ',' << fmt_g(stats.disc_loss) << '\n';
        trace_out.flush();

        next_epoch_ = epoch + 1;
        save_checkpoint(out_dir / "checkpoint.bin");
        write_manifest(out_dir, out_dir / "checkpoint.bin", last);
    }
    artifacts.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    // wall-clock metadata lives in the manifest, not the trace
    write_manifest(out_dir, out_dir / "checkpoint.bin", last, artifacts.wall_seconds);
    return artifacts;
}

void Trainer::save_checkpoint(const std::filesystem::path& checkpoint_path) const {
    torch::serialize::OutputArchive root;
    torch::serialize::OutputArchive model_archive;
    model_->save(model_archive);
    root.write("model", model_archive);
    torch::serialize::OutputArchive opt_archive;
    opt_model_->save(opt_archive);
    root.write("opt_model", opt_archive);
    if (variant_ == Variant::kGan) {
        torch::serialize::OutputArchive disc_archive;
        disc_->save(disc_archive);
        root.write("disc", disc_archive);
        torch::serialize::OutputArchive opt_disc_archive;
        opt_disc_->save(opt_disc_archive);
        root.write("opt_disc", opt_disc_archive);
    }
    root.write("next_epoch", torch::tensor(static_cast<std::int64_t>(next_epoch_)));
    root.save_to(checkpoint_path.string());
}

void Trainer::write_manifest(const std::filesystem::path& dir,
                             const std::filesystem::path& checkpoint_path,
                             const std::optional<EpochStats>& last,
                             double wall_seconds) const {
    const auto bytes = read_file_bytes(checkpoint_path);
    char digest[20];
    std::snprintf(digest, sizeof(digest), "%016llx",
                  static_cast<unsigned long long>(fnv1a(bytes)));

    nlohmann::ordered_json manifest;
    manifest["format"] = 1;
    manifest["config"] = serialize_config(config_);
    manifest["config_digest"] = config_digest(config_);
    manifest["seed"] = config_.seed;
    manifest["next_epoch"] = next_epoch_;
    manifest["determinism"] = config_.threads == 1 ? "bitwise-single-thread" : "multi-thread";
    manifest["checkpoint_fnv1a"] = digest;
    if (last) {
        manifest["loss_snapshot"] = {{"epoch", last->epoch},
                                     {"total", last->total},
                                     {"vae_l", last->vae_l},
                                     {"vae_m", last->vae_m},
                                     {"swap_term", last->swap_term},
                                     {"recon_loss", last->recon},
                                     {"kl_loss", last->kl},
                                     {"disc_loss", last->disc_loss}};
    }
    if (wall_seconds >= 0.0) manifest["wall_seconds"] = wall_seconds;

    std::ofstream out(dir / "manifest.json");
    if (!out) throw IoError("cannot write manifest.json");
    out << manifest.dump(2) << '\n';
}

std::unique_ptr<Trainer> Trainer::from_checkpoint(const std::filesystem::path& checkpoint_path) {
    const auto manifest_path = checkpoint_path.parent_path() / "manifest.json";
    std::ifstream manifest_in(manifest_path);
    if (!manifest_in) throw IoError("missing manifest beside checkpoint: " + manifest_path.string());
    nlohmann::json manifest;
    try {
        manifest_in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("corrupt manifest: " + std::string(e.what()));
    }

    const auto bytes = read_file_bytes(checkpoint_path);
    char digest[20];
    std::snprintf(digest, sizeof(digest), "%016llx",
                  static_cast<unsigned long long>(fnv1a(bytes)));
    if (!manifest.contains("checkpoint_fnv1a") || manifest["checkpoint_fnv1a"] != digest)
        throw IoError("checkpoint integrity check failed: manifest hash mismatch");

    ExperimentConfig config =
        config_from_entries(parse_config_text(manifest.at("config").get<std::string>()));
    if (manifest.at("config_digest").get<std::string>() != config_digest(config))
        throw IoError("manifest config digest mismatch");

    auto trainer = std::make_unique<Trainer>(config);
    torch::serialize::InputArchive root;
    root.load_from(checkpoint_path.string());
    torch::serialize::InputArchive model_archive;
    root.read("model", model_archive);
    trainer->model_->load(model_archive);
    torch::serialize::InputArchive opt_archive;
    root.read("opt_model", opt_archive);
    trainer->opt_model_->load(opt_archive);
    if (trainer->variant_ == Variant::kGan) {
        torch::serialize::InputArchive disc_archive;
        root.read("disc", disc_archive);
        trainer->disc_->load(disc_archive);
        torch::serialize::InputArchive opt_disc_archive;
        root.read("opt_disc", opt_disc_archive);
        trainer->opt_disc_->load(opt_disc_archive);
    }
    torch::Tensor next_epoch;
    root.read("next_epoch", next_epoch);
    trainer->next_epoch_ = static_cast<int>(next_epoch.item<std::int64_t>());
    return trainer;
}

}  // namespace swvae
