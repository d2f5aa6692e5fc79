#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "swvae/archive.hpp"
#include "swvae/config.hpp"
#include "swvae/latent_swap.hpp"
#include "swvae/model.hpp"
#include "swvae/objectives.hpp"
#include "swvae/pairs.hpp"

namespace swvae {

// One trace row: per-epoch means of the loss breakdown plus the schedule
// values in effect. Wall-clock data stays out so identical runs produce
// identical traces.
struct EpochStats {
    int epoch = 0;
    int k_t = 0;
    int s = 0;
    double total = 0.0, vae_l = 0.0, vae_m = 0.0, swap_term = 0.0;
    double recon = 0.0, kl = 0.0;
    double disc_loss = 0.0;  // zero for the SIM variants
};

struct RunArtifacts {
    std::filesystem::path out_dir;
    std::vector<EpochStats> trace;
    ExperimentConfig config;
    double wall_seconds = 0.0;
};

struct StepResult {
    LossBreakdown breakdown;
    double disc_loss = 0.0;
    int df_size = 0;
    int swap_size = 0;
};

// Owns one training run: dataset, model (and discriminator for the GAN
// variant), optimizers, and the curriculum state. Deterministic given the
// config seed when threads = 1.
class Trainer {
  public:
    explicit Trainer(ExperimentConfig config);

    // Schedule values for an epoch.
    int k_for_epoch(int epoch) const;
    int s_for_epoch(int epoch, int k_t) const;

    std::vector<ObservationPair> sample_batch(int count, int k_t, Rng& rng) const;

    // One forward/backward/update on an assembled batch: generator step,
    // then the discriminator step for the GAN variant.
    StepResult train_step(const std::vector<ObservationPair>& batch, int epoch);

    // Full run: writes config.snapshot, trace.csv, checkpoint.bin and
    // manifest.json into config.out_dir.
    RunArtifacts train();

    void save_checkpoint(const std::filesystem::path& checkpoint_path) const;
    // Restores a run from checkpoint.bin + manifest.json; training resumes
    // at the recorded epoch with schedules recomputed from it.
    static std::unique_ptr<Trainer> from_checkpoint(const std::filesystem::path& checkpoint_path);

    SwVaeModel& model() { return model_; }
    PairDiscriminator& discriminator() { return disc_; }
    const ExperimentConfig& config() const { return config_; }
    const DatasetArchive& archive() const { return *archive_; }
    const FactorSpace& space() const { return *space_; }
    int next_epoch() const { return next_epoch_; }
    int steps_per_epoch() const;

    // Pixel tensor [B, C, H, W] from observations.
    torch::Tensor batch_tensor(const std::vector<Observation>& observations) const;

  private:
    void write_manifest(const std::filesystem::path& dir,
                        const std::filesystem::path& checkpoint_path,
                        const std::optional<EpochStats>& last,
                        double wall_seconds = -1.0) const;

    ExperimentConfig config_;
    std::shared_ptr<DatasetArchive> archive_;
    std::shared_ptr<FactorSpace> space_;
    SwVaeModel model_{nullptr};
    PairDiscriminator disc_{nullptr};
    std::unique_ptr<torch::optim::Adam> opt_model_;
    std::unique_ptr<torch::optim::Adam> opt_disc_;
    Variant variant_ = Variant::kSimBce;
    Supervision supervision_ = Supervision::kMaxK;
    KlMode kl_mode_ = KlMode::kStandard;
    int next_epoch_ = 0;
};

}  // namespace swvae
