#pragma once

#include <torch/torch.h>

#include <vector>

#include "swvae/factor_space.hpp"

namespace swvae {

struct ModelConfig {
    int d_z = 10;
    double beta = 1.0;
    ImageShape image;
    // One stride-2 stage per entry; the spatial size must divide by 2 per
    // stage (32x32 uses three stages, 64x64 four).
    std::vector<int> conv_channels = {32, 32, 64};
    int dense_units = 256;
};

// Diagonal Gaussian posterior for a batch; sigma = exp(logvar / 2) with
// logvar clamped to [-10, 10].
struct LatentPosterior {
    torch::Tensor mu;      // [B, d_z]
    torch::Tensor sigma;   // [B, d_z]
    torch::Tensor logvar;  // [B, d_z]
};

// Encoder/decoder pair with exactly one parameter set each; the paired
// encoder and decoder slots of the network diagram are call sites.
class SwVaeModelImpl : public torch::nn::Module {
  public:
    explicit SwVaeModelImpl(ModelConfig config);

    LatentPosterior encode(const torch::Tensor& x);
    torch::Tensor decode(const torch::Tensor& z);  // reconstruction logits

    const ModelConfig& config() const { return config_; }

  private:
    ModelConfig config_;
    int feature_hw_ = 0;  // spatial size after the conv stack
    torch::nn::ModuleList enc_convs_;
    torch::nn::Linear enc_fc_{nullptr};
    torch::nn::Linear enc_head_{nullptr};
    torch::nn::Linear dec_fc_{nullptr};
    torch::nn::Linear dec_expand_{nullptr};
    torch::nn::ModuleList dec_convs_;
};
TORCH_MODULE(SwVaeModel);

// z = mu + sigma * noise.
torch::Tensor reparameterize(const LatentPosterior& posterior, const torch::Tensor& noise);

struct VaeLossTerms {
    torch::Tensor total;  // recon + beta * kl
    torch::Tensor recon;  // negative Bernoulli log-likelihood, pixel sum
    torch::Tensor kl;     // closed-form KL to the unit Gaussian prior
};

// Batch-mean Eq-style VAE loss from reconstruction logits and the posterior.
VaeLossTerms vae_loss(const torch::Tensor& x,
                      const torch::Tensor& recon_logits,
                      const LatentPosterior& posterior,
                      double beta);

}  // namespace swvae
