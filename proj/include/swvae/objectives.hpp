#pragma once

#include <torch/torch.h>

#include <string>

#include "swvae/model.hpp"

namespace swvae {

enum class Variant { kSimMse, kSimBce, kGan };

Variant parse_variant(const std::string& name);
std::string to_string(Variant variant);

// Generic-loss decomposition: total = vae_l + vae_m + swap_term, with the
// swap term gamma-weighted. Scalars mirror the graph tensors for logging.
struct LossBreakdown {
    torch::Tensor total;  // graph-attached
    double vae_l = 0.0;
    double vae_m = 0.0;
    double swap_term = 0.0;
    double recon_l = 0.0, recon_m = 0.0;
    double kl_l = 0.0, kl_m = 0.0;
    double gamma = 0.0;
    Variant variant = Variant::kSimBce;
};

struct PairVaeTerms {
    VaeLossTerms left;
    VaeLossTerms right;
};

// Small convolutional classifier over channel-concatenated image pairs.
class PairDiscriminatorImpl : public torch::nn::Module {
  public:
    explicit PairDiscriminatorImpl(ImageShape image);
    torch::Tensor logits(const torch::Tensor& a, const torch::Tensor& b);  // [B]
    torch::Tensor probability(const torch::Tensor& a, const torch::Tensor& b);

  private:
    torch::nn::Conv2d conv1_{nullptr}, conv2_{nullptr};
    torch::nn::Linear fc1_{nullptr}, fc2_{nullptr};
};
TORCH_MODULE(PairDiscriminator);

// Swapped reconstructions compared against the original reconstructions by
// squared error (pixel sum, batch mean).
LossBreakdown sim_mse_loss(const torch::Tensor& x_rec_l,
                           const torch::Tensor& x_swap_rec_l,
                           const torch::Tensor& x_rec_m,
                           const torch::Tensor& x_swap_rec_m,
                           const PairVaeTerms& vae_terms,
                           double gamma);

// As sim_mse_loss with pixelwise binary cross-entropy, stabilized by taking
// the swapped reconstruction as logits and the original as soft target.
LossBreakdown sim_bce_loss(const torch::Tensor& x_rec_l,
                           const torch::Tensor& x_swap_logits_l,
                           const torch::Tensor& x_rec_m,
                           const torch::Tensor& x_swap_logits_m,
                           const PairVaeTerms& vae_terms,
                           double gamma);

// Adversarial comparison: the VAE is rewarded when the discriminator calls
// the (swapped, original) pair identical (label one).
LossBreakdown gan_generator_loss(PairDiscriminator& disc,
                                 const torch::Tensor& x_rec_l,
                                 const torch::Tensor& x_swap_rec_l,
                                 const torch::Tensor& x_rec_m,
                                 const torch::Tensor& x_swap_rec_m,
                                 const PairVaeTerms& vae_terms,
                                 double gamma);

// Discriminator side: zero labels on (swapped, original) pairs; when
// `with_positives` also one labels on (original, original) pairs so the
// classifier has both classes to separate. Inputs are detached here.
torch::Tensor gan_discriminator_loss(PairDiscriminator& disc,
                                     const torch::Tensor& x_rec_l,
                                     const torch::Tensor& x_swap_rec_l,
                                     const torch::Tensor& x_rec_m,
                                     const torch::Tensor& x_swap_rec_m,
                                     bool with_positives);

}  // namespace swvae
