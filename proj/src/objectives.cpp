#include "swvae/objectives.hpp"

#include "swvae/errors.hpp"

namespace swvae {

namespace {

void check_same_shape(const torch::Tensor& a, const torch::Tensor& b) {
    if (!a.sizes().equals(b.sizes()))
        throw DataError("reconstruction tensors must share one shape");
    if (!torch::isfinite(a).all().item<bool>() || !torch::isfinite(b).all().item<bool>())
        throw NumericError("non-finite reconstruction input");
}

LossBreakdown compose(const PairVaeTerms& vae_terms,
                      const torch::Tensor& swap_term,
                      double gamma,
                      Variant variant) {
    LossBreakdown out;
    out.total = vae_terms.left.total + vae_terms.right.total + swap_term;
    out.vae_l = vae_terms.left.total.item<double>();
    out.vae_m = vae_terms.right.total.item<double>();
    out.swap_term = swap_term.item<double>();
    out.recon_l = vae_terms.left.recon.item<double>();
    out.recon_m = vae_terms.right.recon.item<double>();
    out.kl_l = vae_terms.left.kl.item<double>();
    out.kl_m = vae_terms.right.kl.item<double>();
    out.gamma = gamma;
    out.variant = variant;
    return out;
}

}  // namespace

Variant parse_variant(const std::string& name) {
    if (name == "sim-mse") return Variant::kSimMse;
    if (name == "sim-bce") return Variant::kSimBce;
    if (name == "gan") return Variant::kGan;
    throw ConfigError("unknown variant: " + name);
}

std::string to_string(Variant variant) {
    switch (variant) {
        case Variant::kSimMse: return "sim-mse";
        case Variant::kSimBce: return "sim-bce";
        default: return "gan";
    }
}

PairDiscriminatorImpl::PairDiscriminatorImpl(ImageShape image) {
    if (image.height % 4 != 0 || image.width % 4 != 0)
        throw ConfigError("discriminator expects image sizes divisible by 4");
    conv1_ = register_module(
        "conv1", torch::nn::Conv2d(
                     torch::nn::Conv2dOptions(2 * image.channels, 16, 4).stride(2).padding(1)));
    conv2_ = register_module(
        "conv2", torch::nn::Conv2d(torch::nn::Conv2dOptions(16, 32, 4).stride(2).padding(1)));
    const int flat = 32 * (image.height / 4) * (image.width / 4);
    fc1_ = register_module("fc1", torch::nn::Linear(flat, 64));
    fc2_ = register_module("fc2", torch::nn::Linear(64, 1));
}

torch::Tensor PairDiscriminatorImpl::logits(const torch::Tensor& a, const torch::Tensor& b) {
    check_same_shape(a, b);
    torch::Tensor h = torch::cat({a, b}, 1);
    h = torch::leaky_relu(conv1_(h), 0.2);
    h = torch::leaky_relu(conv2_(h), 0.2);
    h = torch::leaky_relu(fc1_(h.flatten(1)), 0.2);
    return fc2_(h).squeeze(1);
}

torch::Tensor PairDiscriminatorImpl::probability(const torch::Tensor& a, const torch::Tensor& b) {
    return torch::sigmoid(logits(a, b));
}

LossBreakdown sim_mse_loss(const torch::Tensor& x_rec_l,
                           const torch::Tensor& x_swap_rec_l,
                           const torch::Tensor& x_rec_m,
                           const torch::Tensor& x_swap_rec_m,
                           const PairVaeTerms& vae_terms,
                           double gamma) {
    check_same_shape(x_rec_l, x_swap_rec_l);
    check_same_shape(x_rec_m, x_swap_rec_m);
    const auto batch = x_rec_l.size(0);
    const torch::Tensor swap_term =
        gamma * ((x_swap_rec_l - x_rec_l).pow(2).sum() / batch +
                 (x_swap_rec_m - x_rec_m).pow(2).sum() / batch);
    return compose(vae_terms, swap_term, gamma, Variant::kSimMse);
}

LossBreakdown sim_bce_loss(const torch::Tensor& x_rec_l,
                           const torch::Tensor& x_swap_logits_l,
                           const torch::Tensor& x_rec_m,
                           const torch::Tensor& x_swap_logits_m,
                           const PairVaeTerms& vae_terms,
                           double gamma) {
    check_same_shape(x_rec_l, x_swap_logits_l);
    check_same_shape(x_rec_m, x_swap_logits_m);
    if ((x_rec_l.min().item<double>() < 0.0) || (x_rec_l.max().item<double>() > 1.0) ||
        (x_rec_m.min().item<double>() < 0.0) || (x_rec_m.max().item<double>() > 1.0))
        throw DataError("bce targets must lie in [0,1]");
    const auto batch = x_rec_l.size(0);
    const torch::Tensor swap_term =
        gamma *
        (torch::binary_cross_entropy_with_logits(x_swap_logits_l.flatten(1), x_rec_l.flatten(1),
                                                 {}, {}, torch::Reduction::Sum) /
             batch +
         torch::binary_cross_entropy_with_logits(x_swap_logits_m.flatten(1), x_rec_m.flatten(1),
                                                 {}, {}, torch::Reduction::Sum) /
             batch);
    return compose(vae_terms, swap_term, gamma, Variant::kSimBce);
}

LossBreakdown gan_generator_loss(PairDiscriminator& disc,
                                 const torch::Tensor& x_rec_l,
                                 const torch::Tensor& x_swap_rec_l,
                                 const torch::Tensor& x_rec_m,
                                 const torch::Tensor& x_swap_rec_m,
                                 const PairVaeTerms& vae_terms,
                                 double gamma) {
    const torch::Tensor logit_l = disc->logits(x_swap_rec_l, x_rec_l);
    const torch::Tensor logit_m = disc->logits(x_swap_rec_m, x_rec_m);
    const torch::Tensor ones_l = torch::ones_like(logit_l);
    const torch::Tensor swap_term =
        gamma * (torch::binary_cross_entropy_with_logits(logit_l, ones_l) +
                 torch::binary_cross_entropy_with_logits(logit_m, ones_l));
    return compose(vae_terms, swap_term, gamma, Variant::kGan);
}

torch::Tensor gan_discriminator_loss(PairDiscriminator& disc,
                                     const torch::Tensor& x_rec_l,
                                     const torch::Tensor& x_swap_rec_l,
                                     const torch::Tensor& x_rec_m,
                                     const torch::Tensor& x_swap_rec_m,
                                     bool with_positives) {
    const torch::Tensor rec_l = x_rec_l.detach();
    const torch::Tensor rec_m = x_rec_m.detach();
    const torch::Tensor swap_l = x_swap_rec_l.detach();
    const torch::Tensor swap_m = x_swap_rec_m.detach();

    const torch::Tensor logit_l = disc->logits(swap_l, rec_l);
    const torch::Tensor logit_m = disc->logits(swap_m, rec_m);
    const torch::Tensor zeros = torch::zeros_like(logit_l);
    torch::Tensor loss = torch::binary_cross_entropy_with_logits(logit_l, zeros) +
                         torch::binary_cross_entropy_with_logits(logit_m, zeros);
    if (with_positives) {
        const torch::Tensor pos_l = disc->logits(rec_l, rec_l);
        const torch::Tensor pos_m = disc->logits(rec_m, rec_m);
        const torch::Tensor ones = torch::ones_like(pos_l);
        loss = loss + torch::binary_cross_entropy_with_logits(pos_l, ones) +
               torch::binary_cross_entropy_with_logits(pos_m, ones);
    }
    return loss;
}

}  // namespace swvae
