#include "swvae/model.hpp"

#include "swvae/errors.hpp"

namespace swvae {

SwVaeModelImpl::SwVaeModelImpl(ModelConfig config) : config_(std::move(config)) {
    const int stages = static_cast<int>(config_.conv_channels.size());
    int h = config_.image.height;
    int w = config_.image.width;
    for (int s = 0; s < stages; ++s) {
        if (h % 2 != 0 || w % 2 != 0)
            throw ConfigError("image size is not divisible by the conv stack");
        h /= 2;
        w /= 2;
    }
    if (h < 1 || w < 1 || h != w)
        throw ConfigError("conv stack reduces the image below 1x1 or to a non-square map");
    feature_hw_ = h;

    enc_convs_ = torch::nn::ModuleList();
    int in_ch = config_.image.channels;
    for (int s = 0; s < stages; ++s) {
        enc_convs_->push_back(torch::nn::Conv2d(
            torch::nn::Conv2dOptions(in_ch, config_.conv_channels[s], 4).stride(2).padding(1)));
        in_ch = config_.conv_channels[s];
    }
    register_module("enc_convs", enc_convs_);
    const int flat = config_.conv_channels.back() * feature_hw_ * feature_hw_;
    enc_fc_ = register_module("enc_fc", torch::nn::Linear(flat, config_.dense_units));
    enc_head_ = register_module("enc_head", torch::nn::Linear(config_.dense_units, 2 * config_.d_z));

    dec_fc_ = register_module("dec_fc", torch::nn::Linear(config_.d_z, config_.dense_units));
    dec_expand_ = register_module("dec_expand", torch::nn::Linear(config_.dense_units, flat));
    dec_convs_ = torch::nn::ModuleList();
    for (int s = stages - 1; s >= 0; --s) {
        const int out_ch = s == 0 ? config_.image.channels : config_.conv_channels[s - 1];
        dec_convs_->push_back(torch::nn::ConvTranspose2d(
            torch::nn::ConvTranspose2dOptions(config_.conv_channels[s], out_ch, 4)
                .stride(2)
                .padding(1)));
    }
    register_module("dec_convs", dec_convs_);
}

LatentPosterior SwVaeModelImpl::encode(const torch::Tensor& x) {
    if (x.dim() != 4 || x.size(1) != config_.image.channels ||
        x.size(2) != config_.image.height || x.size(3) != config_.image.width)
        throw DataError("encoder input shape does not match the image descriptor");
    torch::Tensor h = x;
    for (auto& conv : *enc_convs_)
        h = torch::relu(conv->as<torch::nn::Conv2d>()->forward(h));
    h = torch::relu(enc_fc_(h.flatten(1)));
    const torch::Tensor stats = enc_head_(h);
    LatentPosterior post;
    post.mu = stats.slice(1, 0, config_.d_z);
    post.logvar = stats.slice(1, config_.d_z, 2 * config_.d_z).clamp(-10.0, 10.0);
    post.sigma = torch::exp(0.5 * post.logvar);
    return post;
}

torch::Tensor SwVaeModelImpl::decode(const torch::Tensor& z) {
    if (z.dim() != 2 || z.size(1) != config_.d_z)
        throw DataError("decoder input must be [batch, d_z]");
    torch::Tensor h = torch::relu(dec_fc_(z));
    h = torch::relu(dec_expand_(h));
    h = h.view({z.size(0), config_.conv_channels.back(), feature_hw_, feature_hw_});
    const int n = static_cast<int>(dec_convs_->size());
    for (int i = 0; i < n; ++i) {
        h = dec_convs_[i]->as<torch::nn::ConvTranspose2d>()->forward(h);
        if (i + 1 < n) h = torch::relu(h);
    }
    return h;
}

torch::Tensor reparameterize(const LatentPosterior& posterior, const torch::Tensor& noise) {
    if (!noise.sizes().equals(posterior.mu.sizes()))
        throw DataError("noise shape must match the posterior mean");
    return posterior.mu + posterior.sigma * noise;
}

VaeLossTerms vae_loss(const torch::Tensor& x,
                      const torch::Tensor& recon_logits,
                      const LatentPosterior& posterior,
                      double beta) {
    if (!x.sizes().equals(recon_logits.sizes()))
        throw DataError("reconstruction logits shape does not match the input");
    const auto batch = x.size(0);
    VaeLossTerms terms;
    terms.recon = torch::binary_cross_entropy_with_logits(
                      recon_logits.flatten(1), x.flatten(1), {}, {}, torch::Reduction::Sum) /
                  batch;
    const torch::Tensor mu2 = posterior.mu * posterior.mu;
    const torch::Tensor var = posterior.sigma * posterior.sigma;
    terms.kl = (0.5 * (mu2 + var - 1.0 - posterior.logvar)).sum() / batch;
    terms.total = terms.recon + beta * terms.kl;
    if (!torch::isfinite(terms.total).item<bool>())
        throw NumericError("vae loss is not finite");
    return terms;
}

}  // namespace swvae
