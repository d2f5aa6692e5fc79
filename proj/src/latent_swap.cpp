#include "swvae/latent_swap.hpp"

#include "swvae/errors.hpp"

namespace swvae {

torch::Tensor swap_mask_from_sets(const std::vector<std::vector<int>>& swap_sets, int d_z) {
    const auto batch = static_cast<std::int64_t>(swap_sets.size());
    torch::Tensor mask = torch::zeros({batch, d_z}, torch::kBool);
    auto acc = mask.accessor<bool, 2>();
    for (std::int64_t b = 0; b < batch; ++b)
        for (int i : swap_sets[b]) {
            if (i < 0 || i >= d_z) throw DataError("swap index out of range");
            acc[b][i] = true;
        }
    return mask;
}

std::pair<torch::Tensor, torch::Tensor> swap_latents(const torch::Tensor& z_l,
                                                     const torch::Tensor& z_m,
                                                     const torch::Tensor& mask) {
    if (!z_l.sizes().equals(z_m.sizes()) || !mask.sizes().equals(z_l.sizes()))
        throw DataError("swap operands must share one shape");
    return {torch::where(mask, z_m, z_l), torch::where(mask, z_l, z_m)};
}

std::vector<SwapPlan> plan_batch_swaps(const LatentPosterior& post_l,
                                       const LatentPosterior& post_m,
                                       int k_signal,
                                       int s,
                                       KlMode mode) {
    const torch::NoGradGuard no_grad;
    const auto mu_l = post_l.mu.detach().to(torch::kDouble).contiguous();
    const auto sg_l = post_l.sigma.detach().to(torch::kDouble).contiguous();
    const auto mu_m = post_m.mu.detach().to(torch::kDouble).contiguous();
    const auto sg_m = post_m.sigma.detach().to(torch::kDouble).contiguous();
    const int batch = static_cast<int>(mu_l.size(0));
    const int d_z = static_cast<int>(mu_l.size(1));

    std::vector<SwapPlan> plans;
    plans.reserve(batch);
    const double* pml = mu_l.data_ptr<double>();
    const double* psl = sg_l.data_ptr<double>();
    const double* pmm = mu_m.data_ptr<double>();
    const double* psm = sg_m.data_ptr<double>();
    for (int b = 0; b < batch; ++b) {
        auto kl = kl_per_dim({pml + static_cast<std::size_t>(b) * d_z, static_cast<std::size_t>(d_z)},
                             {psl + static_cast<std::size_t>(b) * d_z, static_cast<std::size_t>(d_z)},
                             {pmm + static_cast<std::size_t>(b) * d_z, static_cast<std::size_t>(d_z)},
                             {psm + static_cast<std::size_t>(b) * d_z, static_cast<std::size_t>(d_z)},
                             mode);
        plans.push_back(plan_swap(std::move(kl), k_signal, s));
    }
    return plans;
}

}  // namespace swvae
