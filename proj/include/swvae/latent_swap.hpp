#pragma once

#include <torch/torch.h>

#include <vector>

#include "swvae/model.hpp"
#include "swvae/swap_detect.hpp"

namespace swvae {

// Boolean [B, d_z] mask from per-row swap sets. Throws on out-of-range
// indices.
torch::Tensor swap_mask_from_sets(const std::vector<std::vector<int>>& swap_sets, int d_z);

// Exchanges the masked coordinates between the two codes. Differentiable
// pass-through: gradients follow whichever source value occupies each output
// slot; the mask itself carries no gradient.
std::pair<torch::Tensor, torch::Tensor> swap_latents(const torch::Tensor& z_l,
                                                     const torch::Tensor& z_m,
                                                     const torch::Tensor& mask);

// Runs detection for every pair in the batch from the posterior parameters
// (no gradients flow through detection): per-dimension KL, top-k_signal
// distinct set, then the s most-confident identical dimensions to swap.
std::vector<SwapPlan> plan_batch_swaps(const LatentPosterior& post_l,
                                       const LatentPosterior& post_m,
                                       int k_signal,
                                       int s,
                                       KlMode mode);

}  // namespace swvae
