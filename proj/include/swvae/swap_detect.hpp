#pragma once

#include <span>
#include <string>
#include <vector>

namespace swvae {

// Per-dimension Gaussian KL between the two posteriors of a pair.
// kStandard is the closed form of D_KL(q_l || q_m); kPaper reproduces the
// variant with the l-variance denominator and inverted log ratio, kept for
// replication (see the --kl-mode flag).
enum class KlMode { kStandard, kPaper };

KlMode parse_kl_mode(const std::string& name);
std::string to_string(KlMode mode);

std::vector<double> kl_per_dim(std::span<const double> mu_l,
                               std::span<const double> sigma_l,
                               std::span<const double> mu_m,
                               std::span<const double> sigma_m,
                               KlMode mode = KlMode::kStandard);

// Indices of the k_signal largest KL entries, ties broken toward the lower
// index. Returned sorted ascending.
std::vector<int> detect_distinct(std::span<const double> kl_vector, int k_signal);

// The s indices outside df_set with the smallest KL values (the dimensions
// the model is most confident encode the same factor), lower-index
// tie-break. Returned sorted ascending.
std::vector<int> select_swap_set(std::span<const double> kl_vector,
                                 std::span<const int> df_set,
                                 int s);

// Warm-up curriculum over the number of swapped dimensions: one during
// warm-up, ramping linearly until the full complement d_z - k_t is swapped.
int isf_schedule(int epoch, int total_epochs, int d_z, int k_t);

// Detection outcome for one pair.
struct SwapPlan {
    std::vector<int> df_set;
    std::vector<int> swap_set;
    std::vector<double> kl_vector;
};

SwapPlan plan_swap(std::vector<double> kl_vector, int k_signal, int s);

}  // namespace swvae
