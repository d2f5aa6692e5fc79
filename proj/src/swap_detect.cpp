#include "swvae/swap_detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "swvae/errors.hpp"

namespace swvae {

KlMode parse_kl_mode(const std::string& name) {
    if (name == "standard") return KlMode::kStandard;
    if (name == "paper") return KlMode::kPaper;
    throw ConfigError("unknown kl mode: " + name);
}

std::string to_string(KlMode mode) {
    return mode == KlMode::kStandard ? "standard" : "paper";
}

std::vector<double> kl_per_dim(std::span<const double> mu_l,
                               std::span<const double> sigma_l,
                               std::span<const double> mu_m,
                               std::span<const double> sigma_m,
                               KlMode mode) {
    const std::size_t d = mu_l.size();
    if (sigma_l.size() != d || mu_m.size() != d || sigma_m.size() != d)
        throw std::invalid_argument("posterior dimension mismatch");
    std::vector<double> kl(d);
    for (std::size_t i = 0; i < d; ++i) {
        const double sl = sigma_l[i];
        const double sm = sigma_m[i];
        if (!(sl > 0.0) || !(sm > 0.0))
            throw std::invalid_argument("posterior sigma must be positive");
        const double dmu2 = (mu_l[i] - mu_m[i]) * (mu_l[i] - mu_m[i]);
        if (mode == KlMode::kStandard)
            kl[i] = std::log(sm / sl) + (sl * sl + dmu2) / (2.0 * sm * sm) - 0.5;
        else
            kl[i] = (sl * sl + dmu2) / (2.0 * sl * sl) + std::log(sl / sm) - 0.5;
    }
    return kl;
}

namespace {

std::vector<int> indices_by_kl(std::span<const double> kl_vector, bool descending) {
    std::vector<int> order(kl_vector.size());
    std::iota(order.begin(), order.end(), 0);
    // stable sort keeps the lower index first among ties
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return descending ? kl_vector[a] > kl_vector[b] : kl_vector[a] < kl_vector[b];
    });
    return order;
}

}  // namespace

std::vector<int> detect_distinct(std::span<const double> kl_vector, int k_signal) {
    const int d = static_cast<int>(kl_vector.size());
    if (k_signal < 1 || k_signal > d)
        throw std::invalid_argument("k_signal outside [1, d_z]");
    auto order = indices_by_kl(kl_vector, /*descending=*/true);
    std::vector<int> df(order.begin(), order.begin() + k_signal);
    std::sort(df.begin(), df.end());
    return df;
}

std::vector<int> select_swap_set(std::span<const double> kl_vector,
                                 std::span<const int> df_set,
                                 int s) {
    const int d = static_cast<int>(kl_vector.size());
    std::vector<bool> in_df(d, false);
    for (int i : df_set) {
        if (i < 0 || i >= d) throw std::invalid_argument("df index out of range");
        in_df[i] = true;
    }
    const int complement = d - static_cast<int>(df_set.size());
    if (s < 1 || s > complement)
        throw std::invalid_argument("swap count outside [1, d_z - |df_set|]");

    std::vector<int> chosen;
    chosen.reserve(s);
    for (int i : indices_by_kl(kl_vector, /*descending=*/false)) {
        if (in_df[i]) continue;
        chosen.push_back(i);
        if (static_cast<int>(chosen.size()) == s) break;
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

int isf_schedule(int epoch, int total_epochs, int d_z, int k_t) {
    if (epoch < 0 || epoch >= total_epochs)
        throw ConfigError("epoch outside [0, total_epochs)");
    if (d_z <= k_t) throw ConfigError("isf schedule requires d_z > k_t");
    const long long ramp = 1 + static_cast<long long>(epoch) * (d_z - 1) / total_epochs;
    return static_cast<int>(std::min<long long>(d_z - k_t, ramp));
}

SwapPlan plan_swap(std::vector<double> kl_vector, int k_signal, int s) {
    SwapPlan plan;
    plan.df_set = detect_distinct(kl_vector, k_signal);
    plan.swap_set = select_swap_set(kl_vector, plan.df_set, s);
    plan.kl_vector = std::move(kl_vector);
    return plan;
}

}  // namespace swvae
