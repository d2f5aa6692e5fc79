#include "swvae/pairs.hpp"

#include <algorithm>
#include <numeric>

#include "swvae/errors.hpp"

namespace swvae {

Supervision parse_supervision(const std::string& name) {
    if (name == "max-k") return Supervision::kMaxK;
    if (name == "exact-k") return Supervision::kExactK;
    throw ConfigError("unknown supervision regime: " + name);
}

std::string to_string(Supervision supervision) {
    return supervision == Supervision::kMaxK ? "max-k" : "exact-k";
}

ObservationPair sample_pair(const FactorSpace& space,
                            const ObservationFn& render,
                            Supervision supervision,
                            int k_t,
                            Rng& rng) {
    const int v = space.num_factors();
    if (k_t < 1 || k_t > v)
        throw ConfigError("invalid supervision: k_t=" + std::to_string(k_t) +
                          " outside [1, " + std::to_string(v) + "]");

    std::vector<int> left(v);
    for (int f = 0; f < v; ++f) left[f] = static_cast<int>(rng.uniform_below(space.cardinalities()[f]));

    const int d = supervision == Supervision::kExactK ? k_t : rng.uniform_int(1, k_t);

    // Partial Fisher-Yates picks d distinct indices to change.
    std::vector<int> order(v);
    std::iota(order.begin(), order.end(), 0);
    for (int i = 0; i < d; ++i)
        std::swap(order[i], order[i + static_cast<int>(rng.uniform_below(v - i))]);

    std::vector<int> right = left;
    for (int i = 0; i < d; ++i) {
        const int f = order[i];
        const int card = space.cardinalities()[f];
        int value = static_cast<int>(rng.uniform_below(card - 1));
        if (value >= left[f]) ++value;  // redraw from the other card-1 values
        right[f] = value;
    }

    ObservationPair pair;
    pair.left = render(left);
    pair.right = render(right);
    pair.num_changed = d;
    pair.supervision = supervision;
    pair.k_signal = supervision == Supervision::kExactK ? d : k_t;
    return pair;
}

int igf_schedule(int epoch, int total_epochs, int k_max) {
    if (epoch < 0 || epoch >= total_epochs)
        throw ConfigError("epoch outside [0, total_epochs)");
    if (k_max < 1) throw ConfigError("k_max must be >= 1");
    const long long ramp = 1 + static_cast<long long>(epoch) * k_max / total_epochs;
    return static_cast<int>(std::min<long long>(k_max, ramp));
}

}  // namespace swvae
