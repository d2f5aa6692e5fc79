#pragma once

#include <functional>
#include <string>

#include "swvae/factor_space.hpp"
#include "swvae/rng.hpp"

namespace swvae {

// Supervision regimes: the model sees only k (an upper bound on the number
// of differing generative factors) or the exact differing count.
enum class Supervision { kMaxK, kExactK };

Supervision parse_supervision(const std::string& name);
std::string to_string(Supervision supervision);

// A sampled training pair. The indices of the differing factors are known
// only to this structure's producer; the trainer reads pixels and k_signal.
struct ObservationPair {
    Observation left;
    Observation right;
    int num_changed = 0;
    Supervision supervision = Supervision::kMaxK;
    int k_signal = 0;
};

using ObservationFn = std::function<Observation(const std::vector<int>&)>;

// Draws a base factor vector uniformly, then redraws d factor values at
// distinct indices (d = k_t under exact-k, d ~ Uniform{1..k_t} under max-k),
// each guaranteed to actually change. `render` supplies the generating
// function from factor vectors to observations.
ObservationPair sample_pair(const FactorSpace& space,
                            const ObservationFn& render,
                            Supervision supervision,
                            int k_t,
                            Rng& rng);

// Curriculum over the number of distinct generative factors in sampled
// pairs: starts at 1 and ramps linearly to k_max by the final epoch.
int igf_schedule(int epoch, int total_epochs, int k_max);

}  // namespace swvae
