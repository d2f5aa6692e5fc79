#pragma once

#include "swvae/factor_space.hpp"
#include "swvae/model.hpp"

namespace swvae {

// Latent traversal grid: row per latent dimension, column per sweep step.
// Multi-channel reconstructions are averaged into a single gray channel.
struct TraversalGrid {
    std::vector<float> pixels;  // (rows*H) x (cols*W), row-major, values in [0,1]
    int height = 0;             // rows * H
    int width = 0;              // cols * W
    int rows = 0;               // d_z
    int cols = 0;               // steps
};

// Decodes mu(anchor) with each dimension swept linearly over [-range, range]
// while the others stay fixed.
TraversalGrid traversal_grid(SwVaeModel& model,
                             const Observation& anchor,
                             double range = 2.0,
                             int steps = 9);

}  // namespace swvae
