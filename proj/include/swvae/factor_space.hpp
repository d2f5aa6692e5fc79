#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace swvae {

// Ground-truth generative factor grid. The grid defines a row-major bijection
// between factor vectors and dataset indices, used both by the procedural
// renderer and by exhaustive archives.
class FactorSpace {
  public:
    FactorSpace(std::vector<std::string> names,
                std::vector<int> cardinalities,
                std::vector<std::vector<double>> value_grids);

    int num_factors() const { return static_cast<int>(cardinalities_.size()); }
    std::int64_t total_size() const { return total_; }
    const std::vector<std::string>& factor_names() const { return names_; }
    const std::vector<int>& cardinalities() const { return cardinalities_; }
    const std::vector<std::vector<double>>& value_grids() const { return value_grids_; }

    // Semantic value behind grid position `value` of factor `factor`.
    double grid_value(int factor, int value) const { return value_grids_[factor][value]; }

    // Row-major bijection. factors_of(index_of(V)) == V for every valid V.
    std::int64_t index_of(const std::vector<int>& factors) const;
    std::vector<int> factors_of(std::int64_t index) const;

    bool valid_factors(const std::vector<int>& factors) const;

  private:
    std::vector<std::string> names_;
    std::vector<int> cardinalities_;
    std::vector<std::vector<double>> value_grids_;
    std::int64_t total_ = 0;
};

// One rendered sample: pixel intensities in [0,1] plus its factor vector.
struct Observation {
    std::vector<float> pixels;  // H*W*C, row-major
    std::vector<int> factors;
};

struct ImageShape {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::int64_t pixel_count() const {
        return static_cast<std::int64_t>(height) * width * channels;
    }
    bool operator==(const ImageShape&) const = default;
};

// The MicroSprites space: shape {square, disc, cross} x half-width {3..6}
// x center-x {6,8,..,20} x center-y {6,8,..,20}, rendered at 32x32x1.
// Centers and widths are chosen so no shape ever clips the border.
FactorSpace build_micro_space();

ImageShape micro_image_shape();

// Deterministic binary renderer for the micro space. Throws DataError on an
// out-of-grid factor vector.
Observation render_micro(const FactorSpace& space, const std::vector<int>& factors);

}  // namespace swvae
