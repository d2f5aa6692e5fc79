#include "swvae/factor_space.hpp"

#include <cmath>
#include <cstdlib>

#include "swvae/errors.hpp"

namespace swvae {

FactorSpace::FactorSpace(std::vector<std::string> names,
                         std::vector<int> cardinalities,
                         std::vector<std::vector<double>> value_grids)
    : names_(std::move(names)),
      cardinalities_(std::move(cardinalities)),
      value_grids_(std::move(value_grids)) {
    if (cardinalities_.empty()) throw DataError("factor space needs at least one factor");
    if (names_.size() != cardinalities_.size() || value_grids_.size() != cardinalities_.size())
        throw DataError("factor space fields disagree on the number of factors");
    total_ = 1;
    for (std::size_t i = 0; i < cardinalities_.size(); ++i) {
        if (cardinalities_[i] < 2) throw DataError("every factor cardinality must be >= 2");
        if (value_grids_[i].size() != static_cast<std::size_t>(cardinalities_[i]))
            throw DataError("value grid length does not match cardinality");
        total_ *= cardinalities_[i];
    }
}

std::int64_t FactorSpace::index_of(const std::vector<int>& factors) const {
    if (!valid_factors(factors)) throw DataError("factor vector outside the grid");
    std::int64_t index = 0;
    for (std::size_t i = 0; i < cardinalities_.size(); ++i)
        index = index * cardinalities_[i] + factors[i];
    return index;
}

std::vector<int> FactorSpace::factors_of(std::int64_t index) const {
    if (index < 0 || index >= total_) throw DataError("dataset index outside the grid");
    std::vector<int> factors(cardinalities_.size());
    for (int i = num_factors() - 1; i >= 0; --i) {
        factors[i] = static_cast<int>(index % cardinalities_[i]);
        index /= cardinalities_[i];
    }
    return factors;
}

bool FactorSpace::valid_factors(const std::vector<int>& factors) const {
    if (factors.size() != cardinalities_.size()) return false;
    for (std::size_t i = 0; i < factors.size(); ++i)
        if (factors[i] < 0 || factors[i] >= cardinalities_[i]) return false;
    return true;
}

namespace {

constexpr int kMicroSize = 32;

enum MicroShape { kSquare = 0, kDisc = 1, kCross = 2 };

}  // namespace

FactorSpace build_micro_space() {
    std::vector<double> centers;
    for (int c = 6; c <= 20; c += 2) centers.push_back(c);
    return FactorSpace(
        {"shape", "halfwidth", "center_x", "center_y"},
        {3, 4, 8, 8},
        {{kSquare, kDisc, kCross}, {3, 4, 5, 6}, centers, centers});
}

ImageShape micro_image_shape() { return {kMicroSize, kMicroSize, 1}; }

Observation render_micro(const FactorSpace& space, const std::vector<int>& factors) {
    if (!space.valid_factors(factors)) throw DataError("invalid factor vector for micro renderer");
    const int shape = static_cast<int>(space.grid_value(0, factors[0]));
    const int w = static_cast<int>(space.grid_value(1, factors[1]));
    const int cx = static_cast<int>(space.grid_value(2, factors[2]));
    const int cy = static_cast<int>(space.grid_value(3, factors[3]));
    const int t = (w + 2) / 3;  // ceil(w / 3)

    Observation obs;
    obs.factors = factors;
    obs.pixels.assign(static_cast<std::size_t>(kMicroSize) * kMicroSize, 0.0f);
    for (int i = 0; i < kMicroSize; ++i) {
        for (int j = 0; j < kMicroSize; ++j) {
            const int di = i - cy;
            const int dj = j - cx;
            bool on = false;
            switch (shape) {
                case kSquare:
                    on = std::abs(di) <= w && std::abs(dj) <= w;
                    break;
                case kDisc:
                    on = di * di + dj * dj <= w * w;
                    break;
                case kCross:
                    on = (std::abs(di) <= t && std::abs(dj) <= w) ||
                         (std::abs(dj) <= t && std::abs(di) <= w);
                    break;
                default:
                    break;
            }
            if (on) obs.pixels[static_cast<std::size_t>(i) * kMicroSize + j] = 1.0f;
        }
    }
    return obs;
}

}  // namespace swvae
