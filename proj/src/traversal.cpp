#include "swvae/traversal.hpp"

#include "swvae/errors.hpp"

namespace swvae {

TraversalGrid traversal_grid(SwVaeModel& model,
                             const Observation& anchor,
                             double range,
                             int steps) {
    if (steps < 1) throw ConfigError("traversal needs at least one step");
    const torch::NoGradGuard no_grad;
    const auto& img = model->config().image;
    const int d_z = model->config().d_z;

    torch::Tensor x = torch::empty({1, img.pixel_count()});
    if (static_cast<std::int64_t>(anchor.pixels.size()) != img.pixel_count())
        throw DataError("anchor pixel count does not match the model");
    auto acc = x.accessor<float, 2>();
    for (std::int64_t p = 0; p < img.pixel_count(); ++p) acc[0][p] = anchor.pixels[p];
    const torch::Tensor anchor_chw =
        x.view({1, img.height, img.width, img.channels}).permute({0, 3, 1, 2}).contiguous();
    const torch::Tensor mu = model->encode(anchor_chw).mu;

    // One decode batch: d_z * steps codes, each a copy of mu with one
    // coordinate replaced by a sweep value.
    torch::Tensor codes = mu.repeat({static_cast<std::int64_t>(d_z) * steps, 1});
    auto codes_acc = codes.accessor<float, 2>();
    for (int dim = 0; dim < d_z; ++dim)
        for (int step = 0; step < steps; ++step) {
            const double value =
                steps == 1 ? mu[0][dim].item<double>()
                           : -range + 2.0 * range * step / (steps - 1);
            codes_acc[dim * steps + step][dim] = static_cast<float>(value);
        }
    const torch::Tensor recon = torch::sigmoid(model->decode(codes));  // [d_z*steps, C, H, W]
    const torch::Tensor gray = recon.mean(1);                          // [d_z*steps, H, W]
    auto gray_acc = gray.accessor<float, 3>();

    TraversalGrid grid;
    grid.rows = d_z;
    grid.cols = steps;
    grid.height = d_z * img.height;
    grid.width = steps * img.width;
    grid.pixels.assign(static_cast<std::size_t>(grid.height) * grid.width, 0.0f);
    for (int dim = 0; dim < d_z; ++dim)
        for (int step = 0; step < steps; ++step)
            for (int i = 0; i < img.height; ++i)
                for (int j = 0; j < img.width; ++j)
                    grid.pixels[static_cast<std::size_t>(dim * img.height + i) * grid.width +
                                step * img.width + j] = gray_acc[dim * steps + step][i][j];
    return grid;
}

}  // namespace swvae
