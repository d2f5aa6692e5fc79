#include "swvae/extraction.hpp"

#include <algorithm>
#include <numeric>

#include "swvae/errors.hpp"

namespace swvae {

namespace {

constexpr int kEncodeBatch = 256;

// Encodes archive rows in fixed-size batches; returns posterior means in
// doubles, n x d_z row-major.
std::vector<double> encode_rows(SwVaeModel& model,
                                const DatasetArchive& archive,
                                const std::vector<std::int64_t>& rows) {
    const torch::NoGradGuard no_grad;
    const auto& img = archive.descriptor().image;
    const std::int64_t np = img.pixel_count();
    const int d_z = model->config().d_z;
    std::vector<double> out(rows.size() * d_z);

    for (std::size_t start = 0; start < rows.size(); start += kEncodeBatch) {
        const std::size_t count = std::min<std::size_t>(kEncodeBatch, rows.size() - start);
        torch::Tensor x = torch::empty({static_cast<std::int64_t>(count), np});
        auto acc = x.accessor<float, 2>();
        for (std::size_t i = 0; i < count; ++i) {
            const Observation obs = archive.observation(rows[start + i]);
            for (std::int64_t p = 0; p < np; ++p) acc[i][p] = obs.pixels[p];
        }
        const torch::Tensor batch =
            x.view({-1, img.height, img.width, img.channels}).permute({0, 3, 1, 2}).contiguous();
        const torch::Tensor mu = model->encode(batch).mu.to(torch::kDouble).contiguous();
        const double* src = mu.data_ptr<double>();
        std::copy(src, src + count * d_z, out.begin() + start * d_z);
    }
    return out;
}

}  // namespace

RepresentationTable extract_representation(SwVaeModel& model,
                                           const DatasetArchive& archive,
                                           std::int64_t sample_n,
                                           Rng& rng,
                                           int bins) {
    if (archive.count() == 0) throw DataError("cannot extract from an empty archive");
    std::vector<std::int64_t> rows;
    if (sample_n <= 0 || sample_n >= archive.count()) {
        rows.resize(archive.count());
        std::iota(rows.begin(), rows.end(), 0);
    } else {
        // Partial Fisher-Yates subsample without replacement.
        std::vector<std::int64_t> all(archive.count());
        std::iota(all.begin(), all.end(), 0);
        for (std::int64_t i = 0; i < sample_n; ++i)
            std::swap(all[i], all[i + static_cast<std::int64_t>(
                                          rng.uniform_below(all.size() - i))]);
        rows.assign(all.begin(), all.begin() + sample_n);
    }

    RepresentationTable table;
    table.n = static_cast<int>(rows.size());
    table.d = model->config().d_z;
    table.v = archive.descriptor().num_factors;
    table.cardinalities = archive.descriptor().cardinalities;
    table.bins = bins;
    table.z = encode_rows(model, archive, rows);
    table.factors.resize(static_cast<std::size_t>(table.n) * table.v);
    for (int i = 0; i < table.n; ++i) {
        const auto row = archive.factors_row(rows[i]);
        std::copy(row.begin(), row.end(), table.factors.begin() + static_cast<std::size_t>(i) * table.v);
    }
    table.validate();
    return table;
}

MetricsReport evaluate_model(SwVaeModel& model,
                             const DatasetArchive& archive,
                             const EvalOptions& options,
                             Rng& rng) {
    model->eval();
    Rng extract_rng = rng.fork(1);
    const RepresentationTable table =
        extract_representation(model, archive, options.sample_n, extract_rng, options.bins);

    MetricsReport report;
    report.d = table.d;
    report.v = table.v;
    report.mig = mig(table, &report.mi_matrix);
    report.sap = sap(table, &report.sap_matrix);
    report.irs = irs(table);
    report.dci = dci(table, &report.dci_importance);

    bool can_generate = archive.exhaustive();
    for (int c : archive.descriptor().cardinalities)
        if (c < 2) can_generate = false;
    if (options.run_fvae && can_generate) {
        const FactorSpace space = archive.factor_space();
        // Map every factor batch onto archive rows through the grid bijection.
        const FactorBatchEncodeFn encode = [&](const std::vector<std::vector<int>>& batch) {
            std::vector<std::int64_t> rows;
            rows.reserve(batch.size());
            for (const auto& f : batch) rows.push_back(space.index_of(f));
            return encode_rows(model, archive, rows);
        };
        Rng fvae_rng = rng.fork(2);
        report.fvae = fvae_score(space, table.d, encode, options.fvae, fvae_rng);
    } else {
        report.fvae.degenerate = true;
    }
    model->train();
    return report;
}

}  // namespace swvae
