#pragma once

#include "swvae/archive.hpp"
#include "swvae/metrics.hpp"
#include "swvae/model.hpp"
#include "swvae/rng.hpp"

namespace swvae {

// Posterior means for `sample_n` archive rows (all rows once sample_n covers
// the archive), row-aligned with the factor matrix.
RepresentationTable extract_representation(SwVaeModel& model,
                                           const DatasetArchive& archive,
                                           std::int64_t sample_n,
                                           Rng& rng,
                                           int bins = 20);

struct EvalOptions {
    std::int64_t sample_n = 0;  // 0: the whole archive
    int bins = 20;
    FvaeOptions fvae;
    bool run_fvae = true;  // needs an exhaustive archive with all cardinalities >= 2
};

// All five scores plus diagnostics. FVAE uses the archive as the generating
// function; when that is impossible the score comes back NaN-flagged.
MetricsReport evaluate_model(SwVaeModel& model,
                             const DatasetArchive& archive,
                             const EvalOptions& options,
                             Rng& rng);

}  // namespace swvae
