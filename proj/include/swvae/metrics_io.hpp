#pragma once

#include <filesystem>
#include <string>

#include "swvae/metrics.hpp"

namespace swvae {

// Identifies the run a metrics report belongs to.
struct ReportProvenance {
    std::string config_digest;
    int seed = 0;
    std::string dataset;
};

// Deterministic JSON report (fixed key order; NaN scores stored as null with
// the degeneracy flag).
void write_metrics_json(const std::filesystem::path& path,
                        const MetricsReport& report,
                        const ReportProvenance& provenance);

struct LoadedMetrics {
    double mig, sap, irs, fvae, dci;
    std::string config_digest;
    int seed = 0;
    std::string dataset;
};
LoadedMetrics load_metrics_json(const std::filesystem::path& path);

}  // namespace swvae
