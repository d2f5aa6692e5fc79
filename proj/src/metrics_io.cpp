#include "swvae/metrics_io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

#include "swvae/errors.hpp"

namespace swvae {

namespace {

nlohmann::ordered_json metric_json(const MetricValue& value) {
    nlohmann::ordered_json j;
    if (std::isnan(value.value))
        j["value"] = nullptr;
    else
        j["value"] = value.value;
    j["degenerate"] = value.degenerate;
    j["excluded_factors"] = value.excluded;
    return j;
}

double metric_from_json(const nlohmann::json& j) {
    if (j.at("value").is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.at("value").get<double>();
}

}  // namespace

void write_metrics_json(const std::filesystem::path& path,
                        const MetricsReport& report,
                        const ReportProvenance& provenance) {
    nlohmann::ordered_json j;
    j["config_digest"] = provenance.config_digest;
    j["seed"] = provenance.seed;
    j["dataset"] = provenance.dataset;
    j["scores"] = {{"mig", metric_json(report.mig)},
                   {"sap", metric_json(report.sap)},
                   {"irs", metric_json(report.irs)},
                   {"fvae", metric_json(report.fvae)},
                   {"dci", metric_json(report.dci)}};
    j["diagnostics"] = {{"d_z", report.d},
                        {"num_factors", report.v},
                        {"mi_matrix", report.mi_matrix},
                        {"sap_matrix", report.sap_matrix},
                        {"dci_importance", report.dci_importance}};
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

LoadedMetrics load_metrics_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("corrupt metrics file " + path.string() + ": " + e.what());
    }
    LoadedMetrics m{};
    const auto& scores = j.at("scores");
    m.mig = metric_from_json(scores.at("mig"));
    m.sap = metric_from_json(scores.at("sap"));
    m.irs = metric_from_json(scores.at("irs"));
    m.fvae = metric_from_json(scores.at("fvae"));
    m.dci = metric_from_json(scores.at("dci"));
    m.config_digest = j.at("config_digest").get<std::string>();
    m.seed = j.at("seed").get<int>();
    m.dataset = j.at("dataset").get<std::string>();
    return m;
}

}  // namespace swvae
