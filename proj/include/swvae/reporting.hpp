#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace swvae {

// One evaluated run: configuration, scores, and final loss components.
struct RunSummary {
    std::string run_id;
    std::string dataset;
    std::string variant;
    std::string supervision;
    bool isf = false;
    bool igf = false;
    double gamma = 0.0;
    double beta = 1.0;
    int d_z = 0;
    int seed = 0;
    int epochs = 0;
    double mig = 0.0, sap = 0.0, irs = 0.0, fvae = 0.0, dci = 0.0;
    double recon_loss = 0.0, kl_loss = 0.0, swap_term = 0.0;
    double wall_seconds = 0.0;
};

// Groups seeds of one configuration.
std::string config_key(const RunSummary& run);

struct AggregateStats {
    int count = 0;     // values used
    int excluded = 0;  // NaN-flagged scores dropped
    double mean = 0.0;
    double median = 0.0;
    double variance = 0.0;  // mean squared deviation over the runs
    double q1 = 0.0, q3 = 0.0;
    double min = 0.0, max = 0.0;
};

AggregateStats aggregate_values(std::vector<double> values);

struct ConfigAggregate {
    std::string key;
    RunSummary representative;  // config fields of the group
    int runs = 0;
    std::map<std::string, AggregateStats> per_metric;  // mig/sap/irs/fvae/dci
};

std::vector<ConfigAggregate> aggregate_runs(const std::vector<RunSummary>& summaries);

// Raw per-run rows with the fixed column order; round-trips losslessly.
void write_results_csv(const std::filesystem::path& path, const std::vector<RunSummary>& summaries);
std::vector<RunSummary> load_results(const std::filesystem::path& path);

// Aggregated per-config table in the training-strategy-ablation layout.
void write_table_markdown(const std::filesystem::path& path,
                          const std::vector<ConfigAggregate>& aggregates);

// Best-effort plot emitters (deterministic SVG text).
void write_box_plot_svg(const std::filesystem::path& path,
                        const std::string& metric,
                        const std::vector<ConfigAggregate>& aggregates);
void write_gamma_sweep(const std::filesystem::path& outdir,
                       const std::vector<RunSummary>& summaries);

// Writes results.csv, table.md, per-metric box plots, and gamma-sweep curves
// when the summaries vary gamma.
void emit_reports(const std::vector<RunSummary>& summaries, const std::filesystem::path& outdir);

// Grayscale image writer used for traversal grids (binary PGM, values in [0,1]).
void write_pgm(const std::filesystem::path& path,
               const std::vector<float>& pixels,
               int height,
               int width);

// Parsed row of a training trace.
struct TraceRow {
    int epoch = 0, k_t = 0, s = 0;
    double total = 0.0, vae_l = 0.0, vae_m = 0.0, swap_term = 0.0;
    double recon_loss = 0.0, kl_loss = 0.0, disc_loss = 0.0;
};
std::vector<TraceRow> load_trace_csv(const std::filesystem::path& path);

// Builds a RunSummary from a run directory containing config.snapshot,
// trace.csv, metrics.json and manifest.json.
RunSummary summarize_run_dir(const std::filesystem::path& run_dir);

// Collects every subdirectory of `runs_dir` that looks like a finished run.
std::vector<RunSummary> collect_run_summaries(const std::filesystem::path& runs_dir);

}  // namespace swvae
