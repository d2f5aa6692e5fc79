#include "swvae/reporting.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "swvae/config.hpp"
#include "swvae/errors.hpp"
#include "swvae/metrics_io.hpp"

namespace swvae {

namespace {

const char* kMetricNames[] = {"mig", "sap", "irs", "fvae", "dci"};

double metric_of(const RunSummary& run, const std::string& name) {
    if (name == "mig") return run.mig;
    if (name == "sap") return run.sap;
    if (name == "irs") return run.irs;
    if (name == "fvae") return run.fvae;
    return run.dci;
}

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

// Linear-interpolation quantile on sorted values.
double quantile_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double pos = p * (n - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = pos - lo;
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

}  // namespace

std::string config_key(const RunSummary& run) {
    std::ostringstream key;
    key << run.dataset << '|' << run.variant << '|' << run.supervision << '|'
        << (run.isf ? "isf" : "-") << '|' << (run.igf ? "igf" : "-") << '|'
        << "g=" << fmt_double(run.gamma) << '|' << "b=" << fmt_double(run.beta) << '|'
        << "dz=" << run.d_z << '|' << "ep=" << run.epochs;
    return key.str();
}

AggregateStats aggregate_values(std::vector<double> values) {
    AggregateStats stats;
    std::vector<double> usable;
    for (double v : values) {
        if (std::isnan(v))
            ++stats.excluded;
        else
            usable.push_back(v);
    }
    stats.count = static_cast<int>(usable.size());
    if (usable.empty()) {
        stats.mean = stats.median = stats.variance = stats.q1 = stats.q3 = stats.min = stats.max =
            std::numeric_limits<double>::quiet_NaN();
        return stats;
    }
    std::sort(usable.begin(), usable.end());
    for (double v : usable) stats.mean += v;
    stats.mean /= stats.count;
    for (double v : usable) stats.variance += (v - stats.mean) * (v - stats.mean);
    stats.variance /= stats.count;
    stats.median = quantile_sorted(usable, 0.5);
    stats.q1 = quantile_sorted(usable, 0.25);
    stats.q3 = quantile_sorted(usable, 0.75);
    stats.min = usable.front();
    stats.max = usable.back();
    return stats;
}

std::vector<ConfigAggregate> aggregate_runs(const std::vector<RunSummary>& summaries) {
    if (summaries.empty()) throw DataError("no run summaries to aggregate");
    std::vector<ConfigAggregate> out;
    std::map<std::string, std::size_t> index;
    for (const auto& run : summaries) {
        const std::string key = config_key(run);
        auto [it, inserted] = index.emplace(key, out.size());
        if (inserted) {
            ConfigAggregate agg;
            agg.key = key;
            agg.representative = run;
            out.push_back(std::move(agg));
        }
        ++out[it->second].runs;
    }
    for (auto& agg : out) {
        for (const char* metric : kMetricNames) {
            std::vector<double> values;
            for (const auto& run : summaries)
                if (config_key(run) == agg.key) values.push_back(metric_of(run, metric));
            agg.per_metric[metric] = aggregate_values(std::move(values));
        }
    }
    return out;
}

void write_results_csv(const std::filesystem::path& path, const std::vector<RunSummary>& summaries) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "run_id,dataset,variant,supervision,isf,igf,gamma,beta,d_z,seed,epochs,"
           "mig,sap,irs,fvae,dci,recon_loss,kl_loss,swap_term,wall_seconds\n";
    for (const auto& r : summaries) {
        out << r.run_id << ',' << r.dataset << ',' << r.variant << ',' << r.supervision << ','
            << (r.isf ? 1 : 0) << ',' << (r.igf ? 1 : 0) << ',' << fmt_double(r.gamma) << ','
            << fmt_double(r.beta) << ',' << r.d_z << ',' << r.seed << ',' << r.epochs << ','
            << fmt_double(r.mig) << ',' << fmt_double(r.sap) << ',' << fmt_double(r.irs) << ','
            << fmt_double(r.fvae) << ',' << fmt_double(r.dci) << ',' << fmt_double(r.recon_loss)
            << ',' << fmt_double(r.kl_loss) << ',' << fmt_double(r.swap_term) << ','
            << fmt_double(r.wall_seconds) << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

std::vector<RunSummary> load_results(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("results file has no header");
    std::vector<RunSummary> summaries;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 20) throw DataError("results row has wrong column count");
        RunSummary r;
        r.run_id = f[0];
        r.dataset = f[1];
        r.variant = f[2];
        r.supervision = f[3];
        r.isf = f[4] == "1";
        r.igf = f[5] == "1";
        r.gamma = std::stod(f[6]);
        r.beta = std::stod(f[7]);
        r.d_z = std::stoi(f[8]);
        r.seed = std::stoi(f[9]);
        r.epochs = std::stoi(f[10]);
        r.mig = std::stod(f[11]);
        r.sap = std::stod(f[12]);
        r.irs = std::stod(f[13]);
        r.fvae = std::stod(f[14]);
        r.dci = std::stod(f[15]);
        r.recon_loss = std::stod(f[16]);
        r.kl_loss = std::stod(f[17]);
        r.swap_term = std::stod(f[18]);
        r.wall_seconds = std::stod(f[19]);
        summaries.push_back(std::move(r));
    }
    return summaries;
}

void write_table_markdown(const std::filesystem::path& path,
                          const std::vector<ConfigAggregate>& aggregates) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "| Variant | Supervision | ISF | IGF | gamma | MIG | SAP | IRS | FVAE | DCI | runs |\n";
    out << "|---|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& agg : aggregates) {
        const auto& r = agg.representative;
        out << "| " << r.variant << " | " << r.supervision << " | " << (r.isf ? "x" : " ")
            << " | " << (r.igf ? "x" : " ") << " | " << fmt_short(r.gamma);
        for (const char* metric : kMetricNames) {
            const auto& s = agg.per_metric.at(metric);
            out << " | " << fmt_short(s.median);
            if (s.excluded > 0) out << " (" << s.excluded << " excluded)";
        }
        out << " | " << agg.runs << " |\n";
    }
    out << "\nMedians over seeds; NaN-flagged scores are excluded with counts shown.\n";
}

namespace {

struct SvgCanvas {
    std::ostringstream body;
    int width, height;
    SvgCanvas(int w, int h) : width(w), height(h) {}
    void line(double x1, double y1, double x2, double y2, const char* color = "#333") {
        body << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2 << "\" y2=\"" << y2
             << "\" stroke=\"" << color << "\"/>\n";
    }
    void rect(double x, double y, double w, double h, const char* fill) {
        body << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w << "\" height=\"" << h
             << "\" fill=\"" << fill << "\" stroke=\"#333\"/>\n";
    }
    void text(double x, double y, const std::string& s, int size = 11) {
        body << "<text x=\"" << x << "\" y=\"" << y << "\" font-size=\"" << size
             << "\" font-family=\"sans-serif\">" << s << "</text>\n";
    }
    void save(const std::filesystem::path& path) const {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write " + path.string());
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
            << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << body.str() << "</svg>\n";
    }
};

}  // namespace

void write_box_plot_svg(const std::filesystem::path& path,
                        const std::string& metric,
                        const std::vector<ConfigAggregate>& aggregates) {
    const int n = static_cast<int>(aggregates.size());
    const int plot_w = std::max(320, 90 * n + 80);
    SvgCanvas svg(plot_w, 300);
    const double x0 = 50, y0 = 250, y1 = 30;
    svg.line(x0, y0, plot_w - 20, y0);
    svg.line(x0, y0, x0, y1);
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = tick / 4.0;
        const double y = y0 - v * (y0 - y1);
        svg.line(x0 - 4, y, x0, y);
        svg.text(8, y + 4, fmt_short(v).substr(0, 4));
    }
    svg.text(plot_w / 2 - 20, 16, metric, 14);
    auto ymap = [&](double v) { return y0 - std::clamp(v, 0.0, 1.0) * (y0 - y1); };
    for (int i = 0; i < n; ++i) {
        const auto& stats = aggregates[i].per_metric.at(metric);
        const double cx = x0 + 50 + 90.0 * i;
        if (stats.count > 0) {
            svg.line(cx, ymap(stats.min), cx, ymap(stats.q1));
            svg.line(cx, ymap(stats.q3), cx, ymap(stats.max));
            svg.rect(cx - 25, ymap(stats.q3), 50, std::max(1.0, ymap(stats.q1) - ymap(stats.q3)),
                     "#9ecae1");
            svg.line(cx - 25, ymap(stats.median), cx + 25, ymap(stats.median), "#08306b");
        }
        const auto& r = aggregates[i].representative;
        std::string label = r.supervision + (r.igf ? "+igf" : "") + (r.isf ? "+isf" : "");
        svg.text(cx - 30, y0 + 16, label, 9);
        svg.text(cx - 30, y0 + 28, "g=" + fmt_short(r.gamma).substr(0, 4), 9);
    }
    svg.save(path);
}

void write_gamma_sweep(const std::filesystem::path& outdir,
                       const std::vector<RunSummary>& summaries) {
    // Group by gamma; emit one curve file per metric over the sorted gammas.
    std::set<double> gammas;
    for (const auto& r : summaries) gammas.insert(r.gamma);
    if (gammas.size() < 2) return;

    for (const char* metric : kMetricNames) {
        std::vector<std::pair<double, AggregateStats>> curve;
        for (double g : gammas) {
            std::vector<double> values;
            for (const auto& r : summaries)
                if (r.gamma == g) values.push_back(metric_of(r, metric));
            curve.emplace_back(g, aggregate_values(std::move(values)));
        }
        std::ofstream csv(outdir / ("gamma_sweep_" + std::string(metric) + ".csv"));
        if (!csv) throw IoError("cannot write gamma sweep csv");
        csv << "gamma,median,mean,variance,count\n";
        for (const auto& [g, stats] : curve)
            csv << fmt_double(g) << ',' << fmt_double(stats.median) << ',' << fmt_double(stats.mean)
                << ',' << fmt_double(stats.variance) << ',' << stats.count << '\n';

        SvgCanvas svg(420, 300);
        const double x0 = 50, y0 = 250, y1 = 30, x1 = 390;
        svg.line(x0, y0, x1, y0);
        svg.line(x0, y0, x0, y1);
        svg.text(180, 16, std::string(metric) + " vs gamma", 13);
        const int m = static_cast<int>(curve.size());
        for (int i = 0; i < m; ++i) {
            const double x = x0 + (m == 1 ? 0 : (x1 - x0) * i / (m - 1));
            const double y = y0 - std::clamp(curve[i].second.median, 0.0, 1.0) * (y0 - y1);
            if (i > 0) {
                const double px = x0 + (x1 - x0) * (i - 1) / (m - 1);
                const double py =
                    y0 - std::clamp(curve[i - 1].second.median, 0.0, 1.0) * (y0 - y1);
                svg.line(px, py, x, y, "#08519c");
            }
            svg.rect(x - 2, y - 2, 4, 4, "#08519c");
            svg.text(x - 14, y0 + 16, fmt_short(curve[i].first).substr(0, 5), 9);
        }
        svg.save(outdir / ("gamma_sweep_" + std::string(metric) + ".svg"));
    }
}

void emit_reports(const std::vector<RunSummary>& summaries, const std::filesystem::path& outdir) {
    std::filesystem::create_directories(outdir);
    write_results_csv(outdir / "results.csv", summaries);
    if (summaries.empty()) {
        std::ofstream table(outdir / "table.md");
        table << "| Variant | Supervision | ISF | IGF | gamma | MIG | SAP | IRS | FVAE | DCI | runs |\n";
        table << "|---|---|---|---|---|---|---|---|---|---|---|\n";
        return;
    }
    const auto aggregates = aggregate_runs(summaries);
    write_table_markdown(outdir / "table.md", aggregates);
    for (const char* metric : kMetricNames)
        write_box_plot_svg(outdir / ("box_" + std::string(metric) + ".svg"), metric, aggregates);
    write_gamma_sweep(outdir, summaries);
}

std::vector<TraceRow> load_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("trace file has no header");
    std::vector<TraceRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 10) throw DataError("trace row has wrong column count");
        TraceRow r;
        r.epoch = std::stoi(f[0]);
        r.k_t = std::stoi(f[1]);
        r.s = std::stoi(f[2]);
        r.total = std::stod(f[3]);
        r.vae_l = std::stod(f[4]);
        r.vae_m = std::stod(f[5]);
        r.swap_term = std::stod(f[6]);
        r.recon_loss = std::stod(f[7]);
        r.kl_loss = std::stod(f[8]);
        r.disc_loss = std::stod(f[9]);
        rows.push_back(r);
    }
    return rows;
}

RunSummary summarize_run_dir(const std::filesystem::path& run_dir) {
    const auto config = load_config_file(run_dir / "config.snapshot");
    const auto metrics = load_metrics_json(run_dir / "metrics.json");
    const auto trace = load_trace_csv(run_dir / "trace.csv");
    if (trace.empty()) throw DataError("empty trace in " + run_dir.string());

    RunSummary summary;
    summary.run_id = run_dir.filename().string();
    summary.dataset = config.dataset;
    summary.variant = config.variant;
    summary.supervision = config.supervision;
    summary.isf = config.isf;
    summary.igf = config.igf;
    summary.gamma = config.gamma;
    summary.beta = config.beta;
    summary.d_z = config.d_z;
    summary.seed = config.seed;
    summary.epochs = config.epochs;
    summary.mig = metrics.mig;
    summary.sap = metrics.sap;
    summary.irs = metrics.irs;
    summary.fvae = metrics.fvae;
    summary.dci = metrics.dci;
    summary.recon_loss = trace.back().recon_loss;
    summary.kl_loss = trace.back().kl_loss;
    summary.swap_term = trace.back().swap_term;

    const auto manifest_path = run_dir / "manifest.json";
    if (std::filesystem::exists(manifest_path)) {
        std::ifstream in(manifest_path);
        nlohmann::json manifest;
        try {
            in >> manifest;
            if (manifest.contains("wall_seconds"))
                summary.wall_seconds = manifest["wall_seconds"].get<double>();
        } catch (const nlohmann::json::exception&) {
            // wall-clock metadata is best-effort
        }
    }
    return summary;
}

std::vector<RunSummary> collect_run_summaries(const std::filesystem::path& runs_dir) {
    if (!std::filesystem::is_directory(runs_dir))
        throw IoError("runs directory does not exist: " + runs_dir.string());
    std::vector<std::filesystem::path> dirs;
    for (const auto& entry : std::filesystem::directory_iterator(runs_dir))
        if (entry.is_directory() && std::filesystem::exists(entry.path() / "metrics.json"))
            dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    std::vector<RunSummary> summaries;
    for (const auto& dir : dirs) summaries.push_back(summarize_run_dir(dir));
    return summaries;
}

void write_pgm(const std::filesystem::path& path,
               const std::vector<float>& pixels,
               int height,
               int width) {
    if (pixels.size() != static_cast<std::size_t>(height) * width)
        throw IoError("pgm pixel buffer does not match dimensions");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P5\n" << width << ' ' << height << "\n255\n";
    for (float p : pixels) {
        const int value = std::clamp(static_cast<int>(std::lround(p * 255.0f)), 0, 255);
        out.put(static_cast<char>(value));
    }
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace swvae
