// Command-line entry point: generate-data, train, evaluate, traverse,
// report, and the ablation matrix runner.

#include <CLI11.hpp>
#include <sys/wait.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>
#include <vector>

#include "swvae/archive.hpp"
#include "swvae/config.hpp"
#include "swvae/errors.hpp"
#include "swvae/extraction.hpp"
#include "swvae/metrics_io.hpp"
#include "swvae/reporting.hpp"
#include "swvae/trainer.hpp"
#include "swvae/traversal.hpp"

namespace {

namespace fs = std::filesystem;
using namespace swvae;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitIo = 5;

std::string default_out_root() {
    const char* env = std::getenv("SWVAE_OUT");
    return env && *env ? env : "swvae_out";
}

fs::path self_executable(const char* argv0) {
    std::error_code ec;
    const fs::path exe = fs::read_symlink("/proc/self/exe", ec);
    if (!ec) return exe;
    return fs::path(argv0);
}

// Accepts either a run directory or the checkpoint file itself.
fs::path resolve_checkpoint(const std::string& arg) {
    fs::path path(arg);
    if (fs::is_directory(path)) path /= "checkpoint.bin";
    return path;
}

DatasetArchive open_dataset(const std::string& dataset) {
    if (dataset == "micro") return build_micro_archive();
    return load_archive(dataset);
}

// Train-style flag set shared by train and ablate; values are applied onto
// the config in command-line order so flags override the file.
struct ConfigCli {
    std::string config_file;
    KeyValues overrides;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_file, "flat key=value config file");
        add(cmd, "--dataset", "dataset", "archive path or 'micro'");
        add(cmd, "--variant", "variant", "objective: sim-mse | sim-bce | gan");
        add(cmd, "--supervision", "supervision", "pair signal: max-k | exact-k");
        add(cmd, "--k-max", "k_max", "maximum number of differing factors");
        add(cmd, "--gamma", "gamma", "swap-comparison weight");
        add(cmd, "--beta", "beta", "KL weight of the VAE loss");
        add(cmd, "--d-z", "d_z", "latent dimension");
        add(cmd, "--epochs", "epochs", "training epochs");
        add(cmd, "--batch-size", "batch_size", "pairs per step");
        add(cmd, "--learning-rate", "learning_rate", "optimizer step size");
        add(cmd, "--seed", "seed", "run seed");
        add(cmd, "--isf", "isf", "swap-count warm-up schedule (true/false)");
        add(cmd, "--igf", "igf", "pair-difficulty schedule (true/false)");
        add(cmd, "--kl-mode", "kl_mode", "per-dimension KL form: standard | paper");
        add(cmd, "--out", "out_dir", "output directory for run artifacts");
        add(cmd, "--conv-channels", "conv_channels", "comma-separated conv widths");
        add(cmd, "--dense-units", "dense_units", "dense layer width");
        add(cmd, "--disc-positives", "disc_positives",
            "discriminator positive pairs: paired | none");
        add(cmd, "--threads", "threads", "intra-run torch threads");
        add(cmd, "--pairs-per-epoch", "pairs_per_epoch", "pairs sampled per epoch (0: dataset size)");
    }

    ExperimentConfig build() const {
        ExperimentConfig config;
        if (!config_file.empty()) config = load_config_file(config_file);
        for (const auto& [key, value] : overrides) apply_config_entry(config, key, value);
        return config;
    }

  private:
    void add(CLI::App* cmd, const std::string& flag, std::string key, const std::string& help) {
        cmd->add_option_function<std::string>(
            flag, [this, key](const std::string& value) { overrides.emplace_back(key, value); },
            help);
    }
};

int run_train(const ConfigCli& cli, const std::string& resume) {
    if (!resume.empty()) {
        auto trainer = Trainer::from_checkpoint(resolve_checkpoint(resume));
        const auto artifacts = trainer->train();
        std::cout << "resumed run complete: " << artifacts.out_dir.string() << "\n";
        return kExitOk;
    }
    ExperimentConfig config = cli.build();
    if (config.out_dir.empty()) {
        config.out_dir = (fs::path(default_out_root()) /
                          ("run_" + config_digest(config) + "_s" + std::to_string(config.seed)))
                             .string();
    }
    validate_config(config);
    Trainer trainer(config);
    const auto artifacts = trainer.train();
    std::cout << "run complete: " << artifacts.out_dir.string() << " ("
              << artifacts.trace.size() << " epochs, " << artifacts.wall_seconds << "s)\n";
    return kExitOk;
}

int run_evaluate(const std::string& checkpoint,
                 const std::string& data,
                 std::string out,
                 std::int64_t sample_n,
                 int bins,
                 int votes,
                 int samples_per_vote,
                 bool no_fvae,
                 std::uint64_t eval_seed) {
    const fs::path checkpoint_path = resolve_checkpoint(checkpoint);
    auto trainer = Trainer::from_checkpoint(checkpoint_path);
    if (out.empty()) out = (checkpoint_path.parent_path() / "metrics.json").string();

    EvalOptions options;
    options.sample_n = sample_n;
    options.bins = bins;
    options.fvae.num_votes = votes;
    options.fvae.samples_per_vote = samples_per_vote;
    options.run_fvae = !no_fvae;

    Rng rng(eval_seed);
    MetricsReport report;
    if (data.empty() || data == trainer->config().dataset) {
        report = evaluate_model(trainer->model(), trainer->archive(), options, rng);
    } else {
        const DatasetArchive archive = open_dataset(data);
        report = evaluate_model(trainer->model(), archive, options, rng);
    }

    ReportProvenance provenance;
    provenance.config_digest = config_digest(trainer->config());
    provenance.seed = trainer->config().seed;
    provenance.dataset = data.empty() ? trainer->config().dataset : data;
    write_metrics_json(out, report, provenance);
    std::cout << "metrics written: " << out << "\n";
    return kExitOk;
}

int run_traverse(const std::string& checkpoint,
                 const std::string& out_dir,
                 const std::string& data,
                 std::vector<std::int64_t> anchors,
                 int steps,
                 double range) {
    auto trainer = Trainer::from_checkpoint(resolve_checkpoint(checkpoint));
    fs::create_directories(out_dir);
    if (anchors.empty()) anchors.push_back(0);

    const DatasetArchive* archive = &trainer->archive();
    std::optional<DatasetArchive> override_archive;
    if (!data.empty() && data != trainer->config().dataset) {
        override_archive = open_dataset(data);
        archive = &*override_archive;
    }
    for (std::int64_t anchor : anchors) {
        const Observation obs = archive->observation(anchor);
        const TraversalGrid grid = traversal_grid(trainer->model(), obs, range, steps);
        const fs::path path =
            fs::path(out_dir) / ("traversal_anchor" + std::to_string(anchor) + ".pgm");
        write_pgm(path, grid.pixels, grid.height, grid.width);
        std::cout << "traversal grid written: " << path.string() << "\n";
    }
    return kExitOk;
}

int run_report(const std::string& runs_dir, const std::string& out_dir) {
    const auto summaries = collect_run_summaries(runs_dir);
    emit_reports(summaries, out_dir);
    std::cout << "report written: " << out_dir << " (" << summaries.size() << " runs)\n";
    return kExitOk;
}

int run_generate_data(const std::string& out) {
    const DatasetArchive archive = build_micro_archive();
    save_archive(archive, out);
    std::cout << "micro archive written: " << out << " (" << archive.count() << " images)\n";
    return kExitOk;
}

struct StrategyChoice {
    std::string name;
    bool isf;
    bool igf;
};

StrategyChoice parse_strategy(const std::string& name) {
    if (name == "none") return {name, false, false};
    if (name == "igf") return {name, false, true};
    if (name == "isf") return {name, true, false};
    if (name == "igf+isf" || name == "isf+igf") return {"igf+isf", true, true};
    throw ConfigError("unknown strategy: " + name + " (use none, igf, isf, igf+isf)");
}

int run_ablate(const ConfigCli& cli,
               const fs::path& exe,
               const std::string& out_dir,
               const std::string& strategies_csv,
               const std::string& gammas_csv,
               int seeds,
               int jobs) {
    if (seeds < 1) throw ConfigError("--seeds must be >= 1");
    if (jobs < 1) throw ConfigError("--jobs must be >= 1");
    const ExperimentConfig base = cli.build();

    std::vector<StrategyChoice> strategies;
    if (!strategies_csv.empty()) {
        std::stringstream ss(strategies_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) strategies.push_back(parse_strategy(tok));
    } else {
        strategies.push_back({base.isf && base.igf ? "igf+isf"
                              : base.igf           ? "igf"
                              : base.isf           ? "isf"
                                                   : "none",
                              base.isf, base.igf});
    }
    std::vector<double> gammas;
    if (!gammas_csv.empty()) {
        std::stringstream ss(gammas_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) gammas.push_back(std::stod(tok));
    } else {
        gammas.push_back(base.gamma);
    }

    const fs::path runs_dir = fs::path(out_dir) / "runs";
    fs::create_directories(runs_dir);

    std::vector<std::string> commands;
    for (const auto& strategy : strategies)
        for (double gamma : gammas)
            for (int i = 0; i < seeds; ++i) {
                ExperimentConfig config = base;
                config.isf = strategy.isf;
                config.igf = strategy.igf;
                config.gamma = gamma;
                config.seed = base.seed + i;
                char gbuf[32];
                std::snprintf(gbuf, sizeof(gbuf), "%g", gamma);
                const std::string run_id = strategy.name + "_g" + gbuf + "_seed" +
                                           std::to_string(config.seed);
                const fs::path dir = runs_dir / run_id;
                fs::create_directories(dir);
                config.out_dir = dir.string();
                validate_config(config);
                save_config(config, dir / "run.cfg");
                commands.push_back("'" + exe.string() + "' train --config '" +
                                   (dir / "run.cfg").string() + "' && '" + exe.string() +
                                   "' evaluate --checkpoint '" + dir.string() + "'");
            }

    std::atomic<std::size_t> next{0};
    std::atomic<int> first_failure{0};
    auto worker = [&] {
        while (true) {
            const std::size_t index = next.fetch_add(1);
            if (index >= commands.size()) return;
            const int status = std::system(commands[index].c_str());
            const int code = WIFEXITED(status) ? WEXITSTATUS(status) : 1;
            if (code != 0) {
                int expected = 0;
                first_failure.compare_exchange_strong(expected, code);
                std::cerr << "worker failed (exit " << code << "): " << commands[index] << "\n";
            }
        }
    };
    std::vector<std::thread> pool;
    for (int j = 0; j < std::min<int>(jobs, static_cast<int>(commands.size())); ++j)
        pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_failure != 0) return first_failure;

    const auto summaries = collect_run_summaries(runs_dir);
    emit_reports(summaries, out_dir);
    std::cout << "ablation complete: " << commands.size() << " runs, report in " << out_dir
              << "\n";
    return kExitOk;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"SW-VAE: weakly supervised disentanglement via latent factor swapping"};
    app.require_subcommand(1);
    const fs::path exe = self_executable(argv[0]);

    auto* gen = app.add_subcommand("generate-data", "render the micro dataset to an archive");
    std::string gen_out = "micro.swvd";
    gen->add_option("--out", gen_out, "output archive path");

    auto* train = app.add_subcommand("train", "train a model from a config and/or flags");
    ConfigCli train_cli;
    train_cli.attach(train);
    std::string resume;
    train->add_option("--resume", resume, "resume from a run directory or checkpoint.bin");

    auto* evaluate = app.add_subcommand("evaluate", "compute the disentanglement metric suite");
    std::string eval_checkpoint, eval_data, eval_out;
    std::int64_t eval_sample_n = 0;
    int eval_bins = 20, eval_votes = 800, eval_spv = 64;
    bool eval_no_fvae = false;
    std::uint64_t eval_seed = 1234;
    evaluate->add_option("--checkpoint", eval_checkpoint, "run directory or checkpoint.bin")
        ->required();
    evaluate->add_option("--data", eval_data, "archive path or 'micro' (default: training dataset)");
    evaluate->add_option("--out", eval_out, "metrics json path (default: beside checkpoint)");
    evaluate->add_option("--sample-n", eval_sample_n, "rows to extract (0: all)");
    evaluate->add_option("--bins", eval_bins, "discretization bins");
    evaluate->add_option("--votes", eval_votes, "majority-vote count");
    evaluate->add_option("--samples-per-vote", eval_spv, "batch size per vote");
    evaluate->add_flag("--no-fvae", eval_no_fvae, "skip the vote-based score");
    evaluate->add_option("--eval-seed", eval_seed, "seed of the evaluation streams");

    auto* traverse = app.add_subcommand("traverse", "decode latent traversal grids");
    std::string trav_checkpoint, trav_out = "traversals", trav_data;
    std::vector<std::int64_t> trav_anchors;
    int trav_steps = 9;
    double trav_range = 2.0;
    traverse->add_option("--checkpoint", trav_checkpoint, "run directory or checkpoint.bin")
        ->required();
    traverse->add_option("--out", trav_out, "output directory for grid images");
    traverse->add_option("--data", trav_data, "anchor archive (default: training dataset)");
    traverse->add_option("--anchor", trav_anchors, "anchor image indices");
    traverse->add_option("--steps", trav_steps, "sweep steps per dimension");
    traverse->add_option("--range", trav_range, "sweep extent [-range, range]");

    auto* report = app.add_subcommand("report", "aggregate finished runs into tables and plots");
    std::string report_runs, report_out = "report";
    report->add_option("--runs", report_runs, "directory containing run subdirectories")
        ->required();
    report->add_option("--out", report_out, "report output directory");

    auto* ablate = app.add_subcommand(
        "ablate", "run a strategy/gamma/seed matrix end to end and aggregate it");
    ConfigCli ablate_cli;
    ablate_cli.attach(ablate);
    std::string ablate_out = "ablation", ablate_strategies, ablate_gammas;
    int ablate_seeds = 3, ablate_jobs = 1;
    ablate->add_option("--out", ablate_out, "ablation output root");
    ablate->add_option("--strategies", ablate_strategies,
                       "comma list of none, igf, isf, igf+isf");
    ablate->add_option("--gammas", ablate_gammas, "comma list of gamma values");
    ablate->add_option("--seeds", ablate_seeds, "seeds per configuration");
    ablate->add_option("--jobs", ablate_jobs, "parallel worker processes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints the requested help text
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: config: " << e.get_name() << ": " << e.what() << "\n";
        return kExitConfig;
    }

    if (gen->parsed()) return run_generate_data(gen_out);
    if (train->parsed()) return run_train(train_cli, resume);
    if (evaluate->parsed())
        return run_evaluate(eval_checkpoint, eval_data, eval_out, eval_sample_n, eval_bins,
                            eval_votes, eval_spv, eval_no_fvae, eval_seed);
    if (traverse->parsed())
        return run_traverse(trav_checkpoint, trav_out, trav_data, trav_anchors, trav_steps,
                            trav_range);
    if (report->parsed()) return run_report(report_runs, report_out);
    if (ablate->parsed())
        return run_ablate(ablate_cli, exe, ablate_out, ablate_strategies, ablate_gammas,
                          ablate_seeds, ablate_jobs);
    return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const swvae::ConfigError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return kExitConfig;
    } catch (const swvae::DataError& e) {
        std::cerr << "error: data: " << e.what() << "\n";
        return kExitData;
    } catch (const swvae::NumericError& e) {
        std::cerr << "error: numeric: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const swvae::IoError& e) {
        std::cerr << "error: io: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
}
