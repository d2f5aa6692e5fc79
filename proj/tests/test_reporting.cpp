#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "swvae/errors.hpp"
#include "swvae/reporting.hpp"

using namespace swvae;

namespace {

RunSummary sample_run(int seed, double mig_value) {
    RunSummary run;
    run.run_id = "run_s" + std::to_string(seed);
    run.dataset = "micro";
    run.variant = "sim-bce";
    run.supervision = "max-k";
    run.isf = true;
    run.igf = true;
    run.gamma = 1.0;
    run.beta = 1.0;
    run.d_z = 10;
    run.seed = seed;
    run.epochs = 30;
    run.mig = mig_value;
    run.sap = 0.1;
    run.irs = 0.5;
    run.fvae = 0.9;
    run.dci = 0.4;
    run.recon_loss = 120.5;
    run.kl_loss = 11.25;
    run.swap_term = 3.5;
    run.wall_seconds = 60.0;
    return run;
}

}  // namespace

TEST_CASE("aggregate statistics match hand-computed values") {
    const auto stats = aggregate_values({0.2, 0.4, 0.6});
    CHECK(stats.mean == doctest::Approx(0.4));
    CHECK(stats.median == doctest::Approx(0.4));
    CHECK(stats.variance == doctest::Approx(0.0266666667).epsilon(1e-6));
    CHECK(stats.min == doctest::Approx(0.2));
    CHECK(stats.max == doctest::Approx(0.6));

    const auto single = aggregate_values({0.7});
    CHECK(single.mean == doctest::Approx(0.7));
    CHECK(single.median == doctest::Approx(0.7));
    CHECK(single.variance == doctest::Approx(0.0));

    const auto with_nan = aggregate_values({0.5, std::nan(""), 0.7});
    CHECK(with_nan.count == 2);
    CHECK(with_nan.excluded == 1);
    CHECK(with_nan.mean == doctest::Approx(0.6));

    const auto empty = aggregate_values({std::nan("")});
    CHECK(empty.count == 0);
    CHECK(std::isnan(empty.mean));
}

TEST_CASE("aggregation groups seeds of one configuration") {
    const std::vector<RunSummary> runs{sample_run(0, 0.3), sample_run(1, 0.5), sample_run(2, 0.4)};
    const auto aggregates = aggregate_runs(runs);
    REQUIRE(aggregates.size() == 1);
    CHECK(aggregates[0].runs == 3);
    CHECK(aggregates[0].per_metric.at("mig").median == doctest::Approx(0.4));

    auto other = sample_run(0, 0.9);
    other.gamma = 0.0;
    auto two_groups = runs;
    two_groups.push_back(other);
    CHECK(aggregate_runs(two_groups).size() == 2);

    CHECK_THROWS_AS(aggregate_runs({}), DataError);
}

TEST_CASE("results csv round-trips losslessly") {
    test::TempDir tmp("results");
    std::vector<RunSummary> runs{sample_run(0, 1.0 / 3.0), sample_run(1, 0.123456789012345)};
    runs[1].fvae = std::nan("");
    const auto path = tmp.path() / "results.csv";
    write_results_csv(path, runs);
    const auto loaded = load_results(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].mig == runs[0].mig);
    CHECK(loaded[1].mig == runs[1].mig);
    CHECK(std::isnan(loaded[1].fvae));
    CHECK(loaded[0].run_id == runs[0].run_id);
    CHECK(loaded[1].seed == 1);
    CHECK(loaded[0].wall_seconds == runs[0].wall_seconds);

    // writing the loaded rows again reproduces the bytes
    const auto path2 = tmp.path() / "results2.csv";
    write_results_csv(path2, loaded);
    CHECK(test::read_bytes(path) == test::read_bytes(path2));
}

TEST_CASE("emit_reports writes the full artifact set") {
    test::TempDir tmp("emit");
    const std::vector<RunSummary> runs{sample_run(0, 0.3), sample_run(1, 0.5)};
    emit_reports(runs, tmp.path() / "report");
    CHECK(std::filesystem::exists(tmp.path() / "report" / "results.csv"));
    CHECK(std::filesystem::exists(tmp.path() / "report" / "table.md"));
    for (const char* metric : {"mig", "sap", "irs", "fvae", "dci"})
        CHECK(std::filesystem::exists(tmp.path() / "report" /
                                      ("box_" + std::string(metric) + ".svg")));
    // single gamma value: no sweep emitted
    CHECK_FALSE(std::filesystem::exists(tmp.path() / "report" / "gamma_sweep_mig.csv"));
}

TEST_CASE("gamma sweeps appear once gamma varies") {
    test::TempDir tmp("sweep");
    std::vector<RunSummary> runs;
    for (double gamma : {0.0, 0.01, 0.1, 1.0})
        for (int seed = 0; seed < 2; ++seed) {
            auto run = sample_run(seed, 0.2 + gamma / 2501.0);
            run.gamma = gamma;
            runs.push_back(run);
        }
    emit_reports(runs, tmp.path() / "report");
    const auto csv = tmp.path() / "report" / "gamma_sweep_mig.csv";
    REQUIRE(std::filesystem::exists(csv));
    std::ifstream in(csv);
    std::string line;
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 5);  // header + four gamma points
    CHECK(std::filesystem::exists(tmp.path() / "report" / "gamma_sweep_dci.svg"));
}

TEST_CASE("empty summary set emits a header-only csv") {
    test::TempDir tmp("empty");
    emit_reports({}, tmp.path() / "report");
    std::ifstream in(tmp.path() / "report" / "results.csv");
    std::string header, extra;
    CHECK(std::getline(in, header));
    CHECK(header.substr(0, 6) == "run_id");
    CHECK_FALSE(std::getline(in, extra));
}

TEST_CASE("trace files parse back") {
    test::TempDir tmp("trace");
    const auto path = tmp.path() / "trace.csv";
    std::ofstream out(path);
    out << "epoch,k_t,s,total,vae_l,vae_m,swap_term,recon_loss,kl_loss,disc_loss\n";
    out << "0,1,1,100.5,50,50,0.5,95,5,0\n";
    out << "1,2,3,90,45,44,1,85,5,0\n";
    out.close();
    const auto rows = load_trace_csv(path);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].total == doctest::Approx(100.5));
    CHECK(rows[1].k_t == 2);
    CHECK(rows[1].s == 3);
}

TEST_CASE("pgm writer emits the expected header and payload") {
    test::TempDir tmp("pgm");
    const auto path = tmp.path() / "grid.pgm";
    write_pgm(path, {0.0f, 1.0f, 0.5f, 0.25f}, 2, 2);
    const auto bytes = test::read_bytes(path);
    const std::string header(bytes.begin(), bytes.begin() + 9);
    CHECK(header == "P5\n2 2\n25");  // "P5\n2 2\n255\n"
    CHECK(static_cast<unsigned char>(bytes[bytes.size() - 4]) == 0);
    CHECK(static_cast<unsigned char>(bytes[bytes.size() - 3]) == 255);
    CHECK(static_cast<unsigned char>(bytes[bytes.size() - 2]) == 128);
    CHECK(static_cast<unsigned char>(bytes[bytes.size() - 1]) == 64);
}
