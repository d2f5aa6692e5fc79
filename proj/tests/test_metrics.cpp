#include <doctest.h>

#include <cmath>
#include <map>

#include "helpers.hpp"
#include "swvae/errors.hpp"
#include "swvae/factor_space.hpp"
#include "swvae/metrics.hpp"
#include "swvae/rng.hpp"

using namespace swvae;

namespace {

std::vector<int> micro_factor_rows() {
    const FactorSpace space = build_micro_space();
    std::vector<int> rows;
    rows.reserve(768 * 4);
    for (std::int64_t i = 0; i < space.total_size(); ++i)
        for (int f : space.factors_of(i)) rows.push_back(f);
    return rows;
}

RepresentationTable micro_table(int d) {
    RepresentationTable table;
    table.n = 768;
    table.d = d;
    table.v = 4;
    table.cardinalities = {3, 4, 8, 8};
    table.factors = micro_factor_rows();
    table.z.assign(static_cast<std::size_t>(table.n) * d, 0.0);
    return table;
}

// Ground-truth factors in the leading dimensions, two-level noise padding.
RepresentationTable identity_table(int d_z = 10, std::uint64_t seed = 5) {
    RepresentationTable table = micro_table(d_z);
    Rng rng(seed);
    for (int i = 0; i < table.n; ++i)
        for (int j = 0; j < d_z; ++j)
            table.z[static_cast<std::size_t>(i) * d_z + j] =
                j < 4 ? table.factor_at(i, j)
                      : (rng.uniform_below(2) ? 1.0 : -1.0);
    return table;
}

RepresentationTable noise_table(int d_z = 10, std::uint64_t seed = 6) {
    RepresentationTable table = micro_table(d_z);
    Rng rng(seed);
    for (auto& z : table.z) z = rng.normal();
    return table;
}

// Independent MI oracle: H(a) + H(b) - H(a,b) over hash-map counts, a
// different route than the implementation's joint loop.
double mi_oracle(const std::vector<int>& a, const std::vector<int>& b) {
    const double n = static_cast<double>(a.size());
    std::map<int, int> ca, cb;
    std::map<std::pair<int, int>, int> cab;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++ca[a[i]];
        ++cb[b[i]];
        ++cab[{a[i], b[i]}];
    }
    auto entropy = [&](const auto& counts) {
        double h = 0.0;
        for (const auto& [key, c] : counts) h -= (c / n) * std::log(c / n);
        return h;
    };
    return entropy(ca) + entropy(cb) - entropy(cab);
}

}  // namespace

TEST_CASE("identity representation scores near-perfect") {
    const auto table = identity_table();
    const auto mig_score = mig(table);
    CHECK_FALSE(mig_score.degenerate);
    CHECK(mig_score.value >= 0.98);
    CHECK(mig_score.value == doctest::Approx(1.0).epsilon(0.02));

    CHECK(sap(table).value >= 0.9);
    CHECK(irs(table).value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(dci(table).value >= 0.95);
}

TEST_CASE("independent noise scores near zero mig") {
    const auto table = noise_table();
    const auto score = mig(table);
    CHECK_FALSE(score.degenerate);
    CHECK(score.value <= 0.05);
}

TEST_CASE("a duplicated perfect dimension zeroes its factor's gap") {
    RepresentationTable table;
    table.n = 12;
    table.d = 3;
    table.v = 2;
    table.cardinalities = {3, 4};
    table.bins = 20;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 4; ++b) {
            table.factors.push_back(a);
            table.factors.push_back(b);
            table.z.push_back(a);
            table.z.push_back(a);  // duplicate of the factor-0 dimension
            table.z.push_back(b);
        }
    std::vector<double> mi;
    const auto score = mig(table, &mi);
    // factor 0: top two MI values are equal, so only factor 1 contributes
    CHECK(mi[0 * 2 + 0] == doctest::Approx(mi[1 * 2 + 0]).epsilon(1e-12));
    CHECK(score.value == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("mig matches the from-scratch oracle on small tables") {
    Rng rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        RepresentationTable table;
        table.n = 50 + static_cast<int>(rng.uniform_below(150));
        table.d = 1 + static_cast<int>(rng.uniform_below(4));
        table.v = 1 + static_cast<int>(rng.uniform_below(3));
        table.bins = 2 + static_cast<int>(rng.uniform_below(18));
        table.cardinalities.assign(table.v, 0);
        for (auto& c : table.cardinalities) c = 2 + static_cast<int>(rng.uniform_below(2));
        for (int i = 0; i < table.n; ++i) {
            for (int k = 0; k < table.v; ++k)
                table.factors.push_back(static_cast<int>(rng.uniform_below(table.cardinalities[k])));
            for (int j = 0; j < table.d; ++j) table.z.push_back(rng.normal());
        }

        // oracle MIG: bin exactly as specified, then use the entropy-route MI
        double expected_sum = 0.0;
        int used = 0;
        for (int k = 0; k < table.v; ++k) {
            std::vector<int> factor_col(table.n);
            for (int i = 0; i < table.n; ++i) factor_col[i] = table.factor_at(i, k);
            const double h = mi_oracle(factor_col, factor_col);
            if (h <= 1e-12) continue;
            std::vector<double> mis;
            for (int j = 0; j < table.d; ++j) {
                double lo = table.z_at(0, j), hi = lo;
                for (int i = 0; i < table.n; ++i) {
                    lo = std::min(lo, table.z_at(i, j));
                    hi = std::max(hi, table.z_at(i, j));
                }
                std::vector<int> binned(table.n, 0);
                if (hi - lo > 1e-12)
                    for (int i = 0; i < table.n; ++i)
                        binned[i] = std::min(
                            table.bins - 1,
                            static_cast<int>((table.z_at(i, j) - lo) / (hi - lo) * table.bins));
                mis.push_back(mi_oracle(binned, factor_col));
            }
            std::sort(mis.begin(), mis.end(), std::greater<>());
            expected_sum += (mis[0] - (mis.size() > 1 ? mis[1] : 0.0)) / h;
            ++used;
        }
        const auto score = mig(table);
        if (used == 0) {
            CHECK(score.degenerate);
        } else {
            CHECK(score.value ==
                  doctest::Approx(std::clamp(expected_sum / used, 0.0, 1.0)).epsilon(1e-9));
        }
    }
}

TEST_CASE("sap handles collapsed and duplicated predictors") {
    auto table = identity_table();
    for (auto& z : table.z) z = 3.14;  // all-constant representation
    const auto constant_score = sap(table);
    CHECK(constant_score.value == doctest::Approx(0.0));

    RepresentationTable dup;
    dup.n = 12;
    dup.d = 2;
    dup.v = 2;
    dup.cardinalities = {3, 4};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 4; ++b) {
            dup.factors.push_back(a);
            dup.factors.push_back(b);
            dup.z.push_back(a);
            dup.z.push_back(a);
        }
    // factor 0 is predicted equally by both dims -> contributes 0
    std::vector<double> r2;
    const auto score = sap(dup, &r2);
    CHECK(r2[0 * 2 + 0] == doctest::Approx(r2[1 * 2 + 0]).epsilon(1e-12));
    CHECK(r2[0 * 2 + 0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("irs flags entanglement and survives affine maps") {
    RepresentationTable table = micro_table(2);
    for (int i = 0; i < table.n; ++i) {
        table.z[static_cast<std::size_t>(i) * 2 + 0] =
            table.factor_at(i, 0) + table.factor_at(i, 1);  // entangled
        table.z[static_cast<std::size_t>(i) * 2 + 1] = table.factor_at(i, 2);
    }
    const auto score = irs(table);
    CHECK(score.value < 1.0);
    CHECK(score.value >= 0.0);

    RepresentationTable scaled = table;
    for (int i = 0; i < table.n; ++i) {
        scaled.z[static_cast<std::size_t>(i) * 2 + 0] =
            table.z[static_cast<std::size_t>(i) * 2 + 0] * 7.5 - 3.0;
        scaled.z[static_cast<std::size_t>(i) * 2 + 1] =
            table.z[static_cast<std::size_t>(i) * 2 + 1] * 0.01 + 42.0;
    }
    CHECK(irs(scaled).value == doctest::Approx(score.value).epsilon(1e-9));
}

TEST_CASE("dci rewards concentration and punishes uniform importance") {
    // one dimension that predicts all three factors equally: D = 0
    RepresentationTable uniform;
    uniform.n = 64;
    uniform.d = 1;
    uniform.v = 3;
    uniform.cardinalities = {4, 4, 4};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c) {
                uniform.factors.push_back(a);
                uniform.factors.push_back(b);
                uniform.factors.push_back(c);
                uniform.z.push_back(a + b + c);
            }
    CHECK(dci(uniform).value == doctest::Approx(0.0).epsilon(1e-6));

    // a single useful dimension plus dead dimensions: DCI equals its D = 1
    RepresentationTable single = micro_table(3);
    for (int i = 0; i < single.n; ++i)
        single.z[static_cast<std::size_t>(i) * 3 + 0] = single.factor_at(i, 2);
    const auto score = dci(single);
    CHECK(score.value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("fvae identity votes are perfect, noise votes are chance") {
    const FactorSpace space = build_micro_space();
    Rng noise_rng(13);
    const FactorBatchEncodeFn identity_encode = [&](const std::vector<std::vector<int>>& batch) {
        std::vector<double> z;
        for (const auto& f : batch) {
            for (int k = 0; k < 4; ++k) z.push_back(f[k]);
            for (int j = 4; j < 10; ++j) z.push_back(noise_rng.normal());
        }
        return z;
    };
    FvaeOptions options;
    Rng rng(21);
    CHECK(fvae_score(space, 10, identity_encode, options, rng).value == doctest::Approx(1.0));

    Rng pure_rng(14);
    const FactorBatchEncodeFn noise_encode = [&](const std::vector<std::vector<int>>& batch) {
        std::vector<double> z(batch.size() * 10);
        for (auto& value : z) value = pure_rng.normal();
        return z;
    };
    Rng rng2(22);
    const auto chance = fvae_score(space, 10, noise_encode, options, rng2);
    CHECK(chance.value == doctest::Approx(0.25).epsilon(0).scale(0.1));
}

TEST_CASE("fvae rejects empty vote budgets and collapsed encoders") {
    const FactorSpace space = build_micro_space();
    const FactorBatchEncodeFn constant_encode = [](const std::vector<std::vector<int>>& batch) {
        return std::vector<double>(batch.size() * 4, 1.0);
    };
    FvaeOptions options;
    options.num_votes = 0;
    Rng rng(1);
    CHECK_THROWS_AS(fvae_score(space, 4, constant_encode, options, rng), std::invalid_argument);

    options.num_votes = 50;
    const auto collapsed = fvae_score(space, 4, constant_encode, options, rng);
    CHECK(collapsed.degenerate);
    CHECK(std::isnan(collapsed.value));
}

TEST_CASE("scores stay in range or are NaN-flagged on random tables") {
    Rng rng(31);
    for (int trial = 0; trial < 1000; ++trial) {
        RepresentationTable table;
        table.n = 16 + static_cast<int>(rng.uniform_below(48));
        table.d = 1 + static_cast<int>(rng.uniform_below(6));
        table.v = 1 + static_cast<int>(rng.uniform_below(4));
        table.bins = 2 + static_cast<int>(rng.uniform_below(19));
        table.cardinalities.assign(table.v, 0);
        for (auto& c : table.cardinalities) c = 2 + static_cast<int>(rng.uniform_below(4));
        const bool collapse = rng.uniform_below(10) == 0;
        for (int i = 0; i < table.n; ++i) {
            for (int k = 0; k < table.v; ++k)
                table.factors.push_back(
                    collapse ? 0 : static_cast<int>(rng.uniform_below(table.cardinalities[k])));
            for (int j = 0; j < table.d; ++j)
                table.z.push_back(rng.uniform_below(20) == 0 ? 0.0 : rng.normal());
        }
        for (const auto& score : {mig(table), sap(table), irs(table), dci(table)}) {
            if (std::isnan(score.value))
                CHECK(score.degenerate);
            else {
                CHECK(score.value >= 0.0);
                CHECK(score.value <= 1.0);
            }
        }
    }
}

TEST_CASE("latent permutations leave every score unchanged") {
    const auto table = identity_table();
    RepresentationTable permuted = table;
    const std::vector<int> perm{7, 2, 9, 0, 4, 1, 8, 3, 6, 5};
    for (int i = 0; i < table.n; ++i)
        for (int j = 0; j < 10; ++j)
            permuted.z[static_cast<std::size_t>(i) * 10 + j] = table.z_at(i, perm[j]);

    CHECK(mig(permuted).value == doctest::Approx(mig(table).value).epsilon(1e-9));
    CHECK(sap(permuted).value == doctest::Approx(sap(table).value).epsilon(1e-9));
    CHECK(irs(permuted).value == doctest::Approx(irs(table).value).epsilon(1e-9));
    CHECK(dci(permuted).value == doctest::Approx(dci(table).value).epsilon(1e-6));
}

TEST_CASE("per-dimension affine maps leave every score unchanged") {
    const auto table = identity_table();
    RepresentationTable scaled = table;
    Rng rng(51);
    std::vector<double> scale(10), shift(10);
    for (int j = 0; j < 10; ++j) {
        scale[j] = 0.1 + 5.0 * rng.uniform01();
        shift[j] = 10.0 * rng.uniform01() - 5.0;
    }
    for (int i = 0; i < table.n; ++i)
        for (int j = 0; j < 10; ++j)
            scaled.z[static_cast<std::size_t>(i) * 10 + j] = table.z_at(i, j) * scale[j] + shift[j];

    CHECK(mig(scaled).value == doctest::Approx(mig(table).value).epsilon(1e-6));
    CHECK(sap(scaled).value == doctest::Approx(sap(table).value).epsilon(1e-6));
    CHECK(irs(scaled).value == doctest::Approx(irs(table).value).epsilon(1e-6));
    CHECK(dci(scaled).value == doctest::Approx(dci(table).value).epsilon(1e-6));
}

TEST_CASE("degenerate factors are excluded with flags") {
    auto table = identity_table();
    for (int i = 0; i < table.n; ++i) table.factors[static_cast<std::size_t>(i) * 4 + 1] = 0;
    const auto score = mig(table);
    CHECK(score.excluded == 1);
    CHECK_FALSE(score.degenerate);

    for (int i = 0; i < table.n; ++i)
        for (int k = 0; k < 4; ++k) table.factors[static_cast<std::size_t>(i) * 4 + k] = 0;
    const auto all_dead = mig(table);
    CHECK(all_dead.degenerate);
    CHECK(std::isnan(all_dead.value));
    CHECK(sap(table).degenerate);
    CHECK(irs(table).degenerate);
    CHECK(dci(table).degenerate);
}

TEST_CASE("table validation rejects malformed shapes") {
    RepresentationTable table;
    table.n = 2;
    table.d = 2;
    table.v = 1;
    table.cardinalities = {2};
    table.z = {1.0, 2.0, 3.0};  // wrong size
    table.factors = {0, 1};
    CHECK_THROWS_AS(table.validate(), DataError);
    table.z = {1.0, 2.0, 3.0, 4.0};
    table.bins = 1;
    CHECK_THROWS_AS(table.validate(), DataError);
}
