#include "swvae/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "swvae/errors.hpp"

namespace swvae {

namespace {

constexpr double kEps = 1e-12;

struct TopTwo {
    double first = -std::numeric_limits<double>::infinity();
    double second = -std::numeric_limits<double>::infinity();
    int first_index = -1;
    void offer(int index, double value) {
        if (value > first) {
            second = first;
            first = value;
            first_index = index;
        } else if (value > second) {
            second = value;
        }
    }
};

// Equal-width binning over the empirical range; a constant dimension
// collapses into bin 0.
std::vector<int> discretize_dim(const RepresentationTable& table, int dim) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int i = 0; i < table.n; ++i) {
        lo = std::min(lo, table.z_at(i, dim));
        hi = std::max(hi, table.z_at(i, dim));
    }
    std::vector<int> binned(table.n, 0);
    const double range = hi - lo;
    if (range <= kEps) return binned;
    for (int i = 0; i < table.n; ++i) {
        int b = static_cast<int>((table.z_at(i, dim) - lo) / range * table.bins);
        binned[i] = std::clamp(b, 0, table.bins - 1);
    }
    return binned;
}

double entropy_from_counts(const std::vector<double>& counts, double total) {
    double h = 0.0;
    for (double c : counts)
        if (c > 0.0) h -= (c / total) * std::log(c / total);
    return h;
}

double discrete_mi(const std::vector<int>& a, int a_card, const std::vector<int>& b, int b_card) {
    const int n = static_cast<int>(a.size());
    std::vector<double> joint(static_cast<std::size_t>(a_card) * b_card, 0.0);
    std::vector<double> pa(a_card, 0.0), pb(b_card, 0.0);
    for (int i = 0; i < n; ++i) {
        joint[static_cast<std::size_t>(a[i]) * b_card + b[i]] += 1.0;
        pa[a[i]] += 1.0;
        pb[b[i]] += 1.0;
    }
    double mi = 0.0;
    for (int x = 0; x < a_card; ++x)
        for (int y = 0; y < b_card; ++y) {
            const double j = joint[static_cast<std::size_t>(x) * b_card + y];
            if (j > 0.0) mi += (j / n) * std::log(j * n / (pa[x] * pb[y]));
        }
    return std::max(mi, 0.0);
}

std::vector<double> factor_entropies(const RepresentationTable& table) {
    std::vector<double> h(table.v);
    for (int k = 0; k < table.v; ++k) {
        std::vector<double> counts(table.cardinalities[k], 0.0);
        for (int i = 0; i < table.n; ++i) counts[table.factor_at(i, k)] += 1.0;
        h[k] = entropy_from_counts(counts, table.n);
    }
    return h;
}

// Coordinate-descent lasso on standardized inputs. Columns of x must have
// unit variance (or be all-zero, which stays at weight zero).
std::vector<double> lasso_fit(const std::vector<double>& x,  // n x d
                              const std::vector<double>& y,  // n
                              int n,
                              int d,
                              double lambda_fraction) {
    std::vector<double> w(d, 0.0);
    std::vector<double> residual = y;

    std::vector<double> col_sq(d, 0.0);
    double lambda_max = 0.0;
    for (int j = 0; j < d; ++j) {
        double dot = 0.0;
        for (int i = 0; i < n; ++i) {
            dot += x[static_cast<std::size_t>(i) * d + j] * y[i];
            col_sq[j] += x[static_cast<std::size_t>(i) * d + j] * x[static_cast<std::size_t>(i) * d + j];
        }
        lambda_max = std::max(lambda_max, std::abs(dot) / n);
    }
    if (lambda_max <= kEps) return w;
    const double lambda = lambda_fraction * lambda_max;

    for (int sweep = 0; sweep < 2000; ++sweep) {
        double max_delta = 0.0;
        for (int j = 0; j < d; ++j) {
            if (col_sq[j] <= kEps) continue;
            double rho = 0.0;
            for (int i = 0; i < n; ++i)
                rho += x[static_cast<std::size_t>(i) * d + j] * residual[i];
            rho = rho / n + w[j] * (col_sq[j] / n);
            const double denom = col_sq[j] / n;
            double w_new = 0.0;
            if (rho > lambda)
                w_new = (rho - lambda) / denom;
            else if (rho < -lambda)
                w_new = (rho + lambda) / denom;
            const double delta = w_new - w[j];
            if (delta != 0.0) {
                for (int i = 0; i < n; ++i)
                    residual[i] -= delta * x[static_cast<std::size_t>(i) * d + j];
                w[j] = w_new;
                max_delta = std::max(max_delta, std::abs(delta));
            }
        }
        if (max_delta < 1e-9) break;
    }
    return w;
}

}  // namespace

void RepresentationTable::validate() const {
    if (n < 1 || d < 1 || v < 1) throw DataError("representation table is empty");
    if (z.size() != static_cast<std::size_t>(n) * d ||
        factors.size() != static_cast<std::size_t>(n) * v ||
        cardinalities.size() != static_cast<std::size_t>(v))
        throw DataError("representation table shape mismatch");
    if (bins < 2) throw DataError("discretization needs at least 2 bins");
}

std::vector<double> mutual_information_matrix(const RepresentationTable& table) {
    table.validate();
    std::vector<double> mi(static_cast<std::size_t>(table.d) * table.v, 0.0);
    std::vector<std::vector<int>> factor_cols(table.v);
    for (int k = 0; k < table.v; ++k) {
        factor_cols[k].resize(table.n);
        for (int i = 0; i < table.n; ++i) factor_cols[k][i] = table.factor_at(i, k);
    }
    for (int j = 0; j < table.d; ++j) {
        const auto binned = discretize_dim(table, j);
        for (int k = 0; k < table.v; ++k)
            mi[static_cast<std::size_t>(j) * table.v + k] =
                discrete_mi(binned, table.bins, factor_cols[k], table.cardinalities[k]);
    }
    return mi;
}

MetricValue mig(const RepresentationTable& table, std::vector<double>* mi_out) {
    const auto mi = mutual_information_matrix(table);
    const auto h = factor_entropies(table);
    if (mi_out) *mi_out = mi;

    MetricValue result;
    double sum = 0.0;
    int used = 0;
    for (int k = 0; k < table.v; ++k) {
        if (h[k] <= kEps) {
            ++result.excluded;
            continue;
        }
        TopTwo top;
        for (int j = 0; j < table.d; ++j) top.offer(j, mi[static_cast<std::size_t>(j) * table.v + k]);
        const double second = table.d > 1 ? top.second : 0.0;
        sum += (top.first - second) / h[k];
        ++used;
    }
    if (used == 0) {
        result.degenerate = true;
        return result;
    }
    result.value = std::clamp(sum / used, 0.0, 1.0);
    return result;
}

MetricValue sap(const RepresentationTable& table, std::vector<double>* r2_out) {
    table.validate();
    const auto h = factor_entropies(table);

    // Per-dimension moments for Pearson correlation.
    std::vector<double> z_mean(table.d, 0.0), z_var(table.d, 0.0);
    for (int j = 0; j < table.d; ++j) {
        double m = 0.0;
        for (int i = 0; i < table.n; ++i) m += table.z_at(i, j);
        m /= table.n;
        double var = 0.0;
        for (int i = 0; i < table.n; ++i) {
            const double c = table.z_at(i, j) - m;
            var += c * c;
        }
        z_mean[j] = m;
        z_var[j] = var / table.n;
    }

    std::vector<double> r2(static_cast<std::size_t>(table.d) * table.v, 0.0);
    for (int k = 0; k < table.v; ++k) {
        double fm = 0.0;
        for (int i = 0; i < table.n; ++i) fm += table.factor_at(i, k);
        fm /= table.n;
        double fvar = 0.0;
        for (int i = 0; i < table.n; ++i) {
            const double c = table.factor_at(i, k) - fm;
            fvar += c * c;
        }
        fvar /= table.n;
        if (fvar <= kEps) continue;
        for (int j = 0; j < table.d; ++j) {
            if (z_var[j] <= kEps) continue;
            double cov = 0.0;
            for (int i = 0; i < table.n; ++i)
                cov += (table.z_at(i, j) - z_mean[j]) * (table.factor_at(i, k) - fm);
            cov /= table.n;
            r2[static_cast<std::size_t>(j) * table.v + k] =
                std::clamp(cov * cov / (z_var[j] * fvar), 0.0, 1.0);
        }
    }
    if (r2_out) *r2_out = r2;

    MetricValue result;
    double sum = 0.0;
    int used = 0;
    for (int k = 0; k < table.v; ++k) {
        if (h[k] <= kEps) {
            ++result.excluded;
            continue;
        }
        TopTwo top;
        for (int j = 0; j < table.d; ++j) top.offer(j, r2[static_cast<std::size_t>(j) * table.v + k]);
        sum += top.first - (table.d > 1 ? top.second : 0.0);
        ++used;
    }
    if (used == 0) {
        result.degenerate = true;
        return result;
    }
    result.value = std::clamp(sum / used, 0.0, 1.0);
    return result;
}

MetricValue irs(const RepresentationTable& table) {
    const auto mi = mutual_information_matrix(table);
    const auto h = factor_entropies(table);

    MetricValue result;
    double sum = 0.0;
    int used = 0;
    for (int k = 0; k < table.v; ++k) {
        if (h[k] <= kEps) {  // single-value interventions unavailable
            ++result.excluded;
            continue;
        }
        TopTwo top;
        for (int j = 0; j < table.d; ++j) top.offer(j, mi[static_cast<std::size_t>(j) * table.v + k]);
        const int jstar = top.first_index;

        double global_mean = 0.0;
        for (int i = 0; i < table.n; ++i) global_mean += table.z_at(i, jstar);
        global_mean /= table.n;
        double max_dev = 0.0;
        for (int i = 0; i < table.n; ++i)
            max_dev = std::max(max_dev, std::abs(table.z_at(i, jstar) - global_mean));
        if (max_dev <= kEps) {  // collapsed dimension carries no signal
            ++result.excluded;
            continue;
        }

        const int card = table.cardinalities[k];
        std::vector<double> value_mean(card, 0.0), value_count(card, 0.0);
        for (int i = 0; i < table.n; ++i) {
            value_mean[table.factor_at(i, k)] += table.z_at(i, jstar);
            value_count[table.factor_at(i, k)] += 1.0;
        }
        for (int c = 0; c < card; ++c)
            if (value_count[c] > 0.0) value_mean[c] /= value_count[c];

        std::vector<double> spread(card, 0.0);
        for (int i = 0; i < table.n; ++i) {
            const int c = table.factor_at(i, k);
            spread[c] = std::max(spread[c],
                                 std::abs(table.z_at(i, jstar) - value_mean[c]));
        }
        double mean_spread = 0.0;
        int present = 0;
        for (int c = 0; c < card; ++c)
            if (value_count[c] > 0.0) {
                mean_spread += spread[c];
                ++present;
            }
        mean_spread /= present;

        sum += std::clamp(1.0 - mean_spread / max_dev, 0.0, 1.0);
        ++used;
    }
    if (used == 0) {
        result.degenerate = true;
        return result;
    }
    result.value = std::clamp(sum / used, 0.0, 1.0);
    return result;
}

MetricValue dci(const RepresentationTable& table, std::vector<double>* importance_out) {
    table.validate();
    const auto h = factor_entropies(table);

    // Standardize latent columns; all-zero columns stay zero and therefore
    // collect no importance.
    std::vector<double> x(static_cast<std::size_t>(table.n) * table.d, 0.0);
    for (int j = 0; j < table.d; ++j) {
        double m = 0.0;
        for (int i = 0; i < table.n; ++i) m += table.z_at(i, j);
        m /= table.n;
        double var = 0.0;
        for (int i = 0; i < table.n; ++i) {
            const double c = table.z_at(i, j) - m;
            var += c * c;
        }
        var /= table.n;
        if (var <= kEps) continue;
        const double inv_sd = 1.0 / std::sqrt(var);
        for (int i = 0; i < table.n; ++i)
            x[static_cast<std::size_t>(i) * table.d + j] = (table.z_at(i, j) - m) * inv_sd;
    }

    std::vector<double> importance(static_cast<std::size_t>(table.d) * table.v, 0.0);
    std::vector<int> included_factors;
    for (int k = 0; k < table.v; ++k) {
        if (h[k] <= kEps) continue;
        included_factors.push_back(k);
        double fm = 0.0;
        for (int i = 0; i < table.n; ++i) fm += table.factor_at(i, k);
        fm /= table.n;
        double fvar = 0.0;
        for (int i = 0; i < table.n; ++i) {
            const double c = table.factor_at(i, k) - fm;
            fvar += c * c;
        }
        fvar /= table.n;
        const double inv_sd = 1.0 / std::sqrt(fvar);
        std::vector<double> y(table.n);
        for (int i = 0; i < table.n; ++i) y[i] = (table.factor_at(i, k) - fm) * inv_sd;

        const auto w = lasso_fit(x, y, table.n, table.d, 0.01);
        for (int j = 0; j < table.d; ++j)
            importance[static_cast<std::size_t>(j) * table.v + k] = std::abs(w[j]);
    }
    if (importance_out) *importance_out = importance;

    MetricValue result;
    result.excluded = table.v - static_cast<int>(included_factors.size());
    if (included_factors.size() < 2) {
        result.degenerate = true;
        return result;
    }

    const double log_v = std::log(static_cast<double>(included_factors.size()));
    double total = 0.0;
    std::vector<double> row_sum(table.d, 0.0);
    for (int j = 0; j < table.d; ++j) {
        for (int k : included_factors)
            row_sum[j] += importance[static_cast<std::size_t>(j) * table.v + k];
        total += row_sum[j];
    }
    if (total <= kEps) {
        result.degenerate = true;
        return result;
    }

    double score = 0.0;
    for (int j = 0; j < table.d; ++j) {
        if (row_sum[j] <= kEps) continue;  // zero-importance rows excluded
        double entropy = 0.0;
        for (int k : included_factors) {
            const double p = importance[static_cast<std::size_t>(j) * table.v + k] / row_sum[j];
            if (p > 0.0) entropy -= p * std::log(p);
        }
        const double disentanglement = 1.0 - entropy / log_v;
        score += (row_sum[j] / total) * disentanglement;
    }
    result.value = std::clamp(score, 0.0, 1.0);
    return result;
}

MetricValue fvae_score(const FactorSpace& space,
                       int latent_dim,
                       const FactorBatchEncodeFn& encode,
                       const FvaeOptions& options,
                       Rng& rng) {
    if (options.num_votes <= 0)
        throw std::invalid_argument("fvae needs a positive number of votes");
    if (options.samples_per_vote < 2 || options.std_samples < 2)
        throw std::invalid_argument("fvae batch sizes must be >= 2");
    const int v = space.num_factors();

    auto random_factors = [&] {
        std::vector<int> f(v);
        for (int k = 0; k < v; ++k)
            f[k] = static_cast<int>(rng.uniform_below(space.cardinalities()[k]));
        return f;
    };

    // Global per-dimension scale from an unconstrained sample.
    std::vector<std::vector<int>> pool(options.std_samples);
    for (auto& f : pool) f = random_factors();
    const auto pool_z = encode(pool);
    std::vector<double> global_sd(latent_dim, 0.0);
    {
        std::vector<double> mean(latent_dim, 0.0);
        for (int i = 0; i < options.std_samples; ++i)
            for (int j = 0; j < latent_dim; ++j)
                mean[j] += pool_z[static_cast<std::size_t>(i) * latent_dim + j];
        for (auto& m : mean) m /= options.std_samples;
        for (int i = 0; i < options.std_samples; ++i)
            for (int j = 0; j < latent_dim; ++j) {
                const double c = pool_z[static_cast<std::size_t>(i) * latent_dim + j] - mean[j];
                global_sd[j] += c * c;
            }
        for (auto& s : global_sd) s = std::sqrt(s / options.std_samples);
    }
    std::vector<bool> active(latent_dim);
    int active_count = 0;
    for (int j = 0; j < latent_dim; ++j) {
        active[j] = global_sd[j] > kEps;
        active_count += active[j];
    }
    MetricValue result;
    if (active_count == 0) {
        result.degenerate = true;
        return result;
    }

    std::vector<std::pair<int, int>> votes;  // (feature dim, fixed factor)
    votes.reserve(options.num_votes);
    for (int t = 0; t < options.num_votes; ++t) {
        const int k = static_cast<int>(rng.uniform_below(v));
        const int fixed = static_cast<int>(rng.uniform_below(space.cardinalities()[k]));
        std::vector<std::vector<int>> batch(options.samples_per_vote);
        for (auto& f : batch) {
            f = random_factors();
            f[k] = fixed;
        }
        const auto z = encode(batch);

        int best = -1;
        double best_var = std::numeric_limits<double>::infinity();
        for (int j = 0; j < latent_dim; ++j) {
            if (!active[j]) continue;
            double m = 0.0;
            for (int i = 0; i < options.samples_per_vote; ++i)
                m += z[static_cast<std::size_t>(i) * latent_dim + j] / global_sd[j];
            m /= options.samples_per_vote;
            double var = 0.0;
            for (int i = 0; i < options.samples_per_vote; ++i) {
                const double c = z[static_cast<std::size_t>(i) * latent_dim + j] / global_sd[j] - m;
                var += c * c;
            }
            if (var < best_var) {
                best_var = var;
                best = j;
            }
        }
        votes.emplace_back(best, k);
    }

    const int train_n = std::max(1, static_cast<int>(std::lround(options.train_fraction * options.num_votes)));
    if (train_n >= options.num_votes)
        throw std::invalid_argument("fvae vote split leaves no held-out votes");

    std::vector<std::vector<double>> counts(latent_dim, std::vector<double>(v, 0.0));
    for (int t = 0; t < train_n; ++t) counts[votes[t].first][votes[t].second] += 1.0;
    std::vector<int> predict(latent_dim, 0);
    for (int j = 0; j < latent_dim; ++j) {
        int best_k = 0;
        for (int k = 1; k < v; ++k)
            if (counts[j][k] > counts[j][best_k]) best_k = k;
        predict[j] = best_k;
    }

    int correct = 0;
    for (int t = train_n; t < options.num_votes; ++t)
        correct += predict[votes[t].first] == votes[t].second;
    result.value = static_cast<double>(correct) / (options.num_votes - train_n);
    return result;
}

}  // namespace swvae
