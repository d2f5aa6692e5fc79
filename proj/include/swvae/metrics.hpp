#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "swvae/factor_space.hpp"
#include "swvae/rng.hpp"

namespace swvae {

// Row-aligned (representation, factor) matrices extracted from a model.
struct RepresentationTable {
    std::vector<double> z;       // n x d, row-major (posterior means)
    std::vector<int> factors;    // n x v, row-major
    int n = 0;
    int d = 0;
    int v = 0;
    std::vector<int> cardinalities;
    int bins = 20;  // equal-width discretization for MI-based scores

    double z_at(int row, int dim) const { return z[static_cast<std::size_t>(row) * d + dim]; }
    int factor_at(int row, int k) const { return factors[static_cast<std::size_t>(row) * v + k]; }
    void validate() const;
};

// A score in [0,1], or NaN with the degenerate flag set when no usable
// factor/dimension remains. `excluded` counts dropped factors.
struct MetricValue {
    double value = std::numeric_limits<double>::quiet_NaN();
    bool degenerate = false;
    int excluded = 0;
};

// Pairwise discrete mutual information (nats) between binned latent
// dimensions and factors; d x v row-major. Shared by MIG and IRS.
std::vector<double> mutual_information_matrix(const RepresentationTable& table);

// Mean over factors of the normalized gap between the two highest MI values.
MetricValue mig(const RepresentationTable& table, std::vector<double>* mi_out = nullptr);

// Mean over factors of the gap between the two most predictive latent
// dimensions; per-(dim,factor) predictivity is the linear-regression R^2.
MetricValue sap(const RepresentationTable& table, std::vector<double>* r2_out = nullptr);

// Interventional robustness: spread of the factor's strongest dimension
// under interventions on the remaining factors, relative to its maximal
// observed deviation.
MetricValue irs(const RepresentationTable& table);

// DCI disentanglement from L1-regularized linear importances.
MetricValue dci(const RepresentationTable& table, std::vector<double>* importance_out = nullptr);

// Majority-vote identifiability. `encode` maps a batch of factor vectors to
// their representation rows (flattened batch x d); it bundles the generating
// function and the encoder so the metric core stays model-agnostic.
using FactorBatchEncodeFn =
    std::function<std::vector<double>(const std::vector<std::vector<int>>&)>;

struct FvaeOptions {
    int num_votes = 800;
    int samples_per_vote = 64;
    int std_samples = 1024;
    double train_fraction = 0.8;
};

MetricValue fvae_score(const FactorSpace& space,
                       int latent_dim,
                       const FactorBatchEncodeFn& encode,
                       const FvaeOptions& options,
                       Rng& rng);

// Full per-run report; provenance fields are filled by the caller.
struct MetricsReport {
    MetricValue mig, sap, irs, fvae, dci;
    std::vector<double> mi_matrix;       // d x v
    std::vector<double> sap_matrix;      // d x v
    std::vector<double> dci_importance;  // d x v
    int d = 0;
    int v = 0;
};

}  // namespace swvae
