#pragma once

// Monte Carlo quadratic risk R(theta, est) = E|est - theta|^2 and paired
// risk-difference certification. Every replicate draws its noise once from
// derive_replicate_seed(master_seed, replicate, scenario) and reuses it for all
// grid points and all estimators (common random numbers).

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "condshrink/constants.hpp"
#include "condshrink/estimators.hpp"
#include "condshrink/gaussian_models.hpp"
#include "condshrink/ou_levy.hpp"

namespace condshrink {

enum class ModelKind { gaussian, ar1, ou_levy };
std::string_view to_string(ModelKind kind);

enum class CovarianceKind { identity, scaled_identity, ar1_fixed, matrix };
std::string_view to_string(CovarianceKind kind);

/// Finite-dimensional conditionally Gaussian noise.
struct GaussianNoiseSpec {
    CovarianceKind kind = CovarianceKind::identity;
    double sigma2_min = 1.0;  ///< scaled_identity
    double sigma2_max = 1.0;
    double a = 0.0;           ///< ar1_fixed
    Matrix entries;           ///< matrix
};

struct Ar1SweepSpec {
    double alpha = 0.5;
    std::vector<double> a_values;
};

struct ThetaGridSpec {
    std::vector<double> radii;
    int directions = 8;  ///< random directions per positive radius, besides the axis ray
    std::vector<Vector> points;
};

struct ExperimentConfig {
    std::string name = "experiment";
    ModelKind model = ModelKind::gaussian;
    int p = 2;

    GaussianNoiseSpec noise;
    Ar1SweepSpec ar1;
    OuLevyModel ou;

    double d = 0.0;
    std::optional<double> lambda_star;  ///< overrides the model default
    std::optional<double> a_star;
    GammaMethod gamma_method = GammaMethod::quadrature;
    std::optional<double> manual_constant;

    std::vector<EstimatorId> estimators{EstimatorId::mle, EstimatorId::shrink};
    EstimatorId baseline = EstimatorId::mle;
    EstimatorId improved = EstimatorId::shrink;

    ThetaGridSpec theta;
    int replicates = 100000;
    std::uint64_t master_seed = 1;
    int threads = 0;  ///< 0 = hardware concurrency; never affects results

    void validate() const;
};

/// Model-dependent quantities derived from a config before any simulation.
struct ResolvedExperiment {
    CompactSetSpec compact_set;
    double gamma_p = 0.0;
    ShrinkageConstant constant;
    double bound = 0.0;  ///< guaranteed sup of the risk difference, -c^2
    std::vector<std::string> scenario_labels;
    std::vector<Vector> theta_grid;
};

ResolvedExperiment resolve(const ExperimentConfig& config);

/// Axis ray plus `directions` random unit directions per positive radius; the
/// origin once for radius 0; then the explicit points.
std::vector<Vector> build_theta_grid(const ThetaGridSpec& spec, int p, std::uint64_t master_seed);

struct RiskEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long replicates = 0;
    EstimatorId estimator_id = EstimatorId::mle;
    Vector theta;
    std::string scenario;
};

struct DominanceRow {
    std::string scenario;
    Vector theta;
    double risk_baseline = 0.0;
    double risk_improved = 0.0;
    double delta = 0.0;     ///< paired mean of loss(improved) - loss(baseline)
    double delta_se = 0.0;
    double bound = 0.0;
    bool sign_ok = false;   ///< delta + 3 SE <= 0
    bool bound_ok = false;  ///< delta <= bound + 3 SE
    bool floor_ok = false;  ///< delta >= -(|bound| + risk_baseline)
    bool pass() const { return sign_ok && bound_ok; }
};

struct DominanceReport {
    EstimatorId baseline = EstimatorId::mle;
    EstimatorId improved = EstimatorId::shrink;
    std::vector<DominanceRow> rows;
    bool pass = false;
};

struct ExperimentResult {
    ResolvedExperiment resolved;
    std::vector<RiskEstimate> risks;  ///< scenario-major, then theta, then estimator
    DominanceReport dominance;
    long singular_count = 0;
    /// Per scenario: mean trace of the drawn covariance (E tr D(G)) and the
    /// fraction of draws with lambda_min >= lambda_star (conditions audit).
    std::vector<double> mean_trace;
    std::vector<double> lambda_min_audit;
};

/// Runs every scenario of the config. Throws run_failed when more than 0.1% of
/// estimator evaluations hit a zero-norm observation.
ExperimentResult run_experiment(const ExperimentConfig& config);

RiskEstimate estimate_risk(const ExperimentConfig& config, EstimatorId estimator,
                           const Vector& theta);

DominanceReport dominance_report(const ExperimentConfig& config, EstimatorId baseline,
                                 EstimatorId improved, double bound);

}  // namespace condshrink
