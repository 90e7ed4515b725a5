#include "condshrink/risk_lab.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "condshrink/error.hpp"
#include "condshrink/parallel.hpp"
#include "condshrink/rng.hpp"

namespace condshrink {

namespace {

constexpr std::size_t kBlockSize = 1024;
constexpr std::uint64_t kThetaGridTag = 0x7e7a0000ULL;
constexpr double kMaxSingularRate = 1e-3;

/// Welford accumulator; blocks are merged in index order with Chan's update.
struct RunningStats {
    long n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double delta = x - mean;
        mean += delta / n;
        m2 += delta * (x - mean);
    }

    void merge(const RunningStats& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const long total = n + o.n;
        const double delta = o.mean - mean;
        mean += delta * o.n / total;
        m2 += o.m2 + delta * delta * static_cast<double>(n) * o.n / total;
        n = total;
    }

    double std_error() const {
        if (n < 2) return 0.0;
        return std::sqrt(m2 / (n - 1) / n);
    }
};

/// One noise model instance: draws xi for a replicate.
class NoiseModel {
public:
    virtual ~NoiseModel() = default;
    /// Returns xi; when `cov_out` is non-null also the drawn covariance.
    virtual Vector draw(RngStream& rng, Matrix* cov_out) const = 0;
    virtual bool has_covariance() const = 0;
};

class GaussianNoise final : public NoiseModel {
public:
    explicit GaussianNoise(std::unique_ptr<RandomCovarianceSource> source)
        : source_(std::move(source)) {}
    Vector draw(RngStream& rng, Matrix* cov_out) const override {
        const int p = source_->dimension();
        auto sample = sample_conditionally_gaussian(Vector::Zero(p), *source_, rng);
        if (cov_out) *cov_out = std::move(sample.cov);
        return std::move(sample.y);
    }
    bool has_covariance() const override { return true; }

private:
    std::unique_ptr<RandomCovarianceSource> source_;
};

class OuNoise final : public NoiseModel {
public:
    explicit OuNoise(OuLevyModel model) : model_(model) {}
    Vector draw(RngStream& rng, Matrix*) const override {
        const JumpRecord jumps = simulate_jumps(model_, rng);
        const Vector zeta = simulate_zeta(model_, jumps, rng);
        return zeta / std::sqrt(static_cast<double>(model_.n));
    }
    bool has_covariance() const override { return false; }

private:
    OuLevyModel model_;
};

std::unique_ptr<RandomCovarianceSource> make_gaussian_source(const ExperimentConfig& c) {
    switch (c.noise.kind) {
        case CovarianceKind::identity:
            return std::make_unique<FixedCovarianceSource>(Matrix::Identity(c.p, c.p));
        case CovarianceKind::scaled_identity:
            return std::make_unique<ScaledIdentitySource>(c.p, c.noise.sigma2_min,
                                                          c.noise.sigma2_max);
        case CovarianceKind::ar1_fixed:
            return std::make_unique<FixedCovarianceSource>(ar1_covariance(c.noise.a, c.p));
        case CovarianceKind::matrix:
            return std::make_unique<FixedCovarianceSource>(c.noise.entries);
    }
    fail(ErrorCode::internal, "unhandled covariance kind");
}

std::vector<std::unique_ptr<NoiseModel>> make_scenarios(const ExperimentConfig& c) {
    std::vector<std::unique_ptr<NoiseModel>> out;
    switch (c.model) {
        case ModelKind::gaussian:
            out.push_back(std::make_unique<GaussianNoise>(make_gaussian_source(c)));
            break;
        case ModelKind::ar1:
            for (double a : c.ar1.a_values)
                out.push_back(std::make_unique<GaussianNoise>(
                    std::make_unique<FixedCovarianceSource>(ar1_covariance(a, c.p))));
            break;
        case ModelKind::ou_levy: {
            OuLevyModel m = c.ou;
            m.p = c.p;
            out.push_back(std::make_unique<OuNoise>(m));
            break;
        }
    }
    return out;
}

std::string format_label(const char* key, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s=%g", key, value);
    return buf;
}

GammaPValue compute_gamma(int p, const CompactSetSpec& spec, GammaMethod method) {
    if (method == GammaMethod::closed_form && spec.d > 0.0) return gamma_p_closed(p, spec);
    return gamma_p_quadrature(p, spec);
}

}  // namespace

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::gaussian: return "gaussian";
        case ModelKind::ar1: return "ar1";
        case ModelKind::ou_levy: return "ou_levy";
    }
    return "gaussian";
}

std::string_view to_string(CovarianceKind kind) {
    switch (kind) {
        case CovarianceKind::identity: return "identity";
        case CovarianceKind::scaled_identity: return "scaled_identity";
        case CovarianceKind::ar1_fixed: return "ar1_fixed";
        case CovarianceKind::matrix: return "matrix";
    }
    return "identity";
}

void ExperimentConfig::validate() const {
    require(replicates >= 100, ErrorCode::config, "replicates must be >= 100");
    require(std::isfinite(d) && d >= 0.0, ErrorCode::config, "compact_set.d must be >= 0");
    require(!estimators.empty(), ErrorCode::config, "at least one estimator is required");
    const auto listed = [&](EstimatorId id) {
        for (auto e : estimators)
            if (e == id) return true;
        return false;
    };
    require(listed(baseline), ErrorCode::config, "baseline estimator must be listed in estimators");
    require(listed(improved), ErrorCode::config, "improved estimator must be listed in estimators");
    require(!theta.radii.empty() || !theta.points.empty(), ErrorCode::config,
            "theta grid is empty");
    require(theta.directions >= 0, ErrorCode::config, "theta.directions must be >= 0");
    for (double r : theta.radii)
        require(r >= 0.0 && r <= d * (1.0 + 1e-12), ErrorCode::config,
                "theta radius " + std::to_string(r) + " lies outside the ball of radius d");
    for (const auto& pt : theta.points) {
        require(pt.size() == p, ErrorCode::config, "theta point has the wrong dimension");
        require(pt.norm() <= d * (1.0 + 1e-12), ErrorCode::config,
                "theta point lies outside the ball of radius d");
    }
    switch (model) {
        case ModelKind::gaussian:
            require(p >= 2, ErrorCode::config, "p must be >= 2");
            if (noise.kind == CovarianceKind::matrix)
                require(noise.entries.rows() == p && noise.entries.cols() == p,
                        ErrorCode::config, "noise.entries must be p x p");
            break;
        case ModelKind::ar1:
            require(p >= 2, ErrorCode::config, "p must be >= 2");
            require(ar1.alpha > 0.0 && ar1.alpha < 1.0, ErrorCode::config,
                    "ar1.alpha must lie in (0, 1)");
            require(!ar1.a_values.empty(), ErrorCode::config, "ar1.a_values is empty");
            for (double a : ar1.a_values)
                require(std::abs(a) <= ar1.alpha, ErrorCode::config,
                        "ar1.a_values must lie in [-alpha, alpha]");
            break;
        case ModelKind::ou_levy: {
            require(p >= 1, ErrorCode::config, "p must be >= 1");
            OuLevyModel m = ou;
            m.p = p;
            m.validate();
            require(m.n >= 2, ErrorCode::config, "ou_levy.n must be >= 2");
            break;
        }
    }
}

std::vector<Vector> build_theta_grid(const ThetaGridSpec& spec, int p,
                                     std::uint64_t master_seed) {
    std::vector<Vector> grid;
    RngStream rng = derive_replicate_seed(master_seed, 0, kThetaGridTag);
    for (double r : spec.radii) {
        if (r == 0.0) {
            grid.push_back(Vector::Zero(p));
            continue;
        }
        Vector axis = Vector::Zero(p);
        axis(0) = r;
        grid.push_back(axis);
        for (int k = 0; k < spec.directions; ++k) {
            Vector u(p);
            do {
                for (int i = 0; i < p; ++i) u(i) = rng.normal();
            } while (u.norm() == 0.0);
            grid.push_back(r * u / u.norm());
        }
    }
    for (const auto& pt : spec.points) grid.push_back(pt);
    return grid;
}

ResolvedExperiment resolve(const ExperimentConfig& config) {
    config.validate();
    ResolvedExperiment out;
    const int p = config.p;
    CompactSetSpec spec{config.d, 1.0, 1.0};
    switch (config.model) {
        case ModelKind::gaussian: {
            const auto source = make_gaussian_source(config);
            spec.lambda_star = source->lambda_star();
            spec.a_star = source->a_star();
            out.scenario_labels.push_back(std::string(to_string(config.noise.kind)));
            break;
        }
        case ModelKind::ar1:
            // lambda_min(D(a)) >= 1/(1+|a|)^2; lambda_max(D(a)) <= 1/(1-alpha)^2.
            spec.lambda_star = 1.0 / ((1.0 + config.ar1.alpha) * (1.0 + config.ar1.alpha));
            spec.a_star = ar1_lambda_max_bound(config.ar1.alpha);
            for (double a : config.ar1.a_values) out.scenario_labels.push_back(format_label("a", a));
            break;
        case ModelKind::ou_levy: {
            OuLevyModel m = config.ou;
            m.p = p;
            spec = ou_default_compact_set(m, config.d);
            out.scenario_labels.push_back(format_label("a", m.a));
            break;
        }
    }
    if (config.lambda_star) spec.lambda_star = *config.lambda_star;
    if (config.a_star) spec.a_star = *config.a_star;
    spec.validate();
    out.compact_set = spec;
    out.gamma_p = compute_gamma(p, spec, config.gamma_method).value;

    if (config.manual_constant) {
        require(*config.manual_constant >= 0.0, ErrorCode::config, "constant must be >= 0");
        out.constant = {*config.manual_constant, ConstantSource::manual};
    } else {
        switch (config.model) {
            case ModelKind::gaussian:
                out.constant = shrink_constant_theorem21(p, spec.lambda_star, out.gamma_p);
                break;
            case ModelKind::ar1: {
                const Ar1Spec ar{0.0, config.ar1.alpha, p};
                out.constant = ar1_shrink_constant(ar, out.gamma_p);
                break;
            }
            case ModelKind::ou_levy: {
                // (p-1) lambda_star gamma_p; with the default lambda_star = rho1^2/n
                // this is rho1^2 (p-1) gamma_p / n.
                OuLevyModel m = config.ou;
                m.p = p;
                out.constant = (config.lambda_star)
                                   ? ShrinkageConstant{(p - 1) * spec.lambda_star * out.gamma_p,
                                                       ConstantSource::theorem_3_1}
                                   : ou_shrink_constant(m, out.gamma_p);
                break;
            }
        }
    }
    out.bound = -out.constant.c * out.constant.c;
    out.theta_grid = build_theta_grid(config.theta, p, config.master_seed);
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    ExperimentResult result;
    result.resolved = resolve(config);
    const auto& resolved = result.resolved;
    const auto scenarios = make_scenarios(config);
    const auto& grid = resolved.theta_grid;
    const std::size_t n_theta = grid.size();
    const std::size_t n_est = config.estimators.size();
    std::size_t baseline_idx = 0, improved_idx = 0;
    for (std::size_t e = 0; e < n_est; ++e) {
        if (config.estimators[e] == config.baseline) baseline_idx = e;
        if (config.estimators[e] == config.improved) improved_idx = e;
    }
    const std::size_t reps = static_cast<std::size_t>(config.replicates);
    const std::size_t blocks = block_count(reps, kBlockSize);
    const std::size_t cells = n_theta * n_est;

    long singular_total = 0;
    result.dominance.baseline = config.baseline;
    result.dominance.improved = config.improved;
    result.dominance.pass = true;

    for (std::size_t s = 0; s < scenarios.size(); ++s) {
        const NoiseModel& noise = *scenarios[s];
        // Per block: loss stats per (theta, estimator), paired difference
        // stats per (theta, estimator) against the baseline, trace and audit.
        std::vector<std::vector<RunningStats>> loss(blocks), diff(blocks);
        std::vector<RunningStats> trace(blocks);
        std::vector<long> audit_ok(blocks, 0), singular(blocks, 0);
        const double lambda_star = resolved.compact_set.lambda_star;

        for_each_block(reps, kBlockSize, config.threads,
                       [&](std::size_t b, std::size_t begin, std::size_t end) {
            auto& bl = loss[b];
            auto& bd = diff[b];
            bl.assign(cells, {});
            bd.assign(cells, {});
            std::vector<double> losses(n_est);
            Matrix cov;
            for (std::size_t r = begin; r < end; ++r) {
                RngStream rng = derive_replicate_seed(config.master_seed, r, s);
                const Vector xi = noise.draw(rng, noise.has_covariance() ? &cov : nullptr);
                if (noise.has_covariance()) {
                    trace[b].add(cov.trace());
                    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
                    if (eig.eigenvalues().minCoeff() >= lambda_star - 1e-12) ++audit_ok[b];
                }
                for (std::size_t t = 0; t < n_theta; ++t) {
                    const Vector y = grid[t] + xi;
                    for (std::size_t e = 0; e < n_est; ++e) {
                        Vector est;
                        try {
                            est = apply_estimator(config.estimators[e], y, resolved.constant)
                                      .theta_hat;
                        } catch (const Error& err) {
                            if (err.code() != ErrorCode::singular_observation) throw;
                            ++singular[b];
                            est = y;
                        }
                        losses[e] = (est - grid[t]).squaredNorm();
                    }
                    for (std::size_t e = 0; e < n_est; ++e) {
                        bl[t * n_est + e].add(losses[e]);
                        bd[t * n_est + e].add(losses[e] - losses[baseline_idx]);
                    }
                }
            }
        });

        std::vector<RunningStats> total_loss(cells), total_diff(cells);
        RunningStats total_trace;
        long ok = 0;
        for (std::size_t b = 0; b < blocks; ++b) {
            for (std::size_t k = 0; k < cells; ++k) {
                total_loss[k].merge(loss[b][k]);
                total_diff[k].merge(diff[b][k]);
            }
            total_trace.merge(trace[b]);
            ok += audit_ok[b];
            singular_total += singular[b];
        }
        const bool audited = noise.has_covariance();
        result.mean_trace.push_back(audited ? total_trace.mean
                                            : std::numeric_limits<double>::quiet_NaN());
        result.lambda_min_audit.push_back(audited ? static_cast<double>(ok) / reps
                                                  : std::numeric_limits<double>::quiet_NaN());

        const std::string& label = resolved.scenario_labels[s];
        for (std::size_t t = 0; t < n_theta; ++t) {
            for (std::size_t e = 0; e < n_est; ++e) {
                const auto& st = total_loss[t * n_est + e];
                result.risks.push_back(
                    {st.mean, st.std_error(), st.n, config.estimators[e], grid[t], label});
            }
            const auto& base = total_loss[t * n_est + baseline_idx];
            const auto& imp = total_loss[t * n_est + improved_idx];
            const auto& d = total_diff[t * n_est + improved_idx];
            DominanceRow row;
            row.scenario = label;
            row.theta = grid[t];
            row.risk_baseline = base.mean;
            row.risk_improved = imp.mean;
            row.delta = d.mean;
            row.delta_se = d.std_error();
            row.bound = resolved.bound;
            row.sign_ok = row.delta + 3.0 * row.delta_se <= 0.0;
            row.bound_ok = row.delta <= row.bound + 3.0 * row.delta_se;
            row.floor_ok = row.delta >= -(std::abs(row.bound) + row.risk_baseline);
            result.dominance.pass = result.dominance.pass && row.pass();
            result.dominance.rows.push_back(std::move(row));
        }
    }

    result.singular_count = singular_total;
    const double evaluations =
        static_cast<double>(reps) * scenarios.size() * n_theta * n_est;
    require(singular_total <= kMaxSingularRate * evaluations, ErrorCode::run_failed,
            "singular observations exceeded 0.1% of estimator evaluations (" +
                std::to_string(singular_total) + ")");
    return result;
}

RiskEstimate estimate_risk(const ExperimentConfig& config, EstimatorId estimator,
                           const Vector& theta) {
    ExperimentConfig c = config;
    c.theta = ThetaGridSpec{{}, 0, {theta}};
    c.estimators = {estimator};
    c.baseline = estimator;
    c.improved = estimator;
    const auto result = run_experiment(c);
    return result.risks.front();
}

DominanceReport dominance_report(const ExperimentConfig& config, EstimatorId baseline,
                                 EstimatorId improved, double bound) {
    ExperimentConfig c = config;
    c.estimators = {baseline};
    if (improved != baseline) c.estimators.push_back(improved);
    c.baseline = baseline;
    c.improved = improved;
    auto result = run_experiment(c);
    auto report = std::move(result.dominance);
    report.pass = true;
    for (auto& row : report.rows) {
        row.bound = bound;
        row.bound_ok = row.delta <= bound + 3.0 * row.delta_se;
        row.floor_ok = row.delta >= -(std::abs(bound) + row.risk_baseline);
        report.pass = report.pass && row.pass();
    }
    return report;
}

}  // namespace condshrink
