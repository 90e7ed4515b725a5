#include "condshrink/gaussian_models.hpp"

#include <cmath>
#include <string>

#include "condshrink/error.hpp"

namespace condshrink {

namespace {

constexpr double kPsdTolerance = -1e-10;
constexpr double kClampBelow = 1e-12;

}  // namespace

void validate_covariance(const Matrix& cov) {
    require(cov.rows() == cov.cols() && cov.rows() > 0, ErrorCode::not_psd,
            "covariance must be a non-empty square matrix");
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    require((cov - cov.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, ErrorCode::not_psd,
            "covariance is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
    require(eig.eigenvalues().minCoeff() >= kPsdTolerance, ErrorCode::not_psd,
            "covariance has a negative eigenvalue");
}

Matrix covariance_factor(const Matrix& cov) {
    require(cov.rows() == cov.cols(), ErrorCode::not_psd, "covariance must be square");
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() == Eigen::Success) {
        Matrix l = llt.matrixL();
        if (l.allFinite()) return l;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    require(eig.info() == Eigen::Success, ErrorCode::not_psd, "eigen-factorization failed");
    Vector values = eig.eigenvalues();
    require(values.minCoeff() >= kPsdTolerance, ErrorCode::not_psd,
            "covariance has a negative eigenvalue");
    for (Eigen::Index i = 0; i < values.size(); ++i)
        values(i) = values(i) < kClampBelow ? 0.0 : std::sqrt(values(i));
    return eig.eigenvectors() * values.asDiagonal();
}

void Ar1Spec::validate() const {
    require(p >= 2, ErrorCode::domain, "AR(1) dimension p must be >= 2");
    require(alpha > 0.0 && alpha < 1.0, ErrorCode::domain, "alpha must lie in (0, 1)");
    require(std::abs(a) < 1.0, ErrorCode::nonstationary, "AR(1) coefficient must satisfy |a| < 1");
    require(std::abs(a) <= alpha, ErrorCode::domain,
            "AR(1) coefficient a lies outside the envelope [-alpha, alpha]");
}

Matrix ar1_covariance(double a, int p) {
    require(std::abs(a) < 1.0, ErrorCode::nonstationary,
            "ar1_covariance: |a| >= 1 has no stationary covariance");
    require(p >= 1, ErrorCode::domain, "ar1_covariance: p must be >= 1");
    const double scale = 1.0 / (1.0 - a * a);
    Vector powers(p);
    powers(0) = 1.0;
    for (int k = 1; k < p; ++k) powers(k) = powers(k - 1) * a;
    Matrix d(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) d(i, j) = scale * powers(std::abs(i - j));
    return d;
}

Matrix ar1_covariance(const Ar1Spec& spec) {
    spec.validate();
    return ar1_covariance(spec.a, spec.p);
}

double ar1_lambda_max_bound(double alpha) {
    require(alpha >= 0.0 && alpha < 1.0, ErrorCode::domain, "alpha must lie in [0, 1)");
    return 1.0 / ((1.0 - alpha) * (1.0 - alpha));
}

ShrinkageConstant ar1_shrink_constant(const Ar1Spec& spec, double gamma_p) {
    spec.validate();
    require(gamma_p > 0.0, ErrorCode::domain, "gamma_p must be > 0");
    const double bound = ar1_lambda_max_bound(spec.alpha);
    require(spec.p > bound, ErrorCode::dimension_too_small,
            "AR(1) shrinkage needs p > 1/(1-alpha)^2 = " + std::to_string(bound) + ", got p = " +
                std::to_string(spec.p));
    return {(spec.p - bound) * gamma_p, ConstantSource::ar1_proposition};
}

double ar1_risk_bound(const Ar1Spec& spec, double gamma_p) {
    const double c = ar1_shrink_constant(spec, gamma_p).c;
    return -c * c;
}

Vector ar1_sample_recursive(double a, int p, RngStream& rng) {
    require(std::abs(a) < 1.0, ErrorCode::nonstationary, "AR(1) coefficient must satisfy |a| < 1");
    double xi = rng.normal() / std::sqrt(1.0 - a * a);
    Vector out(p);
    for (int k = 0; k < p; ++k) {
        xi = a * xi + rng.normal();
        out(k) = xi;
    }
    return out;
}

MvnSampler::MvnSampler(const Matrix& cov) : factor_(covariance_factor(cov)) {}

Vector MvnSampler::sample(const Vector& mean, RngStream& rng) const {
    require(mean.size() == factor_.rows(), ErrorCode::domain, "sample_mvn: dimension mismatch");
    Vector z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    return mean + factor_ * z;
}

Vector sample_mvn(const Vector& mean, const Matrix& cov, RngStream& rng) {
    validate_covariance(cov);
    return MvnSampler(cov).sample(mean, rng);
}

FixedCovarianceSource::FixedCovarianceSource(Matrix cov) : cov_(std::move(cov)) {
    validate_covariance(cov_);
    factor_ = covariance_factor(cov_);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov_, Eigen::EigenvaluesOnly);
    lambda_star_ = eig.eigenvalues().minCoeff();
    a_star_ = eig.eigenvalues().maxCoeff();
}

FixedCovarianceSource::FixedCovarianceSource(Matrix cov, double lambda_star, double a_star)
    : cov_(std::move(cov)), lambda_star_(lambda_star), a_star_(a_star) {
    validate_covariance(cov_);
    factor_ = covariance_factor(cov_);
}

ScaledIdentitySource::ScaledIdentitySource(int p, double sigma2_lo, double sigma2_hi)
    : p_(p), lo_(sigma2_lo), hi_(sigma2_hi) {
    require(p >= 1, ErrorCode::domain, "dimension must be >= 1");
    require(sigma2_lo > 0.0 && sigma2_hi >= sigma2_lo, ErrorCode::domain,
            "scaled identity source needs 0 < sigma2_lo <= sigma2_hi");
}

CovarianceDraw ScaledIdentitySource::draw(RngStream& rng) const {
    const double s2 = lo_ + (hi_ - lo_) * rng.uniform();
    return {s2 * Matrix::Identity(p_, p_), std::sqrt(s2) * Matrix::Identity(p_, p_)};
}

ConditionalSample sample_conditionally_gaussian(const Vector& theta,
                                                const RandomCovarianceSource& source,
                                                RngStream& rng) {
    require(theta.size() == source.dimension(), ErrorCode::domain,
            "sample_conditionally_gaussian: dimension mismatch");
    CovarianceDraw draw = source.draw(rng);
    Vector z(theta.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    Vector y = theta + draw.factor * z;
    return {std::move(y), std::move(draw.cov)};
}

}  // namespace condshrink
