#pragma once

#include <memory>

#include "condshrink/constants.hpp"
#include "condshrink/estimators.hpp"
#include "condshrink/rng.hpp"

namespace condshrink {

/// Throws not_psd unless `cov` is square, symmetric and has smallest
/// eigenvalue >= -1e-10.
void validate_covariance(const Matrix& cov);

/// Lower factor L with L L' = cov: Cholesky, falling back to a symmetric
/// eigen-factorization (eigenvalues below 1e-12 clamped to zero) for
/// near-singular input.
Matrix covariance_factor(const Matrix& cov);

// ---------------------------------------------------------------------------
// AR(1) noise  xi_k = a xi_{k-1} + eps_k  with stationary start.

struct Ar1Spec {
    double a = 0.0;
    double alpha = 0.5;  ///< known envelope |a| <= alpha < 1
    int p = 2;

    void validate() const;
};

/// D(a) = Toeplitz(a^{|i-j|}) / (1 - a^2). Throws nonstationary for |a| >= 1.
Matrix ar1_covariance(double a, int p);
Matrix ar1_covariance(const Ar1Spec& spec);

/// 1 / (1 - alpha)^2, an upper bound on lambda_max(D(a)) for |a| <= alpha.
double ar1_lambda_max_bound(double alpha);

/// c = (p - 1/(1-alpha)^2) gamma_p. Throws dimension_too_small unless
/// p > 1/(1-alpha)^2.
ShrinkageConstant ar1_shrink_constant(const Ar1Spec& spec, double gamma_p);

/// -(p - 1/(1-alpha)^2)^2 gamma_p^2
double ar1_risk_bound(const Ar1Spec& spec, double gamma_p);

/// AR(1) sample by direct recursion from xi_0 ~ N(0, 1/(1-a^2)); returns
/// (xi_1, ..., xi_p).
Vector ar1_sample_recursive(double a, int p, RngStream& rng);

// ---------------------------------------------------------------------------
// Multivariate normal sampling.

class MvnSampler {
public:
    explicit MvnSampler(const Matrix& cov);

    /// mean + L z, z standard normal.
    Vector sample(const Vector& mean, RngStream& rng) const;
    const Matrix& factor() const { return factor_; }
    Eigen::Index dimension() const { return factor_.rows(); }

private:
    Matrix factor_;
};

Vector sample_mvn(const Vector& mean, const Matrix& cov, RngStream& rng);

// ---------------------------------------------------------------------------
// Random covariance D(G).

struct CovarianceDraw {
    Matrix cov;
    Matrix factor;
};

/// A generator of covariance draws D(G) together with the bounds it promises:
/// every draw has lambda_min >= lambda_star, and E lambda_max <= a_star.
class RandomCovarianceSource {
public:
    virtual ~RandomCovarianceSource() = default;

    virtual CovarianceDraw draw(RngStream& rng) const = 0;
    virtual int dimension() const = 0;
    virtual double lambda_star() const = 0;
    virtual double a_star() const = 0;
    /// E tr D(G), the MLE risk under this source.
    virtual double expected_trace() const = 0;
};

/// Non-random covariance. Declared bounds default to its extreme eigenvalues.
class FixedCovarianceSource final : public RandomCovarianceSource {
public:
    explicit FixedCovarianceSource(Matrix cov);
    FixedCovarianceSource(Matrix cov, double lambda_star, double a_star);

    CovarianceDraw draw(RngStream&) const override { return {cov_, factor_}; }
    int dimension() const override { return static_cast<int>(cov_.rows()); }
    double lambda_star() const override { return lambda_star_; }
    double a_star() const override { return a_star_; }
    double expected_trace() const override { return cov_.trace(); }

private:
    Matrix cov_;
    Matrix factor_;
    double lambda_star_;
    double a_star_;
};

/// sigma^2 I_p with sigma^2 ~ Uniform[lo, hi]; declares lambda_star = lo,
/// a_star = hi.
class ScaledIdentitySource final : public RandomCovarianceSource {
public:
    ScaledIdentitySource(int p, double sigma2_lo, double sigma2_hi);

    CovarianceDraw draw(RngStream& rng) const override;
    int dimension() const override { return p_; }
    double lambda_star() const override { return lo_; }
    double a_star() const override { return hi_; }
    double expected_trace() const override { return p_ * 0.5 * (lo_ + hi_); }

private:
    int p_;
    double lo_;
    double hi_;
};

struct ConditionalSample {
    Vector y;
    Matrix cov;
};

/// Draws D(G) from the source, then Y = theta + xi with xi ~ N(0, D(G)).
ConditionalSample sample_conditionally_gaussian(const Vector& theta,
                                                const RandomCovarianceSource& source,
                                                RngStream& rng);

}  // namespace condshrink
