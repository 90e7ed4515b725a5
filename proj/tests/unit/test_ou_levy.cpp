#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "condshrink/constants.hpp"
#include "condshrink/error.hpp"
#include "condshrink/ou_levy.hpp"
#include "sample_stats.hpp"

using namespace condshrink;

namespace {

constexpr double kPi = std::numbers::pi;

// psi_j(s) = phi_j(s) + a int_s^n phi_j(t) e^{a(t-s)} dt, in closed form for the
// trigonometric basis on an integer horizon. Then, with xi_0 = 0,
//   int_0^n phi_j dxi = int_0^n psi_j du
// so Cov(zeta | jumps) = (rho1^2 int psi_i psi_j + rho2^2 sum_l psi_i(T_l) psi_j(T_l)) / n.
double psi(int j, double s, double a, int n) {
    const double phi = trig_basis(j, s);
    if (a == 0.0) return phi;
    if (j == 1) return phi + std::expm1(a * (n - s));
    const int k = j / 2;
    const std::complex<double> z(a, 2.0 * kPi * k);
    const std::complex<double> e = (std::exp(a * (n - s)) - std::polar(1.0, 2.0 * kPi * k * s)) / z;
    return phi + a * std::numbers::sqrt2 * (j % 2 == 0 ? e.real() : e.imag());
}

Matrix psi_covariance(const OuLevyModel& m, const JumpRecord& jumps) {
    // Composite Simpson, 4000 intervals per unit time.
    const int per_unit = 4000;
    const long intervals = static_cast<long>(m.n) * per_unit;
    const double h = 1.0 / per_unit;
    Matrix gram = Matrix::Zero(m.p, m.p);
    Vector v(m.p);
    for (long k = 0; k <= intervals; ++k) {
        const double s = k * h;
        for (int j = 0; j < m.p; ++j) v(j) = psi(j + 1, s, m.a, m.n);
        const double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        gram += w * v * v.transpose();
    }
    gram *= h / 3.0;
    Matrix jump_part = Matrix::Zero(m.p, m.p);
    for (double t : jumps.times) {
        for (int j = 0; j < m.p; ++j) v(j) = psi(j + 1, t, m.a, m.n);
        jump_part += v * v.transpose();
    }
    return (m.rho1 * m.rho1 * gram + m.rho2 * m.rho2 * jump_part) / m.n;
}

OuLevyModel model(double a, double rho1, double rho2, double lambda, int n, int p,
                  int steps = 200) {
    OuLevyModel m;
    m.a = a;
    m.rho1 = rho1;
    m.rho2 = rho2;
    m.lambda = lambda;
    m.n = n;
    m.p = p;
    m.grid_steps_per_unit = steps;
    return m;
}

JumpRecord fixed_jumps(std::vector<double> times) {
    JumpRecord r;
    r.marks.assign(times.size(), 0.0);
    r.times = std::move(times);
    return r;
}

struct ZetaSample {
    Matrix cov;
    Matrix cov_se;
    Vector mean;
    std::vector<std::vector<double>> comps;
};

ZetaSample sample_zeta(const OuLevyModel& m, const JumpRecord& times, int reps,
                       std::uint64_t seed) {
    ZetaSample out;
    out.comps.assign(m.p, {});
    Matrix s1 = Matrix::Zero(m.p, m.p), s2 = Matrix::Zero(m.p, m.p);
    Vector sum = Vector::Zero(m.p);
    for (int r = 0; r < reps; ++r) {
        RngStream rng = derive_replicate_seed(seed, r, 1);
        JumpRecord jumps = times;
        // Marks are redrawn per replicate; conditioning is on the times only.
        for (double& y : jumps.marks) y = rng.normal();
        const Vector z = simulate_zeta(m, jumps, rng);
        sum += z;
        const Matrix prod = z * z.transpose();
        s1 += prod;
        s2 += prod.cwiseProduct(prod);
        for (int j = 0; j < m.p; ++j) out.comps[j].push_back(z(j));
    }
    out.mean = sum / reps;
    const Matrix second = s1 / reps;
    out.cov = second - out.mean * out.mean.transpose();
    out.cov_se = ((s2 / reps - second.cwiseProduct(second)) / reps).cwiseSqrt();
    return out;
}

double frobenius_rel(const Matrix& a, const Matrix& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST(TrigBasis, Orthonormal) {
    for (int i = 1; i <= 7; ++i)
        for (int j = 1; j <= 7; ++j) {
            // Composite Simpson is exact to rounding for these trigonometric products.
            const int m = 2000;
            double s = 0.0;
            for (int k = 0; k <= m; ++k) {
                const double t = static_cast<double>(k) / m;
                const double w = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
                s += w * trig_basis(i, t) * trig_basis(j, t);
            }
            EXPECT_NEAR(s / (3.0 * m), i == j ? 1.0 : 0.0, 1e-10) << i << "," << j;
        }
}

TEST(TrigBasis, ValuesAndSupNorm) {
    EXPECT_EQ(trig_basis(1, 0.37), 1.0);
    for (int j = 2; j <= 9; ++j) {
        double mx = 0.0;
        for (int k = 0; k <= 4000; ++k) mx = std::max(mx, std::abs(trig_basis(j, k / 4000.0)));
        EXPECT_NEAR(mx, kBasisSupNorm, 1e-12);
        EXPECT_NEAR(trig_basis(j, 0.3), trig_basis(j, 5.3), 1e-12);  // one-periodic
    }
    EXPECT_DOUBLE_EQ(kLemmaA2Constant, 5.0);
    EXPECT_THROW(trig_basis(0, 0.5), Error);
}

TEST(SimulateJumps, PoissonMean) {
    const auto m = model(0.0, 1.0, 1.0, 2.0, 50, 1);
    std::vector<double> counts;
    for (int r = 0; r < 10000; ++r) {
        RngStream rng = derive_replicate_seed(3, r, 0);
        const auto j = simulate_jumps(m, rng);
        counts.push_back(static_cast<double>(j.times.size()));
        for (std::size_t k = 1; k < j.times.size(); ++k) ASSERT_LT(j.times[k - 1], j.times[k]);
        ASSERT_EQ(j.times.size(), j.marks.size());
        if (!j.times.empty()) ASSERT_LE(j.times.back(), 50.0);
    }
    const auto mo = teststats::moments(counts);
    EXPECT_NEAR(mo.mean, 100.0, 3.0 * mo.std_error);
}

TEST(SimulateJumps, UnitHorizonAndDeterminism) {
    const auto m = model(0.0, 1.0, 1.0, 3.0, 1, 1);
    std::vector<double> counts;
    for (int r = 0; r < 20000; ++r) {
        RngStream rng = derive_replicate_seed(4, r, 0);
        counts.push_back(static_cast<double>(simulate_jumps(m, rng).times.size()));
    }
    const auto mo = teststats::moments(counts);
    EXPECT_NEAR(mo.mean, 3.0, 3.0 * mo.std_error);
    EXPECT_NEAR(mo.variance, 3.0, 0.15);  // Poisson: variance = mean
    RngStream a(9), b(9);
    const auto ja = simulate_jumps(model(0.0, 1.0, 1.0, 2.0, 10, 1), a);
    const auto jb = simulate_jumps(model(0.0, 1.0, 1.0, 2.0, 10, 1), b);
    EXPECT_EQ(ja.times, jb.times);
    EXPECT_EQ(ja.marks, jb.marks);
}

TEST(SimulateZeta, BrownianIsometry) {
    const auto m = model(0.0, 1.3, 0.0, 1.0, 3, 3, 100);
    const auto s = sample_zeta(m, {}, 10000, 31);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(s.cov(j, j), 1.69, 3.0 * s.cov_se(j, j));
}

TEST(SimulateZeta, JumpVarianceAtZeroDrift) {
    const auto m = model(0.0, 1.0, 0.8, 1.0, 4, 3, 100);
    const auto jumps = fixed_jumps({0.3, 1.75, 2.2, 3.9});
    const auto s = sample_zeta(m, jumps, 40000, 32);
    for (int j = 1; j <= 3; ++j) {
        double sum = 0.0;
        for (double t : jumps.times) sum += trig_basis(j, t) * trig_basis(j, t);
        const double expected = 1.0 + 0.64 / 4.0 * sum;
        EXPECT_NEAR(s.cov(j - 1, j - 1), expected, 3.0 * s.cov_se(j - 1, j - 1));
    }
}

TEST(SimulateZeta, SameSeedSameOutput) {
    const auto m = model(-0.7, 1.0, 0.5, 1.0, 3, 4);
    RngStream a(5), b(5);
    const auto ja = simulate_jumps(m, a);
    const auto jb = simulate_jumps(m, b);
    EXPECT_EQ(simulate_zeta(m, ja, a), simulate_zeta(m, jb, b));
}

TEST(Lse, Examples) {
    Vector theta(3);
    theta << 1, -2, 0.5;
    EXPECT_EQ(lse(theta, Vector::Zero(3), 7), theta);
    Vector zeta(3);
    zeta << 2, 2, 2;
    EXPECT_TRUE(lse(theta, zeta, 4).isApprox(theta + Vector::Constant(3, 1.0)));
}

TEST(Lse, UnbiasedAndConditionalVariance) {
    // Jumps redrawn per replicate; Var(theta_hat_j) n = E v_jj(n).
    const auto m = model(-0.5, 1.0, 0.7, 1.0, 2, 3, 50);
    Vector theta(3);
    theta << 0.5, -0.25, 1.0;
    const int reps = 20000;
    std::vector<std::vector<double>> est(3), scaled_sq(3), vjj(3);
    for (int r = 0; r < reps; ++r) {
        RngStream rng = derive_replicate_seed(41, r, 0);
        const auto jumps = simulate_jumps(m, rng);
        const Vector th = lse(theta, simulate_zeta(m, jumps, rng), m.n);
        const Matrix v = conditional_covariance(m, jumps).v;
        for (int j = 0; j < 3; ++j) {
            est[j].push_back(th(j));
            scaled_sq[j].push_back(m.n * (th(j) - theta(j)) * (th(j) - theta(j)));
            vjj[j].push_back(v(j, j));
        }
    }
    for (int j = 0; j < 3; ++j) {
        const auto me = teststats::moments(est[j]);
        EXPECT_NEAR(me.mean, theta(j), 3.0 * me.std_error);
        const auto ms = teststats::moments(scaled_sq[j]);
        const auto mv = teststats::moments(vjj[j]);
        EXPECT_NEAR(ms.mean, mv.mean, 3.0 * std::hypot(ms.std_error, mv.std_error));
    }
}

TEST(LseLargeSample, UnbiasedAtOneHundredThousand) {
    const auto m = model(-1.0, 1.0, 0.5, 1.0, 1, 3, 40);
    Vector theta(3);
    theta << 1.0, 0.0, -1.0;
    std::vector<std::vector<double>> est(3);
    for (int r = 0; r < 100000; ++r) {
        RngStream rng = derive_replicate_seed(42, r, 0);
        const Vector th = lse(theta, simulate_zeta(m, simulate_jumps(m, rng), rng), m.n);
        for (int j = 0; j < 3; ++j) est[j].push_back(th(j));
    }
    for (int j = 0; j < 3; ++j) {
        const auto me = teststats::moments(est[j]);
        EXPECT_NEAR(me.mean, theta(j), 3.0 * me.std_error);
    }
}

TEST(KernelEpsilon, ZeroDrift) {
    EXPECT_EQ(kernel_epsilon(basis_function(2), 3.3, 0.0), 0.0);
}

TEST(KernelEpsilon, ConstantFunctionClosedForm) {
    // a int_0^t e^{a(t-s)} (1 + e^{2as}) ds = e^{2at} - 1
    const auto one = basis_function(1);
    for (double a : {-0.1, -0.5, -2.0, -7.0})
        for (double t : {0.1, 0.5, 1.0, 3.7, 10.0})
            EXPECT_NEAR(kernel_epsilon(one, t, a), std::expm1(2.0 * a * t), 1e-9);
}

TEST(KernelEpsilon, Envelope) {
    for (int j = 1; j <= 5; ++j)
        for (double a : {-0.3, -1.0, -4.0})
            for (double t = 0.0; t <= 6.0; t += 0.25)
                EXPECT_LE(std::abs(kernel_epsilon(basis_function(j), t, a)), 2.0 * kBasisSupNorm);
}

TEST(KernelL, ZeroDriftAndConstantFunction) {
    EXPECT_EQ(kernel_L(basis_function(3), 1.0, 0.4, 0.0), 0.0);
    const auto one = basis_function(1);
    for (double a : {-0.2, -1.0, -3.0})
        for (double x : {0.0, 0.3, 1.0, 4.0})
            EXPECT_NEAR(kernel_L(one, x, 0.77, a), a * std::exp(2.0 * a * x), 1e-9);
}

TEST(KernelL, EnvelopeAndDecay) {
    for (int j = 1; j <= 5; ++j)
        for (double a : {-0.5, -2.0})
            for (double x = 0.0; x <= 5.0; x += 0.25)
                for (double y : {0.0, 0.3, 2.71}) {
                    const double env = 2.0 * kBasisSupNorm * std::abs(a) * std::exp(a * x);
                    EXPECT_LE(std::abs(kernel_L(basis_function(j), x, y, a)), env + 1e-12);
                }
    EXPECT_THROW(kernel_L(basis_function(1), -1.0, 0.0, -1.0), Error);
}

TEST(ConditionalCovariance, PureBrownianIsScaledIdentity) {
    const auto m = model(0.0, 1.7, 0.0, 1.0, 5, 4);
    const auto cc = conditional_covariance(m, fixed_jumps({0.5, 2.5}));
    EXPECT_TRUE(cc.v.isApprox(1.7 * 1.7 * Matrix::Identity(4, 4), 1e-15));
    EXPECT_TRUE(check_lemma_A1(cc, 1.7));
}

TEST(ConditionalCovariance, ZeroDriftJumpSum) {
    const auto m = model(0.0, 1.0, 0.9, 1.0, 3, 3);
    const auto jumps = fixed_jumps({0.2, 1.1, 2.95});
    const Matrix v = conditional_covariance(m, jumps).v;
    Matrix expected = Matrix::Identity(3, 3);
    for (double t : jumps.times)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                expected(i, j) += 0.81 / 3.0 * trig_basis(i + 1, t) * trig_basis(j + 1, t);
    EXPECT_LT((v - expected).cwiseAbs().maxCoeff(), 1e-14);
    const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(v).eigenvalues().minCoeff();
    EXPECT_GE(lmin, 1.0 - 1e-12);
}

TEST(ConditionalCovariance, MatchesPsiOracle) {
    struct Case {
        double a, rho1, rho2;
        int n, p;
        std::vector<double> times;
    };
    const std::vector<Case> cases = {
        {-0.5, 1.0, 0.5, 20, 3, {0.7, 3.14, 3.2, 11.0, 19.99}},
        {-0.5, 1.0, 0.0, 6, 5, {}},
        {-2.0, 0.8, 1.3, 4, 4, {0.01, 1.5, 3.999}},
        {-0.05, 1.2, 0.7, 3, 6, {1.0, 2.5}},
        {-6.0, 1.0, 1.0, 2, 3, {0.4, 1.6}},
    };
    for (const auto& c : cases) {
        const auto m = model(c.a, c.rho1, c.rho2, 1.0, c.n, c.p);
        const auto jumps = fixed_jumps(c.times);
        const Matrix v = conditional_covariance(m, jumps).v;
        const Matrix oracle = psi_covariance(m, jumps);
        EXPECT_LT((v - oracle).cwiseAbs().maxCoeff(), 1e-9) << "a=" << c.a << " p=" << c.p;
        EXPECT_TRUE(v.isApprox(v.transpose(), 0.0));
    }
}

TEST(ConditionalCovariance, MonteCarloAcrossSettings) {
    struct Case {
        double a, rho1, rho2;
    };
    const std::vector<Case> cases = {
        {0.0, 1.0, 0.0}, {0.0, 1.0, 0.8}, {-0.5, 1.0, 0.0}, {-0.5, 1.0, 0.5}, {-1.5, 0.7, 1.2},
    };
    const auto times = fixed_jumps({0.35, 1.2, 1.9, 2.6});
    for (const auto& c : cases) {
        const auto m = model(c.a, c.rho1, c.rho2, 1.0, 3, 3, 100);
        const Matrix v = conditional_covariance(m, times).v;
        const auto s = sample_zeta(m, times, 100000, 51);
        EXPECT_LE(frobenius_rel(s.cov, v), 0.03) << "a=" << c.a << " rho2=" << c.rho2;
    }
}

TEST(ConditionalCovariance, ConditionalGaussianMoments) {
    const auto m = model(-0.5, 1.0, 0.5, 1.0, 3, 3, 100);
    const auto s = sample_zeta(m, fixed_jumps({0.5, 1.25, 2.75}), 100000, 52);
    const double n = 100000.0;
    for (int j = 0; j < 3; ++j) {
        const auto mo = teststats::moments(s.comps[j]);
        EXPECT_NEAR(mo.skewness, 0.0, 3.0 * std::sqrt(6.0 / n));
        EXPECT_NEAR(mo.excess_kurtosis, 0.0, 3.0 * std::sqrt(24.0 / n));
    }
}

TEST(SimulateZeta, GridConvergence) {
    // The streams at the two resolutions are independent, so the comparison is
    // at 3 joint SE; each resolution is also checked against V_n directly.
    const auto coarse = model(-1.0, 1.0, 0.6, 1.0, 2, 3, 200);
    auto fine = coarse;
    fine.grid_steps_per_unit = 400;
    const auto times = fixed_jumps({0.45, 1.3});
    const Matrix v = conditional_covariance(coarse, times).v;
    const auto sc = sample_zeta(coarse, times, 40000, 61);
    const auto sf = sample_zeta(fine, times, 40000, 62);
    for (int j = 0; j < 3; ++j) {
        const double se = std::hypot(sc.cov_se(j, j), sf.cov_se(j, j));
        EXPECT_LT(std::abs(sc.cov(j, j) - sf.cov(j, j)), 3.0 * se);
        EXPECT_LT(std::abs(sc.cov(j, j) - v(j, j)), 3.0 * sc.cov_se(j, j));
    }
}

TEST(LemmaA1, HoldsWithoutDrift) {
    const auto m = model(0.0, 1.0, 1.0, 2.0, 5, 4);
    for (int r = 0; r < 100; ++r) {
        RngStream rng = derive_replicate_seed(71, r, 0);
        EXPECT_TRUE(check_lemma_A1(conditional_covariance(m, simulate_jumps(m, rng)), 1.0));
    }
}

TEST(LemmaA1, ConstantDirectionUnderDrift) {
    // For phi_1 = 1, zeta_1 = (xi_n - xi_0)/sqrt(n), so
    //   v_11 = [rho1^2 (1 - e^{2an}) / (2|a|) + rho2^2 sum_l e^{2a(n - T_l)}] / n,
    // which stays O(1/n) and so falls below rho1^2 whenever a < 0.
    const auto m = model(-0.5, 1.0, 1.0, 1.0, 5, 3);
    for (int r = 0; r < 100; ++r) {
        RngStream rng = derive_replicate_seed(72, r, 0);
        const auto jumps = simulate_jumps(m, rng);
        const auto cc = conditional_covariance(m, jumps);
        double jump_sum = 0.0;
        for (double t : jumps.times) jump_sum += std::exp(2.0 * m.a * (m.n - t));
        const double v11 = (-std::expm1(2.0 * m.a * m.n) / (2.0 * std::abs(m.a)) + jump_sum) / m.n;
        EXPECT_NEAR(cc.v(0, 0), v11, 1e-9);
        if (v11 < 1.0 - 1e-6) EXPECT_FALSE(check_lemma_A1(cc, 1.0));  // lambda_min <= v_11
    }
}

TEST(LemmaA2, DeterministicCorner) {
    const auto m = model(0.0, 1.5, 0.0, 1.0, 4, 3);
    const auto res = check_lemma_A2(m, 50, 1);
    EXPECT_NEAR(res.mean_lambda_max, 2.25, 1e-12);
    EXPECT_NEAR(res.std_error, 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(res.bound, 5.0 * 3 * 2.25);
    EXPECT_TRUE(res.passed);
}

TEST(LemmaA2, ReferenceSetting) {
    const auto m = model(-0.5, 1.0, 1.0, 1.0, 20, 3);
    const auto res = check_lemma_A2(m, 1000, 7);
    EXPECT_DOUBLE_EQ(res.bound, 30.0);
    EXPECT_LE(res.mean_lambda_max, 30.0 + 3.0 * res.std_error);
    EXPECT_TRUE(res.passed);
}

TEST(LemmaA2, BoundLinearInP) {
    for (int p : {2, 4, 8}) {
        const auto m = model(-0.5, 1.0, 1.0, 1.0, 5, p);
        const auto res = check_lemma_A2(m, 200, 8);
        EXPECT_DOUBLE_EQ(res.bound, 10.0 * p);
        EXPECT_TRUE(res.passed) << "p=" << p;
    }
}

TEST(LemmaA2, ThreadCountInvariant) {
    const auto m = model(-0.5, 1.0, 1.0, 1.0, 5, 3);
    const auto one = check_lemma_A2(m, 300, 9, 1);
    const auto many = check_lemma_A2(m, 300, 9, 8);
    EXPECT_EQ(one.mean_lambda_max, many.mean_lambda_max);
    EXPECT_EQ(one.std_error, many.std_error);
}

TEST(ImprovedEstimatorOu, Examples) {
    Vector th(1);
    th << 0.7;
    EXPECT_EQ(improved_estimator_ou(th, model(-0.5, 1.0, 0.5, 1.0, 10, 1), 0.4), th);

    const auto m = model(-0.5, 1.0, 0.5, 1.0, 50, 5);
    const double g = gamma_p_quadrature(5, ou_default_compact_set(m, 1.0)).value;
    const double c = ou_shrink_constant(m, g).c;
    EXPECT_NEAR(c, 4.0 * g / 50.0, 1e-15);
    EXPECT_NEAR(ou_risk_bound(m, g), -c * c, 1e-18);
    Vector y(5);
    y << 1, 2, 0, -1, 0.5;
    EXPECT_TRUE(improved_estimator_ou(y, m, g).isApprox((1.0 - c / y.norm()) * y, 1e-15));
    EXPECT_THROW(improved_estimator_ou(Vector::Zero(5), m, g), Error);

    // Shrinkage vanishes as n grows.
    double prev = c;
    for (int n : {100, 1000, 100000}) {
        auto mn = m;
        mn.n = n;
        const double cn = ou_shrink_constant(mn, g).c;
        EXPECT_LT(cn, prev);
        prev = cn;
    }
    EXPECT_LT(prev, 1e-4);
}

TEST(OuDefaults, CompactSet) {
    const auto m = model(-0.5, 2.0, 1.0, 3.0, 10, 4);
    const auto spec = ou_default_compact_set(m, 1.5);
    EXPECT_DOUBLE_EQ(spec.lambda_star, 0.4);
    EXPECT_DOUBLE_EQ(spec.a_star, 5.0 * 4 * 7.0 / 10.0);
    EXPECT_THROW(model(0.1, 1.0, 0.0, 1.0, 1, 1).validate(), Error);
}
