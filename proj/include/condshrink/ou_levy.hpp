#pragma once

// Continuous-time regression dy = sum_j theta_j phi_j(t) dt + d xi_t on [0, n]
// with Ornstein-Uhlenbeck noise d xi = a xi dt + rho1 dw + rho2 dz driven by a
// Brownian motion and a compound Poisson process with standard normal marks.
// xi_0 = 0.

#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include "condshrink/constants.hpp"
#include "condshrink/estimators.hpp"
#include "condshrink/rng.hpp"

namespace condshrink {

struct OuLevyModel {
    double a = 0.0;       ///< drift, a <= 0
    double rho1 = 1.0;    ///< Brownian scale, > 0
    double rho2 = 0.0;    ///< jump scale, >= 0
    double lambda = 1.0;  ///< Poisson intensity, > 0
    int n = 1;            ///< integer horizon
    int p = 1;            ///< number of basis functions
    int grid_steps_per_unit = 200;

    void validate() const;
    /// rho* = rho1^2 + lambda rho2^2
    double rho_star() const { return rho1 * rho1 + lambda * rho2 * rho2; }
};

struct JumpRecord {
    std::vector<double> times;  ///< strictly increasing, in (0, n]
    std::vector<double> marks;  ///< standard normal jump sizes
};

// ---------------------------------------------------------------------------
// Trigonometric basis: phi_1 = 1, phi_{2k} = sqrt2 cos(2 pi k t),
// phi_{2k+1} = sqrt2 sin(2 pi k t). One-periodic, orthonormal on [0, 1].

inline constexpr double kBasisSupNorm = std::numbers::sqrt2;
/// M = 1 + 2 K^2 in the bound E lambda_max(V_n) <= M p rho*.
inline constexpr double kLemmaA2Constant = 1.0 + 2.0 * kBasisSupNorm * kBasisSupNorm;

double trig_basis(int j, double t);

using BasisFunction = std::function<double(double)>;
BasisFunction basis_function(int j);

// ---------------------------------------------------------------------------
// Simulation.

/// Jump times from cumulative Exponential(lambda) interarrivals, truncated at n.
JumpRecord simulate_jumps(const OuLevyModel& model, RngStream& rng);

/// zeta_j(n) = n^{-1/2} int_0^n phi_j d xi_t, with the Brownian part as a grid
/// sum, the jump part exact at the jump times, and the drift part
/// a int phi_j xi dt by the trapezoidal rule. xi moves between grid points and
/// jump times by exact OU transitions sampled jointly with the Brownian
/// increment.
Vector simulate_zeta(const OuLevyModel& model, const JumpRecord& jumps, RngStream& rng);

/// theta + n^{-1/2} zeta
Vector lse(const Vector& theta, const Vector& zeta, int n);

// ---------------------------------------------------------------------------
// Conditional covariance of zeta(n) given the jump times.

/// eps_g(t) = a int_0^t exp(a(t-s)) g(s) (1 + exp(2as)) ds
double kernel_epsilon(const BasisFunction& g, double t, double a);

/// L_g(x, y) = a exp(ax) (g(y) + a int_0^x exp(as) g(s+y) ds)
double kernel_L(const BasisFunction& g, double x, double y, double a);

struct ConditionalCovariance {
    Matrix v;
    JumpRecord jumps;
};

/// V_n(G) assembled entry by entry from the orthonormality term, the
/// eps-kernel term, the jump-sum term and the L-kernel jump-interaction term.
ConditionalCovariance conditional_covariance(const OuLevyModel& model, const JumpRecord& jumps);

/// lambda_min(V_n) >= rho1^2 - 1e-6
bool check_lemma_A1(const ConditionalCovariance& cc, double rho1);

struct LemmaA2Result {
    double mean_lambda_max = 0.0;
    double std_error = 0.0;
    double bound = 0.0;  ///< M p rho*
    int replicates = 0;
    bool passed = false;  ///< mean <= bound + 3 SE
};

/// Monte Carlo estimate of E lambda_max(V_n(G)) over jump configurations,
/// replicate r drawing its jumps from derive_replicate_seed(seed, r, tag).
LemmaA2Result check_lemma_A2(const OuLevyModel& model, int replicates, std::uint64_t master_seed,
                             int threads = 1);

// ---------------------------------------------------------------------------
// Improved estimator.

/// c = rho1^2 (p-1) gamma_p / n
ShrinkageConstant ou_shrink_constant(const OuLevyModel& model, double gamma_p);

/// -[rho1^2 (p-1) gamma_p / n]^2
double ou_risk_bound(const OuLevyModel& model, double gamma_p);

/// Bounds for the reduced model theta_hat = theta + n^{-1/2} zeta:
/// lambda_star = rho1^2 / n, a_star = M p rho* / n.
CompactSetSpec ou_default_compact_set(const OuLevyModel& model, double d);

/// (1 - rho1^2 (p-1) gamma_p / (n |theta_hat|)) theta_hat
Vector improved_estimator_ou(const Vector& theta_hat, const OuLevyModel& model, double gamma_p);

}  // namespace condshrink
