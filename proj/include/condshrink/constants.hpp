#pragma once

// Special constants of the improved shrinkage estimator: the integral I(a),
// the lower bound gamma_p on inf E 1/|Y| (finite-sum and quadrature forms),
// the zero-point risk r_p, and the shrinkage constants built from them.

#include <string_view>

namespace condshrink {

/// Parameter set Theta and covariance bounds: d = sup |theta|, lambda_star a
/// lower bound on lambda_min(D), a_star an upper bound on E lambda_max(D).
struct CompactSetSpec {
    double d = 0.0;
    double lambda_star = 1.0;
    double a_star = 1.0;

    void validate() const;
    /// mu = d / sqrt(a_star)
    double mu() const;
};

enum class GammaMethod { closed_form, quadrature };

struct GammaPValue {
    double value = 0.0;
    GammaMethod method = GammaMethod::quadrature;
    int p = 2;
    CompactSetSpec spec;
};

enum class ConstantSource { theorem_2_1, theorem_3_1, ar1_proposition, manual };

std::string_view to_string(ConstantSource source);

struct ShrinkageConstant {
    double c = 0.0;
    ConstantSource source = ConstantSource::manual;
};

/// I(a) = int_0^inf exp(-r^2/2) / (a + r) dr. Throws for a <= 0 (a = 0 diverges).
double integral_I(double a);

/// Integral representation: gamma_p = E[1 / (mu + chi_p)] / sqrt(a_star),
/// chi_p a chi-distributed radius with p degrees of freedom. Handles d = 0 by
/// its analytic limit Gamma((p-1)/2) / (sqrt(2 a_star) Gamma(p/2)).
GammaPValue gamma_p_quadrature(int p, const CompactSetSpec& spec);

/// Finite-sum form obtained by unrolling r^{p-1}/(mu+r) = r^{p-2} - mu r^{p-2}/(mu+r)
/// down to I(mu). Requires d > 0.
GammaPValue gamma_p_closed(int p, const CompactSetSpec& spec);

/// E chi_p = sqrt(2) Gamma((p+1)/2) / Gamma(p/2), accurate for large p.
double chi_mean(int p);

/// r_p = p - [(p-1) Gamma((p-1)/2) / (sqrt(2) Gamma(p/2))]^2, the risk of the
/// improved estimator at theta = 0 under identity covariance with c = E chi_p.
double risk_at_zero(int p);

/// c = (p - 1) lambda_star gamma_p.
ShrinkageConstant shrink_constant_theorem21(int p, double lambda_star, double gamma_p);

/// -[(p - 1) lambda_star gamma_p]^2, the guaranteed sup of R(theta*) - R(MLE).
double risk_improvement_bound(int p, double lambda_star, double gamma_p);

}  // namespace condshrink
