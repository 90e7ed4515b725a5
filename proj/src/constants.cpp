#include "condshrink/constants.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "condshrink/error.hpp"
#include "condshrink/quadrature.hpp"

namespace condshrink {

namespace {

constexpr double kAbsTol = 1e-12;
constexpr double kRelTol = 1e-14;

void require_dimension(int p) {
    require(p >= 2, ErrorCode::domain, "dimension p must be >= 2, got " + std::to_string(p));
}

// exp(-r^2/2) < 1e-300 for r > 37.2; the chi_p bulk sits near sqrt(p). The
// 1/(mu + r) factor only damps the integrand, so mu never widens the range.
double truncation_radius(int p) {
    return std::sqrt(static_cast<double>(p)) + 40.0;
}

}  // namespace

void CompactSetSpec::validate() const {
    require(std::isfinite(d) && d >= 0.0, ErrorCode::domain, "compact set radius d must be >= 0");
    require(std::isfinite(lambda_star) && lambda_star > 0.0, ErrorCode::domain,
            "lambda_star must be > 0");
    require(std::isfinite(a_star) && a_star > 0.0, ErrorCode::domain, "a_star must be > 0");
}

double CompactSetSpec::mu() const { return d / std::sqrt(a_star); }

std::string_view to_string(ConstantSource source) {
    switch (source) {
        case ConstantSource::theorem_2_1: return "theorem_2_1";
        case ConstantSource::theorem_3_1: return "theorem_3_1";
        case ConstantSource::ar1_proposition: return "ar1_proposition";
        case ConstantSource::manual: return "manual";
    }
    return "manual";
}

double integral_I(double a) {
    require(!std::isnan(a) && a >= 0.0, ErrorCode::domain, "integral_I: a must be >= 0");
    require(a > 0.0, ErrorCode::divergent_integral,
            "integral_I: the integral diverges at the origin for a = 0");
    const auto f = [a](double r) { return std::exp(-0.5 * r * r) / (a + r); };
    const double r_max = truncation_radius(2);
    // Split at r = 1 so the 1/(a+r) spike near the origin for small a and the
    // Gaussian bulk are refined independently.
    const double split = std::min(1.0, r_max);
    const auto head = quad::adaptive_gk15(f, 0.0, split, kAbsTol * 0.5, kRelTol);
    const auto tail = quad::adaptive_gk15(f, split, r_max, kAbsTol * 0.5, kRelTol);
    return head.value + tail.value;
}

GammaPValue gamma_p_quadrature(int p, const CompactSetSpec& spec) {
    require_dimension(p);
    spec.validate();
    GammaPValue out{0.0, GammaMethod::quadrature, p, spec};
    const double half_p = 0.5 * p;
    if (spec.d == 0.0) {
        // mu/d -> 1/sqrt(a*), integrand -> r^{p-2} exp(-r^2/2).
        out.value = boost::math::tgamma_delta_ratio(half_p - 0.5, 0.5) /
                    std::sqrt(2.0 * spec.a_star);
        return out;
    }
    const double mu = spec.mu();
    const double log_norm = (half_p - 1.0) * std::numbers::ln2 + std::lgamma(half_p);
    // chi_p density divided by (mu + r), evaluated in log space.
    const auto f = [p, mu, log_norm](double r) {
        if (r <= 0.0) return p == 1 ? 1.0 / mu : 0.0;
        return std::exp((p - 1) * std::log(r) - 0.5 * r * r - log_norm) / (mu + r);
    };
    const double r_max = truncation_radius(p);
    const double peak = std::sqrt(static_cast<double>(p - 1));
    const auto lo = quad::adaptive_gk15(f, 0.0, peak, kAbsTol * 0.5, kRelTol);
    const auto hi = quad::adaptive_gk15(f, peak, r_max, kAbsTol * 0.5, kRelTol);
    out.value = (lo.value + hi.value) / std::sqrt(spec.a_star);
    return out;
}

GammaPValue gamma_p_closed(int p, const CompactSetSpec& spec) {
    require_dimension(p);
    spec.validate();
    require(spec.d > 0.0, ErrorCode::domain,
            "gamma_p_closed: d = 0 divides by zero; use gamma_p_quadrature for the limit");
    const double mu = spec.mu();
    const double half_p = 0.5 * p;
    const double log_denom = (half_p - 1.0) * std::numbers::ln2 + std::lgamma(half_p);
    const double log_mu = std::log(mu);

    // Each term is divided by the denominator in log space so that large p
    // neither overflows Gamma nor the powers of mu.
    long double numerator = 0.0L;
    for (int j = 0; j <= p - 2; ++j) {
        const double log_mag = (p - 1 - j) * log_mu + 0.5 * (j - 1) * std::numbers::ln2 +
                               std::lgamma(0.5 * (j + 1)) - log_denom;
        const double sign = ((p - j) % 2 == 0) ? 1.0 : -1.0;
        numerator += static_cast<long double>(sign * std::exp(log_mag));
    }
    // (-mu)^p I(mu) / denom
    const double tail_sign = (p % 2 == 0) ? 1.0 : -1.0;
    const double tail = tail_sign * std::exp(p * log_mu - log_denom) * integral_I(mu);
    numerator -= static_cast<long double>(tail);

    GammaPValue out{static_cast<double>(numerator / spec.d), GammaMethod::closed_form, p, spec};
    return out;
}

double chi_mean(int p) {
    require(p >= 1, ErrorCode::domain, "chi_mean: p must be >= 1");
    return std::numbers::sqrt2 / boost::math::tgamma_delta_ratio(0.5 * p, 0.5);
}

double risk_at_zero(int p) {
    require_dimension(p);
    // (p-1) Gamma((p-1)/2) / (sqrt 2 Gamma(p/2)) = E chi_p
    const double m = (p - 1) / std::numbers::sqrt2 *
                     boost::math::tgamma_delta_ratio(0.5 * (p - 1), 0.5);
    return p - m * m;
}

ShrinkageConstant shrink_constant_theorem21(int p, double lambda_star, double gamma_p) {
    require_dimension(p);
    require(lambda_star > 0.0, ErrorCode::domain, "lambda_star must be > 0");
    require(gamma_p > 0.0, ErrorCode::domain, "gamma_p must be > 0");
    return {(p - 1) * lambda_star * gamma_p, ConstantSource::theorem_2_1};
}

double risk_improvement_bound(int p, double lambda_star, double gamma_p) {
    const double c = shrink_constant_theorem21(p, lambda_star, gamma_p).c;
    return -c * c;
}

}  // namespace condshrink
