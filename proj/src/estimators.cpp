#include "condshrink/estimators.hpp"

#include <algorithm>
#include <string>

#include "condshrink/error.hpp"

namespace condshrink {

namespace {

double checked_norm(const Vector& y, const char* who) {
    require(y.size() >= 1, ErrorCode::domain, std::string(who) + ": empty observation");
    const double norm = y.norm();
    require(norm > 0.0, ErrorCode::singular_observation,
            std::string(who) + ": observation has zero norm");
    return norm;
}

}  // namespace

std::string_view to_string(EstimatorId id) {
    switch (id) {
        case EstimatorId::mle: return "mle";
        case EstimatorId::james_stein: return "james_stein";
        case EstimatorId::shrink: return "shrink";
        case EstimatorId::shrink_positive_part: return "shrink_positive_part";
    }
    return "mle";
}

EstimatorId estimator_from_string(std::string_view name) {
    if (name == "mle" || name == "lse") return EstimatorId::mle;
    if (name == "james_stein") return EstimatorId::james_stein;
    if (name == "shrink") return EstimatorId::shrink;
    if (name == "shrink_positive_part") return EstimatorId::shrink_positive_part;
    fail(ErrorCode::config, "unknown estimator '" + std::string(name) + "'");
}

Estimate estimate_mle(const Vector& y) { return {y, EstimatorId::mle}; }

Estimate estimate_james_stein(const Vector& y) {
    const double norm = checked_norm(y, "estimate_james_stein");
    const double p = static_cast<double>(y.size());
    return {(1.0 - (p - 2.0) / (norm * norm)) * y, EstimatorId::james_stein};
}

Estimate estimate_shrink(const Vector& y, const ShrinkageConstant& c) {
    const double norm = checked_norm(y, "estimate_shrink");
    if (c.c == 0.0) return {y, EstimatorId::shrink};
    return {(1.0 - c.c / norm) * y, EstimatorId::shrink};
}

Estimate estimate_shrink_positive_part(const Vector& y, const ShrinkageConstant& c) {
    const double norm = checked_norm(y, "estimate_shrink_positive_part");
    return {std::max(0.0, 1.0 - c.c / norm) * y, EstimatorId::shrink_positive_part};
}

Estimate apply_estimator(EstimatorId id, const Vector& y, const ShrinkageConstant& c) {
    switch (id) {
        case EstimatorId::mle: return estimate_mle(y);
        case EstimatorId::james_stein: return estimate_james_stein(y);
        case EstimatorId::shrink: return estimate_shrink(y, c);
        case EstimatorId::shrink_positive_part: return estimate_shrink_positive_part(y, c);
    }
    fail(ErrorCode::internal, "unhandled estimator id");
}

}  // namespace condshrink
