#pragma once

#include <string_view>

#include <Eigen/Dense>

#include "condshrink/constants.hpp"

namespace condshrink {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class EstimatorId {
    mle,
    james_stein,
    shrink,
    // Positive-part truncation of shrink; an extension, not part of the
    // estimator's original definition.
    shrink_positive_part,
};

std::string_view to_string(EstimatorId id);
EstimatorId estimator_from_string(std::string_view name);

struct Estimate {
    Vector theta_hat;
    EstimatorId estimator_id = EstimatorId::mle;
};

Estimate estimate_mle(const Vector& y);

/// (1 - (p-2)/|y|^2) y. Throws singular_observation when |y| = 0.
Estimate estimate_james_stein(const Vector& y);

/// (1 - c/|y|) y with no positive-part truncation: the factor is negative when
/// |y| < c. Throws singular_observation when |y| = 0.
Estimate estimate_shrink(const Vector& y, const ShrinkageConstant& c);

/// max(0, 1 - c/|y|) y.
Estimate estimate_shrink_positive_part(const Vector& y, const ShrinkageConstant& c);

/// Dispatch by id; `c` is ignored by mle and james_stein.
Estimate apply_estimator(EstimatorId id, const Vector& y, const ShrinkageConstant& c);

}  // namespace condshrink
