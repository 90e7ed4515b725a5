#pragma once

#include <functional>

namespace condshrink::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

/// Adaptive 15-point Gauss-Kronrod on [lo, hi]. Subdivides the interval with
/// the largest error estimate until the total error estimate is below
/// max(abs_tol, rel_tol * |value|) or max_intervals is reached.
Result adaptive_gk15(const std::function<double(double)>& f, double lo, double hi,
                     double abs_tol, double rel_tol = 0.0, int max_intervals = 2000);

/// Fixed composite Gauss-Legendre rule: [lo, hi] split into equal panels of
/// width at most max_width, each integrated with the 10-point rule.
double composite_gl10(const std::function<double(double)>& f, double lo, double hi,
                      double max_width);

/// Nodes and weights of the 10-point Gauss-Legendre rule on [-1, 1].
struct GL10 {
    static constexpr int size = 10;
    static const double nodes[size];
    static const double weights[size];
};

}  // namespace condshrink::quad
