#pragma once

#include <string>
#include <vector>

#include "condshrink/risk_lab.hpp"

namespace condshrink {

/// Shortest round-trip decimal form, independent of the C locale.
std::string format_number(double x);

/// RFC 4180 field quoting.
std::string csv_field(const std::string& s);

struct GammaTable {
    std::string csv;
    double max_abs_diff = 0.0;  ///< over rows where both forms exist
    int rows = 0;
};

/// Columns p, gamma_closed, gamma_quadrature, abs_diff for p in [p_lo, p_hi].
/// With d = 0 the closed-form and difference columns are NA.
GammaTable gamma_table(int p_lo, int p_hi, double d, double a_star);

/// Columns p, r_p, james_stein, mle for p = 2..p_max.
std::string fig1_csv(int p_max);

/// Line chart of r_p against p with the 0.5 asymptote, the James-Stein risk 2
/// and the MLE risk p.
std::string fig1_svg(int p_max);

std::string risks_csv(const ExperimentResult& result);
std::string dominance_csv(const ExperimentResult& result);
std::string result_json(const ExperimentConfig& config, const ExperimentResult& result);

}  // namespace condshrink
