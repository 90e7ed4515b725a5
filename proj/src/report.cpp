#include "condshrink/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "condshrink/constants.hpp"
#include "condshrink/error.hpp"
#include "json.hpp"

namespace condshrink {

namespace {

using json = nlohmann::json;

std::string vector_field(const Vector& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) s += ';';
        s += format_number(v(i));
    }
    return s;
}

json vector_json(const Vector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// Plot geometry for the risk chart.
struct Frame {
    double left = 70, right = 610, top = 40, bottom = 380;
    double p_lo, p_hi, log_lo, log_hi;

    double x(double p) const {
        if (p_hi == p_lo) return 0.5 * (left + right);
        return left + (p - p_lo) / (p_hi - p_lo) * (right - left);
    }
    double y(double r) const {
        return bottom - (std::log10(r) - log_lo) / (log_hi - log_lo) * (bottom - top);
    }
};

std::string fixed(double v, int digits = 2) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << v;
    return os.str();
}

}  // namespace

std::string format_number(double x) {
    if (std::isnan(x)) return "NA";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

GammaTable gamma_table(int p_lo, int p_hi, double d, double a_star) {
    require(p_lo >= 2 && p_hi >= p_lo, ErrorCode::domain, "gamma_table: need 2 <= p_lo <= p_hi");
    const CompactSetSpec spec{d, 1.0, a_star};
    spec.validate();
    GammaTable table;
    std::string& out = table.csv;
    out = "p,gamma_closed,gamma_quadrature,abs_diff\r\n";
    for (int p = p_lo; p <= p_hi; ++p) {
        const double q = gamma_p_quadrature(p, spec).value;
        std::string closed = "NA", diff = "NA";
        if (d > 0.0) {
            const double c = gamma_p_closed(p, spec).value;
            const double delta = std::abs(c - q);
            table.max_abs_diff = std::max(table.max_abs_diff, delta);
            closed = format_number(c);
            diff = format_number(delta);
        }
        out += std::to_string(p) + ',' + closed + ',' + format_number(q) + ',' + diff + "\r\n";
        ++table.rows;
    }
    return table;
}

std::string fig1_csv(int p_max) {
    require(p_max >= 2, ErrorCode::domain, "fig1: p_max must be >= 2");
    std::string out = "p,r_p,james_stein,mle\r\n";
    for (int p = 2; p <= p_max; ++p) {
        // James-Stein at theta = 0 has risk 2 (at p = 2 it coincides with the MLE).
        const double js = 2.0;
        out += std::to_string(p) + ',' + format_number(risk_at_zero(p)) + ',' +
               format_number(js) + ',' + std::to_string(p) + "\r\n";
    }
    return out;
}

std::string fig1_svg(int p_max) {
    require(p_max >= 2, ErrorCode::domain, "fig1: p_max must be >= 2");
    Frame f;
    f.p_lo = 2;
    f.p_hi = p_max;
    f.log_lo = -1.0;  // 0.1
    f.log_hi = std::log10(std::max(5.0, 1.25 * p_max));

    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"680\" height=\"440\" "
          "viewBox=\"0 0 680 440\">\n"
       << "<rect width=\"680\" height=\"440\" fill=\"white\"/>\n"
       << "<text x=\"340\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"15\">Risk at theta = 0 (identity covariance)</text>\n";
    // axes
    os << "<line x1=\"" << f.left << "\" y1=\"" << f.bottom << "\" x2=\"" << f.right << "\" y2=\""
       << f.bottom << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << f.left << "\" y1=\"" << f.top << "\" x2=\"" << f.left << "\" y2=\""
       << f.bottom << "\" stroke=\"black\"/>\n";
    for (double tick : {0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0,
                        1000.0}) {
        if (std::log10(tick) > f.log_hi + 1e-12) break;
        const double y = f.y(tick);
        os << "<line x1=\"" << f.left - 5 << "\" y1=\"" << fixed(y) << "\" x2=\"" << f.left
           << "\" y2=\"" << fixed(y) << "\" stroke=\"black\"/>\n"
           << "<text x=\"" << f.left - 8 << "\" y=\"" << fixed(y + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
           << format_number(tick) << "</text>\n";
    }
    const int step = std::max(1, (p_max - 2) / 8);
    for (int p = 2; p <= p_max; p += step) {
        const double x = f.x(p);
        os << "<line x1=\"" << fixed(x) << "\" y1=\"" << f.bottom << "\" x2=\"" << fixed(x)
           << "\" y2=\"" << f.bottom + 5 << "\" stroke=\"black\"/>\n"
           << "<text x=\"" << fixed(x) << "\" y=\"" << f.bottom + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << p
           << "</text>\n";
    }
    os << "<text x=\"" << 0.5 * (f.left + f.right) << "\" y=\"" << f.bottom + 40
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">p</text>\n"
       << "<text x=\"18\" y=\"" << 0.5 * (f.top + f.bottom)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
          "transform=\"rotate(-90 18 "
       << 0.5 * (f.top + f.bottom) << ")\">risk (log scale)</text>\n";

    const auto hline = [&](double r, const char* color, const char* dash, const char* label) {
        const double y = f.y(r);
        os << "<line x1=\"" << f.left << "\" y1=\"" << fixed(y) << "\" x2=\"" << f.right
           << "\" y2=\"" << fixed(y) << "\" stroke=\"" << color << "\" stroke-dasharray=\"" << dash
           << "\"/>\n"
           << "<text x=\"" << f.right + 4 << "\" y=\"" << fixed(y + 4)
           << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color << "\">" << label
           << "</text>\n";
    };
    hline(0.5, "gray", "4 3", "0.5");
    hline(2.0, "darkorange", "6 3", "JS");

    const auto polyline = [&](auto&& value, const char* color, const char* name) {
        if (p_max == 2) {
            os << "<circle cx=\"" << fixed(f.x(2)) << "\" cy=\"" << fixed(f.y(value(2)))
               << "\" r=\"3\" fill=\"" << color << "\"><title>" << name << "</title></circle>\n";
            return;
        }
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (int p = 2; p <= p_max; ++p) {
            if (p > 2) os << ' ';
            os << fixed(f.x(p)) << ',' << fixed(f.y(value(p)));
        }
        os << "\"><title>" << name << "</title></polyline>\n";
    };
    polyline([](int p) { return static_cast<double>(p); }, "steelblue", "MLE");
    polyline([](int p) { return risk_at_zero(p); }, "crimson", "improved estimator r_p");

    // legend
    os << "<text x=\"" << f.left + 10 << "\" y=\"" << f.top + 14
       << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"crimson\">r_p</text>\n"
       << "<text x=\"" << f.left + 10 << "\" y=\"" << f.top + 28
       << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"steelblue\">MLE = p</text>\n"
       << "<text x=\"" << f.left + 10 << "\" y=\"" << f.top + 42
       << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"darkorange\">James-Stein = 2</text>\n"
       << "</svg>\n";
    return os.str();
}

std::string risks_csv(const ExperimentResult& result) {
    std::string out = "scenario,theta_norm,theta,estimator,risk,std_error,replicates\r\n";
    for (const auto& r : result.risks) {
        out += csv_field(r.scenario) + ',' + format_number(r.theta.norm()) + ',' +
               csv_field(vector_field(r.theta)) + ',' + std::string(to_string(r.estimator_id)) +
               ',' + format_number(r.mean) + ',' + format_number(r.std_error) + ',' +
               std::to_string(r.replicates) + "\r\n";
    }
    return out;
}

std::string dominance_csv(const ExperimentResult& result) {
    std::string out =
        "scenario,theta_norm,theta,risk_baseline,risk_improved,delta,delta_se,bound,"
        "sign_margin,bound_margin,verdict\r\n";
    for (const auto& row : result.dominance.rows) {
        out += csv_field(row.scenario) + ',' + format_number(row.theta.norm()) + ',' +
               csv_field(vector_field(row.theta)) + ',' + format_number(row.risk_baseline) + ',' +
               format_number(row.risk_improved) + ',' + format_number(row.delta) + ',' +
               format_number(row.delta_se) + ',' + format_number(row.bound) + ',' +
               format_number(-(row.delta + 3.0 * row.delta_se)) + ',' +
               format_number(row.bound + 3.0 * row.delta_se - row.delta) + ',' +
               (row.pass() ? "PASS" : "FAIL") + "\r\n";
    }
    return out;
}

std::string result_json(const ExperimentConfig& config, const ExperimentResult& result) {
    const auto& res = result.resolved;
    json j;
    j["name"] = config.name;
    j["model"] = std::string(to_string(config.model));
    j["p"] = config.p;
    j["compact_set"] = {{"d", res.compact_set.d},
                        {"lambda_star", res.compact_set.lambda_star},
                        {"a_star", res.compact_set.a_star},
                        {"mu", res.compact_set.mu()}};
    j["gamma_p"] = res.gamma_p;
    j["constant"] = {{"c", res.constant.c}, {"source", std::string(to_string(res.constant.source))}};
    j["bound"] = res.bound;
    j["replicates"] = config.replicates;
    j["seed"] = config.master_seed;
    j["singular_count"] = result.singular_count;
    json scen = json::array();
    for (std::size_t s = 0; s < res.scenario_labels.size(); ++s) {
        scen.push_back({{"label", res.scenario_labels[s]},
                        {"mean_trace", number_or_null(result.mean_trace[s])},
                        {"lambda_min_audit", number_or_null(result.lambda_min_audit[s])}});
    }
    j["scenarios"] = scen;
    json risks = json::array();
    for (const auto& r : result.risks)
        risks.push_back({{"scenario", r.scenario},
                         {"theta", vector_json(r.theta)},
                         {"estimator", std::string(to_string(r.estimator_id))},
                         {"risk", r.mean},
                         {"std_error", r.std_error},
                         {"replicates", r.replicates}});
    j["risks"] = risks;
    json rows = json::array();
    for (const auto& row : result.dominance.rows)
        rows.push_back({{"scenario", row.scenario},
                        {"theta", vector_json(row.theta)},
                        {"risk_baseline", row.risk_baseline},
                        {"risk_improved", row.risk_improved},
                        {"delta", row.delta},
                        {"delta_se", row.delta_se},
                        {"bound", row.bound},
                        {"sign_ok", row.sign_ok},
                        {"bound_ok", row.bound_ok},
                        {"floor_ok", row.floor_ok},
                        {"verdict", row.pass() ? "PASS" : "FAIL"}});
    j["dominance"] = {{"baseline", std::string(to_string(result.dominance.baseline))},
                      {"improved", std::string(to_string(result.dominance.improved))},
                      {"rows", rows},
                      {"verdict", result.dominance.pass ? "PASS" : "FAIL"}};
    return j.dump(2);
}

}  // namespace condshrink
