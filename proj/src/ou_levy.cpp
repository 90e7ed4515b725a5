#include "condshrink/ou_levy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "condshrink/error.hpp"
#include "condshrink/parallel.hpp"
#include "condshrink/quadrature.hpp"

namespace condshrink {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kKernelTol = 1e-9;
constexpr double kLemmaA1Slack = 1e-6;
constexpr std::uint64_t kLemmaA2StreamTag = 0xA2;

/// All p basis values at t, from one sincos and the angle-addition recurrence.
void basis_all(double t, int p, double* out) {
    out[0] = 1.0;
    if (p == 1) return;
    const double x = kTwoPi * (t - std::floor(t));
    const double c1 = std::cos(x);
    const double s1 = std::sin(x);
    double ck = c1;
    double sk = s1;
    for (int j = 2; j <= p; j += 2) {
        out[j - 1] = std::numbers::sqrt2 * ck;
        if (j < p) out[j] = std::numbers::sqrt2 * sk;
        const double c_next = ck * c1 - sk * s1;
        sk = sk * c1 + ck * s1;
        ck = c_next;
    }
}

/// (c, v) for an OU step of length h: c = int_0^h e^{a(h-s)} ds and
/// v = int_0^h e^{2a(h-s)} ds.
struct OuStep {
    double h = 0.0;
    double decay = 1.0;
    double dw_scale = 0.0;      // sqrt(h)
    double regress = 1.0;       // c / h
    double residual_sd = 0.0;   // sqrt(v - c^2 / h)

    OuStep() = default;
    OuStep(double a, double step) : h(step) {
        decay = std::exp(a * h);
        dw_scale = std::sqrt(h);
        const double c = (a == 0.0) ? h : std::expm1(a * h) / a;
        const double v = (a == 0.0) ? h : std::expm1(2.0 * a * h) / (2.0 * a);
        regress = c / h;
        residual_sd = std::sqrt(std::max(0.0, v - c * c / h));
    }
};

void check_basis_index(int j) {
    require(j >= 1, ErrorCode::domain, "basis index must be >= 1, got " + std::to_string(j));
}

/// Integral over [lo, hi] split into unit-length pieces, adaptive on each.
double piecewise_adaptive(const std::function<double(double)>& f, double lo, double hi,
                          double tol) {
    if (hi <= lo) return 0.0;
    const int pieces = std::max(1, static_cast<int>(std::ceil(hi - lo)));
    const double width = (hi - lo) / pieces;
    double total = 0.0;
    for (int k = 0; k < pieces; ++k) {
        const double a = lo + k * width;
        total += quad::adaptive_gk15(f, a, a + width, tol / pieces, 1e-13).value;
    }
    return total;
}

/// GL10 node k of the panel [lo, lo + width].
inline double gl_node(double lo, double width, int q) {
    return lo + 0.5 * width * (1.0 + quad::GL10::nodes[q]);
}

/// Panel width for the V_n quadratures: at most 1/8, shrunk for fast basis
/// oscillation and fast OU decay so each panel sees a smooth integrand.
double panel_width(const OuLevyModel& m) {
    const int kmax = m.p / 2;
    const int scale = std::max({1, kmax, static_cast<int>(std::ceil(std::abs(m.a)))});
    return 1.0 / (8.0 * scale);
}

/// Evaluates, at every GL10 node of `panels` equal panels on [lo, hi], the
/// cumulative integral R_j(t) = int_lo^t w(t, s) phi_j(s) k(s) ds for all
/// basis functions, where the propagation w is either exponential decay
/// e^{a(t-s)} (propagate = true) or 1 (propagate = false, k carries the
/// weight). Result is node-major: out[node * p + j].
template <class Weight>
void cumulative_on_nodes(double lo, double hi, int panels, int p, double a, bool propagate,
                         Weight&& weight, std::vector<double>& out) {
    const double width = (hi - lo) / panels;
    out.assign(static_cast<std::size_t>(panels) * quad::GL10::size * p, 0.0);
    std::vector<double> running(p, 0.0);
    std::vector<double> phi(p);
    std::vector<double> partial(p);
    for (int k = 0; k < panels; ++k) {
        const double tk = lo + k * width;
        for (int q = 0; q < quad::GL10::size; ++q) {
            const double tq = gl_node(tk, width, q);
            const double tau = tq - tk;
            std::fill(partial.begin(), partial.end(), 0.0);
            for (int r = 0; r < quad::GL10::size; ++r) {
                const double s = gl_node(tk, tau, r);
                const double w = 0.5 * tau * quad::GL10::weights[r] * weight(s) *
                                 (propagate ? std::exp(a * (tq - s)) : 1.0);
                basis_all(s, p, phi.data());
                for (int j = 0; j < p; ++j) partial[j] += w * phi[j];
            }
            const double carry = propagate ? std::exp(a * tau) : 1.0;
            double* dst = &out[(static_cast<std::size_t>(k) * quad::GL10::size + q) * p];
            for (int j = 0; j < p; ++j) dst[j] = carry * running[j] + partial[j];
        }
        std::fill(partial.begin(), partial.end(), 0.0);
        const double tk1 = tk + width;
        for (int r = 0; r < quad::GL10::size; ++r) {
            const double s = gl_node(tk, width, r);
            const double w = 0.5 * width * quad::GL10::weights[r] * weight(s) *
                             (propagate ? std::exp(a * (tk1 - s)) : 1.0);
            basis_all(s, p, phi.data());
            for (int j = 0; j < p; ++j) partial[j] += w * phi[j];
        }
        const double carry = propagate ? std::exp(a * width) : 1.0;
        for (int j = 0; j < p; ++j) running[j] = carry * running[j] + partial[j];
    }
}

/// sum over nodes of W * (phi_i K_j + phi_j K_i) on the panels of [lo, hi].
void symmetric_node_sum(double lo, double hi, int panels, int p, const std::vector<double>& kvals,
                        double scale, Matrix& acc) {
    const double width = (hi - lo) / panels;
    std::vector<double> phi(p);
    for (int k = 0; k < panels; ++k) {
        const double tk = lo + k * width;
        for (int q = 0; q < quad::GL10::size; ++q) {
            const double tq = gl_node(tk, width, q);
            const double w = scale * 0.5 * width * quad::GL10::weights[q];
            basis_all(tq, p, phi.data());
            const double* kv = &kvals[(static_cast<std::size_t>(k) * quad::GL10::size + q) * p];
            for (int i = 0; i < p; ++i)
                for (int j = 0; j < p; ++j) acc(i, j) += w * (phi[i] * kv[j] + phi[j] * kv[i]);
        }
    }
}

}  // namespace

void OuLevyModel::validate() const {
    require(std::isfinite(a) && a <= 0.0, ErrorCode::domain, "OU drift a must be <= 0");
    require(rho1 > 0.0, ErrorCode::domain, "rho1 must be > 0");
    require(rho2 >= 0.0, ErrorCode::domain, "rho2 must be >= 0");
    require(lambda > 0.0, ErrorCode::domain, "Poisson intensity lambda must be > 0");
    require(n >= 1, ErrorCode::domain, "horizon n must be an integer >= 1");
    require(p >= 1, ErrorCode::domain, "number of basis functions p must be >= 1");
    require(grid_steps_per_unit >= 1, ErrorCode::domain, "grid_steps_per_unit must be >= 1");
}

double trig_basis(int j, double t) {
    check_basis_index(j);
    if (j == 1) return 1.0;
    const int k = j / 2;
    const double x = kTwoPi * k * (t - std::floor(t));
    return std::numbers::sqrt2 * ((j % 2 == 0) ? std::cos(x) : std::sin(x));
}

BasisFunction basis_function(int j) {
    check_basis_index(j);
    return [j](double t) { return trig_basis(j, t); };
}

JumpRecord simulate_jumps(const OuLevyModel& model, RngStream& rng) {
    model.validate();
    JumpRecord rec;
    double t = rng.exponential(model.lambda);
    while (t <= model.n) {
        rec.times.push_back(t);
        t += rng.exponential(model.lambda);
    }
    rec.marks.reserve(rec.times.size());
    for (std::size_t l = 0; l < rec.times.size(); ++l) rec.marks.push_back(rng.normal());
    return rec;
}

Vector simulate_zeta(const OuLevyModel& model, const JumpRecord& jumps, RngStream& rng) {
    model.validate();
    require(jumps.times.size() == jumps.marks.size(), ErrorCode::domain,
            "jump record has mismatched times and marks");
    const int p = model.p;
    const int steps_per_unit = model.grid_steps_per_unit;
    const double h0 = 1.0 / steps_per_unit;
    const long total_steps = static_cast<long>(model.n) * steps_per_unit;
    const OuStep uniform_step(model.a, h0);

    // phi_j(k h0) for one period.
    std::vector<double> table(static_cast<std::size_t>(steps_per_unit) * p);
    for (int k = 0; k < steps_per_unit; ++k) basis_all(k * h0, p, &table[std::size_t(k) * p]);

    std::vector<double> brown(p, 0.0), drift(p, 0.0), jump(p, 0.0);
    std::vector<double> phi_prev(table.begin(), table.begin() + p);
    std::vector<double> phi_new(p);
    double xi = 0.0;
    double t_prev = 0.0;

    const auto advance = [&](double t_new, const double* phi_next) {
        const double h = t_new - t_prev;
        const OuStep step = (std::abs(h - h0) <= 1e-15) ? uniform_step : OuStep(model.a, h);
        const double dw = step.dw_scale * rng.normal();
        const double integral = step.regress * dw + step.residual_sd * rng.normal();
        const double xi_new = step.decay * xi + model.rho1 * integral;
        for (int j = 0; j < p; ++j) {
            brown[j] += phi_prev[j] * dw;
            drift[j] += 0.5 * h * (phi_prev[j] * xi + phi_next[j] * xi_new);
        }
        xi = xi_new;
        std::copy(phi_next, phi_next + p, phi_prev.begin());
        t_prev = t_new;
    };

    std::size_t l = 0;
    const std::size_t jump_count = jumps.times.size();
    for (long k = 1; k <= total_steps; ++k) {
        const double t_next = static_cast<double>(k) / steps_per_unit;
        while (l < jump_count && jumps.times[l] <= t_next) {
            const double tj = jumps.times[l];
            basis_all(tj, p, phi_new.data());
            if (tj > t_prev) advance(tj, phi_new.data());
            for (int j = 0; j < p; ++j) jump[j] += jumps.marks[l] * phi_new[j];
            xi += model.rho2 * jumps.marks[l];
            ++l;
        }
        if (t_next > t_prev) advance(t_next, &table[std::size_t(k % steps_per_unit) * p]);
    }

    const double norm = 1.0 / std::sqrt(static_cast<double>(model.n));
    Vector zeta(p);
    for (int j = 0; j < p; ++j)
        zeta(j) = norm * (model.a * drift[j] + model.rho1 * brown[j] + model.rho2 * jump[j]);
    return zeta;
}

Vector lse(const Vector& theta, const Vector& zeta, int n) {
    require(theta.size() == zeta.size(), ErrorCode::domain, "lse: dimension mismatch");
    require(n >= 1, ErrorCode::domain, "lse: horizon must be >= 1");
    return theta + zeta / std::sqrt(static_cast<double>(n));
}

double kernel_epsilon(const BasisFunction& g, double t, double a) {
    require(a <= 0.0, ErrorCode::domain, "kernel_epsilon: a must be <= 0");
    if (a == 0.0 || t <= 0.0) return 0.0;
    const auto f = [&](double s) {
        return std::exp(a * (t - s)) * g(s) * (1.0 + std::exp(2.0 * a * s));
    };
    return a * piecewise_adaptive(f, 0.0, t, kKernelTol / std::abs(a));
}

double kernel_L(const BasisFunction& g, double x, double y, double a) {
    require(a <= 0.0, ErrorCode::domain, "kernel_L: a must be <= 0");
    require(x >= 0.0, ErrorCode::domain, "kernel_L: x must be >= 0");
    if (a == 0.0) return 0.0;
    const auto f = [&](double s) { return std::exp(a * s) * g(s + y); };
    const double inner = piecewise_adaptive(f, 0.0, x, kKernelTol / (a * a));
    return a * std::exp(a * x) * (g(y) + a * inner);
}

ConditionalCovariance conditional_covariance(const OuLevyModel& model, const JumpRecord& jumps) {
    model.validate();
    require(jumps.times.size() == jumps.marks.size(), ErrorCode::domain,
            "jump record has mismatched times and marks");
    const int p = model.p;
    const double n = model.n;
    const double a = model.a;
    const double rho1_sq = model.rho1 * model.rho1;
    const double rho2_sq = model.rho2 * model.rho2;

    // Orthonormality over integer horizons: (1/n) int_0^n phi_i phi_j = delta_ij.
    Matrix v = rho1_sq * Matrix::Identity(p, p);

    const double width = panel_width(model);
    std::vector<double> kvals;
    if (a != 0.0) {
        // eps_{phi_j}(t) = a * int_0^t e^{a(t-s)} phi_j(s) (1 + e^{2as}) ds
        const int panels = static_cast<int>(std::lround(n / width));
        cumulative_on_nodes(0.0, n, panels, p, a, true,
                            [a](double s) { return 1.0 + std::exp(2.0 * a * s); }, kvals);
        for (double& x : kvals) x *= a;
        Matrix eps_term = Matrix::Zero(p, p);
        symmetric_node_sum(0.0, n, panels, p, kvals, 1.0, eps_term);
        v += rho1_sq / (2.0 * n) * eps_term;
    }

    if (rho2_sq > 0.0) {
        std::vector<double> phi_t(p);
        Matrix jump_term = Matrix::Zero(p, p);
        Matrix interaction = Matrix::Zero(p, p);
        for (double tl : jumps.times) {
            if (tl > n) continue;
            basis_all(tl, p, phi_t.data());
            for (int i = 0; i < p; ++i)
                for (int j = 0; j < p; ++j) jump_term(i, j) += phi_t[i] * phi_t[j];
            if (a == 0.0 || tl >= n) continue;
            // L_{phi_j}(t - T, T) = a e^{a(t-T)} (phi_j(T) + a int_T^t e^{a(u-T)} phi_j(u) du)
            const int panels = std::max(1, static_cast<int>(std::ceil((n - tl) / width)));
            cumulative_on_nodes(tl, n, panels, p, a, false,
                                [a, tl](double u) { return std::exp(a * (u - tl)); }, kvals);
            const double panel = (n - tl) / panels;
            for (int k = 0; k < panels; ++k) {
                for (int q = 0; q < quad::GL10::size; ++q) {
                    const double tq = gl_node(tl + k * panel, panel, q);
                    const double pre = a * std::exp(a * (tq - tl));
                    double* kv = &kvals[(static_cast<std::size_t>(k) * quad::GL10::size + q) * p];
                    for (int j = 0; j < p; ++j) kv[j] = pre * (phi_t[j] + a * kv[j]);
                }
            }
            symmetric_node_sum(tl, n, panels, p, kvals, 1.0, interaction);
        }
        v += rho2_sq / n * (jump_term + interaction);
    }

    v = 0.5 * (v + v.transpose()).eval();
    return {std::move(v), jumps};
}

bool check_lemma_A1(const ConditionalCovariance& cc, double rho1) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cc.v, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff() >= rho1 * rho1 - kLemmaA1Slack;
}

LemmaA2Result check_lemma_A2(const OuLevyModel& model, int replicates, std::uint64_t master_seed,
                             int threads) {
    model.validate();
    require(replicates >= 2, ErrorCode::domain, "check_lemma_A2 needs at least 2 replicates");
    std::vector<double> lambda_max(replicates);
    for_each_block(replicates, 64, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            RngStream rng = derive_replicate_seed(master_seed, r, kLemmaA2StreamTag);
            const auto cc = conditional_covariance(model, simulate_jumps(model, rng));
            Eigen::SelfAdjointEigenSolver<Matrix> eig(cc.v, Eigen::EigenvaluesOnly);
            lambda_max[r] = eig.eigenvalues().maxCoeff();
        }
    });
    double mean = 0.0;
    for (double x : lambda_max) mean += x;
    mean /= replicates;
    double ss = 0.0;
    for (double x : lambda_max) ss += (x - mean) * (x - mean);
    LemmaA2Result out;
    out.mean_lambda_max = mean;
    out.std_error = std::sqrt(ss / (replicates - 1) / replicates);
    out.bound = kLemmaA2Constant * model.p * model.rho_star();
    out.replicates = replicates;
    out.passed = mean <= out.bound + 3.0 * out.std_error;
    return out;
}

ShrinkageConstant ou_shrink_constant(const OuLevyModel& model, double gamma_p) {
    model.validate();
    require(model.n >= 2, ErrorCode::domain, "the improved OU estimator needs n >= 2");
    require(gamma_p > 0.0, ErrorCode::domain, "gamma_p must be > 0");
    return {model.rho1 * model.rho1 * (model.p - 1) * gamma_p / model.n,
            ConstantSource::theorem_3_1};
}

double ou_risk_bound(const OuLevyModel& model, double gamma_p) {
    const double c = ou_shrink_constant(model, gamma_p).c;
    return -c * c;
}

CompactSetSpec ou_default_compact_set(const OuLevyModel& model, double d) {
    model.validate();
    CompactSetSpec spec{d, model.rho1 * model.rho1 / model.n,
                        kLemmaA2Constant * model.p * model.rho_star() / model.n};
    spec.validate();
    return spec;
}

Vector improved_estimator_ou(const Vector& theta_hat, const OuLevyModel& model, double gamma_p) {
    require(theta_hat.size() == model.p, ErrorCode::domain,
            "improved_estimator_ou: dimension mismatch");
    return estimate_shrink(theta_hat, ou_shrink_constant(model, gamma_p)).theta_hat;
}

}  // namespace condshrink
