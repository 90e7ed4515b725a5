// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--only N]...
//
// Exit status is 0 only if every selected criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "CLI11.hpp"
#include "condshrink/config.hpp"
#include "condshrink/constants.hpp"
#include "condshrink/gaussian_models.hpp"
#include "condshrink/ou_levy.hpp"
#include "condshrink/parallel.hpp"
#include "condshrink/report.hpp"
#include "condshrink/risk_lab.hpp"

using namespace condshrink;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            notes.push_back("failed: " + what);
        }
    }
    void note(const std::string& s) { notes.push_back(s); }
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

ExperimentConfig bundled(const std::string& name) {
    return load_config_file(std::string(CONDSHRINK_CONFIG_DIR) + "/" + name + ".yaml");
}

ExperimentConfig identity_experiment(int p, double d, int reps, std::uint64_t seed) {
    ExperimentConfig c;
    c.name = "identity_p" + std::to_string(p);
    c.p = p;
    c.d = d;
    c.replicates = reps;
    c.master_seed = seed;
    c.threads = 1;
    c.estimators = {EstimatorId::mle, EstimatorId::james_stein, EstimatorId::shrink};
    c.theta.radii = {0.0};
    c.theta.directions = 0;
    return c;
}

// Risks are laid out theta-major, then in config estimator order.
const RiskEstimate& find_risk(const ExperimentConfig& c, const ExperimentResult& r, EstimatorId id,
                              std::size_t theta_index) {
    for (std::size_t e = 0; e < c.estimators.size(); ++e)
        if (c.estimators[e] == id) return r.risks.at(theta_index * c.estimators.size() + e);
    throw std::runtime_error("estimator not in config");
}

void check_dominance(Outcome& out, const ExperimentResult& res, const std::string& label) {
    double worst_sign = -1e300, worst_bound = -1e300;
    for (const auto& row : res.dominance.rows) {
        worst_sign = std::max(worst_sign, row.delta + 3.0 * row.delta_se);
        worst_bound = std::max(worst_bound, row.delta - row.bound - 3.0 * row.delta_se);
        out.check(row.sign_ok, fmt("%s: delta + 3SE = %.3g > 0 at |theta| = %.3g", label.c_str(),
                                   row.delta + 3.0 * row.delta_se, row.theta.norm()));
        out.check(row.bound_ok, fmt("%s: delta = %.4g above bound %.4g + 3SE at |theta| = %.3g",
                                    label.c_str(), row.delta, row.bound, row.theta.norm()));
    }
    out.note(fmt("%s: %zu rows, bound %.5g, max(delta + 3SE) = %.4g, max(delta - bound - 3SE) = %.4g",
                 label.c_str(), res.dominance.rows.size(), res.resolved.bound, worst_sign,
                 worst_bound));
}

// 1. closed form against quadrature for gamma_p
Outcome criterion1() {
    Outcome out;
    double worst = 0.0;
    for (int p = 2; p <= 10; ++p)
        for (double d : {0.5, 1.0, 2.0, 5.0})
            for (double a_star : {0.5, 1.0, 4.0}) {
                const CompactSetSpec spec{d, 1.0, a_star};
                const double diff = std::abs(gamma_p_closed(p, spec).value -
                                             gamma_p_quadrature(p, spec).value);
                worst = std::max(worst, diff);
                out.check(diff <= 1e-8, fmt("p=%d d=%g a*=%g diff=%.3g", p, d, a_star, diff));
            }
    out.note(fmt("108 points, max |closed - quadrature| = %.3g", worst));
    return out;
}

// 2. zero-point risk of the improved estimator
Outcome criterion2() {
    Outcome out;
    out.check(std::abs(risk_at_zero(2) - (2.0 - std::numbers::pi / 2.0)) < 1e-14, "r_2 closed form");
    out.check(std::abs(risk_at_zero(3) - (3.0 - 8.0 / std::numbers::pi)) < 1e-14, "r_3 closed form");
    for (int p : {2, 5, 10}) {
        auto c = identity_experiment(p, 0.0, 100000, 600 + p);
        c.estimators = {EstimatorId::mle, EstimatorId::shrink};
        const auto res = run_experiment(c);
        const double expected_c = (p - 1) * gamma_p_quadrature(p, {0.0, 1.0, 1.0}).value;
        out.check(std::abs(res.resolved.constant.c - expected_c) < 1e-14, "constant");
        const auto& r = find_risk(c, res, EstimatorId::shrink, 0);
        const double rp = risk_at_zero(p);
        out.check(std::abs(r.mean - rp) <= 3.0 * r.std_error,
                  fmt("p=%d risk %.5f vs r_p %.5f (SE %.2g)", p, r.mean, rp, r.std_error));
        out.note(fmt("p=%d: MC %.5f +- %.5f, r_p = %.5f", p, r.mean, r.std_error, rp));
    }
    const double big = risk_at_zero(1000000);
    out.check(std::abs(big - 0.5) <= 1e-3, fmt("r_1e6 = %.9f", big));
    out.note(fmt("r_1e6 = %.9f", big));
    return out;
}

// 3. MLE risk p everywhere; James-Stein risk 2 at the origin
Outcome criterion3() {
    Outcome out;
    for (int p : {2, 3, 5, 10}) {
        auto c = identity_experiment(p, 2.0, 100000, 700 + p);
        c.theta.radii = {0.0, 1.0, 2.0};
        c.theta.directions = 1;
        if (p == 2) c.estimators = {EstimatorId::mle, EstimatorId::shrink};
        const auto res = run_experiment(c);
        for (const auto& r : res.risks) {
            if (r.estimator_id != EstimatorId::mle) continue;
            out.check(std::abs(r.mean - p) <= 3.0 * r.std_error,
                      fmt("MLE p=%d |theta|=%.2f risk %.4f (SE %.2g)", p, r.theta.norm(), r.mean,
                          r.std_error));
        }
        if (p >= 3) {
            const auto& js = find_risk(c, res, EstimatorId::james_stein, 0);
            out.check(std::abs(js.mean - 2.0) <= 3.0 * js.std_error,
                      fmt("JS p=%d risk %.4f (SE %.2g)", p, js.mean, js.std_error));
            out.note(fmt("p=%d: JS at 0 = %.4f +- %.4f", p, js.mean, js.std_error));
        }
    }
    return out;
}

// 4. dominance under identity covariance, p = 2 and 5, ball of radius 2
Outcome criterion4() {
    Outcome out;
    for (const char* name : {"thm21_p2", "thm21_p5"}) {
        auto c = bundled(name);
        c.threads = 1;
        out.check(c.replicates >= 100000 && c.d == 2.0, std::string(name) + " settings");
        check_dominance(out, run_experiment(c), name);
    }
    return out;
}

// 5. AR(1) proposition: trace identity, eigenvalue bound, dominance
Outcome criterion5() {
    Outcome out;
    const int p = 5;
    const double alpha = 0.5;
    for (double a : {-0.5, 0.0, 0.5}) {
        const Matrix d = ar1_covariance(a, p);
        const double rel = std::abs(d.trace() - p / (1.0 - a * a)) / (p / (1.0 - a * a));
        out.check(rel <= 1e-12, fmt("trace identity a=%g rel %.3g", a, rel));
        const double lmax =
            Eigen::SelfAdjointEigenSolver<Matrix>(d, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
        out.check(lmax <= ar1_lambda_max_bound(alpha), fmt("lambda_max a=%g is %.6f", a, lmax));
        out.note(fmt("a=%g: tr rel err %.2g, lambda_max %.4f <= 4", a, rel, lmax));
    }
    auto c = bundled("ar1_p5_alpha05");
    c.threads = 1;
    const auto res = run_experiment(c);
    out.check(std::abs(res.resolved.constant.c - (p - 4.0) * res.resolved.gamma_p) < 1e-15,
              "constant is (p - 4) gamma_p");
    check_dominance(out, res, "ar1_p5_alpha05");
    return out;
}

OuLevyModel reference_model() {
    OuLevyModel m;
    m.a = -0.5;
    m.rho1 = 1.0;
    m.rho2 = 0.5;
    m.lambda = 1.0;
    m.n = 20;
    m.p = 3;
    return m;
}

// 6. assembled V_n against the empirical conditional covariance of zeta
Outcome criterion6() {
    Outcome out;
    const OuLevyModel m = reference_model();
    RngStream jump_rng(606);
    JumpRecord jumps = simulate_jumps(m, jump_rng);
    const Matrix v = conditional_covariance(m, jumps).v;

    const std::size_t reps = 100000;
    const std::size_t block = 1024;
    const std::size_t blocks = block_count(reps, block);
    std::vector<Matrix> s1(blocks, Matrix::Zero(m.p, m.p));
    std::vector<Vector> s0(blocks, Vector::Zero(m.p));
    for_each_block(reps, block, 0, [&](std::size_t b, std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) {
            RngStream rng = derive_replicate_seed(6, r, 0);
            JumpRecord jr = jumps;
            for (double& y : jr.marks) y = rng.normal();
            const Vector z = simulate_zeta(m, jr, rng);
            s0[b] += z;
            s1[b] += z * z.transpose();
        }
    });
    Matrix second = Matrix::Zero(m.p, m.p);
    Vector mean = Vector::Zero(m.p);
    for (std::size_t b = 0; b < blocks; ++b) {
        second += s1[b];
        mean += s0[b];
    }
    mean /= static_cast<double>(reps);
    const Matrix emp = second / static_cast<double>(reps) - mean * mean.transpose();
    const double rel = (emp - v).norm() / v.norm();
    out.check(rel <= 0.03, fmt("Frobenius relative distance %.4f", rel));
    out.note(fmt("%zu jumps, Frobenius relative distance %.4f at %zu replicates", jumps.times.size(),
                 rel, reps));

    // corners
    OuLevyModel brown = m;
    brown.a = 0.0;
    brown.rho2 = 0.0;
    const Matrix vb = conditional_covariance(brown, jumps).v;
    out.check(vb == brown.rho1 * brown.rho1 * Matrix::Identity(m.p, m.p), "a = 0, rho2 = 0 gives rho1^2 I");
    OuLevyModel jump_only = m;
    jump_only.a = 0.0;
    const Matrix vj = conditional_covariance(jump_only, jumps).v;
    Matrix expected = Matrix::Identity(m.p, m.p) * m.rho1 * m.rho1;
    for (double t : jumps.times)
        for (int i = 0; i < m.p; ++i)
            for (int j = 0; j < m.p; ++j)
                expected(i, j) += m.rho2 * m.rho2 / m.n * trig_basis(i + 1, t) * trig_basis(j + 1, t);
    const double corner = (vj - expected).cwiseAbs().maxCoeff();
    out.check(corner <= 1e-14, fmt("a = 0 jump-sum corner off by %.3g", corner));
    return out;
}

// 7. Lemma bounds on lambda_min and E lambda_max of V_n
Outcome criterion7() {
    Outcome out;
    OuLevyModel m = reference_model();
    m.rho2 = 1.0;
    const int configs = 1000;
    std::vector<double> lmin(configs);
    for_each_block(configs, 64, 0, [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) {
            RngStream rng = derive_replicate_seed(7, r, 0);
            const auto cc = conditional_covariance(m, simulate_jumps(m, rng));
            lmin[r] = Eigen::SelfAdjointEigenSolver<Matrix>(cc.v, Eigen::EigenvaluesOnly)
                          .eigenvalues()
                          .minCoeff();
        }
    });
    int violations = 0;
    double smallest = 1e300;
    for (double x : lmin) {
        smallest = std::min(smallest, x);
        if (x < m.rho1 * m.rho1 - 1e-6) ++violations;
    }
    out.check(violations == 0,
              fmt("lambda_min >= rho1^2 - 1e-6 violated on %d of %d configurations (smallest %.4f)",
                  violations, configs, smallest));
    out.note(fmt("lambda_min: %d of %d below rho1^2 = %.3g, smallest %.4f", violations, configs,
                 m.rho1 * m.rho1, smallest));

    const auto a2 = check_lemma_A2(m, 1000, 77, 0);
    out.check(a2.passed, fmt("E lambda_max %.4f > %.4f + 3SE", a2.mean_lambda_max, a2.bound));
    out.note(fmt("E lambda_max = %.4f +- %.4f, bound 5 p rho* = %.4g", a2.mean_lambda_max,
                 a2.std_error, a2.bound));
    return out;
}

// 8. dominance in the continuous-time model
Outcome criterion8() {
    Outcome out;
    auto c = bundled("ou_levy_thm31");
    c.threads = 1;
    out.check(c.ou.n == 50 && c.p == 5 && c.replicates >= 10000 && !c.lambda_star && !c.a_star,
              "ou_levy_thm31 settings");
    check_dominance(out, run_experiment(c), "ou_levy_thm31");
    return out;
}

// 9. same seed, 1 vs 8 workers
Outcome criterion9() {
    Outcome out;
    for (const char* name : {"thm21_p2", "thm21_p5", "ar1_p5_alpha05", "ou_levy_thm31"}) {
        auto c = bundled(name);
        c.threads = 1;
        const auto one = run_experiment(c);
        c.threads = 8;
        const auto eight = run_experiment(c);
        const bool same = risks_csv(one) == risks_csv(eight) &&
                          dominance_csv(one) == dominance_csv(eight) &&
                          result_json(c, one) == result_json(c, eight);
        out.check(same, std::string(name) + ": outputs differ between 1 and 8 threads");
        out.note(std::string(name) + (same ? ": identical" : ": differ"));
    }
    return out;
}

struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance suite"};
    std::vector<int> only;
    bool verbose = false;
    app.add_option("--only", only, "run only these criteria")->check(CLI::Range(1, 9));
    app.add_flag("-v,--verbose", verbose, "print per-criterion details");
    CLI11_PARSE(app, argc, argv);
    const std::set<int> selected(only.begin(), only.end());

    const std::vector<Criterion> criteria = {
        {1, "gamma_p closed form = quadrature to 1e-8", criterion1},
        {2, "zero-point risk r_p by Monte Carlo", criterion2},
        {3, "MLE risk p, James-Stein risk 2 at the origin", criterion3},
        {4, "identity-covariance dominance at p = 2, 5", criterion4},
        {5, "AR(1) trace, eigenvalue bound and dominance", criterion5},
        {6, "V_n against empirical conditional covariance", criterion6},
        {7, "lambda_min >= rho1^2 and E lambda_max <= 5 p rho*", criterion7},
        {8, "continuous-time dominance, n = 50, p = 5", criterion8},
        {9, "1 vs 8 threads bit-identical", criterion9},
    };

    bool all = true;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.notes.push_back(std::string("exception: ") + e.what());
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %d: %s  %s (%.1fs)\n", c.id, o.pass ? "PASS" : "FAIL", c.title, secs);
        if (verbose || !o.pass)
            for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
        std::fflush(stdout);
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
