#include "condshrink/condshrink.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "condshrink/config.hpp"
#include "condshrink/constants.hpp"
#include "condshrink/error.hpp"
#include "condshrink/estimators.hpp"
#include "condshrink/gaussian_models.hpp"
#include "condshrink/ou_levy.hpp"
#include "condshrink/report.hpp"
#include "condshrink/risk_lab.hpp"

#ifndef CONDSHRINK_VERSION
#define CONDSHRINK_VERSION "0.0.0"
#endif

struct cs_buffer {
    std::string data;
};

struct cs_experiment {
    condshrink::ExperimentConfig config;
};

struct cs_result {
    condshrink::ExperimentConfig config;
    condshrink::ExperimentResult result;
};

namespace {

thread_local std::string g_last_error;

cs_status to_status(condshrink::ErrorCode code) {
    return static_cast<cs_status>(static_cast<int>(code));
}

template <class F>
cs_status guarded(F&& body) {
    try {
        body();
        g_last_error.clear();
        return CS_OK;
    } catch (const condshrink::Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return CS_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CS_ERR_INTERNAL;
    }
}

void need(bool cond, const char* what) {
    if (!cond) throw condshrink::Error(condshrink::ErrorCode::invalid_argument, what);
}

cs_buffer* make_buffer(std::string s) { return new cs_buffer{std::move(s)}; }

condshrink::Vector wrap(const double* y, size_t p) {
    return Eigen::Map<const condshrink::Vector>(y, static_cast<Eigen::Index>(p));
}

void copy_out(const condshrink::Matrix& m, double* out) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
}

}  // namespace

extern "C" {

const char* cs_version(void) { return CONDSHRINK_VERSION; }

const char* cs_last_error(void) { return g_last_error.c_str(); }

const char* cs_buffer_data(const cs_buffer* buf) { return buf ? buf->data.c_str() : ""; }

size_t cs_buffer_size(const cs_buffer* buf) { return buf ? buf->data.size() : 0; }

void cs_buffer_free(cs_buffer* buf) { delete buf; }

cs_status cs_integral_I(double a, double* out) {
    return guarded([&] {
        need(out, "out is null");
        *out = condshrink::integral_I(a);
    });
}

cs_status cs_gamma_p(int p, double d, double lambda_star, double a_star, cs_gamma_method method,
                     double* out) {
    return guarded([&] {
        need(out, "out is null");
        const condshrink::CompactSetSpec spec{d, lambda_star, a_star};
        *out = method == CS_GAMMA_CLOSED_FORM ? condshrink::gamma_p_closed(p, spec).value
                                              : condshrink::gamma_p_quadrature(p, spec).value;
    });
}

cs_status cs_risk_at_zero(int p, double* out) {
    return guarded([&] {
        need(out, "out is null");
        *out = condshrink::risk_at_zero(p);
    });
}

cs_status cs_shrink_constant_theorem21(int p, double lambda_star, double gamma_p, double* out) {
    return guarded([&] {
        need(out, "out is null");
        *out = condshrink::shrink_constant_theorem21(p, lambda_star, gamma_p).c;
    });
}

cs_status cs_risk_improvement_bound(int p, double lambda_star, double gamma_p, double* out) {
    return guarded([&] {
        need(out, "out is null");
        *out = condshrink::risk_improvement_bound(p, lambda_star, gamma_p);
    });
}

cs_status cs_estimate_james_stein(const double* y, size_t p, double* out) {
    return guarded([&] {
        need(y && out, "null vector");
        const auto est = condshrink::estimate_james_stein(wrap(y, p));
        std::memcpy(out, est.theta_hat.data(), p * sizeof(double));
    });
}

cs_status cs_estimate_shrink(const double* y, size_t p, double c, double* out) {
    return guarded([&] {
        need(y && out, "null vector");
        need(c >= 0.0, "shrinkage constant must be >= 0");
        const auto est = condshrink::estimate_shrink(
            wrap(y, p), {c, condshrink::ConstantSource::manual});
        std::memcpy(out, est.theta_hat.data(), p * sizeof(double));
    });
}

cs_status cs_ar1_covariance(double a, int p, double* out) {
    return guarded([&] {
        need(out, "out is null");
        copy_out(condshrink::ar1_covariance(a, p), out);
    });
}

cs_status cs_ar1_shrink_constant(int p, double alpha, double gamma_p, double* out) {
    return guarded([&] {
        need(out, "out is null");
        *out = condshrink::ar1_shrink_constant({0.0, alpha, p}, gamma_p).c;
    });
}

cs_status cs_ou_conditional_covariance(const cs_ou_levy_model* model, const double* times,
                                       size_t jump_count, double* out) {
    return guarded([&] {
        need(model && out, "null argument");
        need(jump_count == 0 || times, "times is null");
        condshrink::OuLevyModel m{model->a,      model->rho1, model->rho2,
                                  model->lambda, model->n,    model->p,
                                  model->grid_steps_per_unit};
        condshrink::JumpRecord jumps;
        jumps.times.assign(times, times + jump_count);
        jumps.marks.assign(jump_count, 0.0);
        for (size_t l = 1; l < jump_count; ++l)
            need(jumps.times[l] > jumps.times[l - 1], "jump times must be strictly increasing");
        copy_out(condshrink::conditional_covariance(m, jumps).v, out);
    });
}

cs_status cs_gamma_table(int p_lo, int p_hi, double d, double a_star, cs_buffer** csv,
                         double* max_abs_diff) {
    return guarded([&] {
        need(csv, "csv is null");
        auto table = condshrink::gamma_table(p_lo, p_hi, d, a_star);
        if (max_abs_diff) *max_abs_diff = table.max_abs_diff;
        *csv = make_buffer(std::move(table.csv));
    });
}

cs_status cs_fig1(int p_max, cs_buffer** csv, cs_buffer** svg) {
    return guarded([&] {
        need(csv && svg, "null output");
        std::string c = condshrink::fig1_csv(p_max);
        std::string s = condshrink::fig1_svg(p_max);
        *csv = make_buffer(std::move(c));
        *svg = make_buffer(std::move(s));
    });
}

cs_status cs_experiment_load(const char* path, cs_experiment** out) {
    return guarded([&] {
        need(path && out, "null argument");
        *out = new cs_experiment{condshrink::load_config_file(path)};
    });
}

cs_status cs_experiment_parse(const char* text, cs_experiment** out) {
    return guarded([&] {
        need(text && out, "null argument");
        *out = new cs_experiment{condshrink::parse_config(text)};
    });
}

void cs_experiment_free(cs_experiment* exp) { delete exp; }

const char* cs_experiment_name(const cs_experiment* exp) {
    return exp ? exp->config.name.c_str() : "";
}

cs_status cs_experiment_set_threads(cs_experiment* exp, int threads) {
    return guarded([&] {
        need(exp, "experiment is null");
        need(threads >= 0, "threads must be >= 0");
        exp->config.threads = threads;
    });
}

cs_status cs_experiment_set_seed(cs_experiment* exp, unsigned long long seed) {
    return guarded([&] {
        need(exp, "experiment is null");
        exp->config.master_seed = seed;
    });
}

cs_status cs_experiment_set_replicates(cs_experiment* exp, int replicates) {
    return guarded([&] {
        need(exp, "experiment is null");
        auto c = exp->config;
        c.replicates = replicates;
        c.validate();
        exp->config = std::move(c);
    });
}

cs_status cs_experiment_config_json(const cs_experiment* exp, cs_buffer** out) {
    return guarded([&] {
        need(exp && out, "null argument");
        *out = make_buffer(condshrink::config_to_json(exp->config));
    });
}

cs_status cs_experiment_run(const cs_experiment* exp, cs_result** out) {
    return guarded([&] {
        need(exp && out, "null argument");
        auto result = condshrink::run_experiment(exp->config);
        *out = new cs_result{exp->config, std::move(result)};
    });
}

void cs_result_free(cs_result* res) { delete res; }

int cs_result_passed(const cs_result* res) { return res && res->result.dominance.pass ? 1 : 0; }

cs_status cs_result_risks_csv(const cs_result* res, cs_buffer** out) {
    return guarded([&] {
        need(res && out, "null argument");
        *out = make_buffer(condshrink::risks_csv(res->result));
    });
}

cs_status cs_result_dominance_csv(const cs_result* res, cs_buffer** out) {
    return guarded([&] {
        need(res && out, "null argument");
        *out = make_buffer(condshrink::dominance_csv(res->result));
    });
}

cs_status cs_result_json(const cs_result* res, cs_buffer** out) {
    return guarded([&] {
        need(res && out, "null argument");
        *out = make_buffer(condshrink::result_json(res->config, res->result));
    });
}

}  // extern "C"
