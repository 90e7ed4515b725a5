#include "condshrink/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include <yaml-cpp/yaml.h>

#include "condshrink/error.hpp"

namespace condshrink {

namespace {

using json = nlohmann::json;

[[noreturn]] void schema_error(const YAML::Node& node, const std::string& field,
                               const std::string& why) {
    std::ostringstream os;
    if (node.IsDefined() && node.Mark().line >= 0)
        os << "line " << node.Mark().line + 1 << ": ";
    os << field << ": " << why;
    fail(ErrorCode::config, os.str());
}

void check_keys(const YAML::Node& map, const std::string& where,
                const std::set<std::string>& allowed) {
    if (!map.IsMap()) schema_error(map, where, "expected a mapping");
    for (const auto& kv : map) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key))
            schema_error(kv.first, where.empty() ? key : where + "." + key, "unknown field");
    }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& field) {
    if (!node.IsScalar()) schema_error(node, field, "expected a scalar");
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        schema_error(node, field, "cannot convert '" + node.Scalar() + "'");
    }
}

template <class T>
T scalar_or(const YAML::Node& parent, const char* key, const std::string& prefix, T fallback) {
    const YAML::Node node = parent[key];
    if (!node) return fallback;
    return scalar<T>(node, prefix + key);
}

std::vector<double> number_list(const YAML::Node& node, const std::string& field) {
    if (!node.IsSequence()) schema_error(node, field, "expected a list");
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i)
        out.push_back(scalar<double>(node[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

Vector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ModelKind model_from(const YAML::Node& node) {
    const auto s = scalar<std::string>(node, "model");
    if (s == "gaussian") return ModelKind::gaussian;
    if (s == "ar1") return ModelKind::ar1;
    if (s == "ou_levy") return ModelKind::ou_levy;
    schema_error(node, "model", "expected gaussian, ar1 or ou_levy");
}

CovarianceKind covariance_from(const YAML::Node& node) {
    const auto s = scalar<std::string>(node, "noise.covariance");
    if (s == "identity") return CovarianceKind::identity;
    if (s == "scaled_identity") return CovarianceKind::scaled_identity;
    if (s == "ar1_fixed") return CovarianceKind::ar1_fixed;
    if (s == "matrix") return CovarianceKind::matrix;
    schema_error(node, "noise.covariance",
                 "expected identity, scaled_identity, ar1_fixed or matrix");
}

EstimatorId estimator_at(const YAML::Node& node, const std::string& field) {
    const auto s = scalar<std::string>(node, field);
    try {
        return estimator_from_string(s);
    } catch (const Error&) {
        schema_error(node, field, "unknown estimator '" + s + "'");
    }
}

ExperimentConfig parse_root(const YAML::Node& root) {
    check_keys(root, "",
               {"name", "model", "p", "noise", "ar1", "ou_levy", "compact_set", "gamma_method",
                "constant", "estimators", "baseline", "improved", "theta", "replicates", "seed",
                "threads"});
    ExperimentConfig c;
    c.name = scalar_or<std::string>(root, "name", "", c.name);
    if (!root["model"]) schema_error(root, "model", "required field missing");
    c.model = model_from(root["model"]);
    if (!root["p"]) schema_error(root, "p", "required field missing");
    c.p = scalar<int>(root["p"], "p");

    if (const auto noise = root["noise"]) {
        check_keys(noise, "noise", {"covariance", "sigma2_min", "sigma2_max", "a", "entries"});
        if (noise["covariance"]) c.noise.kind = covariance_from(noise["covariance"]);
        c.noise.sigma2_min = scalar_or(noise, "sigma2_min", "noise.", c.noise.sigma2_min);
        c.noise.sigma2_max = scalar_or(noise, "sigma2_max", "noise.", c.noise.sigma2_max);
        c.noise.a = scalar_or(noise, "a", "noise.", c.noise.a);
        if (const auto entries = noise["entries"]) {
            if (!entries.IsSequence()) schema_error(entries, "noise.entries", "expected rows");
            const auto rows = static_cast<Eigen::Index>(entries.size());
            c.noise.entries = Matrix::Zero(rows, rows);
            for (Eigen::Index i = 0; i < rows; ++i) {
                const auto row = number_list(entries[i], "noise.entries");
                if (static_cast<Eigen::Index>(row.size()) != rows)
                    schema_error(entries[i], "noise.entries", "matrix must be square");
                for (Eigen::Index j = 0; j < rows; ++j) c.noise.entries(i, j) = row[j];
            }
        }
    }
    if (const auto ar1 = root["ar1"]) {
        check_keys(ar1, "ar1", {"alpha", "a_values"});
        c.ar1.alpha = scalar_or(ar1, "alpha", "ar1.", c.ar1.alpha);
        if (ar1["a_values"]) c.ar1.a_values = number_list(ar1["a_values"], "ar1.a_values");
    }
    if (const auto ou = root["ou_levy"]) {
        check_keys(ou, "ou_levy", {"a", "rho1", "rho2", "lambda", "n", "grid_steps_per_unit"});
        c.ou.a = scalar_or(ou, "a", "ou_levy.", c.ou.a);
        c.ou.rho1 = scalar_or(ou, "rho1", "ou_levy.", c.ou.rho1);
        c.ou.rho2 = scalar_or(ou, "rho2", "ou_levy.", c.ou.rho2);
        c.ou.lambda = scalar_or(ou, "lambda", "ou_levy.", c.ou.lambda);
        c.ou.n = scalar_or(ou, "n", "ou_levy.", c.ou.n);
        c.ou.grid_steps_per_unit =
            scalar_or(ou, "grid_steps_per_unit", "ou_levy.", c.ou.grid_steps_per_unit);
    }
    c.ou.p = c.p;
    if (const auto cs = root["compact_set"]) {
        check_keys(cs, "compact_set", {"d", "lambda_star", "a_star"});
        c.d = scalar_or(cs, "d", "compact_set.", c.d);
        if (cs["lambda_star"])
            c.lambda_star = scalar<double>(cs["lambda_star"], "compact_set.lambda_star");
        if (cs["a_star"]) c.a_star = scalar<double>(cs["a_star"], "compact_set.a_star");
    }
    if (const auto gm = root["gamma_method"]) {
        const auto s = scalar<std::string>(gm, "gamma_method");
        if (s == "closed_form") c.gamma_method = GammaMethod::closed_form;
        else if (s == "quadrature") c.gamma_method = GammaMethod::quadrature;
        else schema_error(gm, "gamma_method", "expected closed_form or quadrature");
    }
    if (const auto k = root["constant"]) {
        if (!(k.IsScalar() && k.Scalar() == "auto")) c.manual_constant = scalar<double>(k, "constant");
    }
    if (const auto est = root["estimators"]) {
        if (!est.IsSequence()) schema_error(est, "estimators", "expected a list");
        c.estimators.clear();
        for (std::size_t i = 0; i < est.size(); ++i)
            c.estimators.push_back(estimator_at(est[i], "estimators[" + std::to_string(i) + "]"));
    }
    if (root["baseline"]) c.baseline = estimator_at(root["baseline"], "baseline");
    if (root["improved"]) c.improved = estimator_at(root["improved"], "improved");
    if (const auto th = root["theta"]) {
        check_keys(th, "theta", {"radii", "directions", "points"});
        if (th["radii"]) c.theta.radii = number_list(th["radii"], "theta.radii");
        c.theta.directions = scalar_or(th, "directions", "theta.", c.theta.directions);
        if (const auto pts = th["points"]) {
            if (!pts.IsSequence()) schema_error(pts, "theta.points", "expected a list");
            for (std::size_t i = 0; i < pts.size(); ++i)
                c.theta.points.push_back(
                    to_vector(number_list(pts[i], "theta.points[" + std::to_string(i) + "]")));
        }
    }
    c.replicates = scalar_or(root, "replicates", "", c.replicates);
    c.master_seed = scalar_or<std::uint64_t>(root, "seed", "", c.master_seed);
    c.threads = scalar_or(root, "threads", "", c.threads);

    try {
        // resolve() surfaces model preconditions (e.g. the AR(1) dimension
        // requirement) at load time rather than mid-run.
        resolve(c);
    } catch (const Error& e) {
        fail(ErrorCode::config, std::string("config: ") + e.what());
    }
    return c;
}

json vector_json(const Vector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        fail(ErrorCode::config, "line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (!root.IsMap()) fail(ErrorCode::config, "config must be a mapping");
    if (root["manifest_version"]) {
        const auto cfg = root["config"];
        if (!cfg) schema_error(root, "config", "manifest has no embedded config");
        return parse_root(cfg);
    }
    return parse_root(root);
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::io, "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["name"] = c.name;
    j["model"] = std::string(to_string(c.model));
    j["p"] = c.p;
    switch (c.model) {
        case ModelKind::gaussian: {
            json noise{{"covariance", std::string(to_string(c.noise.kind))}};
            if (c.noise.kind == CovarianceKind::scaled_identity) {
                noise["sigma2_min"] = c.noise.sigma2_min;
                noise["sigma2_max"] = c.noise.sigma2_max;
            } else if (c.noise.kind == CovarianceKind::ar1_fixed) {
                noise["a"] = c.noise.a;
            } else if (c.noise.kind == CovarianceKind::matrix) {
                json rows = json::array();
                for (Eigen::Index i = 0; i < c.noise.entries.rows(); ++i)
                    rows.push_back(vector_json(c.noise.entries.row(i).transpose()));
                noise["entries"] = rows;
            }
            j["noise"] = noise;
            break;
        }
        case ModelKind::ar1:
            j["ar1"] = {{"alpha", c.ar1.alpha}, {"a_values", c.ar1.a_values}};
            break;
        case ModelKind::ou_levy:
            j["ou_levy"] = {{"a", c.ou.a},
                            {"rho1", c.ou.rho1},
                            {"rho2", c.ou.rho2},
                            {"lambda", c.ou.lambda},
                            {"n", c.ou.n},
                            {"grid_steps_per_unit", c.ou.grid_steps_per_unit}};
            break;
    }
    json cs{{"d", c.d}};
    if (c.lambda_star) cs["lambda_star"] = *c.lambda_star;
    if (c.a_star) cs["a_star"] = *c.a_star;
    j["compact_set"] = cs;
    j["gamma_method"] = c.gamma_method == GammaMethod::closed_form ? "closed_form" : "quadrature";
    if (c.manual_constant) j["constant"] = *c.manual_constant;
    else j["constant"] = "auto";
    json est = json::array();
    for (auto e : c.estimators) est.push_back(std::string(to_string(e)));
    j["estimators"] = est;
    j["baseline"] = std::string(to_string(c.baseline));
    j["improved"] = std::string(to_string(c.improved));
    json pts = json::array();
    for (const auto& pt : c.theta.points) pts.push_back(vector_json(pt));
    j["theta"] = {{"radii", c.theta.radii}, {"directions", c.theta.directions}, {"points", pts}};
    j["replicates"] = c.replicates;
    j["seed"] = c.master_seed;
    return j.dump(2);
}

}  // namespace condshrink
