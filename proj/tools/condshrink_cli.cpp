// condshrink command-line front end. Talks to the library only through the C
// interface in condshrink.h.
//
// Exit codes: 0 success / verdict PASS, 1 verdict FAIL or numeric check
// failure, 2 usage or config error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "condshrink/condshrink.h"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr double kGammaTolerance = 1e-8;

struct BufferDeleter {
    void operator()(cs_buffer* b) const { cs_buffer_free(b); }
};
using Buffer = std::unique_ptr<cs_buffer, BufferDeleter>;

struct ExperimentDeleter {
    void operator()(cs_experiment* e) const { cs_experiment_free(e); }
};
struct ResultDeleter {
    void operator()(cs_result* r) const { cs_result_free(r); }
};

std::string text(const Buffer& b) { return {cs_buffer_data(b.get()), cs_buffer_size(b.get())}; }

int exit_code_for(cs_status status) {
    switch (status) {
        case CS_OK: return kExitPass;
        case CS_ERR_CONFIG:
        case CS_ERR_IO:
        case CS_ERR_DOMAIN:
        case CS_ERR_DIMENSION_TOO_SMALL:
        case CS_ERR_NONSTATIONARY:
        case CS_ERR_NOT_PSD:
        case CS_ERR_INVALID_ARGUMENT: return kExitUsage;
        default: return kExitFail;
    }
}

int report_error(cs_status status, const std::string& context) {
    std::cerr << "condshrink: " << context << ": " << cs_last_error() << "\n";
    return exit_code_for(status);
}

fs::path resolve_out_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("CONDSHRINK_OUT_DIR"); env && *env) return env;
    return ".";
}

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << contents;
}

void write_manifest(const fs::path& dir, const std::string& stem, const std::string& command,
                    const json& config, std::optional<unsigned long long> seed,
                    const std::vector<fs::path>& outputs) {
    json m;
    m["manifest_version"] = 1;
    m["command"] = command;
    m["artifact_version"] = cs_version();
    if (seed) m["master_seed"] = *seed;
    m["config"] = config;
    json paths = json::array();
    for (const auto& p : outputs) paths.push_back(p.filename().string());
    m["outputs"] = paths;
    write_file(dir / (stem + "_manifest.json"), m.dump(2) + "\n");
}

bool parse_range(const std::string& s, int& lo, int& hi) {
    static const std::regex range(R"(^\s*(\d+)\s*(?:\.\.\s*(\d+))?\s*$)");
    std::smatch m;
    if (!std::regex_match(s, m, range)) return false;
    lo = std::stoi(m[1]);
    hi = m[2].matched ? std::stoi(m[2]) : lo;
    return lo >= 2 && hi >= lo;
}

// ---------------------------------------------------------------------------

int run_gamma(int p_lo, int p_hi, double d, double a_star, const std::string& out_flag,
              bool write_outputs) {
    cs_buffer* raw = nullptr;
    double max_diff = 0.0;
    const cs_status st = cs_gamma_table(p_lo, p_hi, d, a_star, &raw, &max_diff);
    if (st != CS_OK) return report_error(st, "gamma");
    Buffer csv(raw);
    std::cout << text(csv);
    if (write_outputs) {
        const fs::path dir = resolve_out_dir(out_flag);
        fs::create_directories(dir);
        write_file(dir / "gamma.csv", text(csv));
        write_manifest(dir, "gamma", "gamma",
                       {{"p_lo", p_lo}, {"p_hi", p_hi}, {"d", d}, {"a_star", a_star}},
                       std::nullopt, {dir / "gamma.csv"});
    }
    if (d > 0.0 && max_diff > kGammaTolerance) {
        std::cerr << "condshrink: closed form and quadrature disagree by " << max_diff << "\n";
        return kExitFail;
    }
    return kExitPass;
}

int run_fig1(int p_max, const std::string& out_flag) {
    cs_buffer* raw_csv = nullptr;
    cs_buffer* raw_svg = nullptr;
    const cs_status st = cs_fig1(p_max, &raw_csv, &raw_svg);
    if (st != CS_OK) return report_error(st, "fig1");
    Buffer csv(raw_csv), svg(raw_svg);
    const fs::path dir = resolve_out_dir(out_flag);
    fs::create_directories(dir);
    write_file(dir / "fig1.csv", text(csv));
    write_file(dir / "fig1.svg", text(svg));
    write_manifest(dir, "fig1", "fig1", {{"p_max", p_max}}, std::nullopt,
                   {dir / "fig1.csv", dir / "fig1.svg"});
    std::cout << "wrote " << (dir / "fig1.csv").string() << " and " << (dir / "fig1.svg").string()
              << "\n";
    return kExitPass;
}

int run_dominance(const std::string& config_path, const std::string& out_flag, int threads,
                  std::optional<unsigned long long> seed, std::optional<int> replicates) {
    cs_experiment* raw_exp = nullptr;
    cs_status st = cs_experiment_load(config_path.c_str(), &raw_exp);
    if (st != CS_OK) return report_error(st, config_path);
    std::unique_ptr<cs_experiment, ExperimentDeleter> exp(raw_exp);
    if ((st = cs_experiment_set_threads(exp.get(), threads)) != CS_OK)
        return report_error(st, "--threads");
    if (seed && (st = cs_experiment_set_seed(exp.get(), *seed)) != CS_OK)
        return report_error(st, "--seed");
    if (replicates && (st = cs_experiment_set_replicates(exp.get(), *replicates)) != CS_OK)
        return report_error(st, "--replicates");

    cs_buffer* raw = nullptr;
    if ((st = cs_experiment_config_json(exp.get(), &raw)) != CS_OK)
        return report_error(st, "config");
    const json resolved = json::parse(text(Buffer(raw)));

    cs_result* raw_res = nullptr;
    if ((st = cs_experiment_run(exp.get(), &raw_res)) != CS_OK) return report_error(st, "run");
    std::unique_ptr<cs_result, ResultDeleter> res(raw_res);

    const std::string stem = cs_experiment_name(exp.get());
    const fs::path dir = resolve_out_dir(out_flag);
    fs::create_directories(dir);
    std::vector<fs::path> outputs;
    const auto emit = [&](cs_status (*fn)(const cs_result*, cs_buffer**), const std::string& file) {
        cs_buffer* b = nullptr;
        const cs_status s = fn(res.get(), &b);
        if (s != CS_OK) throw std::runtime_error(cs_last_error());
        Buffer owned(b);
        write_file(dir / file, text(owned));
        outputs.push_back(dir / file);
        return text(owned);
    };
    emit(cs_result_risks_csv, stem + "_risks.csv");
    const std::string table = emit(cs_result_dominance_csv, stem + "_dominance.csv");
    emit(cs_result_json, stem + ".json");
    write_manifest(dir, stem, "dominance", resolved, resolved.at("seed").get<unsigned long long>(),
                   outputs);

    std::cout << table;
    const bool pass = cs_result_passed(res.get()) == 1;
    std::cout << "verdict: " << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? kExitPass : kExitFail;
}

int run_rerun(const std::string& manifest_path, const std::string& out_flag, int threads) {
    std::ifstream in(manifest_path);
    if (!in) {
        std::cerr << "condshrink: cannot open " << manifest_path << "\n";
        return kExitUsage;
    }
    json m;
    try {
        m = json::parse(in);
    } catch (const json::exception& e) {
        std::cerr << "condshrink: " << manifest_path << ": " << e.what() << "\n";
        return kExitUsage;
    }
    const std::string command = m.value("command", "");
    const json& cfg = m["config"];
    try {
        if (command == "gamma")
            return run_gamma(cfg.at("p_lo"), cfg.at("p_hi"), cfg.at("d"), cfg.at("a_star"),
                             out_flag, true);
        if (command == "fig1") return run_fig1(cfg.at("p_max"), out_flag);
    } catch (const json::exception& e) {
        std::cerr << "condshrink: malformed manifest: " << e.what() << "\n";
        return kExitUsage;
    }
    if (command == "dominance")
        return run_dominance(manifest_path, out_flag, threads, std::nullopt, std::nullopt);
    std::cerr << "condshrink: unknown manifest command '" << command << "'\n";
    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Improved shrinkage estimation for conditionally Gaussian observations"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(cs_version()));

    std::string out_dir;
    int threads = 0;

    auto* gamma = app.add_subcommand("gamma", "Tabulate gamma_p by closed form and quadrature");
    std::string p_range = "2..10";
    double d = 1.0, a_star = 1.0;
    bool gamma_write = false;
    gamma->add_option("--p", p_range, "dimension or range lo..hi")->capture_default_str();
    gamma->add_option("--d", d, "radius of the parameter ball")->capture_default_str();
    gamma->add_option("--a-star", a_star, "upper bound on E lambda_max")->capture_default_str();
    gamma->add_flag("--write", gamma_write, "also write gamma.csv and a manifest to the output dir");
    gamma->add_option("--out-dir", out_dir, "output directory (default $CONDSHRINK_OUT_DIR or .)");

    auto* fig1 = app.add_subcommand("fig1", "Risk at theta = 0 against p (CSV + SVG)");
    int p_max = 50;
    fig1->add_option("--p-max", p_max, "largest dimension")->capture_default_str();
    fig1->add_option("--out-dir", out_dir, "output directory (default $CONDSHRINK_OUT_DIR or .)");

    auto* dom = app.add_subcommand("dominance", "Monte Carlo dominance check from a config file");
    std::string config_path;
    std::optional<unsigned long long> seed;
    std::optional<int> replicates;
    dom->add_option("config", config_path, "experiment config (YAML) or run manifest")
        ->required();
    dom->add_option("--out-dir", out_dir, "output directory (default $CONDSHRINK_OUT_DIR or .)");
    dom->add_option("--threads", threads, "worker threads, 0 = all cores")->capture_default_str();
    dom->add_option("--seed", seed, "override the master seed");
    dom->add_option("--replicates", replicates, "override the replicate count");

    auto* rerun = app.add_subcommand("rerun", "Reproduce the outputs recorded in a run manifest");
    std::string manifest;
    rerun->add_option("manifest", manifest, "*_manifest.json")->required();
    rerun->add_option("--out-dir", out_dir, "output directory (default $CONDSHRINK_OUT_DIR or .)");
    rerun->add_option("--threads", threads, "worker threads, 0 = all cores");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*gamma) {
            int lo = 0, hi = 0;
            if (!parse_range(p_range, lo, hi)) {
                std::cerr << "condshrink: --p expects N or LO..HI with 2 <= LO <= HI, got '"
                          << p_range << "'\n";
                return kExitUsage;
            }
            return run_gamma(lo, hi, d, a_star, out_dir, gamma_write);
        }
        if (*fig1) return run_fig1(p_max, out_dir);
        if (*dom) return run_dominance(config_path, out_dir, threads, seed, replicates);
        if (*rerun) return run_rerun(manifest, out_dir, threads);
    } catch (const std::exception& e) {
        std::cerr << "condshrink: " << e.what() << "\n";
        return kExitFail;
    }
    return kExitUsage;
}
