// Benchmark and analysis command line for the completion library.
//
// Subcommands:
//   phase    synthetic phase-transition sweep over observation probabilities
//   dataset  semi-supervised clustering on a labeled feature table
//   certify  sampled dual-certificate construction for one instance
//   report   re-render a stored JSON report (e.g. to CSV)
//
// Every option can also be supplied by a plain-text key=value config file
// (--config FILE); explicit flags override file values.  Relative output
// paths are resolved against $CORRMC_OUT_DIR when it is set.

#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "corrmc/analysis.hpp"
#include "corrmc/errors.hpp"
#include "corrmc/experiments.hpp"
#include "corrmc/priors.hpp"
#include "corrmc/rng.hpp"
#include "corrmc/sampling.hpp"

namespace {

using corrmc::ConfigError;

std::map<std::string, std::string> load_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw corrmc::IoError("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              " is not key=value: " + line);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t");
            return s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key in config line " +
                                           std::to_string(line_no));
        kv[key] = value;
    }
    return kv;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' has non-numeric value '" +
                          value + "'");
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' has non-integer value '" +
                          value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config key '" + key + "' has non-boolean value '" +
                      value + "'");
}

std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& value) {
    std::vector<double> out;
    std::string item;
    std::istringstream parts(value);
    while (std::getline(parts, item, ','))
        if (!item.empty()) out.push_back(parse_double(key, item));
    return out;
}

std::vector<corrmc::Method> parse_method_list(const std::string& value) {
    std::vector<corrmc::Method> out;
    std::string item;
    std::istringstream parts(value);
    while (std::getline(parts, item, ','))
        if (!item.empty()) out.push_back(corrmc::parse_method(item));
    return out;
}

/// Resolve an output path against $CORRMC_OUT_DIR for relative paths.
std::string resolve_out(const std::string& path) {
    if (path.empty() || path.front() == '/') return path;
    const char* dir = std::getenv("CORRMC_OUT_DIR");
    if (dir == nullptr || *dir == '\0') return path;
    std::string base = dir;
    if (base.back() != '/') base += '/';
    return base + path;
}

/// Options shared by the experiment-running subcommands, with CLI11
/// bindings; config-file values fill in every option the command line left
/// untouched.
struct ExperimentOptions {
    corrmc::ExperimentConfig cfg;
    std::string methods_csv = "mc,corr,dwmc,wmc";
    std::string p_grid_csv;
    std::string lambda_grid_csv;
    std::string out = "report";
    std::string format = "both";

    CLI::Option* opt_n = nullptr;
    CLI::Option* opt_r = nullptr;
    CLI::Option* opt_sigma = nullptr;
    CLI::Option* opt_p_grid = nullptr;
    CLI::Option* opt_trials = nullptr;
    CLI::Option* opt_tol = nullptr;
    CLI::Option* opt_methods = nullptr;
    CLI::Option* opt_lambda_grid = nullptr;
    CLI::Option* opt_seed0 = nullptr;
    CLI::Option* opt_symmetric = nullptr;
    CLI::Option* opt_rho0 = nullptr;
    CLI::Option* opt_rho_growth = nullptr;
    CLI::Option* opt_rho_cap = nullptr;
    CLI::Option* opt_max_iters = nullptr;
    CLI::Option* opt_tol_feas = nullptr;
    CLI::Option* opt_tol_change = nullptr;
    CLI::Option* opt_out = nullptr;
    CLI::Option* opt_format = nullptr;

    void bind(CLI::App& app, bool synthetic) {
        if (synthetic) {
            opt_n = app.add_option("--n", cfg.n, "matrix size");
            opt_sigma =
                app.add_option("--sigma", cfg.sigma, "prior perturbation level");
            opt_symmetric = app.add_flag("--symmetric", cfg.symmetric,
                                         "couple (i,j) and (j,i) mask draws");
        }
        opt_r = app.add_option("--r", cfg.r, "instance rank");
        opt_p_grid = app.add_option("--p_grid", p_grid_csv,
                                    "comma list of observation probabilities");
        opt_trials = app.add_option("--trials", cfg.trials, "trials per cell");
        opt_tol = app.add_option("--tol", cfg.tol,
                                 "relative-error success threshold");
        opt_methods =
            app.add_option("--methods", methods_csv,
                           "comma list from {mc, corr, dwmc, wmc}");
        opt_lambda_grid = app.add_option(
            "--lambda_grid", lambda_grid_csv,
            "comma list of tradeoff weights (empty = closed-form optimum)");
        opt_seed0 = app.add_option("--seed0", cfg.seed0, "root seed");
        opt_rho0 = app.add_option("--rho0", cfg.solver.rho0,
                                  "initial penalty (0 = automatic)");
        opt_rho_growth =
            app.add_option("--rho_growth", cfg.solver.rho_growth,
                           "penalty growth factor per iteration");
        opt_rho_cap = app.add_option("--rho_cap", cfg.solver.rho_cap,
                                     "penalty upper bound");
        opt_max_iters = app.add_option("--max_iters", cfg.solver.max_iters,
                                       "solver iteration cap");
        opt_tol_feas = app.add_option("--tol_feas", cfg.solver.tol_feas,
                                      "solver feasibility tolerance");
        opt_tol_change = app.add_option("--tol_change", cfg.solver.tol_change,
                                        "solver iterate-change tolerance");
        opt_out = app.add_option("--out", out, "output path (base name)");
        opt_format =
            app.add_option("--format", format, "report format: csv|json|both");
    }

    /// Fill options the command line did not set from the key=value map.
    /// Consumes the keys it understands; callers reject leftovers.
    void apply_file(std::map<std::string, std::string>& kv, bool synthetic) {
        auto take = [&kv](const char* key) -> std::optional<std::string> {
            const auto it = kv.find(key);
            if (it == kv.end()) return std::nullopt;
            std::string value = it->second;
            kv.erase(it);
            return value;
        };
        auto fill = [&take](CLI::Option* opt, const char* key, auto&& sink) {
            const auto value = take(key);
            if (value && (opt == nullptr || opt->count() == 0)) sink(*value);
        };
        if (synthetic) {
            fill(opt_n, "n", [this](const std::string& v) {
                cfg.n = static_cast<std::size_t>(parse_int("n", v));
            });
            fill(opt_sigma, "sigma", [this](const std::string& v) {
                cfg.sigma = parse_double("sigma", v);
            });
            fill(opt_symmetric, "symmetric", [this](const std::string& v) {
                cfg.symmetric = parse_bool("symmetric", v);
            });
        }
        fill(opt_r, "r", [this](const std::string& v) {
            cfg.r = static_cast<std::size_t>(parse_int("r", v));
        });
        fill(opt_p_grid, "p_grid",
             [this](const std::string& v) { p_grid_csv = v; });
        fill(opt_trials, "trials", [this](const std::string& v) {
            cfg.trials = static_cast<int>(parse_int("trials", v));
        });
        fill(opt_tol, "tol",
             [this](const std::string& v) { cfg.tol = parse_double("tol", v); });
        fill(opt_methods, "methods",
             [this](const std::string& v) { methods_csv = v; });
        fill(opt_lambda_grid, "lambda_grid",
             [this](const std::string& v) { lambda_grid_csv = v; });
        fill(opt_seed0, "seed0", [this](const std::string& v) {
            cfg.seed0 = static_cast<std::uint64_t>(parse_int("seed0", v));
        });
        fill(opt_rho0, "rho0", [this](const std::string& v) {
            cfg.solver.rho0 = parse_double("rho0", v);
        });
        fill(opt_rho_growth, "rho_growth", [this](const std::string& v) {
            cfg.solver.rho_growth = parse_double("rho_growth", v);
        });
        fill(opt_rho_cap, "rho_cap", [this](const std::string& v) {
            cfg.solver.rho_cap = parse_double("rho_cap", v);
        });
        fill(opt_max_iters, "max_iters", [this](const std::string& v) {
            cfg.solver.max_iters = static_cast<int>(parse_int("max_iters", v));
        });
        fill(opt_tol_feas, "tol_feas", [this](const std::string& v) {
            cfg.solver.tol_feas = parse_double("tol_feas", v);
        });
        fill(opt_tol_change, "tol_change", [this](const std::string& v) {
            cfg.solver.tol_change = parse_double("tol_change", v);
        });
        fill(opt_out, "out", [this](const std::string& v) { out = v; });
        fill(opt_format, "format", [this](const std::string& v) { format = v; });
    }

    void finalize() {
        cfg.methods = parse_method_list(methods_csv);
        cfg.p_grid = parse_double_list("p_grid", p_grid_csv);
        cfg.lambda_grid = parse_double_list("lambda_grid", lambda_grid_csv);
    }
};

void reject_leftovers(const std::map<std::string, std::string>& kv) {
    if (kv.empty()) return;
    std::string keys;
    for (const auto& [key, value] : kv) {
        if (!keys.empty()) keys += ", ";
        keys += key;
    }
    throw ConfigError("unknown config file keys: " + keys);
}

int run_phase(ExperimentOptions& opts, const std::string& config_path) {
    if (!config_path.empty()) {
        auto kv = load_key_values(config_path);
        opts.apply_file(kv, /*synthetic=*/true);
        reject_leftovers(kv);
    }
    opts.finalize();
    const corrmc::ExperimentReport report = corrmc::run_phase_transition(opts.cfg);
    corrmc::emit_report(report, opts.format, resolve_out(opts.out));
    std::cout << corrmc::report_csv(report);
    return 0;
}

struct DatasetOptions {
    corrmc::DatasetSpec spec;
    std::string scaling_name = "minmax";
    CLI::Option* opt_data = nullptr;
    CLI::Option* opt_label_column = nullptr;
    CLI::Option* opt_n_items = nullptr;
    CLI::Option* opt_n_features = nullptr;
    CLI::Option* opt_n_classes = nullptr;
    CLI::Option* opt_scaling = nullptr;

    void bind(CLI::App& app) {
        opt_data = app.add_option("--data", spec.path, "dataset file");
        opt_label_column = app.add_option("--label_column", spec.label_column,
                                          "index of the label column");
        opt_n_items =
            app.add_option("--n_items", spec.n_items, "expected item count");
        opt_n_features = app.add_option("--n_features", spec.n_features,
                                        "expected feature count");
        opt_n_classes = app.add_option("--n_classes", spec.n_classes,
                                       "expected class count");
        opt_scaling = app.add_option("--scaling", scaling_name,
                                     "feature scaling: minmax|zscore|none");
    }

    void apply_file(std::map<std::string, std::string>& kv) {
        auto take = [&kv](const char* key) -> std::optional<std::string> {
            const auto it = kv.find(key);
            if (it == kv.end()) return std::nullopt;
            std::string value = it->second;
            kv.erase(it);
            return value;
        };
        auto fill = [&take](CLI::Option* opt, const char* key, auto&& sink) {
            const auto value = take(key);
            if (value && opt->count() == 0) sink(*value);
        };
        fill(opt_data, "data", [this](const std::string& v) { spec.path = v; });
        fill(opt_label_column, "label_column", [this](const std::string& v) {
            spec.label_column = static_cast<std::size_t>(parse_int("label_column", v));
        });
        fill(opt_n_items, "n_items", [this](const std::string& v) {
            spec.n_items = static_cast<std::size_t>(parse_int("n_items", v));
        });
        fill(opt_n_features, "n_features", [this](const std::string& v) {
            spec.n_features = static_cast<std::size_t>(parse_int("n_features", v));
        });
        fill(opt_n_classes, "n_classes", [this](const std::string& v) {
            spec.n_classes = static_cast<std::size_t>(parse_int("n_classes", v));
        });
        fill(opt_scaling, "scaling",
             [this](const std::string& v) { scaling_name = v; });
    }

    void finalize() { spec.scaling = corrmc::parse_scaling(scaling_name); }
};

int run_dataset(ExperimentOptions& opts, DatasetOptions& data,
                const std::string& config_path) {
    if (!config_path.empty()) {
        auto kv = load_key_values(config_path);
        opts.apply_file(kv, /*synthetic=*/false);
        data.apply_file(kv);
        reject_leftovers(kv);
    }
    opts.finalize();
    data.finalize();
    if (data.spec.path.empty())
        throw ConfigError("dataset subcommand needs --data (or data= in the config file)");
    const corrmc::ExperimentReport report = corrmc::run_real_dataset(
        data.spec, opts.cfg.r, opts.cfg.p_grid, opts.cfg.trials, opts.cfg);
    corrmc::emit_report(report, opts.format, resolve_out(opts.out));
    std::cout << report.provenance.notes << "\n";
    std::cout << corrmc::report_csv(report);
    return 0;
}

struct CertifyOptions {
    std::size_t n = 32;
    std::size_t r = 2;
    double sigma = 0.0;
    double p = 0.8;
    double lambda = -1.0; ///< negative = closed-form optimum
    std::uint64_t seed0 = 1;
    std::string out;

    CLI::Option* opt_n = nullptr;
    CLI::Option* opt_r = nullptr;
    CLI::Option* opt_sigma = nullptr;
    CLI::Option* opt_p = nullptr;
    CLI::Option* opt_lambda = nullptr;
    CLI::Option* opt_seed0 = nullptr;
    CLI::Option* opt_out = nullptr;

    void bind(CLI::App& app) {
        opt_n = app.add_option("--n", n, "matrix size");
        opt_r = app.add_option("--r", r, "instance rank");
        opt_sigma = app.add_option("--sigma", sigma, "prior perturbation level");
        opt_p = app.add_option("--p", p, "observation probability");
        opt_lambda = app.add_option(
            "--lambda", lambda, "tradeoff weight (negative = closed form)");
        opt_seed0 = app.add_option("--seed0", seed0, "root seed");
        opt_out = app.add_option("--out", out, "optional JSON output path");
    }

    void apply_file(std::map<std::string, std::string>& kv) {
        auto take = [&kv](const char* key) -> std::optional<std::string> {
            const auto it = kv.find(key);
            if (it == kv.end()) return std::nullopt;
            std::string value = it->second;
            kv.erase(it);
            return value;
        };
        auto fill = [&take](CLI::Option* opt, const char* key, auto&& sink) {
            const auto value = take(key);
            if (value && opt->count() == 0) sink(*value);
        };
        fill(opt_n, "n", [this](const std::string& v) {
            n = static_cast<std::size_t>(parse_int("n", v));
        });
        fill(opt_r, "r", [this](const std::string& v) {
            r = static_cast<std::size_t>(parse_int("r", v));
        });
        fill(opt_sigma, "sigma",
             [this](const std::string& v) { sigma = parse_double("sigma", v); });
        fill(opt_p, "p",
             [this](const std::string& v) { p = parse_double("p", v); });
        fill(opt_lambda, "lambda",
             [this](const std::string& v) { lambda = parse_double("lambda", v); });
        fill(opt_seed0, "seed0", [this](const std::string& v) {
            seed0 = static_cast<std::uint64_t>(parse_int("seed0", v));
        });
        fill(opt_out, "out", [this](const std::string& v) { out = v; });
    }
};

int run_certify(CertifyOptions& opts, const std::string& config_path) {
    if (!config_path.empty()) {
        auto kv = load_key_values(config_path);
        opts.apply_file(kv);
        reject_leftovers(kv);
    }
    const std::uint64_t seed_instance =
        corrmc::derive_seed(opts.seed0, 0, 0, corrmc::StreamPurpose::instance);
    const std::uint64_t seed_noise =
        corrmc::derive_seed(opts.seed0, 0, 0, corrmc::StreamPurpose::prior_noise);
    const std::uint64_t seed_mask =
        corrmc::derive_seed(opts.seed0, 0, 0, corrmc::StreamPurpose::mask);

    const auto [x_star, factors] = corrmc::gen_instance(opts.n, opts.r, seed_instance);
    const corrmc::SubspaceEstimate est =
        corrmc::noisy_copy_subspaces(x_star, opts.sigma, opts.r, seed_noise);
    const corrmc::Dense phi = corrmc::subspace_prior(est.u, est.v);
    double lambda = opts.lambda;
    if (lambda < 0.0) {
        const auto decomp =
            corrmc::principal_angles(factors.u, est.u, factors.v, est.v);
        lambda = corrmc::lambda_star_general(decomp).lambda;
    }

    const corrmc::SamplingPlan plan = corrmc::uniform_plan(opts.n, opts.p);
    const corrmc::TheoryReport theory =
        corrmc::theory_report_direct(factors, phi, lambda);
    const corrmc::CertificateReport cert =
        corrmc::golfing_certificate(factors, phi, lambda, plan, seed_mask);

    nlohmann::json summary{
        {"n", opts.n},
        {"r", opts.r},
        {"sigma", opts.sigma},
        {"p", opts.p},
        {"lambda", lambda},
        {"seed0", opts.seed0},
        {"alpha1", theory.alpha1},
        {"alpha2", theory.alpha2},
        {"xi1", theory.xi1.has_value() ? nlohmann::json(*theory.xi1)
                                       : nlohmann::json()},
        {"xi2", theory.xi2.has_value() ? nlohmann::json(*theory.xi2)
                                       : nlohmann::json()},
        {"k_formula", cert.k_formula},
        {"k_used", cert.k_used},
        {"residual_t", cert.residual_t},
        {"spectral_t_perp", cert.spectral_t_perp},
        {"decay", cert.decay},
        {"conditions_met", cert.conditions_met},
        {"recovery_condition_alpha2", theory.recovery_condition_alpha2},
    };
    const std::string text = summary.dump(2) + "\n";
    std::cout << text;
    if (!opts.out.empty()) {
        const std::string path = resolve_out(opts.out);
        std::ofstream file(path, std::ios::binary);
        if (!file) throw corrmc::IoError("cannot open output file: " + path);
        file << text;
        if (!file) throw corrmc::IoError("failed writing output file: " + path);
    }
    return 0;
}

int run_report(const std::string& in_path, const std::string& format,
               const std::string& out_path) {
    const corrmc::ExperimentReport report = corrmc::load_report_json(in_path);
    if (out_path.empty()) {
        if (format == "csv") {
            std::cout << corrmc::report_csv(report);
        } else {
            throw ConfigError("report --format " + format +
                              " needs --out (only csv prints to stdout)");
        }
        return 0;
    }
    corrmc::emit_report(report, format, resolve_out(out_path));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"matrix completion benchmark harness"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path,
                   "key=value config file (flags override file values)")
        ->expected(1);

    CLI::App* phase =
        app.add_subcommand("phase", "synthetic phase-transition sweep");
    ExperimentOptions phase_opts;
    phase_opts.bind(*phase, /*synthetic=*/true);

    CLI::App* dataset =
        app.add_subcommand("dataset", "semi-supervised clustering benchmark");
    ExperimentOptions dataset_opts;
    dataset_opts.out = "dataset_report";
    dataset_opts.bind(*dataset, /*synthetic=*/false);
    DatasetOptions dataset_data;
    dataset_data.bind(*dataset);

    CLI::App* certify =
        app.add_subcommand("certify", "sampled dual-certificate construction");
    CertifyOptions certify_opts;
    certify_opts.bind(*certify);

    CLI::App* report_cmd =
        app.add_subcommand("report", "re-render a stored JSON report");
    std::string report_in;
    std::string report_format = "csv";
    std::string report_out;
    report_cmd->add_option("--in", report_in, "stored JSON report")->required();
    report_cmd->add_option("--format", report_format,
                           "output format: csv|json|both");
    report_cmd->add_option("--out", report_out,
                           "output path (csv prints to stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (phase->parsed()) return run_phase(phase_opts, config_path);
        if (dataset->parsed())
            return run_dataset(dataset_opts, dataset_data, config_path);
        if (certify->parsed()) return run_certify(certify_opts, config_path);
        if (report_cmd->parsed())
            return run_report(report_in, report_format, report_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: no subcommand given\n";
    return 1;
}
