#include "corrmc/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "corrmc/errors.hpp"
#include "corrmc/kernels.hpp"
#include "corrmc/priors.hpp"
#include "corrmc/rng.hpp"
#include "corrmc/sampling.hpp"

namespace corrmc {
namespace {

using nlohmann::json;

std::string iso_utc_now() {
    const std::time_t now =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Shortest decimal representation that parses back to the same double.
std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Dense masked_copy(const Dense& x, const Mask& mask) {
    Dense out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j)
            if (mask(i, j)) out(i, j) = x(i, j);
    return out;
}

double rel_error(const Dense& x_hat, const Dense& x_star) {
    const double err = kernels::frobenius_norm(kernels::difference(x_hat, x_star));
    const double denom = kernels::frobenius_norm(x_star);
    return denom == 0.0 ? err : err / denom;
}

/// One (method, lambda) column of the sweep.  `star` marks the per-trial
/// closed-form tradeoff weight of the correlation method.
struct Slot {
    Method method = Method::mc;
    bool star = false;
    double lambda = 0.0;
};

std::vector<Slot> build_slots(const ExperimentConfig& cfg, bool star_allowed) {
    std::vector<Slot> slots;
    for (const Method m : cfg.methods) {
        if (m == Method::corr && !cfg.lambda_grid.empty()) {
            for (const double lambda : cfg.lambda_grid)
                slots.push_back({m, false, lambda});
        } else if (m == Method::corr) {
            slots.push_back({m, star_allowed, 0.0});
        } else {
            slots.push_back({m, false, 0.0});
        }
    }
    return slots;
}

void validate_common(const ExperimentConfig& cfg) {
    if (cfg.methods.empty()) throw ConfigError("methods must not be empty");
    if (cfg.trials < 1) throw ConfigError("trials must be at least 1");
    if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");
    if (!(cfg.sigma >= 0.0)) throw ConfigError("sigma must be non-negative");
    for (const double lambda : cfg.lambda_grid)
        if (!(lambda >= 0.0)) throw ConfigError("lambda values must be non-negative");
    for (const double p : cfg.p_grid)
        if (!(p > 0.0) || p > 1.0)
            throw ConfigError("observation probabilities must lie in (0, 1]");
}

std::vector<double> resolved_p_grid(const std::vector<double>& requested,
                                    std::size_t n) {
    if (!requested.empty()) return requested;
    std::vector<double> grid(n);
    for (std::size_t k = 1; k <= n; ++k)
        grid[k - 1] = static_cast<double>(k) / static_cast<double>(n);
    return grid;
}

/// Aggregate the fixed-layout record array; accumulation runs in trial order
/// so the result is independent of how the trials were scheduled.
std::vector<AggregateRow> aggregate_rows(const std::vector<TrialRecord>& records,
                                         std::size_t n_slots, std::size_t n_p,
                                         int trials) {
    std::vector<AggregateRow> rows;
    rows.reserve(n_slots * n_p);
    for (std::size_t slot = 0; slot < n_slots; ++slot) {
        for (std::size_t pi = 0; pi < n_p; ++pi) {
            AggregateRow row;
            double sum_lambda = 0.0;
            double sum_err = 0.0;
            int successes = 0;
            for (int t = 0; t < trials; ++t) {
                const TrialRecord& rec =
                    records[(pi * static_cast<std::size_t>(trials) +
                             static_cast<std::size_t>(t)) *
                                n_slots +
                            slot];
                if (t == 0) {
                    row.method = rec.method;
                    row.p = rec.p;
                }
                sum_lambda += rec.lambda;
                sum_err += rec.rel_error;
                if (rec.success) ++successes;
            }
            row.lambda = sum_lambda / trials;
            row.success_rate = static_cast<double>(successes) / trials;
            row.mean_rel_error = sum_err / trials;
            row.trials = trials;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

json config_to_json(const ExperimentConfig& cfg) {
    std::vector<std::string> methods;
    methods.reserve(cfg.methods.size());
    for (const Method m : cfg.methods) methods.push_back(method_name(m));
    return json{{"n", cfg.n},
                {"r", cfg.r},
                {"sigma", cfg.sigma},
                {"p_grid", cfg.p_grid},
                {"trials", cfg.trials},
                {"tol", cfg.tol},
                {"methods", methods},
                {"lambda_grid", cfg.lambda_grid},
                {"seed0", cfg.seed0},
                {"symmetric", cfg.symmetric},
                {"solver",
                 json{{"rho0", cfg.solver.rho0},
                      {"rho_growth", cfg.solver.rho_growth},
                      {"rho_cap", cfg.solver.rho_cap},
                      {"max_iters", cfg.solver.max_iters},
                      {"tol_feas", cfg.solver.tol_feas},
                      {"tol_change", cfg.solver.tol_change}}}};
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    cfg.n = j.at("n").get<std::size_t>();
    cfg.r = j.at("r").get<std::size_t>();
    cfg.sigma = j.at("sigma").get<double>();
    cfg.p_grid = j.at("p_grid").get<std::vector<double>>();
    cfg.trials = j.at("trials").get<int>();
    cfg.tol = j.at("tol").get<double>();
    cfg.methods.clear();
    for (const auto& name : j.at("methods"))
        cfg.methods.push_back(parse_method(name.get<std::string>()));
    cfg.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
    cfg.seed0 = j.at("seed0").get<std::uint64_t>();
    cfg.symmetric = j.at("symmetric").get<bool>();
    const json& s = j.at("solver");
    cfg.solver.rho0 = s.at("rho0").get<double>();
    cfg.solver.rho_growth = s.at("rho_growth").get<double>();
    cfg.solver.rho_cap = s.at("rho_cap").get<double>();
    cfg.solver.max_iters = s.at("max_iters").get<int>();
    cfg.solver.tol_feas = s.at("tol_feas").get<double>();
    cfg.solver.tol_change = s.at("tol_change").get<double>();
    return cfg;
}

json report_to_json(const ExperimentReport& report) {
    json rows = json::array();
    for (const AggregateRow& row : report.rows)
        rows.push_back(json{{"method", row.method},
                            {"p", row.p},
                            {"lambda", row.lambda},
                            {"success_rate", row.success_rate},
                            {"mean_rel_error", row.mean_rel_error},
                            {"trials", row.trials}});
    json trials = json::array();
    for (const TrialRecord& rec : report.trial_records)
        trials.push_back(json{{"method", rec.method},
                              {"p", rec.p},
                              {"lambda", rec.lambda},
                              {"seed", rec.seed},
                              {"rel_error", rec.rel_error},
                              {"iters", rec.iters},
                              {"converged", rec.converged},
                              {"success", rec.success}});
    return json{{"config", config_to_json(report.config)},
                {"dataset", report.dataset},
                {"rows", rows},
                {"trial_records", trials},
                {"provenance",
                 json{{"library_version", report.provenance.library_version},
                      {"timestamp", report.provenance.timestamp},
                      {"wall_time_s", report.provenance.wall_time_s},
                      {"notes", report.provenance.notes}}}};
}

/// Per-trial state shared by every method slot of one task.
struct TrialInputs {
    Dense x_star;
    ThinSvd factors;
    Mask mask;
    Dense observed;
    std::optional<SubspaceEstimate> estimate;
    Dense phi;
    std::optional<PrincipalAngleDecomposition> decomp;
};

bool uses_method(const std::vector<Method>& methods, Method m) {
    return std::find(methods.begin(), methods.end(), m) != methods.end();
}

Solution solve_slot(const Slot& slot, const TrialInputs& in,
                    const SolverConfig& solver, double& lambda_out) {
    lambda_out = 0.0;
    switch (slot.method) {
    case Method::mc:
        return solve_mc(in.mask, in.observed, solver);
    case Method::corr: {
        lambda_out =
            slot.star ? lambda_star_general(*in.decomp).lambda : slot.lambda;
        return solve_corr_mc(in.mask, in.observed, Prior{in.phi, lambda_out},
                             solver);
    }
    case Method::dwmc: {
        const DwmcWeights weights =
            dwmc_weights(leverage_scores(in.estimate->u, in.estimate->v));
        return solve_dwmc(in.mask, in.observed, weights, solver);
    }
    case Method::wmc: {
        const double theta =
            std::max(in.decomp->gamma.back(), in.decomp->eta.back());
        const double w = wmc_weight(theta);
        return solve_wmc(in.mask, in.observed,
                         WmcWeights{w, w, in.estimate->u, in.estimate->v},
                         solver);
    }
    }
    throw ConfigError("unknown method");
}

} // namespace

std::string method_name(Method m) {
    switch (m) {
    case Method::mc: return "mc";
    case Method::corr: return "corr";
    case Method::dwmc: return "dwmc";
    case Method::wmc: return "wmc";
    }
    throw ConfigError("unknown method");
}

Method parse_method(const std::string& name) {
    if (name == "mc") return Method::mc;
    if (name == "corr") return Method::corr;
    if (name == "dwmc") return Method::dwmc;
    if (name == "wmc") return Method::wmc;
    throw ConfigError("unknown method name: " + name);
}

std::string scaling_name(FeatureScaling s) {
    switch (s) {
    case FeatureScaling::minmax: return "minmax";
    case FeatureScaling::zscore: return "zscore";
    case FeatureScaling::none: return "none";
    }
    throw ConfigError("unknown scaling");
}

FeatureScaling parse_scaling(const std::string& name) {
    if (name == "minmax") return FeatureScaling::minmax;
    if (name == "zscore") return FeatureScaling::zscore;
    if (name == "none") return FeatureScaling::none;
    throw ConfigError("unknown scaling name: " + name);
}

std::pair<Dense, ThinSvd> gen_instance(std::size_t n, std::size_t r,
                                       std::uint64_t seed) {
    if (n == 0) throw DimensionError("instance size must be positive");
    if (r == 0 || r > n)
        throw DimensionError("instance rank must lie in [1, n]");
    Rng rng(seed);
    Dense g1(n, r);
    Dense g2(n, r);
    for (std::size_t i = 0; i < g1.size(); ++i) g1.data()[i] = rng.normal();
    for (std::size_t i = 0; i < g2.size(); ++i) g2.data()[i] = rng.normal();

    ThinSvd f;
    f.u = thin_svd(g1, r).u;
    f.v = thin_svd(g2, r).u;
    f.s.assign(r, 1.0 / std::sqrt(static_cast<double>(r)));

    Dense u_scaled = f.u;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < r; ++k) u_scaled(i, k) *= f.s[k];
    Dense x_star = kernels::matmul_nt(u_scaled, f.v);
    return {std::move(x_star), std::move(f)};
}

ExperimentReport run_phase_transition(const ExperimentConfig& cfg) {
    validate_common(cfg);
    if (cfg.n < 2) throw ConfigError("n must be at least 2");
    if (cfg.r == 0 || cfg.r > cfg.n)
        throw ConfigError("rank must lie in [1, n]");

    const auto start = std::chrono::steady_clock::now();
    ExperimentReport report;
    report.config = cfg;
    report.config.p_grid = resolved_p_grid(cfg.p_grid, cfg.n);

    const std::vector<double>& p_grid = report.config.p_grid;
    const std::vector<Slot> slots = build_slots(cfg, /*star_allowed=*/true);
    const std::size_t n_slots = slots.size();
    const std::size_t n_tasks = p_grid.size() * static_cast<std::size_t>(cfg.trials);
    const bool need_estimate = uses_method(cfg.methods, Method::corr) ||
                               uses_method(cfg.methods, Method::dwmc) ||
                               uses_method(cfg.methods, Method::wmc);
    const bool need_angles =
        uses_method(cfg.methods, Method::wmc) ||
        (uses_method(cfg.methods, Method::corr) && cfg.lambda_grid.empty());

    std::vector<TrialRecord> records(n_tasks * n_slots);
    std::exception_ptr failure = nullptr;

#pragma omp parallel for schedule(dynamic)
    for (long long task = 0; task < static_cast<long long>(n_tasks); ++task) {
        try {
            const std::size_t pi =
                static_cast<std::size_t>(task) / static_cast<std::size_t>(cfg.trials);
            const std::size_t t =
                static_cast<std::size_t>(task) % static_cast<std::size_t>(cfg.trials);
            const double p = p_grid[pi];
            const std::uint64_t seed_instance =
                derive_seed(cfg.seed0, pi, t, StreamPurpose::instance);
            const std::uint64_t seed_noise =
                derive_seed(cfg.seed0, pi, t, StreamPurpose::prior_noise);
            const std::uint64_t seed_mask =
                derive_seed(cfg.seed0, pi, t, StreamPurpose::mask);

            TrialInputs in;
            auto instance = gen_instance(cfg.n, cfg.r, seed_instance);
            in.x_star = std::move(instance.first);
            in.factors = std::move(instance.second);
            in.mask = draw_mask(uniform_plan(cfg.n, p, cfg.symmetric), seed_mask);
            in.observed = masked_copy(in.x_star, in.mask);
            if (need_estimate) {
                in.estimate =
                    noisy_copy_subspaces(in.x_star, cfg.sigma, cfg.r, seed_noise);
                in.phi = subspace_prior(in.estimate->u, in.estimate->v);
            }
            if (need_angles)
                in.decomp = principal_angles(in.factors.u, in.estimate->u,
                                             in.factors.v, in.estimate->v);

            for (std::size_t si = 0; si < n_slots; ++si) {
                double lambda = 0.0;
                const Solution sol = solve_slot(slots[si], in, cfg.solver, lambda);
                const double err = rel_error(sol.x_hat, in.x_star);
                TrialRecord rec;
                rec.method = method_name(slots[si].method);
                rec.p = p;
                rec.lambda = lambda;
                rec.seed = seed_instance;
                rec.rel_error = err;
                rec.iters = sol.iters;
                rec.converged = sol.converged;
                rec.success = sol.converged && err < cfg.tol;
                records[static_cast<std::size_t>(task) * n_slots + si] =
                    std::move(rec);
            }
        } catch (...) {
#pragma omp critical(corrmc_experiment_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    report.trial_records = std::move(records);
    report.rows =
        aggregate_rows(report.trial_records, n_slots, p_grid.size(), cfg.trials);
    report.provenance.library_version = kLibraryVersion;
    report.provenance.timestamp = iso_utc_now();
    report.provenance.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    report.provenance.notes = "synthetic phase transition";
    return report;
}

namespace {

std::vector<std::vector<double>> parse_table(const DatasetSpec& spec) {
    std::ifstream in(spec.path);
    if (!in) throw IoError("cannot open dataset file: " + spec.path);
    std::vector<std::vector<double>> table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        for (char& c : line)
            if (c == ',' || c == '\t' || c == '\r') c = ' ';
        std::istringstream fields(line);
        std::vector<double> row;
        std::string field;
        while (fields >> field) {
            double value = 0.0;
            const char* begin = field.data();
            const char* end = begin + field.size();
            const auto res = std::from_chars(begin, end, value);
            if (res.ec != std::errc{} || res.ptr != end)
                throw IoError("non-numeric field '" + field + "' at " +
                              spec.path + ":" + std::to_string(line_no));
            row.push_back(value);
        }
        if (row.empty()) continue;
        if (!table.empty() && row.size() != table.front().size())
            throw IoError("ragged row at " + spec.path + ":" +
                          std::to_string(line_no));
        table.push_back(std::move(row));
    }
    if (table.empty()) throw IoError("empty dataset file: " + spec.path);
    return table;
}

void scale_features(Dense& z, FeatureScaling scaling) {
    if (scaling == FeatureScaling::none) return;
    const std::size_t n = z.rows();
    for (std::size_t j = 0; j < z.cols(); ++j) {
        if (scaling == FeatureScaling::minmax) {
            double lo = z(0, j), hi = z(0, j);
            for (std::size_t i = 1; i < n; ++i) {
                lo = std::min(lo, z(i, j));
                hi = std::max(hi, z(i, j));
            }
            const double range = hi - lo;
            for (std::size_t i = 0; i < n; ++i)
                z(i, j) = range == 0.0 ? 0.0 : (z(i, j) - lo) / range;
        } else {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += z(i, j);
            mean /= static_cast<double>(n);
            double var = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = z(i, j) - mean;
                var += d * d;
            }
            const double sd = std::sqrt(var / static_cast<double>(n));
            for (std::size_t i = 0; i < n; ++i)
                z(i, j) = sd == 0.0 ? 0.0 : (z(i, j) - mean) / sd;
        }
    }
}

} // namespace

std::pair<Dense, Dense> load_dataset(const DatasetSpec& spec) {
    const auto table = parse_table(spec);
    const std::size_t n = table.size();
    const std::size_t width = table.front().size();
    if (width < 2)
        throw IoError("dataset needs a label column and at least one feature: " +
                      spec.path);
    if (spec.label_column >= width)
        throw ConfigError("label_column out of range for " + spec.path);
    if (spec.n_items != 0 && spec.n_items != n)
        throw ConfigError("dataset has " + std::to_string(n) +
                          " items, expected " + std::to_string(spec.n_items));
    if (spec.n_features != 0 && spec.n_features != width - 1)
        throw ConfigError("dataset has " + std::to_string(width - 1) +
                          " features, expected " +
                          std::to_string(spec.n_features));

    std::vector<double> labels(n);
    std::map<double, int> classes;
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = table[i][spec.label_column];
        classes.emplace(labels[i], 0);
    }
    if (spec.n_classes != 0 && classes.size() != spec.n_classes)
        throw ConfigError("dataset has " + std::to_string(classes.size()) +
                          " classes, expected " +
                          std::to_string(spec.n_classes));

    Dense s_star(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            s_star(i, j) = labels[i] == labels[j] ? 1.0 : 0.0;

    Dense z(n, width - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t out = 0;
        for (std::size_t j = 0; j < width; ++j) {
            if (j == spec.label_column) continue;
            z(i, out++) = table[i][j];
        }
    }
    scale_features(z, spec.scaling);
    return {std::move(s_star), std::move(z)};
}

ExperimentReport run_real_dataset(const DatasetSpec& spec, std::size_t r,
                                  const std::vector<double>& p_grid, int trials,
                                  const ExperimentConfig& cfg) {
    auto loaded = load_dataset(spec);
    const Dense& s_star = loaded.first;
    const Dense& features = loaded.second;
    const std::size_t n = s_star.rows();
    if (r == 0 || r > std::min(n, features.cols()))
        throw ConfigError("rank must lie in [1, min(items, features)]");

    ExperimentConfig effective = cfg;
    effective.n = n;
    effective.r = r;
    effective.trials = trials;
    effective.p_grid = resolved_p_grid(p_grid, n);
    effective.symmetric = true;
    validate_common(effective);

    const auto start = std::chrono::steady_clock::now();

    const ThinSvd label_svd = thin_svd(s_star, r);
    const ThinSvd feature_svd = thin_svd(features, r);
    const Dense& u_hat = feature_svd.u;
    const PrincipalAngleDecomposition decomp =
        principal_angles(label_svd.u, u_hat);
    const double lambda_opt = lambda_star_symmetric(decomp.gamma).lambda;

    TrialInputs shared;
    shared.x_star = s_star;
    shared.factors = label_svd;
    shared.estimate = SubspaceEstimate{u_hat, u_hat};
    shared.phi = subspace_prior(u_hat, u_hat);
    shared.decomp = decomp;

    // The tradeoff weight is fixed per dataset, so the correlation slots use
    // explicit lambda values rather than the per-trial closed form.
    std::vector<Slot> slots = build_slots(effective, /*star_allowed=*/false);
    for (Slot& slot : slots)
        if (slot.method == Method::corr && effective.lambda_grid.empty())
            slot.lambda = lambda_opt;

    const std::vector<double>& grid = effective.p_grid;
    const std::size_t n_slots = slots.size();
    const std::size_t n_tasks = grid.size() * static_cast<std::size_t>(trials);
    std::vector<TrialRecord> records(n_tasks * n_slots);
    std::exception_ptr failure = nullptr;

#pragma omp parallel for schedule(dynamic)
    for (long long task = 0; task < static_cast<long long>(n_tasks); ++task) {
        try {
            const std::size_t pi =
                static_cast<std::size_t>(task) / static_cast<std::size_t>(trials);
            const std::size_t t =
                static_cast<std::size_t>(task) % static_cast<std::size_t>(trials);
            const double p = grid[pi];
            const std::uint64_t seed_mask =
                derive_seed(effective.seed0, pi, t, StreamPurpose::mask);

            TrialInputs in = shared;
            in.mask = draw_mask(uniform_plan(n, p, true), seed_mask);
            in.observed = masked_copy(s_star, in.mask);

            for (std::size_t si = 0; si < n_slots; ++si) {
                double lambda = 0.0;
                const Solution sol =
                    solve_slot(slots[si], in, effective.solver, lambda);
                const double err = rel_error(sol.x_hat, s_star);
                TrialRecord rec;
                rec.method = method_name(slots[si].method);
                rec.p = p;
                rec.lambda = lambda;
                rec.seed = seed_mask;
                rec.rel_error = err;
                rec.iters = sol.iters;
                rec.converged = sol.converged;
                rec.success = sol.converged && err < effective.tol;
                records[static_cast<std::size_t>(task) * n_slots + si] =
                    std::move(rec);
            }
        } catch (...) {
#pragma omp critical(corrmc_experiment_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    ExperimentReport report;
    report.config = effective;
    report.dataset = spec.path;
    report.trial_records = std::move(records);
    report.rows =
        aggregate_rows(report.trial_records, n_slots, grid.size(), trials);
    report.provenance.library_version = kLibraryVersion;
    report.provenance.timestamp = iso_utc_now();
    report.provenance.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::string angles;
    for (std::size_t k = 0; k < decomp.gamma.size(); ++k) {
        if (k > 0) angles += ",";
        angles += fmt_double(decomp.gamma[k]);
    }
    report.provenance.notes = "dataset=" + spec.path +
                              " scaling=" + scaling_name(spec.scaling) +
                              " rank=" + std::to_string(r) +
                              " angles=" + angles +
                              " lambda=" + fmt_double(lambda_opt);
    return report;
}

std::string report_csv(const ExperimentReport& report) {
    std::string out = "method,p,lambda,success_rate,mean_rel_error,trials\n";
    for (const AggregateRow& row : report.rows) {
        out += row.method;
        out += ',';
        out += fmt_double(row.p);
        out += ',';
        out += fmt_double(row.lambda);
        out += ',';
        out += fmt_double(row.success_rate);
        out += ',';
        out += fmt_double(row.mean_rel_error);
        out += ',';
        out += std::to_string(row.trials);
        out += '\n';
    }
    return out;
}

namespace {

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path);
    out << text;
    if (!out) throw IoError("failed writing output file: " + path);
}

} // namespace

void emit_report(const ExperimentReport& report, const std::string& format,
                 const std::string& path) {
    if (format == "csv") {
        write_text_file(path, report_csv(report));
    } else if (format == "json") {
        write_text_file(path, report_to_json(report).dump(2) + "\n");
    } else if (format == "both") {
        write_text_file(path + ".csv", report_csv(report));
        write_text_file(path + ".json", report_to_json(report).dump(2) + "\n");
    } else {
        throw ConfigError("unknown report format: " + format +
                          " (expected csv, json, or both)");
    }
}

ExperimentReport load_report_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open report file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("invalid report JSON in " + path + ": " + e.what());
    }
    try {
        ExperimentReport report;
        report.config = config_from_json(j.at("config"));
        report.dataset = j.at("dataset").get<std::string>();
        for (const auto& row : j.at("rows")) {
            AggregateRow r;
            r.method = row.at("method").get<std::string>();
            r.p = row.at("p").get<double>();
            r.lambda = row.at("lambda").get<double>();
            r.success_rate = row.at("success_rate").get<double>();
            r.mean_rel_error = row.at("mean_rel_error").get<double>();
            r.trials = row.at("trials").get<int>();
            report.rows.push_back(std::move(r));
        }
        for (const auto& rec : j.at("trial_records")) {
            TrialRecord t;
            t.method = rec.at("method").get<std::string>();
            t.p = rec.at("p").get<double>();
            t.lambda = rec.at("lambda").get<double>();
            t.seed = rec.at("seed").get<std::uint64_t>();
            t.rel_error = rec.at("rel_error").get<double>();
            t.iters = rec.at("iters").get<int>();
            t.converged = rec.at("converged").get<bool>();
            t.success = rec.at("success").get<bool>();
            report.trial_records.push_back(std::move(t));
        }
        const json& prov = j.at("provenance");
        report.provenance.library_version =
            prov.at("library_version").get<std::string>();
        report.provenance.timestamp = prov.at("timestamp").get<std::string>();
        report.provenance.wall_time_s = prov.at("wall_time_s").get<double>();
        report.provenance.notes = prov.at("notes").get<std::string>();
        return report;
    } catch (const json::exception& e) {
        throw IoError("report JSON missing fields in " + path + ": " + e.what());
    }
}

} // namespace corrmc
