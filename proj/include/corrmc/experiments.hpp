#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "corrmc/dense.hpp"
#include "corrmc/linalg.hpp"
#include "corrmc/solvers.hpp"

namespace corrmc {

/// Library version recorded in report provenance.
inline constexpr const char* kLibraryVersion = "0.1.0";

/// Completion methods the benchmark harness can run.
enum class Method {
    mc,   ///< plain nuclear-norm completion
    corr, ///< correlation-guided completion
    dwmc, ///< diagonally weighted completion
    wmc,  ///< subspace-projector weighted completion
};

std::string method_name(Method m);
Method parse_method(const std::string& name); ///< throws ConfigError on unknown names

/// Configuration of a synthetic phase-transition sweep.
struct ExperimentConfig {
    std::size_t n = 32;
    std::size_t r = 4;
    /// Noise level of the prior: the prior subspaces are estimated from
    /// x_star + sigma * G.
    double sigma = 0.01;
    /// Observation probabilities; empty selects {1/n, 2/n, ..., 1}.
    std::vector<double> p_grid;
    int trials = 50;
    /// Success threshold on the relative Frobenius error.
    double tol = 1e-3;
    std::vector<Method> methods = {Method::mc, Method::corr, Method::dwmc, Method::wmc};
    /// Tradeoff weights for the correlation-guided method; empty selects the
    /// per-trial closed-form optimum for each drawn prior.
    std::vector<double> lambda_grid;
    std::uint64_t seed0 = 1;
    /// Couple the mask draws for (i, j) and (j, i).
    bool symmetric = false;
    SolverConfig solver;
};

/// One solve within an experiment.
struct TrialRecord {
    std::string method;
    double p = 0.0;
    double lambda = 0.0;
    std::uint64_t seed = 0; ///< instance seed (prior/mask seeds derive from it)
    double rel_error = 0.0;
    int iters = 0;
    bool converged = false;
    bool success = false;
};

/// Aggregate over the trials of one (method, p, lambda) cell.  For the
/// correlation method without a fixed lambda grid, `lambda` is the mean of
/// the per-trial closed-form weights.
struct AggregateRow {
    std::string method;
    double p = 0.0;
    double lambda = 0.0;
    double success_rate = 0.0;
    double mean_rel_error = 0.0;
    int trials = 0;
};

/// Run metadata.  Excluded from reproducibility comparisons: two runs of the
/// same config are identical except for this block.
struct Provenance {
    std::string library_version;
    std::string timestamp; ///< ISO-8601 UTC
    double wall_time_s = 0.0;
    std::string notes;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::string dataset; ///< empty for synthetic sweeps
    std::vector<AggregateRow> rows;
    std::vector<TrialRecord> trial_records;
    Provenance provenance;
};

/// Random rank-r instance: orthonormal bases of the spans of two independent
/// Gaussian matrices with all singular values 1/sqrt(r), so ||x_star||_F = 1.
std::pair<Dense, ThinSvd> gen_instance(std::size_t n, std::size_t r,
                                       std::uint64_t seed);

/// Sweep observation probabilities: for every (p, trial) draw one instance,
/// one prior perturbation, and one mask — shared by all methods and lambda
/// values — solve, and classify success as rel_error < tol.  Per-trial seeds
/// are pre-assigned from (seed0, p index, trial index), so results do not
/// depend on scheduling order.  Solver non-convergence is recorded in the
/// trial, never thrown.
ExperimentReport run_phase_transition(const ExperimentConfig& cfg);

/// How feature columns are rescaled before the subspace estimate.
enum class FeatureScaling {
    minmax, ///< map each column onto [0, 1]
    zscore, ///< zero mean, unit variance per column
    none,
};

std::string scaling_name(FeatureScaling s);
FeatureScaling parse_scaling(const std::string& name);

/// A delimited numeric table with one label column; the remaining columns
/// are features.  Zero-valued size fields skip validation.
struct DatasetSpec {
    std::string path;
    std::size_t label_column = 0;
    std::size_t n_items = 0;
    std::size_t n_features = 0;
    std::size_t n_classes = 0;
    /// Column scaling applied to the features before the subspace estimate.
    /// The default min-max scaling reproduces the reference principal angles
    /// for the bundled datasets; the choice is recorded in provenance.
    FeatureScaling scaling = FeatureScaling::minmax;
};

/// Load the table: returns the label-similarity matrix s_star
/// (s_star(i, j) = 1 iff items i and j share a label; rank = number of
/// classes) and the scaled feature matrix (items x features).
std::pair<Dense, Dense> load_dataset(const DatasetSpec& spec);

/// Semi-supervised-clustering experiment: complete the label-similarity
/// matrix from symmetrically sampled entries, with the prior subspace
/// estimated from the rank-r SVD of the feature matrix.  The tradeoff
/// weight is the closed-form symmetric optimum for the measured principal
/// angles unless cfg.lambda_grid overrides it.
ExperimentReport run_real_dataset(const DatasetSpec& spec, std::size_t r,
                                  const std::vector<double>& p_grid, int trials,
                                  const ExperimentConfig& cfg);

/// The aggregate table as CSV with the fixed column order
///   method,p,lambda,success_rate,mean_rel_error,trials.
std::string report_csv(const ExperimentReport& report);

/// Write the report: format is "csv", "json", or "both" (which appends the
/// extensions to `path`).  JSON carries the full per-trial records and
/// round-trips through load_report_json.
void emit_report(const ExperimentReport& report, const std::string& format,
                 const std::string& path);

ExperimentReport load_report_json(const std::string& path);

} // namespace corrmc
