#ifndef GSAV_RUNNER_HPP
#define GSAV_RUNNER_HPP

#include <optional>

#include "gsav/config.hpp"
#include "gsav/diagnostics.hpp"
#include "gsav/initial_data.hpp"
#include "gsav/manufactured.hpp"

namespace gsav {

struct RunResult {
    std::vector<DiagRecord> diag;
    SchemeState state;          // final state
    double max_xi_deviation = 0;  // max over steps of |xi - 1|
    long accepted_steps = 0;
    long rejected_steps = 0;
};

struct RunOptions {
    bool collect_diag = true;
    long diag_every = 1;
    bool write_files = true;  // honor cfg.out_dir when set
};

/// Execute one configured simulation. Writes diag.csv, snapshots, and a
/// manifest under the output directory when one is configured. Stepper
/// failures are rethrown with the step index attached.
RunResult run(const RunConfig& cfg, const RunOptions& opts = {});

/// Step-size controller: compares the trial step against the linear
/// predictor 2 phi^n - phi^{n-1} and rescales dt by rho * sqrt(tol/e),
/// clamped to [dt_min, dt_max]. The step is rejected when e > tol.
struct AdaptDecision {
    double error = 0;
    double dt_next = 0;
    bool accept = true;
};
AdaptDecision adapt_dt(const SchemeState& prev, const SchemeState& trial, double tol, double rho,
                       double dt_min, double dt_max);

struct ConvergenceRow {
    double dt = 0;
    double error = 0;
    double order = std::numeric_limits<double>::quiet_NaN();  // vs previous row
    double max_xi_deviation = 0;
};

enum class ConvergenceReference { Exact, Fine };

/// Error of phi(T) in the max norm against the manufactured solution
/// (Exact) or a dt_min/4 self-reference (Fine), one row per step size.
std::vector<ConvergenceRow> measure_convergence(const RunConfig& cfg,
                                                const std::vector<double>& dts,
                                                ConvergenceReference ref,
                                                bool parallel = true);

struct CompareGReport {
    std::vector<std::string> g_names;
    Eigen::MatrixXd pairwise_l2;  // relative L2 differences of phi(T)
    double max_pairwise_l2 = 0;
    double max_energy_spread = 0;  // max over time of (max-min)/|mean| of E_original
    std::vector<double> times;
    std::vector<std::vector<double>> energy_curves;  // per G
};

/// Run the same configuration once per G variant (shared seed) and compare
/// final fields and original-energy histories.
CompareGReport compare_g_variants(const RunConfig& cfg, const std::vector<std::string>& g_list,
                                  bool parallel = true);

/// Output directory after applying the GSAV_OUTPUT_ROOT prefix, empty when
/// file output is disabled.
std::string resolve_out_dir(const RunConfig& cfg);

}  // namespace gsav

#endif
