#ifndef GSAV_DIAGNOSTICS_HPP
#define GSAV_DIAGNOSTICS_HPP

#include <span>
#include <vector>

#include "gsav/schemes.hpp"

namespace gsav {

/// Per-step observables written to diag.csv.
struct DiagRecord {
    long step = 0;
    double t = 0, dt = 0;
    double e_original = 0;
    double e_modified = 0;
    Eigen::ArrayXd mass;  // per component
    Eigen::ArrayXd xi;    // per potential
    Eigen::ArrayXd r;     // per potential
    int newton_iters = 0;
};

/// Discrete Lyapunov functional of the active scheme's stability theorem.
/// One-level forms need the current state only; BDF2-type forms and the
/// stabilized form need the previous level and throw MissingHistory without
/// it.
double modified_energy(SpectralContext& ctx, const ModelSpec& model,
                       std::span<const GFunction> gs, const SchemeKind& kind,
                       const SchemeState& s);

/// First step index at which the theorem's energy form is defined.
long first_audit_index(const SchemeKind& kind);

struct MonotoneReport {
    std::vector<long> violations;  // indices i with s[i+1] above the band
    bool pass() const { return violations.empty(); }
};

/// Flag every i where s[i+1] > s[i] + rel_tol * |s[i]|.
MonotoneReport audit_monotone(std::span<const double> series, double rel_tol);

struct LogFit {
    double slope = 0;
    double intercept = 0;
};

/// Least-squares fit  E ~ slope * log10(t) + intercept  over t in
/// [t_lo, t_hi]. Needs at least 10 samples inside the window.
LogFit fit_log_decay(std::span<const double> times, std::span<const double> energies, double t_lo,
                     double t_hi);

}  // namespace gsav

#endif
