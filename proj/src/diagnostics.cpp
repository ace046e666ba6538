#include "gsav/diagnostics.hpp"

#include <cmath>

namespace gsav {

namespace {

double quadratic_part(SpectralContext& ctx, const ModelSpec& model, std::span<const Field> phi) {
    double q = 0;
    for (int c = 0; c < model.components; ++c) {
        Eigen::ArrayXd sym = symbol_array(ctx, model.linear[c]);
        q += 0.5 * inner(ctx, apply_symbol(ctx, sym, phi[c]), phi[c]);
    }
    return q;
}

/// 1/4 [ (L phi, phi) + (L (2phi - phi_prev), 2phi - phi_prev) ] per component.
double bdf2_quadratic(SpectralContext& ctx, const ModelSpec& model, const SchemeState& s) {
    double q = 0;
    for (int c = 0; c < model.components; ++c) {
        Eigen::ArrayXd sym = symbol_array(ctx, model.linear[c]);
        Field two_minus(s.phi[c].grid, 2.0 * s.phi[c].values - s.phi_prev[c].values);
        q += 0.25 * inner(ctx, apply_symbol(ctx, sym, s.phi[c]), s.phi[c]);
        q += 0.25 * inner(ctx, apply_symbol(ctx, sym, two_minus), two_minus);
    }
    return q;
}

}  // namespace

double modified_energy(SpectralContext& ctx, const ModelSpec& model,
                       std::span<const GFunction> gs, const SchemeKind& kind,
                       const SchemeState& s) {
    using F = SchemeKind::Family;
    if (gs.size() != model.potentials.size()) throw ConfigError("need one G per potential");
    const bool bdf2_form = (kind.family == F::First || kind.family == F::Second) &&
                           kind.stencil == Stencil::Bdf2;
    if ((bdf2_form || kind.family == F::Third ||
         (kind.family == F::StabilizedCn && (kind.eps1 > 0 || kind.eps2 > 0))) &&
        !s.has_history())
        throw MissingHistory("two-level energy form needs a previous state");

    if (kind.family == F::Third) {
        const double f_now = bulk_energy(ctx, model.potentials[0], s.phi);
        const double f_prev = bulk_energy(ctx, model.potentials[0], s.phi_prev);
        return bdf2_quadratic(ctx, model, s) + 1.5 * f_now - 0.5 * f_prev;
    }
    if (bdf2_form) {
        double e = bdf2_quadratic(ctx, model, s);
        for (size_t i = 0; i < gs.size(); ++i)
            e += 1.5 * gs[i].modified_scalar(s.r[i]) - 0.5 * gs[i].modified_scalar(s.r_prev[i]);
        return e;
    }

    double e = quadratic_part(ctx, model, s.phi);
    for (size_t i = 0; i < gs.size(); ++i) e += gs[i].modified_scalar(s.r[i]);
    if (kind.family == F::StabilizedCn && (kind.eps1 > 0 || kind.eps2 > 0)) {
        Field rate(s.phi[0].grid, (s.phi[0].values - s.phi_prev[0].values) / s.dt);
        e += 0.5 * kind.eps1 * inner(ctx, rate, rate);
        Eigen::ArrayXd sym = symbol_array(ctx, model.linear[0]);
        e += 0.5 * kind.eps2 * inner(ctx, apply_symbol(ctx, sym, rate), rate);
    }
    return e;
}

long first_audit_index(const SchemeKind& kind) {
    using F = SchemeKind::Family;
    const bool bdf2_form = (kind.family == F::First || kind.family == F::Second) &&
                           kind.stencil == Stencil::Bdf2;
    if (bdf2_form || kind.family == F::Third ||
        (kind.family == F::StabilizedCn && (kind.eps1 > 0 || kind.eps2 > 0)))
        return 1;
    return 0;
}

MonotoneReport audit_monotone(std::span<const double> series, double rel_tol) {
    if (series.size() < 2) throw ConfigError("monotonicity audit needs at least two samples");
    MonotoneReport rep;
    for (size_t i = 0; i + 1 < series.size(); ++i) {
        const double bound = series[i] + rel_tol * std::abs(series[i]);
        if (series[i + 1] > bound) rep.violations.push_back(static_cast<long>(i));
    }
    return rep;
}

LogFit fit_log_decay(std::span<const double> times, std::span<const double> energies, double t_lo,
                     double t_hi) {
    if (times.size() != energies.size()) throw ConfigError("time/energy length mismatch");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long n = 0;
    for (size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > 0)) throw ConfigError("log fit needs positive times");
        if (times[i] < t_lo || times[i] > t_hi) continue;
        const double x = std::log10(times[i]);
        sx += x;
        sy += energies[i];
        sxx += x * x;
        sxy += x * energies[i];
        ++n;
    }
    if (n < 10) throw InsufficientSamples("log fit window holds fewer than 10 samples");
    const double det = n * sxx - sx * sx;
    LogFit fit;
    if (std::abs(det) < 1e-300) {  // all samples at one time; flat fit
        fit.slope = 0;
        fit.intercept = sy / n;
        return fit;
    }
    fit.slope = (n * sxy - sx * sy) / det;
    fit.intercept = (sy * sxx - sx * sxy) / det;
    return fit;
}

}  // namespace gsav
