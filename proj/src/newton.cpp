#include "gsav/newton.hpp"

#include <Eigen/LU>
#include <cmath>
#include <sstream>

namespace gsav {

namespace {

double magnitude(double v) {
    return std::isfinite(v) ? std::abs(v) : std::numeric_limits<double>::infinity();
}

/// Bisection on a sign change. When the endpoints share a sign-free decade
/// span (root scale unknown), the midpoint is taken geometrically so roots
/// many orders of magnitude below the bracket edge are still reachable.
ScalarRoot bisect(const std::function<double(double)>& residual, double lo, double hi, double flo,
                  int iters_so_far, const NewtonConfig& cfg) {
    ScalarRoot out;
    out.iters = iters_so_far;
    for (int i = 0; i < 600; ++i) {
        double mid;
        if (lo > 0 && hi / lo > 4.0)
            mid = std::sqrt(lo * hi);
        else if (hi < 0 && lo / hi > 4.0)
            mid = -std::sqrt(lo * hi);
        else
            mid = 0.5 * (lo + hi);
        const double fm = residual(mid);
        ++out.iters;
        out.x = mid;
        out.residual = fm;
        if (magnitude(fm) <= cfg.tol) return out;
        if (hi - lo <= 4e-16 * std::max(std::abs(lo), std::abs(hi))) break;
        if (std::isfinite(fm) && std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    std::ostringstream msg;
    msg << "bisection fallback failed to reach tolerance " << cfg.tol;
    throw NewtonDiverged(msg.str(), out.x, out.residual, out.iters);
}

/// Search [x0-w, x0+w] for a sign change: first a uniform scan, then a
/// decade-by-decade walk toward zero from the smallest valid samples (for
/// residuals whose root hides near a logarithmic singularity at 0).
ScalarRoot try_bracket(const std::function<double(double)>& residual, double x0, int iters_so_far,
                       const NewtonConfig& cfg) {
    const int n = 33;
    const double w = cfg.bracket_halfwidth;
    double prev_x = 0, prev_f = std::numeric_limits<double>::quiet_NaN();
    double small_pos_x = 0, small_pos_f = std::numeric_limits<double>::quiet_NaN();
    double small_neg_x = 0, small_neg_f = std::numeric_limits<double>::quiet_NaN();
    int evals = 0;
    for (int i = 0; i < n; ++i) {
        const double x = x0 - w + 2.0 * w * i / (n - 1);
        const double f = residual(x);
        ++evals;
        if (std::isfinite(f)) {
            if (magnitude(f) <= cfg.tol) return {x, iters_so_far + evals, f};
            if (std::isfinite(prev_f) && std::signbit(f) != std::signbit(prev_f))
                return bisect(residual, prev_x, x, prev_f, iters_so_far + evals, cfg);
            if (x > 0 && (small_pos_x == 0 || x < small_pos_x)) {
                small_pos_x = x;
                small_pos_f = f;
            }
            if (x < 0 && (small_neg_x == 0 || x > small_neg_x)) {
                small_neg_x = x;
                small_neg_f = f;
            }
            prev_x = x;
            prev_f = f;
        }
    }
    for (int side = 0; side < 2; ++side) {
        double x = side == 0 ? small_pos_x : small_neg_x;
        double f = side == 0 ? small_pos_f : small_neg_f;
        if (x == 0 || !std::isfinite(f)) continue;
        for (int k = 0; k < 320 && std::abs(x) > 1e-300; ++k) {
            const double xn = x / 10.0;
            const double fn = residual(xn);
            ++evals;
            if (!std::isfinite(fn)) break;
            if (magnitude(fn) <= cfg.tol) return {xn, iters_so_far + evals, fn};
            if (std::signbit(fn) != std::signbit(f)) {
                if (xn > 0) return bisect(residual, xn, x, fn, iters_so_far + evals, cfg);
                return bisect(residual, x, xn, f, iters_so_far + evals, cfg);
            }
            x = xn;
            f = fn;
        }
    }
    // Roots can hide against the edge of the residual's domain (G^{-1}
    // blowing up just inside it): tighten each valid/invalid boundary seen
    // in the scan and watch for a sign flip on the valid side.
    {
        double good = 0, good_f = std::numeric_limits<double>::quiet_NaN(), bad = 0;
        bool have_pair = false;
        double prev_x = x0 - w;
        double prev_f = residual(prev_x);
        ++evals;
        for (int i = 1; i < n; ++i) {
            const double x = x0 - w + 2.0 * w * i / (n - 1);
            const double f = residual(x);
            ++evals;
            if (std::isfinite(f) != std::isfinite(prev_f)) {
                good = std::isfinite(f) ? x : prev_x;
                good_f = std::isfinite(f) ? f : prev_f;
                bad = std::isfinite(f) ? prev_x : x;
                have_pair = true;
                break;
            }
            prev_x = x;
            prev_f = f;
        }
        if (have_pair) {
            for (int i = 0; i < 200; ++i) {
                const double mid = 0.5 * (good + bad);
                if (mid == good || mid == bad) break;
                const double fm = residual(mid);
                ++evals;
                if (!std::isfinite(fm)) {
                    bad = mid;
                    continue;
                }
                if (magnitude(fm) <= cfg.tol) return {mid, iters_so_far + evals, fm};
                if (std::signbit(fm) != std::signbit(good_f)) {
                    const double lo = std::min(mid, good), hi = std::max(mid, good);
                    const double flo = lo == mid ? fm : good_f;
                    return bisect(residual, lo, hi, flo, iters_so_far + evals, cfg);
                }
                good = mid;
                good_f = fm;
            }
        }
    }
    throw NewtonDiverged("no sign change in fallback bracket", x0,
                         std::numeric_limits<double>::quiet_NaN(), iters_so_far + evals);
}

}  // namespace

ScalarRoot solve_scalar(const std::function<double(double)>& residual,
                        const std::function<double(double)>& derivative, double x0,
                        const NewtonConfig& cfg) {
    double x = x0;
    double f = residual(x);
    if (!std::isfinite(f)) throw NewtonDiverged("residual not finite at initial guess", x0, f, 0);
    ScalarRoot best{x, 0, f};
    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        if (magnitude(f) <= cfg.tol) return {x, iter, f};
        const double d = derivative(x);
        if (!std::isfinite(d) || d == 0.0) {
            try {
                return try_bracket(residual, x0, iter, cfg);
            } catch (const NewtonDiverged&) {
                throw NewtonDiverged("derivative vanished and fallback found no root", best.x,
                                     best.residual, iter);
            }
        }
        double step = f / d;
        double xn = x - step;
        double fn = residual(xn);
        int halvings = 0;
        while ((!std::isfinite(fn) || magnitude(fn) > magnitude(f)) && halvings < 8) {
            step *= 0.5;
            xn = x - step;
            fn = residual(xn);
            ++halvings;
        }
        if (!std::isfinite(fn) || magnitude(fn) >= magnitude(f)) {
            // Stagnated: the damped step cannot improve the residual.
            try {
                return try_bracket(residual, x0, iter, cfg);
            } catch (const NewtonDiverged&) {
                throw NewtonDiverged("Newton stagnated and fallback found no root", best.x,
                                     best.residual, iter);
            }
        }
        x = xn;
        f = fn;
        if (magnitude(f) < magnitude(best.residual)) best = {x, iter + 1, f};
    }
    if (magnitude(f) <= cfg.tol) return {x, cfg.max_iter, f};
    try {
        return try_bracket(residual, x0, cfg.max_iter, cfg);
    } catch (const NewtonDiverged&) {
        throw NewtonDiverged("Newton reached the iteration cap", best.x, best.residual,
                             cfg.max_iter);
    }
}

SystemRoot solve_system(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residual,
                        const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& jacobian,
                        const Eigen::VectorXd& x0, const NewtonConfig& cfg) {
    auto inf_norm = [](const Eigen::VectorXd& v) {
        return v.allFinite() ? v.lpNorm<Eigen::Infinity>() : std::numeric_limits<double>::infinity();
    };
    Eigen::VectorXd x = x0;
    Eigen::VectorXd f = residual(x);
    double fn_norm = inf_norm(f);
    if (!std::isfinite(fn_norm))
        throw NewtonDiverged("system residual not finite at initial guess", 0, fn_norm, 0);
    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        if (fn_norm <= cfg.tol) return {x, iter, fn_norm};
        Eigen::FullPivLU<Eigen::MatrixXd> lu(jacobian(x));
        if (!lu.isInvertible()) throw JacobianSingular("singular Jacobian in coupled xi system");
        Eigen::VectorXd step = lu.solve(f);
        Eigen::VectorXd xn = x - step;
        Eigen::VectorXd fn = residual(xn);
        double n_next = inf_norm(fn);
        int halvings = 0;
        while (n_next > fn_norm && halvings < 8) {
            step *= 0.5;
            xn = x - step;
            fn = residual(xn);
            n_next = inf_norm(fn);
            ++halvings;
        }
        if (n_next >= fn_norm && n_next > cfg.tol)
            throw NewtonDiverged("system Newton stagnated", 0, n_next, iter);
        x = xn;
        f = fn;
        fn_norm = n_next;
    }
    if (fn_norm <= cfg.tol) return {x, cfg.max_iter, fn_norm};
    throw NewtonDiverged("system Newton reached the iteration cap", 0, fn_norm, cfg.max_iter);
}

}  // namespace gsav
