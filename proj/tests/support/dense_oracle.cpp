#include "dense_oracle.hpp"

#include <optional>

#include "gsav/manufactured.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace gsav::oracle {

namespace {

using Cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;

/// Operator with Fourier multiplier m(kx, ky), assembled as F^{-1} diag(m) F
/// from the raw DFT, taking the real part at the end.
Mat multiplier_matrix(const Grid& g, const std::function<Cplx(double, double, bool, bool)>& mult) {
    const long n = g.size();
    const double fx = 2.0 * std::numbers::pi / g.lx();
    const double fy = 2.0 * std::numbers::pi / g.ly();
    CMat fwd(n, n), bwd(n, n);
    Eigen::VectorXcd diag(n);
    long krow = 0;
    for (int kxi = 0; kxi < g.nx; ++kxi) {
        const int mx = kxi <= g.nx / 2 ? kxi : kxi - g.nx;
        for (int kyi = 0; kyi < g.ny; ++kyi, ++krow) {
            const int my = kyi <= g.ny / 2 ? kyi : kyi - g.ny;
            const double kx = fx * mx, ky = fy * my;
            diag[krow] = mult(kx, ky, kxi == g.nx / 2, kyi == g.ny / 2);
            long col = 0;
            for (int ix = 0; ix < g.nx; ++ix) {
                for (int iy = 0; iy < g.ny; ++iy, ++col) {
                    const double phase = kx * g.x(ix) + ky * g.y(iy);
                    fwd(krow, col) = std::exp(Cplx(0.0, -phase));
                    bwd(col, krow) = std::exp(Cplx(0.0, phase)) / double(n);
                }
            }
        }
    }
    return (bwd * diag.asDiagonal() * fwd).real();
}

Mat linear_matrix(const Grid& g, const LinearOp& op) {
    return multiplier_matrix(g, [&](double kx, double ky, bool, bool) {
        const double k2 = kx * kx + ky * ky;
        return Cplx(op.symbol(k2), 0.0);
    });
}

Mat mobility_matrix(const Grid& g, const Mobility& mob) {
    return multiplier_matrix(g, [&](double kx, double ky, bool, bool) {
        return Cplx(mob.symbol(kx * kx + ky * ky), 0.0);
    });
}

Vec solve_dense(const Mat& a, const Vec& rhs) { return Eigen::PartialPivLU<Mat>(a).solve(rhs); }

/// Tolerance sized for the energy identity: errors in the scalar residual
/// enter the discrete energy bookkeeping directly, so the tolerance tracks
/// the magnitude of the G^{-1} history terms; the coefficient magnitudes only
/// contribute their evaluation noise floor.
NewtonConfig scaled_config(double hist_scale, double coef_scale) {
    NewtonConfig cfg;
    cfg.tol = 1e-12 * (1.0 + hist_scale) + 1e-15 * coef_scale;
    return cfg;
}

double eval_noise_scale(const GFunction& g, double y) {
    try {
        return 0.1 * std::abs(g.inverse_derivative(y) * y);
    } catch (const Error&) {
        return 0.0;
    }
}

double guarded(const std::function<double()>& eval) {
    try {
        return eval();
    } catch (const Error&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

OracleState shift(const OracleState& s) {
    OracleState n = s;
    n.phi_prev = s.phi;
    n.r_prev = s.r;
    n.t = s.t + s.dt;
    return n;
}

Mat implicit_matrix(const DenseOps& ops, int comp, double a, double half = 1.0) {
    const long n = ops.n;
    return a * Mat::Identity(n, n) + half * ops.mob[comp] * ops.lin[comp];
}

OracleState first_bdfk(const DenseOps& ops, const ModelSpec& model, std::span<const GFunction> gs,
                       const OracleState& s, int order, const OracleForcing& forcing) {
    const size_t m = model.potentials.size();
    const bool bdf2 = order == 2;
    const double dt = s.dt;
    const Vec& phi_n = s.phi[0];
    const Vec phi_e = bdf2 ? Vec(2.0 * phi_n - s.phi_prev[0]) : phi_n;
    const double a = (bdf2 ? 1.5 : 1.0) / dt;
    const Mat lhs = implicit_matrix(ops, 0, a);

    Vec rhs = bdf2 ? Vec((4.0 * phi_n - s.phi_prev[0]) / (2.0 * dt)) : Vec(phi_n / dt);
    if (forcing) rhs += forcing(s.t + dt);
    const Vec phi1 = solve_dense(lhs, rhs);

    std::vector<Vec> b(m), phi2(m);
    Eigen::ArrayXd ge(m);
    std::vector<bool> active(m, true);
    for (size_t i = 0; i < m; ++i) {
        b[i] = oracle_fprime(ops, model.potentials[i], {phi_e})[0];
        ge[i] = gs[i].forward(oracle_bulk(ops, model.potentials[i], {phi_e}));
        if (std::abs(ge[i]) < 1e-14) {
            active[i] = false;
            phi2[i] = Vec::Zero(ops.n);
        } else {
            phi2[i] = solve_dense(lhs, Vec(-ops.mob[0] * b[i]));
        }
    }

    const Vec incr_base = bdf2 ? Vec(3.0 * phi1 - 4.0 * phi_n + s.phi_prev[0]) : Vec(phi1 - phi_n);
    const double cg = bdf2 ? 3.0 : 1.0;
    Eigen::VectorXd avec(m), hist(m);
    Mat bmat(m, m);
    double hist_scale = 0, coef_scale = 0;
    for (size_t i = 0; i < m; ++i) {
        avec[i] = active[i] ? ops.inner(b[i], incr_base) : 0.0;
        for (size_t j = 0; j < m; ++j)
            bmat(i, j) = active[i] && active[j] ? ops.inner(b[i], phi2[j]) : 0.0;
        hist[i] = !active[i] ? 0.0
                 : bdf2 ? -4.0 * gs[i].inverse(s.r[i]) + gs[i].inverse(s.r_prev[i])
                        : -gs[i].inverse(s.r[i]);
        if (active[i]) {
            hist_scale += eval_noise_scale(gs[i], s.r[i]) + cg * eval_noise_scale(gs[i], ge[i]);
            if (bdf2) hist_scale += eval_noise_scale(gs[i], s.r_prev[i]);
        }
        hist_scale += std::abs(hist[i]);
        coef_scale += std::abs(avec[i]) + bmat.row(i).cwiseAbs().sum();
    }

    Eigen::ArrayXd xi = Eigen::ArrayXd::Ones(m);
    std::vector<int> act;
    for (size_t i = 0; i < m; ++i)
        if (active[i]) act.push_back(static_cast<int>(i));
    const NewtonConfig cfg = scaled_config(hist_scale, coef_scale);
    if (act.size() == 1) {
        const int i = act[0];
        auto resid = [&](double x) {
            return guarded([&] {
                return cg * gs[i].inverse(x * ge[i]) + hist[i] - x * (avec[i] + cg * x * bmat(i, i));
            });
        };
        auto deriv = [&](double x) {
            return guarded([&] {
                return cg * ge[i] * gs[i].inverse_derivative(x * ge[i]) - avec[i] -
                       2.0 * cg * x * bmat(i, i);
            });
        };
        xi[i] = solve_scalar(resid, deriv, 1.0, cfg).x;
    } else if (act.size() > 1) {
        auto resid = [&](const Eigen::VectorXd& x) {
            Eigen::VectorXd h(act.size());
            for (size_t ii = 0; ii < act.size(); ++ii) {
                const int i = act[ii];
                double coupled = 0;
                for (size_t jj = 0; jj < act.size(); ++jj) coupled += x[jj] * bmat(i, act[jj]);
                h[ii] = guarded([&] {
                    return cg * gs[i].inverse(x[ii] * ge[i]) + hist[i] -
                           x[ii] * (avec[i] + cg * coupled);
                });
            }
            return h;
        };
        auto jac = [&](const Eigen::VectorXd& x) {
            Mat j(act.size(), act.size());
            for (size_t ii = 0; ii < act.size(); ++ii) {
                const int i = act[ii];
                double coupled = 0;
                for (size_t jj = 0; jj < act.size(); ++jj) coupled += x[jj] * bmat(i, act[jj]);
                for (size_t jj = 0; jj < act.size(); ++jj) {
                    j(ii, jj) = -cg * x[ii] * bmat(i, act[jj]);
                    if (ii == jj)
                        j(ii, jj) += guarded([&] {
                                         return cg * ge[i] *
                                                gs[i].inverse_derivative(x[ii] * ge[i]);
                                     }) -
                                     avec[i] - cg * coupled;
                }
            }
            return j;
        };
        const SystemRoot root = solve_system(resid, jac, Eigen::VectorXd::Ones(act.size()), cfg);
        for (size_t ii = 0; ii < act.size(); ++ii) xi[act[ii]] = root.x[ii];
    }

    OracleState n = shift(s);
    n.phi[0] = phi1;
    for (size_t i = 0; i < m; ++i) {
        if (active[i]) {
            n.phi[0] += xi[i] * phi2[i];
            n.r[i] = xi[i] * ge[i];
        } else {
            n.r[i] = s.r[i];
        }
    }
    return n;
}

OracleState cn_step(const DenseOps& ops, const ModelSpec& model, const GFunction& g,
                    const OracleState& s, const OracleForcing& forcing) {
    const int nc = model.components;
    const double dt = s.dt;
    const Potential& pot = model.potentials[0];

    std::vector<Vec> star(nc);
    for (int c = 0; c < nc; ++c) star[c] = 1.5 * s.phi[c] - 0.5 * s.phi_prev[c];
    const std::vector<Vec> f_now = oracle_fprime(ops, pot, s.phi);
    const std::vector<Vec> f_old = oracle_fprime(ops, pot, s.phi_prev);
    std::vector<Vec> fstar(nc);
    for (int c = 0; c < nc; ++c) fstar[c] = 1.5 * f_now[c] - 0.5 * f_old[c];
    const double g_star = g.forward(oracle_bulk(ops, pot, star));

    std::vector<Vec> phi1(nc), phi2(nc);
    for (int c = 0; c < nc; ++c) {
        const Mat lhs = implicit_matrix(ops, c, 1.0 / dt, 0.5);
        Vec rhs = s.phi[c] / dt - 0.5 * (ops.mob[c] * (ops.lin[c] * s.phi[c]));
        if (forcing) rhs += forcing(s.t + 0.5 * dt);
        phi1[c] = solve_dense(lhs, rhs);
        phi2[c] = solve_dense(lhs, Vec(-ops.mob[c] * fstar[c]));
    }

    OracleState n = shift(s);
    if (std::abs(g_star) < 1e-14) {
        for (int c = 0; c < nc; ++c) n.phi[c] = phi1[c];
        n.r[0] = s.r[0];
        return n;
    }
    double A = 0, B = 0;
    for (int c = 0; c < nc; ++c) {
        A += ops.inner(fstar[c], Vec(phi1[c] - s.phi[c]));
        B += ops.inner(fstar[c], phi2[c]);
    }
    const double ginv_rn = g.inverse(s.r[0]);
    auto resid = [&](double x) {
        return guarded(
            [&] { return g.inverse(2.0 * x * g_star - s.r[0]) - ginv_rn - x * (A + x * B); });
    };
    auto deriv = [&](double x) {
        return guarded([&] {
            return 2.0 * g_star * g.inverse_derivative(2.0 * x * g_star - s.r[0]) - A - 2.0 * x * B;
        });
    };
    const double xi = solve_scalar(resid, deriv, 1.0,
                                   scaled_config(2.0 * std::abs(ginv_rn) +
                                                     eval_noise_scale(g, s.r[0]) +
                                                     eval_noise_scale(g, 2.0 * g_star - s.r[0]),
                                                 std::abs(A) + std::abs(B)))
                          .x;
    for (int c = 0; c < nc; ++c) n.phi[c] = phi1[c] + xi * phi2[c];
    n.r[0] = 2.0 * xi * g_star - s.r[0];
    return n;
}

OracleState multi_bdf1(const DenseOps& ops, const ModelSpec& model, const GFunction& g,
                       const OracleState& s) {
    const int nc = model.components;
    const double dt = s.dt;
    const Potential& pot = model.potentials[0];
    const std::vector<Vec> f = oracle_fprime(ops, pot, s.phi);
    const double g0 = g.forward(oracle_bulk(ops, pot, s.phi));

    std::vector<Vec> phi1(nc), phi2(nc);
    for (int c = 0; c < nc; ++c) {
        const Mat lhs = implicit_matrix(ops, c, 1.0 / dt);
        phi1[c] = solve_dense(lhs, Vec(s.phi[c] / dt));
        phi2[c] = solve_dense(lhs, Vec(-ops.mob[c] * f[c]));
    }
    OracleState n = shift(s);
    if (std::abs(g0) < 1e-14) {
        for (int c = 0; c < nc; ++c) n.phi[c] = phi1[c];
        n.r[0] = s.r[0];
        return n;
    }
    double A = 0, B = 0;
    for (int c = 0; c < nc; ++c) {
        A += ops.inner(f[c], Vec(phi1[c] - s.phi[c]));
        B += ops.inner(f[c], phi2[c]);
    }
    const double ginv_rn = g.inverse(s.r[0]);
    auto resid = [&](double x) {
        return guarded([&] { return g.inverse(x * g0) - ginv_rn - x * (A + x * B); });
    };
    auto deriv = [&](double x) {
        return guarded([&] { return g0 * g.inverse_derivative(x * g0) - A - 2.0 * x * B; });
    };
    const double xi = solve_scalar(resid, deriv, 1.0,
                                   scaled_config(2.0 * std::abs(ginv_rn) +
                                                     eval_noise_scale(g, s.r[0]) +
                                                     eval_noise_scale(g, g0),
                                                 std::abs(A) + std::abs(B)))
                          .x;
    for (int c = 0; c < nc; ++c) n.phi[c] = phi1[c] + xi * phi2[c];
    n.r[0] = xi * g0;
    return n;
}

OracleState second_step(const DenseOps& ops, const ModelSpec& model, const GFunction& g,
                        const OracleState& s, Stencil stencil, const OracleForcing& forcing);

OracleState stab_cn(const DenseOps& ops, const ModelSpec& model, const GFunction& g,
                    const OracleState& s, double eps1, double eps2, const OracleForcing& forcing) {
    const double dt = s.dt;
    const Vec& phi_n = s.phi[0];
    const Potential& pot = model.potentials[0];
    const Vec star = 1.5 * phi_n - 0.5 * s.phi_prev[0];
    const double r_star = 1.5 * s.r[0] - 0.5 * s.r_prev[0];
    const Vec b = oracle_fprime(ops, pot, {star})[0];
    const double g_star = g.forward(oracle_bulk(ops, pot, {star}));

    const Mat stab = (eps1 * Mat::Identity(ops.n, ops.n) + eps2 * ops.lin[0]) / (dt * dt);
    const Mat lhs = Mat((1.0 / dt) * Mat::Identity(ops.n, ops.n) +
                        ops.mob[0] * (0.5 * ops.lin[0] + stab));
    Vec rhs = phi_n / dt - 0.5 * (ops.mob[0] * (ops.lin[0] * phi_n)) +
              ops.mob[0] * (stab * Vec(2.0 * phi_n - s.phi_prev[0]));
    if (forcing) rhs += forcing(s.t + 0.5 * dt);

    OracleState n = shift(s);
    if (std::abs(g_star) < 1e-14) {
        n.phi[0] = solve_dense(lhs, rhs);
        n.r[0] = s.r[0];
        return n;
    }
    const double xi = r_star / g_star;
    rhs -= xi * (ops.mob[0] * b);
    n.phi[0] = solve_dense(lhs, rhs);
    const double y = g.inverse(s.r[0]) + xi * ops.inner(b, Vec(n.phi[0] - phi_n));
    n.r[0] = g.forward(y);
    return n;
}

OracleState second_step(const DenseOps& ops, const ModelSpec& model, const GFunction& g,
                        const OracleState& s, Stencil stencil, const OracleForcing& forcing) {
    if (stencil == Stencil::Cn) return stab_cn(ops, model, g, s, 0.0, 0.0, forcing);
    const bool bdf2 = stencil == Stencil::Bdf2;
    const double dt = s.dt;
    const Vec& phi_n = s.phi[0];
    const Potential& pot = model.potentials[0];
    const Vec phi_e = bdf2 ? Vec(2.0 * phi_n - s.phi_prev[0]) : phi_n;
    const double r_e = bdf2 ? 2.0 * s.r[0] - s.r_prev[0] : s.r[0];
    const Vec b = oracle_fprime(ops, pot, {phi_e})[0];
    const double g_e = g.forward(oracle_bulk(ops, pot, {phi_e}));
    const double a = (bdf2 ? 1.5 : 1.0) / dt;
    const Mat lhs = implicit_matrix(ops, 0, a);
    Vec rhs = bdf2 ? Vec((4.0 * phi_n - s.phi_prev[0]) / (2.0 * dt)) : Vec(phi_n / dt);
    if (forcing) rhs += forcing(s.t + dt);

    OracleState n = shift(s);
    if (std::abs(g_e) < 1e-14) {
        n.phi[0] = solve_dense(lhs, rhs);
        n.r[0] = s.r[0];
        return n;
    }
    const double xi = r_e / g_e;
    rhs -= xi * (ops.mob[0] * b);
    n.phi[0] = solve_dense(lhs, rhs);
    double y;
    if (bdf2) {
        const double incr = ops.inner(b, Vec(3.0 * n.phi[0] - 4.0 * phi_n + s.phi_prev[0]));
        y = (4.0 * g.inverse(s.r[0]) - g.inverse(s.r_prev[0]) + xi * incr) / 3.0;
    } else {
        y = g.inverse(s.r[0]) + xi * ops.inner(b, Vec(n.phi[0] - phi_n));
    }
    n.r[0] = g.forward(y);
    return n;
}

OracleState third_step(const DenseOps& ops, const ModelSpec& model, const GFunction& g,
                       const OracleState& s, const OracleForcing& forcing) {
    const double dt = s.dt;
    const Vec& phi_n = s.phi[0];
    const Potential& pot = model.potentials[0];
    const Vec phi_e = 2.0 * phi_n - s.phi_prev[0];
    const Vec b = oracle_fprime(ops, pot, {phi_e})[0];
    const double g_e = g.forward(oracle_bulk(ops, pot, {phi_e}));
    const Mat lhs = implicit_matrix(ops, 0, 1.5 / dt);
    Vec rhs = (4.0 * phi_n - s.phi_prev[0]) / (2.0 * dt);
    if (forcing) rhs += forcing(s.t + dt);
    const Vec phi1 = solve_dense(lhs, rhs);
    const Vec phi2 = solve_dense(lhs, Vec(-ops.mob[0] * b));

    const double A = ops.inner(b, Vec(3.0 * phi1 - 4.0 * phi_n + s.phi_prev[0]));
    const double B = ops.inner(b, phi2);
    const double c0 =
        -4.0 * oracle_bulk(ops, pot, {phi_n}) + oracle_bulk(ops, pot, {s.phi_prev[0]});
    auto resid = [&](double x) {
        return guarded([&] {
            return 3.0 * oracle_bulk(ops, pot, {Vec(phi1 + x * phi2)}) + c0 - x * (A + 3.0 * x * B);
        });
    };
    auto deriv = [&](double x) {
        return guarded([&] {
            return 3.0 * ops.inner(oracle_fprime(ops, pot, {Vec(phi1 + x * phi2)})[0], phi2) - A -
                   6.0 * x * B;
        });
    };
    const NewtonConfig cfg =
        scaled_config(std::abs(c0) + 3.0 * std::abs(oracle_bulk(ops, pot, {phi1})),
                      std::abs(A) + std::abs(B));
    double xi = 1.0;
    if (!(b.cwiseAbs().maxCoeff() < 1e-13 && phi2.cwiseAbs().maxCoeff() < 1e-13 &&
          std::abs(resid(1.0)) <= cfg.tol))
        xi = solve_scalar(resid, deriv, 1.0, cfg).x;
    OracleState n = shift(s);
    n.phi[0] = phi1 + xi * phi2;
    n.r[0] = xi * g_e;
    return n;
}

}  // namespace

DenseOps::DenseOps(const Grid& g, const ModelSpec& model) : grid(g), n(g.size()), w(g.cell_area()) {
    for (int c = 0; c < model.components; ++c) {
        lin.push_back(linear_matrix(g, model.linear[c]));
        mob.push_back(mobility_matrix(g, model.mobility[c]));
    }
    dx = multiplier_matrix(g, [](double kx, double, bool nyqx, bool) {
        return nyqx ? Cplx(0, 0) : Cplx(0, kx);
    });
    dy = multiplier_matrix(g, [](double, double ky, bool, bool nyqy) {
        return nyqy ? Cplx(0, 0) : Cplx(0, ky);
    });
}

double oracle_bulk(const DenseOps& ops, const Potential& pot, const std::vector<Vec>& phi) {
    if (std::holds_alternative<DoubleWell>(pot)) {
        const double eps = std::get<DoubleWell>(pot).eps;
        return ops.w * (phi[0].array().square() - 1.0).square().sum() / (4.0 * eps * eps);
    }
    if (std::holds_alternative<FloryHuggins>(pot)) {
        const double theta = std::get<FloryHuggins>(pot).theta;
        const auto& v = phi[0].array();
        return ops.w * (-0.5 * theta * v.square() + (1.0 + v) * (1.0 + v).log() +
                        (1.0 - v) * (1.0 - v).log())
                           .sum();
    }
    if (std::holds_alternative<MbeLog>(pot)) {
        const Vec gx = ops.dx * phi[0], gy = ops.dy * phi[0];
        return -0.5 * ops.w * (1.0 + gx.array().square() + gy.array().square()).log().sum();
    }
    const auto& wp = std::get<BcpW>(pot);
    const auto& u = phi[0].array();
    const auto& v = phi[1].array();
    return ops.w * ((u.square() - 1.0).square() / 4.0 + (v.square() - 1.0).square() / 4.0 +
                    wp.alpha * u * v + wp.beta * u * v.square() + wp.gamma * u.square() * v)
                       .sum();
}

std::vector<Vec> oracle_fprime(const DenseOps& ops, const Potential& pot,
                               const std::vector<Vec>& phi) {
    if (std::holds_alternative<DoubleWell>(pot)) {
        const double eps = std::get<DoubleWell>(pot).eps;
        return {Vec((phi[0].array() * (phi[0].array().square() - 1.0) / (eps * eps)).matrix())};
    }
    if (std::holds_alternative<FloryHuggins>(pot)) {
        const double theta = std::get<FloryHuggins>(pot).theta;
        const auto& v = phi[0].array();
        return {Vec((((1.0 + v) / (1.0 - v)).log() - theta * v).matrix())};
    }
    if (std::holds_alternative<MbeLog>(pot)) {
        const Vec gx = ops.dx * phi[0], gy = ops.dy * phi[0];
        const Eigen::ArrayXd denom = 1.0 + gx.array().square() + gy.array().square();
        return {Vec(ops.dx * Vec((gx.array() / denom).matrix()) +
                    ops.dy * Vec((gy.array() / denom).matrix()))};
    }
    const auto& wp = std::get<BcpW>(pot);
    const auto& u = phi[0].array();
    const auto& v = phi[1].array();
    Vec du = (u * (u.square() - 1.0) + wp.alpha * v + wp.beta * v.square() + 2.0 * wp.gamma * u * v)
                 .matrix();
    Vec dv = (v * (v.square() - 1.0) + wp.alpha * u + 2.0 * wp.beta * u * v + wp.gamma * u.square())
                 .matrix();
    return {std::move(du), std::move(dv)};
}

OracleState oracle_init(const DenseOps& ops, const ModelSpec& model,
                        std::span<const GFunction> gs, std::vector<Vec> phi0, double dt) {
    OracleState s;
    s.phi = std::move(phi0);
    s.dt = dt;
    s.r.resize(model.potentials.size());
    for (size_t i = 0; i < model.potentials.size(); ++i)
        s.r[i] = gs[i].forward(oracle_bulk(ops, model.potentials[i], s.phi));
    return s;
}

OracleState oracle_advance(const DenseOps& ops, const ModelSpec& model, const SchemeKind& kind,
                           std::span<const GFunction> gs, const OracleState& s,
                           const OracleForcing& forcing) {
    using F = SchemeKind::Family;
    const bool fresh = !s.has_history();
    switch (kind.family) {
        case F::First:
            if (model.potentials.size() > 1)
                return first_bdfk(ops, model, gs, s, fresh ? 1 : 2, forcing);
            if (kind.stencil == Stencil::Bdf1 || fresh)
                return first_bdfk(ops, model, gs, s, 1, forcing);
            if (kind.stencil == Stencil::Bdf2) return first_bdfk(ops, model, gs, s, 2, forcing);
            return cn_step(ops, model, gs[0], s, forcing);
        case F::Second:
            if (kind.stencil == Stencil::Bdf1 || fresh)
                return second_step(ops, model, gs[0], s, Stencil::Bdf1, forcing);
            return second_step(ops, model, gs[0], s, kind.stencil, forcing);
        case F::Third:
            if (fresh) return first_bdfk(ops, model, gs, s, 1, forcing);
            return third_step(ops, model, gs[0], s, forcing);
        case F::MultiCn:
            if (fresh) return multi_bdf1(ops, model, gs[0], s);
            return cn_step(ops, model, gs[0], s, forcing);
        case F::StabilizedCn:
            if (fresh) return second_step(ops, model, gs[0], s, Stencil::Bdf1, forcing);
            return stab_cn(ops, model, gs[0], s, kind.eps1, kind.eps2, forcing);
    }
    throw ConfigError("unhandled scheme kind in oracle");
}

double oracle_gap(const ModelSpec& model, const SchemeKind& kind, std::vector<GFunction> gs,
                  std::vector<Field> phi0, double dt, int nsteps, const Grid& grid,
                  bool with_forcing) {
    SpectralContext ctx(grid);
    SchemeState fast = init_state(ctx, model, gs, phi0, dt);
    DenseOps ops(grid, model);
    std::vector<Vec> phi0v;
    for (const auto& f : phi0) phi0v.push_back(f.values.matrix());
    OracleState slow = oracle_init(ops, model, gs, phi0v, dt);

    Forcing forcing;
    OracleForcing oforcing;
    std::optional<ManufacturedAllenCahn> mfg;
    if (with_forcing) {
        mfg.emplace(ctx, model);
        forcing = [&](double t) { return mfg->forcing(t); };
        oforcing = [&](double t) { return Vec(mfg->forcing(t).values.matrix()); };
    }

    double gap = 0;
    for (int k = 0; k < nsteps; ++k) {
        fast = advance(ctx, model, kind, gs, fast, forcing);
        slow = oracle_advance(ops, model, kind, gs, slow, oforcing);
        for (size_t c = 0; c < fast.phi.size(); ++c)
            gap = std::max(gap, (fast.phi[c].values - slow.phi[c].array()).abs().maxCoeff());
        gap = std::max(gap, (fast.r - slow.r).abs().maxCoeff());
    }
    return gap;
}

}  // namespace gsav::oracle
