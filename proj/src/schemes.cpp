#include "gsav/schemes.hpp"

#include <cmath>

namespace gsav {

namespace {

constexpr double kDenominatorFloor = 1e-14;  // |G(int F)| below this is unusable
constexpr double kFlatSource = 1e-13;        // F' below this counts as absent

double guarded(const std::function<double()>& eval) {
    try {
        return eval();
    } catch (const Error&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

Field extrapolate(const Field& cur, const Field& prev, double w_cur, double w_prev) {
    Field out(cur.grid);
    out.values = w_cur * cur.values + w_prev * prev.values;
    return out;
}

void check_state(const ModelSpec& model, const SchemeState& s) {
    model.validate();
    if (s.phi.size() != static_cast<size_t>(model.components))
        throw ConfigError("state component count does not match the model");
    if (s.r.size() != static_cast<long>(model.potentials.size()))
        throw ConfigError("state carries the wrong number of auxiliary scalars");
    if (!(s.dt > 0)) throw ConfigError("time step must be positive");
}

SchemeState shift_history(const SchemeState& s) {
    SchemeState n = s;
    n.phi_prev = s.phi;
    n.r_prev = s.r;
    n.t = s.t + s.dt;
    n.dt_prev = s.dt;
    n.step = s.step + 1;
    return n;
}

void check_finite(const SchemeState& s) {
    for (const auto& f : s.phi)
        if (!f.all_finite()) throw NonFiniteField("non-finite field values after step");
    if (!s.r.allFinite()) throw NonFiniteField("non-finite auxiliary scalar after step");
}

/// Tolerance sized for the energy identity: errors in the scalar residual
/// enter the discrete energy bookkeeping directly, so the tolerance tracks
/// the magnitude of the G^{-1} history terms plus the rounding floor of each
/// G^{-1} evaluation, |(G^{-1})'(y)| * eps * |y| (for the mapped variants the
/// scale constant C dominates the values themselves). Coefficient magnitudes
/// only contribute their own noise floor.
NewtonConfig scaled_config(double hist_scale, double coef_scale) {
    NewtonConfig cfg;
    cfg.tol = 1e-12 * (1.0 + hist_scale) + 1e-15 * coef_scale;
    return cfg;
}

double eval_noise_scale(const GFunction& g, double y) {
    try {
        return 0.1 * std::abs(g.inverse_derivative(y) * y);  // ~450 ulp of headroom
    } catch (const Error&) {
        return 0.0;
    }
}

/// First-family BDF step, order 1 or 2, any number of potentials.
/// Splits phi^{n+1} = phi_1 + sum_i xi_i phi_{i,2} and solves the coupled
/// scalar system for the xi_i.
SchemeState first_bdfk(SpectralContext& ctx, const ModelSpec& model, std::span<const GFunction> gs,
                       const SchemeState& s, int order, const Forcing& forcing) {
    check_state(model, s);
    if (model.components != 1) throw UnsupportedModel("first-family steppers are single-component");
    const size_t m = model.potentials.size();
    if (gs.size() != m) throw ConfigError("need one G per potential");
    const double dt = s.dt;
    const Field& phi_n = s.phi[0];
    const bool bdf2 = order == 2;
    if (bdf2 && !s.has_history()) throw MissingHistory("BDF2 step requires a previous level");

    const Field phi_e = bdf2 ? extrapolate(phi_n, s.phi_prev[0], 2.0, -1.0) : phi_n;
    const double a = (bdf2 ? 1.5 : 1.0) / dt;
    const Eigen::ArrayXd lin = symbol_array(ctx, model.linear[0]);
    const Eigen::ArrayXd mob = symbol_array(ctx, model.mobility[0]);
    const Eigen::ArrayXd sym = mob * lin;

    Field rhs = bdf2 ? extrapolate(phi_n, s.phi_prev[0], 2.0 / dt, -0.5 / dt)
                     : Field(phi_n.grid, phi_n.values / dt);
    if (forcing) rhs.values += forcing(s.t + dt).values;
    const Field phi1 = solve_diagonal(ctx, a, sym, rhs);

    std::vector<Field> b(m, Field{});
    std::vector<Field> phi2(m, Field{});
    Eigen::ArrayXd g_of_e(m);
    std::vector<bool> active(m, true);
    for (size_t i = 0; i < m; ++i) {
        b[i] = ctx.filter_nonlinear(
            potential_derivative(ctx, model.potentials[i], {&phi_e, 1})[0]);
        g_of_e[i] = gs[i].forward(bulk_energy(ctx, model.potentials[i], {&phi_e, 1}));
        const double b_inf = b[i].values.abs().maxCoeff();
        if (std::abs(g_of_e[i]) < kDenominatorFloor) {
            if (b_inf > kFlatSource)
                throw DenominatorNearZero("G(int F) vanished with a nonzero F'");
            active[i] = false;
            phi2[i] = Field(ctx.grid());
        } else {
            phi2[i] = ctx.inverse(
                solve_diagonal_hat(ctx, a, sym, Spectrum(-mob * ctx.forward(b[i]))));
        }
    }

    const Field incr_base = bdf2 ? Field(phi_n.grid, 3.0 * phi1.values - 4.0 * phi_n.values +
                                                         s.phi_prev[0].values)
                                 : Field(phi_n.grid, phi1.values - phi_n.values);
    const double cg = bdf2 ? 3.0 : 1.0;
    Eigen::VectorXd avec(m);
    Eigen::MatrixXd bmat(m, m);
    Eigen::VectorXd hist(m);
    double hist_scale = 0, coef_scale = 0;
    for (size_t i = 0; i < m; ++i) {
        avec[i] = active[i] ? inner(ctx, b[i], incr_base) : 0.0;
        for (size_t j = 0; j < m; ++j)
            bmat(i, j) = active[i] && active[j] ? inner(ctx, b[i], phi2[j]) : 0.0;
        hist[i] = 0;
        if (active[i]) {
            hist[i] = bdf2 ? -4.0 * gs[i].inverse(s.r[i]) + gs[i].inverse(s.r_prev[i])
                           : -gs[i].inverse(s.r[i]);
            hist_scale += eval_noise_scale(gs[i], s.r[i]) + cg * eval_noise_scale(gs[i], g_of_e[i]);
            if (bdf2) hist_scale += eval_noise_scale(gs[i], s.r_prev[i]);
        }
        hist_scale += std::abs(hist[i]);
        coef_scale += std::abs(avec[i]) + bmat.row(i).cwiseAbs().sum();
    }

    // Residual H_i(xi) = cg G_i^{-1}(xi_i g_i) + hist_i - xi_i (A_i + cg sum_j xi_j B_ij)
    Eigen::ArrayXd xi = Eigen::ArrayXd::Ones(m);
    int iters = 0;
    std::vector<int> act;
    for (size_t i = 0; i < m; ++i)
        if (active[i]) act.push_back(static_cast<int>(i));
    const NewtonConfig cfg = scaled_config(hist_scale, coef_scale);
    if (act.size() == 1) {
        const int i = act[0];
        auto resid = [&](double x) {
            return guarded([&] {
                return cg * gs[i].inverse(x * g_of_e[i]) + hist[i] -
                       x * (avec[i] + cg * x * bmat(i, i));
            });
        };
        auto deriv = [&](double x) {
            return guarded([&] {
                return cg * g_of_e[i] * gs[i].inverse_derivative(x * g_of_e[i]) - avec[i] -
                       2.0 * cg * x * bmat(i, i);
            });
        };
        const ScalarRoot root = solve_scalar(resid, deriv, 1.0, cfg);
        xi[i] = root.x;
        iters = root.iters;
    } else if (act.size() > 1) {
        auto resid = [&](const Eigen::VectorXd& x) {
            Eigen::VectorXd h(act.size());
            for (size_t ii = 0; ii < act.size(); ++ii) {
                const int i = act[ii];
                double coupled = 0;
                for (size_t jj = 0; jj < act.size(); ++jj) coupled += x[jj] * bmat(i, act[jj]);
                h[ii] = guarded([&] {
                    return cg * gs[i].inverse(x[ii] * g_of_e[i]) + hist[i] -
                           x[ii] * (avec[i] + cg * coupled);
                });
            }
            return h;
        };
        auto jac = [&](const Eigen::VectorXd& x) {
            Eigen::MatrixXd j(act.size(), act.size());
            for (size_t ii = 0; ii < act.size(); ++ii) {
                const int i = act[ii];
                double coupled = 0;
                for (size_t jj = 0; jj < act.size(); ++jj) coupled += x[jj] * bmat(i, act[jj]);
                for (size_t jj = 0; jj < act.size(); ++jj) {
                    const int jcol = act[jj];
                    j(ii, jj) = -cg * x[ii] * bmat(i, jcol);
                    if (ii == jj)
                        j(ii, jj) += guarded([&] {
                                         return cg * g_of_e[i] *
                                                gs[i].inverse_derivative(x[ii] * g_of_e[i]);
                                     }) -
                                     avec[i] - cg * coupled;
                }
            }
            return j;
        };
        const SystemRoot root =
            solve_system(resid, jac, Eigen::VectorXd::Ones(act.size()), cfg);
        for (size_t ii = 0; ii < act.size(); ++ii) xi[act[ii]] = root.x[ii];
        iters = root.iters;
    }

    SchemeState n = shift_history(s);
    n.phi[0] = phi1;
    for (size_t i = 0; i < m; ++i) {
        if (active[i]) {
            n.phi[0].values += xi[i] * phi2[i].values;
            n.r[i] = xi[i] * g_of_e[i];
        } else {
            n.r[i] = s.r[i];
        }
    }
    n.xi_last = xi;
    n.newton_iters = iters;
    check_finite(n);
    return n;
}

/// Crank-Nicolson step shared by the single-component first family and the
/// multi-component scheme: implicit operator at the half step, source values
/// extrapolated to t^{n+1/2}, one scalar solve for xi, and
/// r^{n+1} = 2 xi g - r^n.
SchemeState cn_step(SpectralContext& ctx, const ModelSpec& model, const GFunction& g,
                    const SchemeState& s, const Forcing& forcing) {
    check_state(model, s);
    if (model.potentials.size() != 1)
        throw UnsupportedModel("Crank-Nicolson steppers carry one shared potential");
    if (!s.has_history()) throw MissingHistory("CN step requires a previous level");
    const double dt = s.dt;
    const int nc = model.components;
    const Potential& pot = model.potentials[0];

    std::vector<Field> star(nc, Field{});
    for (int c = 0; c < nc; ++c) star[c] = extrapolate(s.phi[c], s.phi_prev[c], 1.5, -0.5);
    const std::vector<Field> f_now = potential_derivative(ctx, pot, s.phi);
    const std::vector<Field> f_old = potential_derivative(ctx, pot, s.phi_prev);
    std::vector<Field> fstar(nc, Field{});
    double b_inf = 0;
    for (int c = 0; c < nc; ++c) {
        fstar[c] = ctx.filter_nonlinear(extrapolate(f_now[c], f_old[c], 1.5, -0.5));
        b_inf = std::max(b_inf, fstar[c].values.abs().maxCoeff());
    }
    const double g_star = g.forward(bulk_energy(ctx, pot, star));

    const double a = 1.0 / dt;
    std::vector<Field> phi1(nc, Field{}), phi2(nc, Field{});
    for (int c = 0; c < nc; ++c) {
        const Eigen::ArrayXd lin = symbol_array(ctx, model.linear[c]);
        const Eigen::ArrayXd mob = symbol_array(ctx, model.mobility[c]);
        const Eigen::ArrayXd half = 0.5 * mob * lin;
        Spectrum phin_hat = ctx.forward(s.phi[c]);
        Spectrum rhs = phin_hat / dt - half * phin_hat;
        if (forcing) {
            if (nc != 1) throw UnsupportedModel("forcing supports single-component models only");
            rhs += ctx.forward(forcing(s.t + 0.5 * dt));
        }
        phi1[c] = ctx.inverse(solve_diagonal_hat(ctx, a, half, rhs));
        phi2[c] = ctx.inverse(
            solve_diagonal_hat(ctx, a, half, Spectrum(-mob * ctx.forward(fstar[c]))));
    }

    SchemeState n = shift_history(s);
    if (std::abs(g_star) < kDenominatorFloor) {
        if (b_inf > kFlatSource) throw DenominatorNearZero("G(int F) vanished with a nonzero F'");
        for (int c = 0; c < nc; ++c) n.phi[c] = phi1[c];
        n.r[0] = s.r[0];
        n.xi_last = Eigen::ArrayXd::Ones(1);
        n.newton_iters = 0;
        check_finite(n);
        return n;
    }

    double A = 0, B = 0;
    for (int c = 0; c < nc; ++c) {
        A += inner(ctx, fstar[c], Field(s.phi[c].grid, phi1[c].values - s.phi[c].values));
        B += inner(ctx, fstar[c], phi2[c]);
    }
    const double ginv_rn = g.inverse(s.r[0]);
    auto resid = [&](double x) {
        return guarded([&] { return g.inverse(2.0 * x * g_star - s.r[0]) - ginv_rn - x * (A + x * B); });
    };
    auto deriv = [&](double x) {
        return guarded([&] {
            return 2.0 * g_star * g.inverse_derivative(2.0 * x * g_star - s.r[0]) - A - 2.0 * x * B;
        });
    };
    const ScalarRoot root = solve_scalar(
        resid, deriv, 1.0,
        scaled_config(2.0 * std::abs(ginv_rn) + eval_noise_scale(g, s.r[0]) +
                          eval_noise_scale(g, 2.0 * g_star - s.r[0]),
                      std::abs(A) + std::abs(B)));

    for (int c = 0; c < nc; ++c) {
        n.phi[c] = phi1[c];
        n.phi[c].values += root.x * phi2[c].values;
    }
    n.r[0] = 2.0 * root.x * g_star - s.r[0];
    n.xi_last = Eigen::ArrayXd::Constant(1, root.x);
    n.newton_iters = root.iters;
    check_finite(n);
    return n;
}

/// One-level variant of cn_step used for startup of multi-component runs.
SchemeState multi_bdf1(SpectralContext& ctx, const ModelSpec& model, const GFunction& g,
                       const SchemeState& s) {
    check_state(model, s);
    const double dt = s.dt;
    const int nc = model.components;
    const Potential& pot = model.potentials[0];
    const std::vector<Field> f = potential_derivative(ctx, pot, s.phi);
    const double g0 = g.forward(bulk_energy(ctx, pot, s.phi));
    double b_inf = 0;
    for (int c = 0; c < nc; ++c) b_inf = std::max(b_inf, f[c].values.abs().maxCoeff());

    const double a = 1.0 / dt;
    std::vector<Field> phi1(nc, Field{}), phi2(nc, Field{});
    for (int c = 0; c < nc; ++c) {
        const Eigen::ArrayXd sym =
            symbol_array(ctx, model.mobility[c]) * symbol_array(ctx, model.linear[c]);
        phi1[c] = solve_diagonal(ctx, a, sym, Field(s.phi[c].grid, s.phi[c].values / dt));
        phi2[c] = ctx.inverse(solve_diagonal_hat(
            ctx, a, sym,
            Spectrum(-symbol_array(ctx, model.mobility[c]) *
                     ctx.forward(ctx.filter_nonlinear(f[c])))));
    }

    SchemeState n = shift_history(s);
    if (std::abs(g0) < kDenominatorFloor) {
        if (b_inf > kFlatSource) throw DenominatorNearZero("G(int F) vanished with a nonzero F'");
        for (int c = 0; c < nc; ++c) n.phi[c] = phi1[c];
        n.r[0] = s.r[0];
        n.xi_last = Eigen::ArrayXd::Ones(1);
        n.newton_iters = 0;
        check_finite(n);
        return n;
    }

    double A = 0, B = 0;
    for (int c = 0; c < nc; ++c) {
        A += inner(ctx, f[c], Field(s.phi[c].grid, phi1[c].values - s.phi[c].values));
        B += inner(ctx, f[c], phi2[c]);
    }
    const double ginv_rn = g.inverse(s.r[0]);
    auto resid = [&](double x) {
        return guarded([&] { return g.inverse(x * g0) - ginv_rn - x * (A + x * B); });
    };
    auto deriv = [&](double x) {
        return guarded(
            [&] { return g0 * g.inverse_derivative(x * g0) - A - 2.0 * x * B; });
    };
    const ScalarRoot root = solve_scalar(
        resid, deriv, 1.0,
        scaled_config(2.0 * std::abs(ginv_rn) + eval_noise_scale(g, s.r[0]) +
                          eval_noise_scale(g, g0),
                      std::abs(A) + std::abs(B)));
    for (int c = 0; c < nc; ++c) {
        n.phi[c] = phi1[c];
        n.phi[c].values += root.x * phi2[c].values;
    }
    n.r[0] = root.x * g0;
    n.xi_last = Eigen::ArrayXd::Constant(1, root.x);
    n.newton_iters = root.iters;
    check_finite(n);
    return n;
}

}  // namespace

SchemeKind SchemeKind::parse(const std::string& family, const std::string& order, double eps1,
                             double eps2) {
    SchemeKind k;
    if (family == "first")
        k.family = Family::First;
    else if (family == "second")
        k.family = Family::Second;
    else if (family == "third")
        k.family = Family::Third;
    else if (family == "multi-cn")
        k.family = Family::MultiCn;
    else if (family == "stabilized-cn")
        k.family = Family::StabilizedCn;
    else
        throw ConfigError("unknown scheme family: " + family);
    if (order == "1" || order == "bdf1")
        k.stencil = Stencil::Bdf1;
    else if (order == "bdf2" || order == "2")
        k.stencil = Stencil::Bdf2;
    else if (order == "cn")
        k.stencil = Stencil::Cn;
    else
        throw ConfigError("unknown scheme order: " + order);
    if (k.family == Family::Third && k.stencil != Stencil::Bdf2)
        throw ConfigError("third family is BDF2 only");
    if (k.family == Family::MultiCn || k.family == Family::StabilizedCn) k.stencil = Stencil::Cn;
    if (eps1 < 0 || eps2 < 0) throw ConfigError("stabilization constants must be >= 0");
    k.eps1 = eps1;
    k.eps2 = eps2;
    return k;
}

std::string SchemeKind::to_string() const {
    std::string f;
    switch (family) {
        case Family::First: f = "first"; break;
        case Family::Second: f = "second"; break;
        case Family::Third: return "third:bdf2";
        case Family::MultiCn: return "multi-cn";
        case Family::StabilizedCn: return "stabilized-cn";
    }
    switch (stencil) {
        case Stencil::Bdf1: return f + ":bdf1";
        case Stencil::Bdf2: return f + ":bdf2";
        case Stencil::Cn: return f + ":cn";
    }
    return f;
}

SchemeState init_state(SpectralContext& ctx, const ModelSpec& model,
                       std::span<const GFunction> gs, std::vector<Field> phi0, double dt) {
    model.validate();
    if (gs.size() != model.potentials.size()) throw ConfigError("need one G per potential");
    if (phi0.size() != static_cast<size_t>(model.components))
        throw ConfigError("wrong number of initial fields");
    SchemeState s;
    s.phi = std::move(phi0);
    s.dt = dt;
    s.r.resize(model.potentials.size());
    for (size_t i = 0; i < model.potentials.size(); ++i)
        s.r[i] = gs[i].forward(bulk_energy(ctx, model.potentials[i], s.phi));
    s.xi_last = Eigen::ArrayXd::Ones(s.r.size());
    return s;
}

SchemeState step_first(SpectralContext& ctx, const ModelSpec& model, const GFunction& g,
                       const SchemeState& s, Stencil stencil, const Forcing& forcing) {
    if (stencil == Stencil::Cn) return cn_step(ctx, model, g, s, forcing);
    return first_bdfk(ctx, model, {&g, 1}, s, stencil == Stencil::Bdf2 ? 2 : 1, forcing);
}

SchemeState step_first_multi_potential(SpectralContext& ctx, const ModelSpec& model,
                                       std::span<const GFunction> gs, const SchemeState& s,
                                       const Forcing& forcing) {
    return first_bdfk(ctx, model, gs, s, 2, forcing);
}

SchemeState step_second(SpectralContext& ctx, const ModelSpec& model, const GFunction& g,
                        const SchemeState& s, Stencil stencil, const Forcing& forcing) {
    if (stencil == Stencil::Cn) return step_stabilized_cn(ctx, model, g, s, 0.0, 0.0, forcing);
    check_state(model, s);
    if (model.components != 1 || model.potentials.size() != 1)
        throw UnsupportedModel("second-family steppers are single-component, single-potential");
    const bool bdf2 = stencil == Stencil::Bdf2;
    if (bdf2 && !s.has_history()) throw MissingHistory("BDF2 step requires a previous level");
    const double dt = s.dt;
    const Field& phi_n = s.phi[0];
    const Potential& pot = model.potentials[0];

    const Field phi_e = bdf2 ? extrapolate(phi_n, s.phi_prev[0], 2.0, -1.0) : phi_n;
    const double r_e = bdf2 ? 2.0 * s.r[0] - s.r_prev[0] : s.r[0];
    const Field b = ctx.filter_nonlinear(potential_derivative(ctx, pot, {&phi_e, 1})[0]);
    const double g_e = g.forward(bulk_energy(ctx, pot, {&phi_e, 1}));
    const double b_inf = b.values.abs().maxCoeff();

    const double a = (bdf2 ? 1.5 : 1.0) / dt;
    const Eigen::ArrayXd lin = symbol_array(ctx, model.linear[0]);
    const Eigen::ArrayXd mob = symbol_array(ctx, model.mobility[0]);
    Field rhs = bdf2 ? extrapolate(phi_n, s.phi_prev[0], 2.0 / dt, -0.5 / dt)
                     : Field(phi_n.grid, phi_n.values / dt);
    if (forcing) rhs.values += forcing(s.t + dt).values;

    SchemeState n = shift_history(s);
    n.newton_iters = 0;
    if (std::abs(g_e) < kDenominatorFloor) {
        if (b_inf > kFlatSource) throw DenominatorNearZero("G(int F) vanished with a nonzero F'");
        n.phi[0] = solve_diagonal(ctx, a, Eigen::ArrayXd(mob * lin), rhs);
        n.r[0] = s.r[0];
        n.xi_last = Eigen::ArrayXd::Ones(1);
        check_finite(n);
        return n;
    }
    const double xi = r_e / g_e;
    Spectrum rhs_hat = ctx.forward(rhs);
    rhs_hat -= xi * mob * ctx.forward(b);
    n.phi[0] = ctx.inverse(solve_diagonal_hat(ctx, a, Eigen::ArrayXd(mob * lin), rhs_hat));

    double y;
    if (bdf2) {
        const double incr = inner(
            ctx, b, Field(phi_n.grid, 3.0 * n.phi[0].values - 4.0 * phi_n.values + s.phi_prev[0].values));
        y = (4.0 * g.inverse(s.r[0]) - g.inverse(s.r_prev[0]) + xi * incr) / 3.0;
    } else {
        y = g.inverse(s.r[0]) +
            xi * inner(ctx, b, Field(phi_n.grid, n.phi[0].values - phi_n.values));
    }
    n.r[0] = g.forward(y);
    n.xi_last = Eigen::ArrayXd::Constant(1, xi);
    check_finite(n);
    return n;
}

SchemeState step_third_bdf2(SpectralContext& ctx, const ModelSpec& model, const GFunction& g,
                            const SchemeState& s, const Forcing& forcing) {
    check_state(model, s);
    if (model.components != 1 || model.potentials.size() != 1)
        throw UnsupportedModel("third-family stepper is single-component, single-potential");
    if (!s.has_history()) throw MissingHistory("third-family step requires a previous level");
    const double dt = s.dt;
    const Field& phi_n = s.phi[0];
    const Potential& pot = model.potentials[0];

    const Field phi_e = extrapolate(phi_n, s.phi_prev[0], 2.0, -1.0);
    const Field b = ctx.filter_nonlinear(potential_derivative(ctx, pot, {&phi_e, 1})[0]);
    const double g_e = g.forward(bulk_energy(ctx, pot, {&phi_e, 1}));

    const double a = 1.5 / dt;
    const Eigen::ArrayXd lin = symbol_array(ctx, model.linear[0]);
    const Eigen::ArrayXd mob = symbol_array(ctx, model.mobility[0]);
    const Eigen::ArrayXd sym = mob * lin;
    Field rhs = extrapolate(phi_n, s.phi_prev[0], 2.0 / dt, -0.5 / dt);
    if (forcing) rhs.values += forcing(s.t + dt).values;
    const Field phi1 = solve_diagonal(ctx, a, sym, rhs);
    const Field phi2 =
        ctx.inverse(solve_diagonal_hat(ctx, a, sym, Spectrum(-mob * ctx.forward(b))));

    const double A = inner(
        ctx, b, Field(phi_n.grid, 3.0 * phi1.values - 4.0 * phi_n.values + s.phi_prev[0].values));
    const double B = inner(ctx, b, phi2);
    const double c0 = -4.0 * bulk_energy(ctx, pot, {&phi_n, 1}) +
                      bulk_energy(ctx, pot, {&s.phi_prev[0], 1});

    auto candidate = [&](double x) {
        Field c(phi_n.grid);
        c.values = phi1.values + x * phi2.values;
        return c;
    };
    auto resid = [&](double x) {
        return guarded([&] {
            const Field c = candidate(x);
            return 3.0 * bulk_energy(ctx, pot, {&c, 1}) + c0 - x * (A + 3.0 * x * B);
        });
    };
    auto deriv = [&](double x) {
        return guarded([&] {
            const Field c = candidate(x);
            return 3.0 * inner(ctx, potential_derivative(ctx, pot, {&c, 1})[0], phi2) - A -
                   6.0 * x * B;
        });
    };

    SchemeState n = shift_history(s);
    const NewtonConfig cfg =
        scaled_config(std::abs(c0) + 3.0 * std::abs(bulk_energy(ctx, pot, {&phi1, 1})),
                      std::abs(A) + std::abs(B));
    double xi, iters;
    const double b_inf = b.values.abs().maxCoeff();
    const double phi2_inf = phi2.values.abs().maxCoeff();
    if (b_inf < kFlatSource && phi2_inf < kFlatSource && std::abs(resid(1.0)) <= cfg.tol) {
        // Residual is flat in xi (exact critical point); take the consistent value.
        xi = 1.0;
        iters = 0;
    } else {
        const ScalarRoot root = solve_scalar(resid, deriv, 1.0, cfg);
        xi = root.x;
        iters = root.iters;
    }
    n.phi[0] = candidate(xi);
    n.r[0] = xi * g_e;
    n.xi_last = Eigen::ArrayXd::Constant(1, xi);
    n.newton_iters = static_cast<int>(iters);
    check_finite(n);
    return n;
}

SchemeState step_multicomponent_cn(SpectralContext& ctx, const ModelSpec& model,
                                   const GFunction& g, const SchemeState& s) {
    if (!s.has_history()) return multi_bdf1(ctx, model, g, s);
    return cn_step(ctx, model, g, s, {});
}

SchemeState step_stabilized_cn(SpectralContext& ctx, const ModelSpec& model, const GFunction& g,
                               const SchemeState& s, double eps1, double eps2,
                               const Forcing& forcing) {
    check_state(model, s);
    if (model.components != 1 || model.potentials.size() != 1)
        throw UnsupportedModel("stabilized CN stepper is single-component, single-potential");
    if (!s.has_history()) throw MissingHistory("stabilized CN requires a previous level");
    if (eps1 < 0 || eps2 < 0) throw ConfigError("stabilization constants must be >= 0");
    const double dt = s.dt;
    const Field& phi_n = s.phi[0];
    const Potential& pot = model.potentials[0];

    const Field star = extrapolate(phi_n, s.phi_prev[0], 1.5, -0.5);
    const double r_star = 1.5 * s.r[0] - 0.5 * s.r_prev[0];
    const Field b = ctx.filter_nonlinear(potential_derivative(ctx, pot, {&star, 1})[0]);
    const double g_star = g.forward(bulk_energy(ctx, pot, {&star, 1}));
    const double b_inf = b.values.abs().maxCoeff();

    const double a = 1.0 / dt;
    const Eigen::ArrayXd lin = symbol_array(ctx, model.linear[0]);
    const Eigen::ArrayXd mob = symbol_array(ctx, model.mobility[0]);
    const Eigen::ArrayXd stab = (eps1 + eps2 * lin) / (dt * dt);
    const Eigen::ArrayXd implicit_sym = mob * (0.5 * lin + stab);

    const Spectrum phin_hat = ctx.forward(phi_n);
    const Spectrum phip_hat = ctx.forward(s.phi_prev[0]);
    Spectrum rhs = phin_hat / dt - 0.5 * mob * lin * phin_hat +
                   mob * stab * (2.0 * phin_hat - phip_hat);
    if (forcing) rhs += ctx.forward(forcing(s.t + 0.5 * dt));

    SchemeState n = shift_history(s);
    n.newton_iters = 0;
    if (std::abs(g_star) < kDenominatorFloor) {
        if (b_inf > kFlatSource) throw DenominatorNearZero("G(int F) vanished with a nonzero F'");
        n.phi[0] = ctx.inverse(solve_diagonal_hat(ctx, a, implicit_sym, rhs));
        n.r[0] = s.r[0];
        n.xi_last = Eigen::ArrayXd::Ones(1);
        check_finite(n);
        return n;
    }
    const double xi = r_star / g_star;
    rhs -= xi * mob * ctx.forward(b);
    n.phi[0] = ctx.inverse(solve_diagonal_hat(ctx, a, implicit_sym, rhs));
    const double y = g.inverse(s.r[0]) +
                     xi * inner(ctx, b, Field(phi_n.grid, n.phi[0].values - phi_n.values));
    n.r[0] = g.forward(y);
    n.xi_last = Eigen::ArrayXd::Constant(1, xi);
    check_finite(n);
    return n;
}

SchemeState advance(SpectralContext& ctx, const ModelSpec& model, const SchemeKind& kind,
                    std::span<const GFunction> gs, const SchemeState& s, const Forcing& forcing) {
    using F = SchemeKind::Family;
    const bool fresh = !s.has_history();
    switch (kind.family) {
        case F::First:
            if (model.potentials.size() > 1)
                return fresh ? first_bdfk(ctx, model, gs, s, 1, forcing)
                             : step_first_multi_potential(ctx, model, gs, s, forcing);
            if (kind.stencil == Stencil::Bdf1 || fresh)
                return step_first(ctx, model, gs[0], s, Stencil::Bdf1, forcing);
            return step_first(ctx, model, gs[0], s, kind.stencil, forcing);
        case F::Second:
            if (kind.stencil == Stencil::Bdf1 || fresh)
                return step_second(ctx, model, gs[0], s, Stencil::Bdf1, forcing);
            return step_second(ctx, model, gs[0], s, kind.stencil, forcing);
        case F::Third:
            if (fresh) return step_first(ctx, model, gs[0], s, Stencil::Bdf1, forcing);
            return step_third_bdf2(ctx, model, gs[0], s, forcing);
        case F::MultiCn:
            return step_multicomponent_cn(ctx, model, gs[0], s);
        case F::StabilizedCn:
            if (fresh) return step_second(ctx, model, gs[0], s, Stencil::Bdf1, forcing);
            return step_stabilized_cn(ctx, model, gs[0], s, kind.eps1, kind.eps2, forcing);
    }
    throw ConfigError("unhandled scheme kind");
}

}  // namespace gsav
