#include "gsav/models.hpp"

#include <cmath>

namespace gsav {

namespace {

constexpr double kLogGuard = 1e-9;  // admissible set of the logarithmic potential

void check_flory_domain(const Eigen::ArrayXd& v) {
    for (long i = 0; i < v.size(); ++i) {
        if (!(std::abs(v[i]) <= 1.0 - kLogGuard))
            throw OutOfDomain("logarithmic potential needs |phi| < 1", i);
    }
}

}  // namespace

int potential_components(const Potential& p) {
    return std::holds_alternative<BcpW>(p) ? 2 : 1;
}

double bulk_energy(SpectralContext& ctx, const Potential& p, std::span<const Field> fields) {
    if (std::holds_alternative<BcpW>(p)) {
        const auto& w = std::get<BcpW>(p);
        const auto& u = fields[0].values;
        const auto& v = fields[1].values;
        Field density(ctx.grid());
        density.values = (u.square() - 1.0).square() / 4.0 + (v.square() - 1.0).square() / 4.0 +
                         w.alpha * u * v + w.beta * u * v.square() + w.gamma * u.square() * v;
        return integrate(ctx, density);
    }
    const Field& phi = fields[0];
    if (std::holds_alternative<DoubleWell>(p)) {
        const double eps = std::get<DoubleWell>(p).eps;
        Field density(ctx.grid());
        density.values = (phi.values.square() - 1.0).square() / (4.0 * eps * eps);
        return integrate(ctx, density);
    }
    if (std::holds_alternative<FloryHuggins>(p)) {
        const double theta = std::get<FloryHuggins>(p).theta;
        check_flory_domain(phi.values);
        Field density(ctx.grid());
        density.values = -0.5 * theta * phi.values.square() +
                         (1.0 + phi.values) * (1.0 + phi.values).log() +
                         (1.0 - phi.values) * (1.0 - phi.values).log();
        return integrate(ctx, density);
    }
    // MBE without slope selection
    Field g2 = gradient_squared(ctx, phi);
    Field density(ctx.grid());
    density.values = -0.5 * (1.0 + g2.values).log();
    return integrate(ctx, density);
}

std::vector<Field> potential_derivative(SpectralContext& ctx, const Potential& p,
                                        std::span<const Field> fields) {
    if (std::holds_alternative<BcpW>(p)) {
        const auto& w = std::get<BcpW>(p);
        const auto& u = fields[0].values;
        const auto& v = fields[1].values;
        Field du(ctx.grid()), dv(ctx.grid());
        du.values = u * (u.square() - 1.0) + w.alpha * v + w.beta * v.square() + 2.0 * w.gamma * u * v;
        dv.values = v * (v.square() - 1.0) + w.alpha * u + 2.0 * w.beta * u * v + w.gamma * u.square();
        return {std::move(du), std::move(dv)};
    }
    const Field& phi = fields[0];
    if (std::holds_alternative<DoubleWell>(p)) {
        const double eps = std::get<DoubleWell>(p).eps;
        Field d(ctx.grid());
        d.values = phi.values * (phi.values.square() - 1.0) / (eps * eps);
        return {std::move(d)};
    }
    if (std::holds_alternative<FloryHuggins>(p)) {
        const double theta = std::get<FloryHuggins>(p).theta;
        check_flory_domain(phi.values);
        Field d(ctx.grid());
        d.values = ((1.0 + phi.values) / (1.0 - phi.values)).log() - theta * phi.values;
        return {std::move(d)};
    }
    // MBE: F'(phi) = div( grad phi / (1 + |grad phi|^2) )
    auto [gx, gy] = gradient(ctx, phi);
    Eigen::ArrayXd denom = 1.0 + gx.values.square() + gy.values.square();
    Field px(ctx.grid()), py(ctx.grid());
    px.values = gx.values / denom;
    py.values = gy.values / denom;
    return {divergence(ctx, px, py)};
}

void ModelSpec::validate() const {
    if (components < 1) throw ConfigError("model needs at least one component");
    if (linear.size() != static_cast<size_t>(components) ||
        mobility.size() != static_cast<size_t>(components))
        throw ConfigError("model operator lists must match the component count");
    if (potentials.empty()) throw ConfigError("model needs at least one potential");
    for (const auto& p : potentials) {
        if (potential_components(p) != components && potential_components(p) != 1)
            throw ConfigError("potential component count does not match the model");
    }
}

Eigen::ArrayXd symbol_array(const SpectralContext& ctx, const LinearOp& op) {
    const Eigen::ArrayXd& k2 = ctx.k2();
    Eigen::ArrayXd sym = op.grad * k2 + op.bilap * k2.square();
    if (op.nonlocal != 0) sym += (k2 > 0.0).select(op.nonlocal / k2.max(1e-300), 0.0);
    return sym;
}

Eigen::ArrayXd symbol_array(const SpectralContext& ctx, const Mobility& mob) {
    if (mob.kind == Mobility::Kind::L2) return Eigen::ArrayXd::Constant(ctx.n_modes(), mob.m);
    return mob.m * ctx.k2();
}

double original_energy(SpectralContext& ctx, const ModelSpec& m, std::span<const Field> fields) {
    double e = 0;
    for (int c = 0; c < m.components; ++c) {
        e += 0.5 * inner(ctx, apply_symbol(ctx, symbol_array(ctx, m.linear[c]), fields[c]),
                         fields[c]);
    }
    for (const auto& p : m.potentials) e += bulk_energy(ctx, p, fields);
    return e;
}

ModelSpec allen_cahn(double eps, double mobility) {
    ModelSpec m;
    m.name = "allen-cahn";
    m.linear = {LinearOp{.grad = 1.0}};
    m.mobility = {Mobility{Mobility::Kind::L2, mobility}};
    m.potentials = {DoubleWell{eps}};
    return m;
}

ModelSpec cahn_hilliard(double eps, double mobility) {
    ModelSpec m;
    m.name = "cahn-hilliard";
    m.linear = {LinearOp{.grad = 1.0}};
    m.mobility = {Mobility{Mobility::Kind::Hminus1, mobility}};
    m.potentials = {DoubleWell{eps}};
    return m;
}

ModelSpec cahn_hilliard_log(double eps_sq, double theta, double mobility) {
    ModelSpec m;
    m.name = "cahn-hilliard-log";
    m.linear = {LinearOp{.grad = eps_sq}};
    m.mobility = {Mobility{Mobility::Kind::Hminus1, mobility}};
    m.potentials = {FloryHuggins{theta}};
    return m;
}

ModelSpec mbe_no_slope_selection(double eps, double mobility) {
    ModelSpec m;
    m.name = "mbe";
    m.linear = {LinearOp{.bilap = eps * eps}};
    m.mobility = {Mobility{Mobility::Kind::L2, mobility}};
    m.potentials = {MbeLog{}};
    return m;
}

ModelSpec bcp(double eps_u, double eps_v, double sigma, double alpha, double beta, double gamma,
              double mobility_u, double mobility_v) {
    ModelSpec m;
    m.name = "bcp";
    m.components = 2;
    m.linear = {LinearOp{.grad = eps_u * eps_u}, LinearOp{.grad = eps_v * eps_v, .nonlocal = sigma}};
    m.mobility = {Mobility{Mobility::Kind::Hminus1, mobility_u},
                  Mobility{Mobility::Kind::Hminus1, mobility_v}};
    m.potentials = {BcpW{alpha, beta, gamma}};
    return m;
}

}  // namespace gsav
