#include "gsav/manufactured.hpp"

#include <cmath>

namespace gsav {

ManufacturedAllenCahn::ManufacturedAllenCahn(SpectralContext& ctx, const ModelSpec& model)
    : model_(model), grid_(ctx.grid()) {
    if (model.components != 1 || model.mobility[0].kind != Mobility::Kind::L2)
        throw UnsupportedModel("manufactured problem targets the L2-flow Allen-Cahn model");
    for (const auto& pot : model.potentials)
        if (!std::holds_alternative<DoubleWell>(pot))
            throw UnsupportedModel("manufactured problem supports double-well potentials only");
    shape_ = sample(grid_, [](double x, double y) {
        return std::sin(2.0 * x) * std::cos(2.0 * y) / 4.0 + 0.48;
    });
    const auto& lin = model.linear[0];
    Eigen::ArrayXd sym = ctx.build_symbol([&](double k2) { return lin.symbol(k2); });
    l_shape_ = apply_symbol(ctx, sym, shape_);
}

Field ManufacturedAllenCahn::exact(double t) const {
    Field f(grid_);
    f.values = time_factor(t) * shape_.values;
    return f;
}

Field ManufacturedAllenCahn::forcing(double t) const {
    const double th = time_factor(t);
    Field phi(grid_);
    phi.values = th * shape_.values;
    // mu = L phi + F'(phi); L is linear in the time factor, F' is pointwise.
    Field mu(grid_);
    mu.values = th * l_shape_.values;
    // Pointwise potential derivative (no transforms needed per call).
    for (const auto& pot : model_.potentials) {
        const auto& dw = std::get<DoubleWell>(pot);
        mu.values += phi.values * (phi.values.square() - 1.0) / (dw.eps * dw.eps);
    }
    Field f(grid_);
    f.values = time_factor_dt(t) * shape_.values + model_.mobility[0].m * mu.values;
    return f;
}

Field manufactured_forcing(SpectralContext& ctx, const ModelSpec& model, double t) {
    return ManufacturedAllenCahn(ctx, model).forcing(t);
}

}  // namespace gsav
