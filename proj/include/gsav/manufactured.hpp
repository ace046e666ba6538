#ifndef GSAV_MANUFACTURED_HPP
#define GSAV_MANUFACTURED_HPP

#include "gsav/models.hpp"

namespace gsav {

/// Prescribed solution  phi(x,y,t) = (sin(2x)cos(2y)/4 + 0.48)(1 - sin^2(t)/2)
/// for the Allen-Cahn model; the induced source f = d(phi)/dt + mu(phi)
/// makes it exact. The spatial pieces are band-limited, so the spectral
/// evaluation of mu is exact up to rounding on any grid of 16 modes or more.
class ManufacturedAllenCahn {
public:
    ManufacturedAllenCahn(SpectralContext& ctx, const ModelSpec& model);

    Field exact(double t) const;
    Field forcing(double t) const;

    static double time_factor(double t) { return 1.0 - 0.5 * std::sin(t) * std::sin(t); }
    static double time_factor_dt(double t) { return -std::sin(t) * std::cos(t); }

private:
    const ModelSpec& model_;
    Grid grid_;
    Field shape_;    // sin(2x)cos(2y)/4 + 0.48
    Field l_shape_;  // L applied to the shape
};

/// One-shot evaluation of the induced source term.
Field manufactured_forcing(SpectralContext& ctx, const ModelSpec& model, double t);

}  // namespace gsav

#endif
