#ifndef GSAV_SCHEMES_HPP
#define GSAV_SCHEMES_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gsav/g_function.hpp"
#include "gsav/models.hpp"
#include "gsav/newton.hpp"

namespace gsav {

enum class Stencil { Bdf1, Bdf2, Cn };

/// Time discretization family.
/// First:        auxiliary scalar implicit, one nonlinear scalar solve per step.
/// Second:       auxiliary scalar explicit, no iteration.
/// Third:        scalar equation written on the bulk energy itself (Lagrange
///               multiplier form), dissipates the original energy.
/// MultiCn:      Crank-Nicolson for coupled components with one shared scalar.
/// StabilizedCn: second family, Crank-Nicolson, with eps1/eps2 damping terms.
struct SchemeKind {
    enum class Family { First, Second, Third, MultiCn, StabilizedCn };
    Family family = Family::First;
    Stencil stencil = Stencil::Bdf2;
    double eps1 = 0, eps2 = 0;

    /// Whether the scheme (and its energy form) uses two history levels.
    bool two_level() const {
        switch (family) {
            case Family::First:
            case Family::Second: return stencil != Stencil::Bdf1;
            case Family::Third: return true;
            case Family::MultiCn: return true;
            case Family::StabilizedCn: return true;
        }
        return false;
    }

    static SchemeKind parse(const std::string& family, const std::string& order, double eps1 = 0,
                            double eps2 = 0);
    std::string to_string() const;
};

/// Everything a stepper carries forward in time.
struct SchemeState {
    std::vector<Field> phi;
    std::vector<Field> phi_prev;  // empty before the first step
    Eigen::ArrayXd r;             // one auxiliary scalar per potential
    Eigen::ArrayXd r_prev;        // empty before the first step
    Eigen::ArrayXd xi_last;
    double t = 0;
    double dt = 0;
    double dt_prev = 0;  // spacing between phi and phi_prev once history exists
    long step = 0;
    int newton_iters = 0;

    bool has_history() const { return !phi_prev.empty(); }
};

/// Optional source term f(t), added to the phi equation (single component).
using Forcing = std::function<Field(double)>;

/// Initialize state at t = 0 with r_i = G_i(int F_i(phi0)).
SchemeState init_state(SpectralContext& ctx, const ModelSpec& model,
                       std::span<const GFunction> gs, std::vector<Field> phi0, double dt);

SchemeState step_first(SpectralContext& ctx, const ModelSpec& model, const GFunction& g,
                       const SchemeState& s, Stencil stencil, const Forcing& forcing = {});
SchemeState step_first_multi_potential(SpectralContext& ctx, const ModelSpec& model,
                                       std::span<const GFunction> gs, const SchemeState& s,
                                       const Forcing& forcing = {});
SchemeState step_second(SpectralContext& ctx, const ModelSpec& model, const GFunction& g,
                        const SchemeState& s, Stencil stencil, const Forcing& forcing = {});
SchemeState step_third_bdf2(SpectralContext& ctx, const ModelSpec& model, const GFunction& g,
                            const SchemeState& s, const Forcing& forcing = {});
SchemeState step_multicomponent_cn(SpectralContext& ctx, const ModelSpec& model, const GFunction& g,
                                   const SchemeState& s);
SchemeState step_stabilized_cn(SpectralContext& ctx, const ModelSpec& model, const GFunction& g,
                               const SchemeState& s, double eps1, double eps2,
                               const Forcing& forcing = {});

/// Dispatch on SchemeKind; two-level schemes take their first step with the
/// matching one-level variant.
SchemeState advance(SpectralContext& ctx, const ModelSpec& model, const SchemeKind& kind,
                    std::span<const GFunction> gs, const SchemeState& s,
                    const Forcing& forcing = {});

}  // namespace gsav

#endif
