#ifndef GSAV_MODELS_HPP
#define GSAV_MODELS_HPP

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gsav/spectral.hpp"

namespace gsav {

/// Fourier multiplier of the linear operator L acting on one component:
/// grad * |k|^2  +  bilap * |k|^4  +  nonlocal / |k|^2 (zero mode exempt).
struct LinearOp {
    double grad = 0;
    double bilap = 0;
    double nonlocal = 0;

    double symbol(double k2) const {
        double s = grad * k2 + bilap * k2 * k2;
        if (nonlocal != 0 && k2 > 0) s += nonlocal / k2;
        return s;
    }
};

/// Relaxation operator: L2 flow (M * Id) or H^{-1} flow (-M * laplace).
struct Mobility {
    enum class Kind { L2, Hminus1 };
    Kind kind = Kind::L2;
    double m = 1.0;

    double symbol(double k2) const { return kind == Kind::L2 ? m : m * k2; }
    bool conserves_mass() const { return kind == Kind::Hminus1; }
};

// Nonlinear potential densities and their variational derivatives.
struct DoubleWell {
    double eps = 1.0;  // F = (phi^2-1)^2 / (4 eps^2)
};
struct FloryHuggins {
    double theta = 3.0;  // F = -theta/2 phi^2 + (1+phi)ln(1+phi) + (1-phi)ln(1-phi)
};
struct MbeLog {};  // F = -1/2 ln(1 + |grad phi|^2)
struct BcpW {
    double alpha = 0, beta = 0, gamma = 0;
    // W(u,v) = (u^2-1)^2/4 + (v^2-1)^2/4 + alpha uv + beta uv^2 + gamma u^2 v
};

using Potential = std::variant<DoubleWell, FloryHuggins, MbeLog, BcpW>;

/// How many field components a potential consumes.
int potential_components(const Potential& p);

/// int F(phi) dx over the domain.
double bulk_energy(SpectralContext& ctx, const Potential& p, std::span<const Field> fields);

/// Variational derivative(s) of the bulk energy, one field per component.
std::vector<Field> potential_derivative(SpectralContext& ctx, const Potential& p,
                                        std::span<const Field> fields);

/// Free-energy functional: quadratic part 1/2 (L phi, phi) per component
/// plus every potential's bulk term.
struct ModelSpec {
    std::string name;
    int components = 1;
    std::vector<LinearOp> linear;      // one per component
    std::vector<Mobility> mobility;    // one per component
    std::vector<Potential> potentials; // non-empty

    void validate() const;
};

double original_energy(SpectralContext& ctx, const ModelSpec& m, std::span<const Field> fields);

/// Multiplier tables over the context's r2c slots.
Eigen::ArrayXd symbol_array(const SpectralContext& ctx, const LinearOp& op);
Eigen::ArrayXd symbol_array(const SpectralContext& ctx, const Mobility& mob);

// Model factories with the conventional parameterizations.
ModelSpec allen_cahn(double eps, double mobility = 1.0);
ModelSpec cahn_hilliard(double eps, double mobility = 1.0);
ModelSpec cahn_hilliard_log(double eps_sq, double theta, double mobility = 1.0);
ModelSpec mbe_no_slope_selection(double eps, double mobility = 1.0);
ModelSpec bcp(double eps_u, double eps_v, double sigma, double alpha, double beta, double gamma,
              double mobility_u = 1.0, double mobility_v = 1.0);

}  // namespace gsav

#endif
