#ifndef GSAV_SPECTRAL_HPP
#define GSAV_SPECTRAL_HPP

#include <Eigen/Core>
#include <complex>
#include <functional>
#include <utility>

#include "gsav/grid.hpp"

struct fftw_plan_s;

namespace gsav {

/// Spectrum of a real field in FFTW half-complex (r2c) layout:
/// nx rows of (ny/2 + 1) columns.
using Spectrum = Eigen::ArrayXcd;

/// Owns the transform workspace and cached wavenumber tables for one grid.
/// Single-owner: do not share one context between concurrent callers.
/// Fields are plain values and may be passed freely between contexts on the
/// same grid.
class SpectralContext {
public:
    explicit SpectralContext(const Grid& g, bool dealias = false);
    ~SpectralContext();
    SpectralContext(const SpectralContext&) = delete;
    SpectralContext& operator=(const SpectralContext&) = delete;

    const Grid& grid() const { return grid_; }
    long n_modes() const { return n_modes_; }
    bool dealias_enabled() const { return dealias_; }

    Spectrum forward(const Field& f);
    Field inverse(const Spectrum& s);

    /// |k|^2 per r2c slot.
    const Eigen::ArrayXd& k2() const { return k2_; }
    /// Signed wavenumbers per slot, Nyquist rows/columns zeroed (odd operator).
    const Eigen::ArrayXd& kx_deriv() const { return kxd_; }
    const Eigen::ArrayXd& ky_deriv() const { return kyd_; }

    /// Evaluate a radial multiplier s(|k|^2) on every slot.
    Eigen::ArrayXd build_symbol(const std::function<double(double)>& of_k2) const;

    /// Zero all modes with |kx| or |ky| above 2/3 of Nyquist (when enabled).
    Field filter_nonlinear(const Field& f);

private:
    Grid grid_;
    bool dealias_;
    long n_modes_;
    Eigen::ArrayXd k2_, kxd_, kyd_;
    Eigen::ArrayXd two_thirds_mask_;
    double* real_buf_;
    std::complex<double>* cplx_buf_;
    fftw_plan_s* plan_fwd_;
    fftw_plan_s* plan_bwd_;
};

Field laplacian(SpectralContext& ctx, const Field& f);
std::pair<Field, Field> gradient(SpectralContext& ctx, const Field& f);
Field divergence(SpectralContext& ctx, const Field& fx, const Field& fy);
Field gradient_squared(SpectralContext& ctx, const Field& f);

/// Solve -laplace(w) = f with mean(w) = 0. Requires mean(f) ~ 0.
Field inverse_neg_laplacian_zero_mean(SpectralContext& ctx, const Field& f);

/// Solve (a + S)phi = rhs mode by mode, S given by its multiplier per slot.
Field solve_diagonal(SpectralContext& ctx, double a, const Eigen::ArrayXd& symbol,
                     const Field& rhs);
Spectrum solve_diagonal_hat(SpectralContext& ctx, double a, const Eigen::ArrayXd& symbol,
                            const Spectrum& rhs_hat);

/// Apply the multiplier S to a field.
Field apply_symbol(SpectralContext& ctx, const Eigen::ArrayXd& symbol, const Field& f);

double integrate(const SpectralContext& ctx, const Field& f);
double inner(const SpectralContext& ctx, const Field& f, const Field& g);

}  // namespace gsav

#endif
