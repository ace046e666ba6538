#include "gsav/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace gsav {

namespace {
// FFTW plan creation is not thread-safe; execution is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

SpectralContext::SpectralContext(const Grid& g, bool dealias)
    : grid_(g), dealias_(dealias), n_modes_(static_cast<long>(g.nx) * (g.ny / 2 + 1)) {
    const double fx = 2.0 * std::numbers::pi / grid_.lx();
    const double fy = 2.0 * std::numbers::pi / grid_.ly();
    k2_.resize(n_modes_);
    kxd_.resize(n_modes_);
    kyd_.resize(n_modes_);
    two_thirds_mask_.resize(n_modes_);
    const int nyh = grid_.ny / 2 + 1;
    for (int ix = 0; ix < grid_.nx; ++ix) {
        const int mx = ix <= grid_.nx / 2 ? ix : ix - grid_.nx;
        for (int iy = 0; iy < nyh; ++iy) {
            const long s = static_cast<long>(ix) * nyh + iy;
            const double kx = fx * mx;
            const double ky = fy * iy;
            k2_[s] = kx * kx + ky * ky;
            // Nyquist has no well-defined sign: zero it in odd operators.
            kxd_[s] = ix == grid_.nx / 2 ? 0.0 : kx;
            kyd_[s] = iy == grid_.ny / 2 ? 0.0 : ky;
            const bool keep = std::abs(mx) <= grid_.nx / 3 && iy <= grid_.ny / 3;
            two_thirds_mask_[s] = keep ? 1.0 : 0.0;
        }
    }

    std::lock_guard<std::mutex> lock(plan_mutex());
    real_buf_ = fftw_alloc_real(grid_.size());
    cplx_buf_ = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(n_modes_));
    plan_fwd_ = fftw_plan_dft_r2c_2d(grid_.nx, grid_.ny, real_buf_,
                                     reinterpret_cast<fftw_complex*>(cplx_buf_), FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft_c2r_2d(grid_.nx, grid_.ny,
                                     reinterpret_cast<fftw_complex*>(cplx_buf_), real_buf_,
                                     FFTW_ESTIMATE);
}

SpectralContext::~SpectralContext() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan_fwd_);
    fftw_destroy_plan(plan_bwd_);
    fftw_free(real_buf_);
    fftw_free(cplx_buf_);
}

Spectrum SpectralContext::forward(const Field& f) {
    require_same_grid(f.grid, grid_);
    Eigen::Map<Eigen::ArrayXd>(real_buf_, grid_.size()) = f.values;
    fftw_execute(plan_fwd_);
    return Eigen::Map<Spectrum>(cplx_buf_, n_modes_);
}

Field SpectralContext::inverse(const Spectrum& s) {
    if (s.size() != n_modes_) throw GridMismatch("spectrum size does not match grid");
    Eigen::Map<Spectrum>(cplx_buf_, n_modes_) = s;
    fftw_execute(plan_bwd_);
    Field out(grid_);
    out.values = Eigen::Map<Eigen::ArrayXd>(real_buf_, grid_.size()) / double(grid_.size());
    return out;
}

Eigen::ArrayXd SpectralContext::build_symbol(const std::function<double(double)>& of_k2) const {
    Eigen::ArrayXd sym(n_modes_);
    for (long s = 0; s < n_modes_; ++s) sym[s] = of_k2(k2_[s]);
    return sym;
}

Field SpectralContext::filter_nonlinear(const Field& f) {
    if (!dealias_) return f;
    Spectrum hat = forward(f);
    hat *= two_thirds_mask_;
    return inverse(hat);
}

Field laplacian(SpectralContext& ctx, const Field& f) {
    Spectrum hat = ctx.forward(f);
    hat *= -ctx.k2();
    return ctx.inverse(hat);
}

std::pair<Field, Field> gradient(SpectralContext& ctx, const Field& f) {
    const Spectrum hat = ctx.forward(f);
    const std::complex<double> i1(0.0, 1.0);
    Spectrum gx = i1 * ctx.kx_deriv() * hat;
    Spectrum gy = i1 * ctx.ky_deriv() * hat;
    return {ctx.inverse(gx), ctx.inverse(gy)};
}

Field divergence(SpectralContext& ctx, const Field& fx, const Field& fy) {
    require_same_grid(fx.grid, fy.grid);
    const std::complex<double> i1(0.0, 1.0);
    Spectrum hat = i1 * ctx.kx_deriv() * ctx.forward(fx);
    hat += i1 * ctx.ky_deriv() * ctx.forward(fy);
    return ctx.inverse(hat);
}

Field gradient_squared(SpectralContext& ctx, const Field& f) {
    auto [gx, gy] = gradient(ctx, f);
    Field out(ctx.grid());
    out.values = gx.values.square() + gy.values.square();
    return out;
}

Field inverse_neg_laplacian_zero_mean(SpectralContext& ctx, const Field& f) {
    const double amp = f.values.abs().maxCoeff();
    const double mean = f.values.mean();
    if (std::abs(mean) > 1e-10 * std::max(amp, 1e-300))
        throw NonZeroMean("inverse Laplacian requires a zero-mean field");
    Spectrum hat = ctx.forward(f);
    hat[0] = 0.0;
    for (long s = 1; s < ctx.n_modes(); ++s) {
        if (ctx.k2()[s] > 0.0)
            hat[s] /= ctx.k2()[s];
        else
            hat[s] = 0.0;
    }
    return ctx.inverse(hat);
}

Spectrum solve_diagonal_hat(SpectralContext&, double a, const Eigen::ArrayXd& symbol,
                            const Spectrum& rhs_hat) {
    Eigen::ArrayXd denom = a + symbol;
    if (denom.minCoeff() <= 0.0)
        throw SingularMode("a + symbol(k) <= 0 for some mode in diagonal solve");
    return rhs_hat / denom;
}

Field solve_diagonal(SpectralContext& ctx, double a, const Eigen::ArrayXd& symbol,
                     const Field& rhs) {
    return ctx.inverse(solve_diagonal_hat(ctx, a, symbol, ctx.forward(rhs)));
}

Field apply_symbol(SpectralContext& ctx, const Eigen::ArrayXd& symbol, const Field& f) {
    Spectrum hat = ctx.forward(f);
    hat *= symbol;
    return ctx.inverse(hat);
}

double integrate(const SpectralContext& ctx, const Field& f) {
    require_same_grid(f.grid, ctx.grid());
    return ctx.grid().cell_area() * f.values.sum();
}

double inner(const SpectralContext& ctx, const Field& f, const Field& g) {
    require_same_grid(f.grid, ctx.grid());
    require_same_grid(g.grid, ctx.grid());
    return ctx.grid().cell_area() * (f.values * g.values).sum();
}

}  // namespace gsav
