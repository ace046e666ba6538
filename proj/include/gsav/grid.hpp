#ifndef GSAV_GRID_HPP
#define GSAV_GRID_HPP

#include <Eigen/Core>
#include <cmath>

#include "gsav/errors.hpp"

namespace gsav {

/// Uniform periodic grid on [ax,bx) x [ay,by). Sizes are powers of two.
struct Grid {
    int nx = 0, ny = 0;
    double ax = 0, bx = 0, ay = 0, by = 0;

    Grid() = default;
    Grid(int nx_, int ny_, double ax_, double bx_, double ay_, double by_)
        : nx(nx_), ny(ny_), ax(ax_), bx(bx_), ay(ay_), by(by_) {
        auto pow2 = [](int n) { return n >= 4 && (n & (n - 1)) == 0; };
        if (!pow2(nx) || !pow2(ny))
            throw ConfigError("grid sizes must be powers of two, >= 4");
        if (!(bx > ax) || !(by > ay)) throw ConfigError("empty grid domain");
    }

    static Grid square(int n, double a, double b) { return Grid(n, n, a, b, a, b); }

    double lx() const { return bx - ax; }
    double ly() const { return by - ay; }
    double hx() const { return lx() / nx; }
    double hy() const { return ly() / ny; }
    double cell_area() const { return hx() * hy(); }
    long size() const { return static_cast<long>(nx) * ny; }
    double x(int ix) const { return ax + ix * hx(); }
    double y(int iy) const { return ay + iy * hy(); }

    bool operator==(const Grid&) const = default;
};

/// Real scalar field sampled on a Grid, row-major with x as the slow index.
struct Field {
    Grid grid;
    Eigen::ArrayXd values;

    Field() = default;
    explicit Field(const Grid& g) : grid(g), values(Eigen::ArrayXd::Zero(g.size())) {}
    Field(const Grid& g, Eigen::ArrayXd v) : grid(g), values(std::move(v)) {
        if (values.size() != g.size()) throw GridMismatch("field length does not match grid");
    }

    double& operator()(int ix, int iy) { return values[static_cast<long>(ix) * grid.ny + iy]; }
    double operator()(int ix, int iy) const { return values[static_cast<long>(ix) * grid.ny + iy]; }

    bool all_finite() const { return values.allFinite(); }
};

/// Sample f(x, y) on the grid.
template <class F>
Field sample(const Grid& g, F&& f) {
    Field out(g);
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 0; iy < g.ny; ++iy) out(ix, iy) = f(g.x(ix), g.y(iy));
    return out;
}

inline void require_same_grid(const Grid& a, const Grid& b) {
    if (!(a == b)) throw GridMismatch("fields live on different grids");
}

}  // namespace gsav

#endif
