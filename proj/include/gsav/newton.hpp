#ifndef GSAV_NEWTON_HPP
#define GSAV_NEWTON_HPP

#include <Eigen/Core>
#include <functional>

#include "gsav/errors.hpp"

namespace gsav {

struct NewtonConfig {
    double tol = 1e-12;            // absolute tolerance on the residual
    int max_iter = 50;
    double bracket_halfwidth = 1;  // fallback bisection window around x0
};

struct ScalarRoot {
    double x = 0;
    int iters = 0;
    double residual = 0;
};

/// Damped Newton iteration for a scalar residual. Steps are halved (up to 8
/// times) while the residual magnitude does not decrease; a residual
/// evaluating to NaN counts as an increase. On stagnation, falls back to
/// bisection inside [x0 - w, x0 + w] when a sign change exists there.
ScalarRoot solve_scalar(const std::function<double(double)>& residual,
                        const std::function<double(double)>& derivative, double x0,
                        const NewtonConfig& cfg = {});

struct SystemRoot {
    Eigen::VectorXd x;
    int iters = 0;
    double residual_inf = 0;
};

/// Damped Newton for a small dense system (m <= 8), LU per iteration.
SystemRoot solve_system(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residual,
                        const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& jacobian,
                        const Eigen::VectorXd& x0, const NewtonConfig& cfg = {});

}  // namespace gsav

#endif
