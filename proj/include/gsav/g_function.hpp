#ifndef GSAV_G_FUNCTION_HPP
#define GSAV_G_FUNCTION_HPP

#include <string>
#include <string_view>

#include "gsav/errors.hpp"

namespace gsav {

/// Invertible scalar map G defining the auxiliary variable r = G(int F dx).
/// Variants: sqrt-shift sqrt(x+C), signed power x^p (p = 3 or 1/3),
/// mapped tanh(x/C) and mapped exp(x/C).
class GFunction {
public:
    enum class Kind { SqrtShift, Power, TanhScaled, ExpScaled };

    static GFunction sqrt_shift(double c);
    static GFunction power(double p);
    static GFunction tanh_scaled(double c);
    static GFunction exp_scaled(double c);

    /// Accepts "sqrt:C", "pow:3", "pow:1/3", "tanh:C", "exp:C".
    static GFunction parse(std::string_view text);

    Kind kind() const { return kind_; }
    double constant() const { return c_; }

    double forward(double x) const;
    double inverse(double r) const;
    double inverse_derivative(double r) const;

    /// Scalar part of the modified energy: the sqrt variant's stability
    /// theorem tracks r^2 rather than G^{-1}(r) = r^2 - C.
    double modified_scalar(double r) const;

    std::string to_string() const;

private:
    GFunction(Kind k, double c) : kind_(k), c_(c) {}
    Kind kind_;
    double c_;  // shift / scale constant, or the exponent for Power
};

}  // namespace gsav

#endif
