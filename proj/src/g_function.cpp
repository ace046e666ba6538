#include "gsav/g_function.hpp"

#include <cmath>
#include <charconv>
#include <sstream>

namespace gsav {

GFunction GFunction::sqrt_shift(double c) {
    if (!(c > 0)) throw ConfigError("sqrt-shift constant must be positive");
    return {Kind::SqrtShift, c};
}

GFunction GFunction::power(double p) {
    if (p != 3.0 && p != 1.0 / 3.0) throw ConfigError("power G supports p = 3 or 1/3 only");
    return {Kind::Power, p};
}

GFunction GFunction::tanh_scaled(double c) {
    if (!(c > 0)) throw ConfigError("tanh scale constant must be positive");
    return {Kind::TanhScaled, c};
}

GFunction GFunction::exp_scaled(double c) {
    if (!(c > 0)) throw ConfigError("exp scale constant must be positive");
    return {Kind::ExpScaled, c};
}

GFunction GFunction::parse(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw ConfigError("G spec must look like name:value");
    const std::string name(text.substr(0, colon));
    const std::string arg(text.substr(colon + 1));
    double value = 0;
    if (name == "pow" && arg == "1/3") {
        value = 1.0 / 3.0;
    } else {
        std::istringstream in(arg);
        if (!(in >> value)) throw ConfigError("bad numeric constant in G spec: " + std::string(text));
    }
    if (name == "sqrt") return sqrt_shift(value);
    if (name == "pow") return power(value);
    if (name == "tanh") return tanh_scaled(value);
    if (name == "exp") return exp_scaled(value);
    throw ConfigError("unknown G variant: " + name);
}

double GFunction::forward(double x) const {
    switch (kind_) {
        case Kind::SqrtShift:
            if (!(x + c_ > 0)) throw DomainError("sqrt-shift G needs x + C > 0");
            return std::sqrt(x + c_);
        case Kind::Power:
            if (c_ == 3.0) return x * x * x;
            return std::cbrt(x);  // signed real root
        case Kind::TanhScaled:
            return std::tanh(x / c_);
        case Kind::ExpScaled:
            return std::exp(x / c_);
    }
    return 0;
}

double GFunction::inverse(double r) const {
    switch (kind_) {
        case Kind::SqrtShift:
            if (r < 0) throw RangeError("sqrt-shift G^{-1} needs r >= 0");
            return r * r - c_;
        case Kind::Power:
            if (c_ == 3.0) return std::cbrt(r);
            return r * r * r;
        case Kind::TanhScaled:
            if (!(std::abs(r) < 1.0 - 1e-12))
                throw RangeError("tanh G: r too close to +-1; increase the scale constant C");
            return c_ * std::atanh(r);
        case Kind::ExpScaled:
            if (!(r > 0)) throw RangeError("exp G^{-1} needs r > 0");
            return c_ * std::log(r);
    }
    return 0;
}

double GFunction::inverse_derivative(double r) const {
    switch (kind_) {
        case Kind::SqrtShift:
            if (r < 0) throw RangeError("sqrt-shift G^{-1} needs r >= 0");
            return 2.0 * r;
        case Kind::Power:
            if (c_ == 3.0) {
                if (r == 0.0) throw SingularDerivative("d/dr r^{1/3} is singular at r = 0");
                const double cr = std::cbrt(r);
                return 1.0 / (3.0 * cr * cr);
            }
            return 3.0 * r * r;
        case Kind::TanhScaled:
            if (!(std::abs(r) < 1.0 - 1e-12))
                throw RangeError("tanh G: r too close to +-1; increase the scale constant C");
            return c_ / (1.0 - r * r);
        case Kind::ExpScaled:
            if (!(r > 0)) throw RangeError("exp G^{-1} needs r > 0");
            return c_ / r;
    }
    return 0;
}

double GFunction::modified_scalar(double r) const {
    if (kind_ == Kind::SqrtShift) {
        if (r < 0) throw RangeError("sqrt-shift G^{-1} needs r >= 0");
        return r * r;
    }
    return inverse(r);
}

std::string GFunction::to_string() const {
    std::ostringstream out;
    switch (kind_) {
        case Kind::SqrtShift: out << "sqrt:" << c_; break;
        case Kind::Power: out << "pow:" << (c_ == 3.0 ? "3" : "1/3"); break;
        case Kind::TanhScaled: out << "tanh:" << c_; break;
        case Kind::ExpScaled: out << "exp:" << c_; break;
    }
    return out.str();
}

}  // namespace gsav
