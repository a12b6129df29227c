#pragma once

#include <cmath>
#include <functional>

#include "siacmra/core.hpp"

namespace siacmra {

// Reference data for the enhancement studies. The Gaussian width and tanh
// transition constants keep both functions below 1e-16 at the boundaries of
// [0,1] when k = 1.
inline constexpr double gaussian_width = 0.058;
inline constexpr double tanh_width = 0.018;

inline double fn_sine(double k, double x) { return std::sin(2.0 * pi * k * x); }

inline double fn_gaussian(double k, double x) {
    double s = k * gaussian_width;
    double d = x - 0.5;
    return std::exp(-d * d / (2.0 * s * s));
}

inline double fn_double_tanh(double k, double x) {
    double w = k * tanh_width;
    return 0.5 * (std::tanh((x - 0.35) / w) - std::tanh((x - 0.65) / w));
}

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;

inline Fn1 study_function_1d(const std::string& name, double k) {
    if (name == "sine") return [k](double x) { return fn_sine(k, x); };
    if (name == "gauss") return [k](double x) { return fn_gaussian(k, x); };
    if (name == "tanh") return [k](double x) { return fn_double_tanh(k, x); };
    throw std::invalid_argument("unknown study function: " + name);
}

// tensor product u(x,y) = f(x) f(y)
inline Fn2 study_function_2d(const std::string& name, double k) {
    Fn1 f = study_function_1d(name, k);
    return [f](double x, double y) { return f(x) * f(y); };
}

}  // namespace siacmra
