#pragma once

#include <functional>
#include <span>
#include <vector>

namespace classp {

/// Central-difference gradient of a scalar function, (f(w+h*e_i) - f(w-h*e_i)) / (2h)
/// per coordinate. Independent of every analytic gradient path in the library;
/// the reference oracle the backprop tests compare against.
/// Throws ArgumentError when h <= 0 and NumericError when f returns a
/// non-finite value at any probe point.
std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> w, double h);

} // namespace classp
