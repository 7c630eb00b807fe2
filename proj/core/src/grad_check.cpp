#include "classp/grad_check.hpp"

#include <cmath>
#include <string>

#include "classp/error.hpp"

namespace classp {

std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> w, double h) {
    if (!(h > 0.0)) {
        throw ArgumentError("finite_diff_grad: h must be > 0, got " + std::to_string(h));
    }
    std::vector<double> probe(w.begin(), w.end());
    std::vector<double> grad(w.size(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double original = probe[i];
        probe[i] = original + h;
        const double f_plus = f(probe);
        probe[i] = original - h;
        const double f_minus = f(probe);
        probe[i] = original;
        if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
            throw NumericError("finite_diff_grad: non-finite function value at coordinate " +
                               std::to_string(i));
        }
        grad[i] = (f_plus - f_minus) / (2.0 * h);
    }
    return grad;
}

} // namespace classp
