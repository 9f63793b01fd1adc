#pragma once

#include <stdexcept>
#include <utility>

#include "impc/dense.hpp"

namespace impc {

// One classical 4th-order Runge-Kutta step. The field is evaluated at the
// four stage points; a non-finite evaluation aborts the step.
template <class Rhs>
DenseVector rk4_step(Rhs&& rhs, double t, const DenseVector& y, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("rk4: step size must be positive");

    auto eval = [&](double ts, const DenseVector& ys) {
        DenseVector k = rhs(ts, ys);
        if (!k.all_finite())
            throw std::runtime_error("integration failure: non-finite right-hand side");
        return k;
    };

    const DenseVector k1 = eval(t, y);
    DenseVector y2 = y;
    for (std::size_t i = 0; i < y.size(); ++i) y2[i] = y[i] + 0.5 * h * k1[i];
    const DenseVector k2 = eval(t + 0.5 * h, y2);
    for (std::size_t i = 0; i < y.size(); ++i) y2[i] = y[i] + 0.5 * h * k2[i];
    const DenseVector k3 = eval(t + 0.5 * h, y2);
    for (std::size_t i = 0; i < y.size(); ++i) y2[i] = y[i] + h * k3[i];
    const DenseVector k4 = eval(t + h, y2);

    DenseVector out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        out[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

}  // namespace impc
