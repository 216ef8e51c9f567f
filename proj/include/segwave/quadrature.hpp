#ifndef SEGWAVE_QUADRATURE_HPP
#define SEGWAVE_QUADRATURE_HPP

#include <functional>

namespace segwave {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int panels = 0;
};

/// Adaptive Gauss--Kronrod 7-15 quadrature to an absolute error target.
/// Exact (up to roundoff) for polynomials of degree <= 22 on a single panel.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b,
                                    double abs_tol = 1e-12,
                                    int max_depth = 30);

}  // namespace segwave

#endif
