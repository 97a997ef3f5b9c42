#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace gmb {

struct QuadratureResult {
    double value;
    double error;   // estimated absolute error
};

// Adaptive Gauss-Kronrod integration of f over [a, b]. Throws numeric_error
// when the error estimate cannot be brought below
// max(abs_tol, rel_tol * integral scale).
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b,
                                    double rel_tol = 1e-12,
                                    double abs_tol = 1e-13);

// Fixed 15-point Gauss-Legendre rule on [a, b]; exact to machine precision
// for smooth integrands on small panels.
double integrate_panel15(const std::function<double(double)>& f, double a, double b);

// Nodes and weights (x_i, w_i) such that E[g(Z)] = sum w_i g(x_i) for
// Z standard normal and g a polynomial of degree < 2 * degree.
const std::vector<std::pair<double, double>>& gauss_hermite_normal(int degree);

} // namespace gmb
