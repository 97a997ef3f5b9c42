#include "gmbridge/quadrature.hpp"
#include "gmbridge/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace gmb {

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b,
                                    double rel_tol, double abs_tol) {
    if (!(a <= b)) throw std::invalid_argument("integrate_adaptive: a > b");
    if (a == b) return {0.0, 0.0};

    double error = 0.0;
    double l1 = 0.0;
    double value = 0.0;
    try {
        value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            f, a, b, 15, rel_tol, &error, &l1);
    } catch (const numeric_error&) {
        throw;
    } catch (const std::exception& e) {
        throw numeric_error(std::string("quadrature failure: ") + e.what());
    }
    if (!std::isfinite(value))
        throw numeric_error("quadrature produced a non-finite value");
    if (error > std::max(abs_tol, 1e-10 * std::max(1.0, l1)))
        throw numeric_error("quadrature did not converge to tolerance");
    return {value, error};
}

double integrate_panel15(const std::function<double(double)>& f, double a, double b) {
    if (a == b) return 0.0;
    return boost::math::quadrature::gauss<double, 15>::integrate(f, a, b);
}

const std::vector<std::pair<double, double>>& gauss_hermite_normal(int degree) {
    if (degree < 1 || degree > 512)
        throw std::invalid_argument("gauss_hermite_normal: degree out of range");

    static std::map<int, std::vector<std::pair<double, double>>> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);

    auto it = cache.find(degree);
    if (it != cache.end()) return it->second;

    // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite
    // recurrence: nodes are the eigenvalues, weights the squared first
    // eigenvector components (total weight 1 for the normal measure).
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(degree, degree);
    for (int k = 0; k + 1 < degree; ++k) {
        const double beta = std::sqrt(double(k + 1));
        jacobi(k, k + 1) = beta;
        jacobi(k + 1, k) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    if (solver.info() != Eigen::Success)
        throw numeric_error("gauss_hermite_normal: eigensolver failed");

    std::vector<std::pair<double, double>> nodes(degree);
    for (int i = 0; i < degree; ++i) {
        const double v0 = solver.eigenvectors()(0, i);
        nodes[i] = {solver.eigenvalues()(i), v0 * v0};
    }
    return cache.emplace(degree, std::move(nodes)).first->second;
}

} // namespace gmb
