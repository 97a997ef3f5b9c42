#include "gmbridge/det_bridge.hpp"
#include "gmbridge/errors.hpp"
#include "gmbridge/stats.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gmb {

namespace {

void require_length(const BridgeSpec& b) {
    if (!(b.length > 0.0) || !std::isfinite(b.length))
        throw std::domain_error("bridge length must be positive and finite");
}

// transition_kernel without the BridgeSpec wrapper, for internal callers
// that iterate over many pin times without copying the model.
GaussianKernel kernel_raw(const CovarianceModel& m, double r, double t, double u) {
    const double b_tr = b_factor(m, t, r);
    if (!(b_tr > 0.0))
        throw integrity_error("degenerate conditioning: B(t, r) = 0 with t < r");
    const double b_ur = b_factor(m, u, r);
    const double b_tu = b_factor(m, t, u);
    return {b_ur / b_tr, b_tu * b_ur / b_tr};
}

} // namespace

double b_factor(const CovarianceModel& m, double s, double t) {
    if (s < 0.0 || t < 0.0)
        throw std::domain_error("b_factor: negative time");
    if (s == t) return 0.0;
    const double lo = std::min(s, t), hi = std::max(s, t);
    const double pos = m.rho(hi) * m.q(lo);
    const double neg = m.rho(lo) * m.q(hi);
    const double b = pos - neg;
    if (b < 0.0) {
        if (-b <= 1e-15 * pos) return 0.0;
        throw integrity_error("b_factor: rho/q decreases between " + std::to_string(lo) +
                              " and " + std::to_string(hi));
    }
    return b;
}

double pair_covariance_det(const CovarianceModel& m, double s, double t) {
    const double rst = m.covariance(s, t);
    return m.covariance(s, s) * m.covariance(t, t) - rst * rst;
}

double bridge_covariance(const BridgeSpec& b, double s, double t) {
    require_length(b);
    const double r = b.length;
    if (s < 0.0 || t < 0.0 || s > r || t > r)
        throw std::domain_error("bridge_covariance: times must lie in [0, length]");
    const double lo = std::min(s, t), hi = std::max(s, t);
    if (lo == 0.0 || hi == r) return 0.0;
    const double rho_r = b.model.rho(r);
    const double q_res = b.model.q(hi) - b.model.rho(hi) * b.model.q(r) / rho_r;
    double v = b.model.rho(lo) * q_res;
    if (v < 0.0) {
        const double scale = b.model.rho(lo) * b.model.q(hi);
        if (-v <= 1e-15 * scale) return 0.0;
        throw integrity_error("bridge_covariance: negative value off the diagonal edge");
    }
    return v;
}

double marginal_variance(const BridgeSpec& b, double t) {
    require_length(b);
    if (!(t > 0.0) || !(t < b.length))
        throw std::domain_error("marginal_variance: need 0 < t < length");
    return b.model.rho(t) * b_factor(b.model, t, b.length) / b.model.rho(b.length);
}

double marginal_density(const BridgeSpec& b, double t, double x) {
    return normal_pdf(x, marginal_variance(b, t));
}

GaussianKernel transition_kernel(const BridgeSpec& b, double t, double u) {
    require_length(b);
    if (!(t >= 0.0) || !(t < u) || !(u < b.length))
        throw std::domain_error("transition_kernel: need 0 <= t < u < length");
    return kernel_raw(b.model, b.length, t, u);
}

GaussianKernel conditional_from_covariance(const CovarianceModel& m,
                                           double r, double t, double u) {
    if (!(t > 0.0) || !(t < u) || !(u < r))
        throw std::domain_error("conditional_from_covariance: need 0 < t < u < r");
    const double a_tr = pair_covariance_det(m, t, r);
    const double r_rr = m.covariance(r, r);
    const double num = m.covariance(u, t) * r_rr - m.covariance(u, r) * m.covariance(t, r);
    const double slope = num / a_tr;
    const double variance = pair_covariance_det(m, u, r) / r_rr - slope * num / r_rr;
    return {slope, variance};
}

double log_joint_density(const BridgeSpec& b,
                         const std::vector<double>& times,
                         const std::vector<double>& values) {
    require_length(b);
    const std::size_t n = times.size();
    if (n == 0 || values.size() != n)
        throw std::invalid_argument("log_joint_density: need equally many times and values");
    for (std::size_t k = 0; k < n; ++k) {
        if (!(times[k] > 0.0) || !(times[k] < b.length))
            throw std::domain_error("log_joint_density: times must lie in (0, length)");
        if (k > 0 && !(times[k] > times[k - 1]))
            throw std::invalid_argument("log_joint_density: times must be strictly increasing");
        if (!std::isfinite(values[k]))
            throw std::invalid_argument("log_joint_density: non-finite value");
    }

    const CovarianceModel& m = b.model;
    const double r = b.length;

    if (n == 1) {
        const double v = marginal_variance(b, times[0]);
        return -0.5 * std::log(2.0 * M_PI * v) - values[0] * values[0] / (2.0 * v);
    }

    std::vector<double> b_step(n - 1);  // B(t_k, t_{k+1})
    for (std::size_t k = 0; k + 1 < n; ++k) b_step[k] = b_factor(m, times[k], times[k + 1]);
    const double b_last = b_factor(m, times[n - 1], r);
    const double b_prev_r = b_factor(m, times[n - 2], r);

    double log_norm = -0.5 * double(n) * std::log(2.0 * M_PI) +
                      0.5 * (std::log(m.rho(r)) - std::log(m.rho(times[0])) - std::log(b_last));
    for (std::size_t k = 0; k + 1 < n; ++k) log_norm -= 0.5 * std::log(b_step[k]);

    double quad = -0.5 * m.rho(times[1]) / (m.rho(times[0]) * b_step[0]) * values[0] * values[0];
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double b_span = b_factor(m, times[k - 1], times[k + 1]);
        quad -= 0.5 * b_span / (b_step[k - 1] * b_step[k]) * values[k] * values[k];
    }
    for (std::size_t k = 0; k + 1 < n; ++k) quad += values[k] * values[k + 1] / b_step[k];
    quad -= 0.5 * b_prev_r / (b_last * b_step[n - 2]) * values[n - 1] * values[n - 1];

    return log_norm + quad;
}

double joint_density(const BridgeSpec& b,
                     const std::vector<double>& times,
                     const std::vector<double>& values) {
    return std::exp(log_joint_density(b, times, values));
}

std::vector<double> sample_path(const BridgeSpec& b,
                                const std::vector<double>& grid,
                                std::mt19937_64& rng) {
    require_length(b);
    if (grid.empty())
        throw std::invalid_argument("sample_path: empty grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0) || !std::isfinite(grid[i]))
            throw std::domain_error("sample_path: grid times must be finite and >= 0");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw std::invalid_argument("sample_path: grid must be strictly increasing");
    }

    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> values(grid.size());
    double t_prev = 0.0, x_prev = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid[i];
        if (t >= b.length) {
            values[i] = 0.0;
            continue;
        }
        if (t == 0.0) {
            values[i] = 0.0;
            continue;
        }
        const GaussianKernel k = kernel_raw(b.model, b.length, t_prev, t);
        const double x = k.slope * x_prev + std::sqrt(std::max(0.0, k.variance)) * gauss(rng);
        values[i] = x;
        t_prev = t;
        x_prev = x;
    }
    return values;
}

struct JointSampler::Impl {
    std::vector<double> grid;
    std::vector<std::size_t> interior;  // indices with 0 < t < length
    Eigen::MatrixXd chol;               // lower factor of the interior covariance
    double length;
};

JointSampler::JointSampler(const BridgeSpec& b, std::vector<double> grid) {
    require_length(b);
    if (grid.empty())
        throw std::invalid_argument("JointSampler: empty grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0) || !std::isfinite(grid[i]))
            throw std::domain_error("JointSampler: grid times must be finite and >= 0");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw std::invalid_argument("JointSampler: grid must be strictly increasing");
    }

    auto impl = std::make_shared<Impl>();
    impl->grid = std::move(grid);
    impl->length = b.length;
    for (std::size_t i = 0; i < impl->grid.size(); ++i)
        if (impl->grid[i] > 0.0 && impl->grid[i] < b.length) impl->interior.push_back(i);

    const std::size_t k = impl->interior.size();
    Eigen::MatrixXd cov(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = bridge_covariance(b, impl->grid[impl->interior[i]],
                                               impl->grid[impl->interior[j]]);
            cov(i, j) = v;
            cov(j, i) = v;
        }
    if (k > 0) {
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success)
            throw numeric_error("JointSampler: covariance matrix is not positive definite");
        impl->chol = llt.matrixL();
    }
    impl_ = std::move(impl);
}

std::vector<double> JointSampler::sample(std::mt19937_64& rng) const {
    const Impl& im = *impl_;
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t k = im.interior.size();
    Eigen::VectorXd z(k);
    for (std::size_t i = 0; i < k; ++i) z(i) = gauss(rng);
    Eigen::VectorXd x;
    if (k > 0) x = im.chol * z;

    std::vector<double> values(im.grid.size(), 0.0);
    for (std::size_t i = 0; i < k; ++i) values[im.interior[i]] = x(i);
    return values;
}

std::vector<double> sample_path_joint(const BridgeSpec& b,
                                      const std::vector<double>& grid,
                                      std::mt19937_64& rng) {
    return JointSampler(b, grid).sample(rng);
}

} // namespace gmb
