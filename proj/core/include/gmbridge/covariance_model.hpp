#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gmb {

/// Covariance of a centered Gaussian process in product form:
///
///     R(s, t) = rho(min(s, t)) * q(max(s, t))
///
/// A model is usable on (0, horizon] when rho(0) = 0, rho and q are positive
/// on (0, horizon], and rho/q is strictly increasing there. Under these
/// conditions R is a Markov covariance and every variance or conditional
/// variance derived from it is positive. `validate` probes the conditions on
/// a grid and reports each one separately.
class CovarianceModel {
public:
    CovarianceModel(std::string name,
                    std::function<double(double)> rho,
                    std::function<double(double)> q,
                    std::optional<double> q_inf = std::nullopt);

    /// Increasing factor. Requires t >= 0.
    double rho(double t) const;

    /// Decreasing factor (typically). Requires t >= 0; q(0) is understood as
    /// the limit from the right and must be supplied finite by the model.
    double q(double t) const;

    /// R(s, t) = rho(min) * q(max). Requires s, t >= 0.
    double covariance(double s, double t) const;

    const std::string& name() const { return name_; }

    /// Infimum of q over (0, infinity) when known analytically.
    std::optional<double> q_inf() const { return q_inf_; }

private:
    std::string name_;
    std::function<double(double)> rho_;
    std::function<double(double)> q_;
    std::optional<double> q_inf_;
};

/// Standard Brownian motion: rho(t) = t, q = 1.
CovarianceModel brownian();

/// Brownian motion with variance rate sigma2: rho(t) = sigma2 * t, q = 1.
CovarianceModel scaled_brownian(double sigma2);

/// Mean-reverting process started at zero (rate theta, noise sigma):
/// rho(t) = (sigma^2 / theta) * sinh(theta t), q(t) = exp(-theta t).
CovarianceModel ou_from_zero(double theta, double sigma);

/// Model interpolated from samples of rho and q with a monotone cubic.
/// Requires t strictly increasing starting at 0, rho[0] = 0, q > 0.
/// Evaluation beyond the tabulated horizon is a domain error.
CovarianceModel tabulated(std::vector<double> t,
                          std::vector<double> rho,
                          std::vector<double> q,
                          std::string name = "tabulated");

/// Reads a CSV file with columns t,rho,q (header line optional).
CovarianceModel tabulated_from_csv(const std::string& path);

struct CheckResult {
    std::string name;
    bool pass;
    double statistic;
    double tolerance;
    std::string message;
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    bool all_pass() const;
    const CheckResult* find(const std::string& name) const;
};

/// Grid diagnostics over (0, horizon] with the given step:
///   positivity            rho(0) = 0, rho > 0 and q > 0 on the grid
///   ratio_monotonicity    rho/q strictly increasing on the grid
///   markov_factorization  R(s,t) R(t,u) = R(t,t) R(s,u) for grid triples
///   q_infimum             min q on the grid; warns when the declared
///                         infimum over (0, infinity) is zero
///   continuity            flags jumps: |f(t+h) - f(t)| > 10 (|f(t)|+1) sqrt(h)
ValidationReport validate(const CovarianceModel& model, double horizon, double step);

} // namespace gmb
