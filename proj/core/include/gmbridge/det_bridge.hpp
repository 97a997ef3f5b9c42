#pragma once

#include "gmbridge/covariance_model.hpp"

#include <memory>
#include <random>
#include <vector>

namespace gmb {

/// A bridge of the base process pinned to 0 at the fixed time `length`.
struct BridgeSpec {
    CovarianceModel model;
    double length;      // r > 0
};

/// One-step conditional law: y | x ~ Normal(slope * x, variance).
struct GaussianKernel {
    double slope;
    double variance;
};

/// Covariance gap rho(max)q(min) - rho(min)q(max). Nonnegative whenever
/// rho/q is increasing, and zero only at s = t. Round-off-scale negatives
/// (within 1e-15 of the positive term) are floored to 0; anything more
/// negative means the model is broken and raises integrity_error.
double b_factor(const CovarianceModel& m, double s, double t);

/// Determinant of the covariance matrix of (X_s, X_t):
/// R(s,s)R(t,t) - R(s,t)^2. Used by the raw conditional-law oracle.
double pair_covariance_det(const CovarianceModel& m, double s, double t);

/// Covariance of the pinned bridge, rho(min) * (q(max) - rho(max)q(r)/rho(r)).
/// Requires 0 <= s, t <= r; zero when max(s, t) = r.
double bridge_covariance(const BridgeSpec& b, double s, double t);

/// Variance of the bridge at time t: rho(t) B_{t,r} / rho(r), 0 < t < r.
double marginal_variance(const BridgeSpec& b, double t);

/// Centered Gaussian density of the bridge value at time t, 0 < t < r.
double marginal_density(const BridgeSpec& b, double t, double x);

/// Conditional law of the bridge at u given its value at t, 0 <= t < u < r:
/// slope = B_{u,r}/B_{t,r}, variance = B_{t,u} B_{u,r} / B_{t,r}.
/// At t = 0 this reduces to the marginal law at u.
GaussianKernel transition_kernel(const BridgeSpec& b, double t, double u);

/// Same conditional law computed from raw covariances via the projection
/// formulas (no product-form shortcut). Slower; kept as a cross-check.
GaussianKernel conditional_from_covariance(const CovarianceModel& m,
                                           double r, double t, double u);

/// Joint density of the bridge at n strictly increasing times in (0, r).
/// n = 1 reduces to marginal_density.
double joint_density(const BridgeSpec& b,
                     const std::vector<double>& times,
                     const std::vector<double>& values);
double log_joint_density(const BridgeSpec& b,
                         const std::vector<double>& times,
                         const std::vector<double>& values);

/// Sequential sampler: walks the grid with transition kernels from xi_0 = 0;
/// grid points at or beyond the pin time get exact zeros.
std::vector<double> sample_path(const BridgeSpec& b,
                                const std::vector<double>& grid,
                                std::mt19937_64& rng);

/// Joint sampler: dense Cholesky factor of [bridge_covariance(t_i, t_j)]
/// over the interior grid points. Same law as sample_path; used to
/// cross-check the sequential sampler.
std::vector<double> sample_path_joint(const BridgeSpec& b,
                                      const std::vector<double>& grid,
                                      std::mt19937_64& rng);

/// Reusable form of sample_path_joint: the Cholesky factor is computed once
/// at construction and shared across draws.
class JointSampler {
public:
    JointSampler(const BridgeSpec& b, std::vector<double> grid);
    std::vector<double> sample(std::mt19937_64& rng) const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

} // namespace gmb
