#pragma once

#include "gmbridge/det_bridge.hpp"
#include "gmbridge/length_law.hpp"
#include "gmbridge/random_bridge.hpp"

#include <functional>
#include <string>
#include <vector>

namespace gmb {

/// One observation of the bridge. value == 0.0 (exactly) encodes the pinned
/// event {tau <= t}; no epsilon-snapping of small values is ever applied.
struct Observation {
    double t;
    double value;
};

enum class PosteriorBranch {
    pinned,     // every observed value was zero: tau <= first observation time
    interval,   // zero first appeared between two observations
    live,       // last observed value nonzero: tau beyond the last time
};

/// Conditional law of tau given observations, represented as a density
/// (weight) against the base length law, supported on a window (lo, hi].
class PosteriorMeasure {
public:
    PosteriorMeasure(LengthLaw base, PosteriorBranch branch,
                     double window_lo, double window_hi,
                     std::function<double(double)> log_weight);

    PosteriorBranch branch() const { return branch_; }
    std::pair<double, double> window() const { return {lo_, hi_}; }
    const LengthLaw& base() const { return base_; }

    /// Posterior weight w(r); zero outside the window. ∫ w dP over the
    /// window is 1 up to quadrature tolerance.
    double weight(double r) const;
    double log_weight(double r) const;

    /// Re-integration of the weight over the window; should be 1 +- 1e-9.
    double mass() const;

    /// ∫ g(r) w(r) P(dr) over the window.
    double integrate(const std::function<double(double)>& g) const;

    double mean() const;
    double cdf(double s) const;          // posterior P(tau <= s)
    double quantile(double p) const;     // smallest s with cdf(s) >= p
    std::vector<Atom> atom_masses() const;  // posterior mass of every base atom,
                                            // aligned with base().atoms()

private:
    LengthLaw base_;
    PosteriorBranch branch_;
    double lo_, hi_;
    std::function<double(double)> log_weight_;
};

/// Mixture law of the bridge value at a future time u: a point mass at 0
/// plus Gaussian components, one per atom or quadrature node of tau > u.
struct PredictiveComponent {
    double weight;
    double mean;
    double variance;
    double pin_time;    // the tau value this component conditions on
};

struct PredictiveLaw {
    double zero_mass;
    std::vector<PredictiveComponent> components;

    double total_mass() const;    // zero_mass + sum of weights; 1 +- 1e-9
    double mean() const;
    double density(double y) const;   // continuous part only
    double expect(const std::function<double(double)>& g,
                  int hermite_degree = 64) const;
};

/// Normalized likelihood reweighting the length law into the posterior on
/// the live branch: phi(r) = density of the length-r bridge at (t, x),
/// divided by its P_tau-average over lengths s > t. Stable ratio form; the
/// two density evaluations are never formed separately.
double phi_weight(const CovarianceModel& m, const LengthLaw& law,
                  double t, double r, double x);

/// Posterior of tau from a single observation. Pinned branch (x = 0):
/// weight 1/F(t) on (0, t], requires F(t) > 0. Live branch: phi weight
/// on (t, infinity), requires P(tau > t) > 0.
PosteriorMeasure posterior_single(const CovarianceModel& m, const LengthLaw& law,
                                  const Observation& obs);

/// Posterior of tau from observations at strictly increasing times. Branch
/// selection: all zeros -> pinned at t_1; first zero at t_{k+1} -> window
/// (t_k, t_{k+1}] weighted by the value at t_k; no zeros -> live branch of
/// the last observation. Values before the deciding one are ignored by
/// design: the conditional law provably depends only on the deciding pair.
PosteriorMeasure posterior_multi(const CovarianceModel& m, const LengthLaw& law,
                                 const std::vector<Observation>& obs);

/// Reference implementation for observation vectors with no zeros: weights
/// proportional to the full joint density of all observed values under each
/// candidate length. Mathematically equal to posterior_multi; numerically
/// independent (sums every cross term instead of collapsing to the last
/// observation). Kept for verification.
PosteriorMeasure posterior_from_joint(const CovarianceModel& m, const LengthLaw& law,
                                      const std::vector<Observation>& obs);

/// Conditional law of the bridge value at u > obs.t given the observation.
PredictiveLaw predict(const CovarianceModel& m, const LengthLaw& law,
                      const Observation& obs, double u);

/// E[g(tau, xi_u) | observations] for u beyond the last observation time.
/// Decomposes over the posterior branches: g(r, 0) against the posterior up
/// to u, plus the Gauss-Hermite average of g(r, .) under the transition
/// kernel for lengths beyond u.
double expect_joint(const CovarianceModel& m, const LengthLaw& law,
                    const std::vector<Observation>& obs, double u,
                    const std::function<double(double, double)>& g,
                    int hermite_degree = 64);

/// E[g(tau) | path up to its last grid point]. On a pinned prefix tau is
/// read off the zero set (the stored value, cross-checked against the
/// detector) and g(tau) is returned exactly; on a live prefix only the
/// final value matters and the live-branch posterior integral is returned.
double filtration_estimate(const CovarianceModel& m, const LengthLaw& law,
                           const BridgePath& prefix,
                           const std::function<double(double)>& g);

} // namespace gmb
