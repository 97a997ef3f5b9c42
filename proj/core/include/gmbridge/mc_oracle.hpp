#pragma once

#include "gmbridge/bayes_engine.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gmb {

/// Empirical law of tau among simulated paths whose bridge value at time t
/// landed in a band around x (or hit zero exactly when x = 0).
struct BinnedConditional {
    double t;
    double x;
    double h;                      // band half-width; unused when x = 0
    std::size_t n_total;
    std::size_t n_retained;
    std::vector<Atom> atom_freq;   // frequencies at the base law's atoms
    std::vector<double> bin_edges; // histogram of continuous tau draws
    std::vector<double> bin_prob;

    double freq_se(double p) const;    // binomial s.e. of a frequency
};

/// Brute-force conditional law: simulate, select, tally. Raises
/// numeric_error when fewer than 100 paths survive the selection.
BinnedConditional empirical_posterior(const CovarianceModel& m, const LengthLaw& law,
                                      double t, double x, double h,
                                      std::size_t n_paths, std::uint64_t seed);

/// Total variation distance between the empirical conditional law and a
/// posterior, atom-by-atom plus histogram-bin-by-bin.
double total_variation(const BinnedConditional& emp, const PosteriorMeasure& post);

struct CiCell {
    int bin1;               // conditioning bin of the earlier value
    int bin2;               // bin of the later value
    std::size_t n_joint;    // paths in (bin1, bin2)
    std::size_t n_rest;     // paths in bin2 outside bin1
    double mean_joint;
    double mean_bin;        // mean over all of bin2
    double discrepancy;     // mean_joint - mean_bin
    double se;              // s.e. of the discrepancy (overlap accounted for)
    double z;
};

struct CiOptions {
    int bins1 = 4;
    int bins2 = 24;
    std::size_t min_count = 500;
    bool negative_control = false;  // condition on (xi_t1, xi_t2 - xi_t1)
};

struct CiReport {
    double t1, t2, u;
    std::size_t n_paths;
    std::uint64_t seed;
    bool negative_control;
    std::size_t cells_tested;
    std::size_t cells_excluded;
    double max_abs_z;
    bool pass;                 // every tested cell within 3 s.e.
    std::vector<CiCell> cells;

    std::string to_json() const;
};

/// Markov check: the conditional mean of g(bridge value at u) given binned
/// values at t1 and t2 must match the mean given the t2 bin alone, within
/// 3 s.e. in every populated cell. The negative control conditions on the
/// increment instead of the level and must fail.
CiReport markov_ci_test(const CovarianceModel& m, const LengthLaw& law,
                        double t1, double t2, double u,
                        const std::function<double(double)>& g,
                        std::size_t n_paths, std::uint64_t seed,
                        const CiOptions& options = {});

struct ConvergenceReport {
    std::vector<double> times;          // evaluation times 2^-n, decreasing
    std::vector<double> mean_abs_gap;   // per time: mean |posterior mass of (.,u] - F(u)|
    double final_gap;
    double tolerance;
    bool pass;
    double moment_gap;                  // second-moment identity gap at the smallest time
    double moment_limit;                // its analytic limit
    std::string to_json() const;
};

/// Early-time limits of the live-branch formulas, averaged over simulated
/// paths: the posterior mass of (support floor, u] must approach F(u), and
/// the predicted second moment of the value at u must approach its
/// small-t limit. Requires the law's support to start above 2^-level_lo.
ConvergenceReport convergence_check(const CovarianceModel& m, const LengthLaw& law,
                                    double u, int level_lo, int level_hi,
                                    std::size_t n_paths, std::uint64_t seed,
                                    double tolerance);

} // namespace gmb
