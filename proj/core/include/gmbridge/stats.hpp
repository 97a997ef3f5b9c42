#pragma once

#include <cstddef>
#include <vector>

namespace gmb {

// Centered normal density with the given variance.
double normal_pdf(double x, double variance);

// Standard normal distribution function.
double normal_cdf(double z);

// Kolmogorov tail Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_tail(double lambda);

// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
struct KsResult {
    double statistic;
    double p_value;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct RunningStats {
    std::size_t n = 0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double x) { ++n; sum += x; sum_sq += x * x; }
    double mean() const { return n ? sum / double(n) : 0.0; }
    double variance() const;       // unbiased; 0 when n < 2
    double se_mean() const;        // standard error of the mean
};

} // namespace gmb
