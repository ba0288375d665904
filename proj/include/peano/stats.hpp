#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace peano::stats {

struct EstimateWithCI {
    double point = 0.0;
    double std_error = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    long n = 0;
};

// Binomial proportion with the 95% normal-approximation interval, clipped to [0,1].
EstimateWithCI proportion(long successes, long n);

// Mean of a sample with its standard error.
EstimateWithCI mean_estimate(std::span<const double> xs);

// Sup distance between the empirical CDF of `sample` and `cdf`. Sorts a copy.
double ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);

double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Linear-interpolation quantile of sorted data.
double quantile_sorted(std::span<const double> sorted, double q);

}  // namespace peano::stats
