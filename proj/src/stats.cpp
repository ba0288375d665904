#include "peano/stats.hpp"

#include <algorithm>
#include <cmath>

#include "peano/error.hpp"

namespace peano::stats {

namespace {
constexpr double kZ95 = 1.959963984540054;
}

EstimateWithCI proportion(long successes, long n) {
    if (n <= 0) throw DomainError("proportion: n must be positive");
    if (successes < 0 || successes > n) throw DomainError("proportion: successes out of range");
    EstimateWithCI e;
    e.n = n;
    e.point = static_cast<double>(successes) / static_cast<double>(n);
    e.std_error = std::sqrt(e.point * (1.0 - e.point) / static_cast<double>(n));
    e.ci_lo = std::max(0.0, e.point - kZ95 * e.std_error);
    e.ci_hi = std::min(1.0, e.point + kZ95 * e.std_error);
    return e;
}

EstimateWithCI mean_estimate(std::span<const double> xs) {
    if (xs.empty()) throw DomainError("mean_estimate: empty sample");
    // Welford, in index order so the result does not depend on scheduling.
    double mean = 0.0, m2 = 0.0;
    long k = 0;
    for (double x : xs) {
        ++k;
        const double d = x - mean;
        mean += d / k;
        m2 += d * (x - mean);
    }
    EstimateWithCI e;
    e.n = k;
    e.point = mean;
    e.std_error = k > 1 ? std::sqrt(m2 / (k - 1) / k) : 0.0;
    e.ci_lo = mean - kZ95 * e.std_error;
    e.ci_hi = mean + kZ95 * e.std_error;
    return e;
}

double ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw DomainError("ks_one_sample: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) return std::nan("");
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace peano::stats
