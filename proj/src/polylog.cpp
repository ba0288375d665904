#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <limits>

#include "peano/error.hpp"
#include "peano/scaling.hpp"

namespace peano::scaling {

namespace {

// Direct series with the geometric remainder bound t_{k+1} / (1 - r).
double polylog_series(double a, double x) {
    double sum = 0.0;
    double xp = 1.0;
    for (long k = 1; k < 200'000'000; ++k) {
        xp *= x;
        const double term = xp * std::pow(static_cast<double>(k), -a);
        sum += term;
        const double kk = static_cast<double>(k + 1);
        const double ratio = a >= 0.0 ? x : x * std::pow(1.0 + 1.0 / kk, -a);
        if (ratio < 1.0) {
            const double next = term * x * std::pow(kk / k, -a);
            const double remainder = next / (1.0 - ratio);
            if (remainder <= 1e-17 * std::abs(sum)) break;
        }
    }
    return sum;
}

// Expansion in mu = ln x around x = 1 (NIST DLMF 25.12.12 and the harmonic-
// number variant for positive integer orders).
double polylog_near_one(double a, double x) {
    const double mu = std::log(x);
    const bool positive_integer = a >= 1.0 && a == std::round(a);
    const long s = positive_integer ? std::lround(a) : -1;
    double sum = 0.0;
    if (positive_integer) {
        double harmonic = 0.0;
        double fact = 1.0;
        for (long j = 1; j <= s - 1; ++j) {
            harmonic += 1.0 / j;
            fact *= j;
        }
        sum += std::pow(mu, s - 1) / fact * (harmonic - std::log(-mu));
    } else {
        sum += std::tgamma(1.0 - a) * std::pow(-mu, a - 1.0);
    }
    double mu_n_over_fact = 1.0;
    for (long n = 0; n < 150; ++n) {
        if (n > 0) mu_n_over_fact *= mu / n;
        if (positive_integer && n == s - 1) continue;
        const double term = boost::math::zeta(a - n) * mu_n_over_fact;
        sum += term;
        if (n >= 2 && std::abs(term) <= 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

}  // namespace

double polylog(double a, double x) {
    if (!std::isfinite(a)) throw DomainError("polylog: order must be finite");
    if (!(x >= 0.0)) throw DomainError("polylog: x must be non-negative");
    if (!(x < 1.0)) throw DomainError("polylog: x must be < 1");
    if (x == 0.0) return 0.0;
    if (x > 1.0 - 1e-4) return polylog_near_one(a, x);
    return polylog_series(a, x);
}

}  // namespace peano::scaling
