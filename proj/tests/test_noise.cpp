#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "peano/error.hpp"
#include "peano/noise.hpp"
#include "peano/stats.hpp"

using namespace peano;
using namespace peano::noise;

namespace {

std::vector<double> draws(const StableLaw& law, double dt, long n, RandomStream rng) {
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (auto& x : xs) x = sample_stable_increment(law, dt, rng);
    return xs;
}

}  // namespace

TEST(StableLaw, ClosedFormSigmaMatchesQuadrature) {
    for (double alpha : {0.5, 0.8, 1.0, 1.2, 1.5, 1.9}) {
        for (double c : {0.5, 1.0, 2.0}) {
            const StableLaw law(alpha, c);
            EXPECT_TRUE(law.validated());
            for (double z : {0.1, 1.0, 5.0}) {
                const double q = char_exponent_quadrature(alpha, c, z);
                EXPECT_NEAR(law.char_exponent(z), q, 1e-6 * std::abs(q)) << alpha << " " << c << " " << z;
            }
        }
    }
}

TEST(StableLaw, CauchyScaleIsPi) { EXPECT_DOUBLE_EQ(closed_form_sigma(1.0, 1.0), std::numbers::pi); }

TEST(StableLaw, RejectsInvalid) {
    EXPECT_THROW(StableLaw(0.0), DomainError);
    EXPECT_THROW(StableLaw(2.0), DomainError);
    EXPECT_THROW(StableLaw(1.5, -1.0), DomainError);
    EXPECT_FALSE(StableLaw::with_sigma_override(1.5, 1.0, 3.0).validated());
}

TEST(SampleStable, CauchyMedianAndPointCheck) {
    const StableLaw law(1.0, 1.0);
    auto xs = draws(law, 1.0, 200000, RandomStream(11, 0));
    std::sort(xs.begin(), xs.end());
    EXPECT_NEAR(stats::quantile_sorted(xs, 0.5), 0.0, 0.03);
    const double p = static_cast<double>(std::upper_bound(xs.begin(), xs.end(), std::numbers::pi) - xs.begin()) / xs.size();
    EXPECT_NEAR(p, 0.75, 0.005);
}

TEST(SampleStable, SelfSimilarity) {
    const StableLaw law(1.5);
    auto a = draws(law, 4.0, 100000, RandomStream(12, 0));
    auto b = draws(law, 1.0, 100000, RandomStream(12, 1));
    for (auto& x : b) x *= std::pow(4.0, 1.0 / 1.5);
    EXPECT_LE(stats::ks_two_sample(a, b), 0.01);
}

TEST(SampleStable, SymmetryOfSign) {
    const StableLaw law(1.3);
    const long n = 100000;
    const auto xs = draws(law, 1.0, n, RandomStream(13, 0));
    double s = 0.0;
    for (double x : xs) s += (x > 0) - (x < 0);
    EXPECT_LE(std::abs(s / n), 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST(SampleStable, CharacteristicFunctionOracle) {
    for (double alpha : {0.8, 1.5}) {
        const StableLaw law(alpha);
        const long n = 100000;
        const auto xs = draws(law, 1.0, n, RandomStream(14, 0));
        for (double z : {0.1, 0.5, 1.0, 2.0, 5.0}) {
            double s = 0.0;
            for (double x : xs) s += std::cos(z * x);
            EXPECT_LE(std::abs(s / n - std::exp(char_exponent_quadrature(alpha, 1.0, z))), 4.0 / std::sqrt(double(n)));
        }
    }
}

TEST(SampleStable, RejectsNonPositiveDt) {
    const StableLaw law(1.5);
    RandomStream r(1, 0);
    EXPECT_THROW(sample_stable_increment(law, 0.0, r), DomainError);
}

TEST(LevyTailMass, Values) {
    EXPECT_NEAR(levy_tail_mass(StableLaw(1.0), 10.0), 0.2, 1e-15);
    const StableLaw law(1.5);
    const double eps = 1e-3, rho = 0.6;
    EXPECT_NEAR(levy_tail_mass(law, std::pow(eps, -rho)), 2.0 / 1.5 * std::pow(eps, 1.5 * rho), 1e-12 * 0.003);
    EXPECT_THROW(levy_tail_mass(law, 0.0), DomainError);
}

TEST(LevyTailMass, RatioIsExactPowerLaw) {
    const StableLaw law(1.7, 2.0);
    for (double u1 : {0.1, 1.0, 3.0}) {
        for (double u2 : {u1 * 1.5, u1 * 10.0}) {
            EXPECT_NEAR(levy_tail_mass(law, u2) / levy_tail_mass(law, u1), std::pow(u1 / u2, 1.7), 1e-14);
        }
    }
    double prev = levy_tail_mass(law, 1.0);
    for (double u = 2.0; u < 1e6; u *= 2.0) {
        const double m = levy_tail_mass(law, u);
        EXPECT_LT(m, prev);
        prev = m;
    }
}

TEST(LargeJump, SupportTailRatioAndSign) {
    const StableLaw law(1.5);
    RandomStream r(15, 0);
    const long n = 100000;
    long beyond = 0, positive = 0;
    for (long i = 0; i < n; ++i) {
        const double w = sample_large_jump(law, 2.5, r);
        ASSERT_GE(std::abs(w), 2.5);
        beyond += std::abs(w) > 5.0;
        positive += w > 0;
    }
    EXPECT_NEAR(double(beyond) / n, std::pow(2.0, -1.5), 0.01);
    EXPECT_NEAR(double(positive) / n, 0.5, 0.01);
    EXPECT_THROW(sample_large_jump(law, 0.0, r), DomainError);
}

TEST(Decomposition, Invariants) {
    const StableLaw law(1.5);
    for (double eps : {1e-1, 1e-3, 1e-6}) {
        const auto d = make_decomposition(law, eps, 0.6);
        EXPECT_NEAR(d.lambda_eps, levy_tail_mass(law, d.threshold), 1e-12 * d.lambda_eps);
        EXPECT_NEAR(d.lambda_eps, 2.0 / 1.5 * std::pow(eps, 0.9), 1e-12 * d.lambda_eps);
        EXPECT_GT(d.inner_cutoff, 0.0);
        EXPECT_LT(d.inner_cutoff, d.threshold);
        EXPECT_LE(d.mid_rate, kMaxMidRate);
        EXPECT_GE(d.gauss_ratio(), kMinGaussRatio * (1 - 1e-12));
    }
    EXPECT_THROW(make_decomposition(law, 0.0, 0.5), DomainError);
    EXPECT_THROW(make_decomposition(law, 0.1, 1.0), DomainError);
}

TEST(EventStream, EmptyAtZeroHorizonAndOrdered) {
    const StableLaw law(1.5);
    const auto d = make_decomposition(law, 0.1, 0.5);
    RandomStream r(16, 0);
    EXPECT_TRUE(sample_event_stream(d, law, 0.0, r).empty());
    const auto ev = sample_event_stream(d, law, 200.0, r);
    ASSERT_GT(ev.size(), 10u);
    for (std::size_t i = 0; i < ev.size(); ++i) {
        EXPECT_GT(std::abs(ev[i].size), d.threshold);
        EXPECT_LE(ev[i].time, 200.0);
        if (i) EXPECT_GT(ev[i].time, ev[i - 1].time);
    }
}

TEST(EventStream, MeanCountAndFirstArrival) {
    const StableLaw law(1.5);
    const auto d = make_decomposition(law, 0.01, 0.5);
    RandomStream r(17, 0);
    const long n = 50000;
    const double horizon = 3.0;
    double count = 0.0;
    long late = 0;
    for (long i = 0; i < n; ++i) {
        const auto ev = sample_event_stream(d, law, horizon, r);
        count += static_cast<double>(ev.size());
        late += ev.empty();
    }
    const double mean = d.lambda_eps * horizon;
    EXPECT_NEAR(count / n, mean, 4.0 * std::sqrt(mean / n));
    const double p = std::exp(-mean);
    EXPECT_NEAR(double(late) / n, p, 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST(SmallJumpPath, GridContract) {
    const StableLaw law(1.5);
    const auto d = make_decomposition(law, 0.1, 0.5);
    RandomStream r(18, 0);
    const std::vector<double> g0{0.0};
    EXPECT_EQ(sample_small_jump_path(d, law, g0, r), std::vector<double>{0.0});
    const std::vector<double> bad{0.0, 0.5, 0.5};
    EXPECT_THROW(sample_small_jump_path(d, law, bad, r), DomainError);
    const std::vector<double> late{0.1, 0.5};
    EXPECT_THROW(sample_small_jump_path(d, law, late, r), DomainError);
}

TEST(SmallJumpPath, LevyItoReassembly) {
    const StableLaw law(1.5);
    const auto d = make_decomposition(law, 0.1, 0.5);
    RandomStream r1(19, 0), r2(19, 1);
    const long n = 100000;
    std::vector<double> joined(n), direct(n);
    const std::vector<double> grid{0.0, 0.25, 0.5, 1.0};
    for (auto& x : joined) {
        x = sample_small_jump_path(d, law, grid, r1).back();
        for (const auto& e : sample_event_stream(d, law, 1.0, r1)) x += e.size;
    }
    for (auto& x : direct) x = sample_stable_increment(law, 1.0, r2);
    EXPECT_LE(stats::ks_two_sample(joined, direct), 0.01);
}
