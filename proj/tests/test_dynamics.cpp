#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "peano/dynamics.hpp"
#include "peano/error.hpp"
#include "peano/stats.hpp"

using namespace peano;
using namespace peano::dynamics;

namespace {

ModelParams params(double bp = 0.5, double bm = 0.5, double Bp = 1.0, double Bm = 1.0, double eps = 1e-3) {
    ModelParams p;
    p.beta_plus = bp;
    p.beta_minus = bm;
    p.B_plus = Bp;
    p.B_minus = Bm;
    p.epsilon = eps;
    return p;
}

}  // namespace

TEST(ModelParams, Validation) {
    EXPECT_NO_THROW(params().validate());
    auto p = params();
    p.alpha = 0.4;  // 0.4 < 1 - 0.5
    EXPECT_THROW(p.validate(), DomainError);
    p = params(1.0);
    EXPECT_THROW(p.validate(), DomainError);
    p = params(0.5, 0.5, 0.0);
    EXPECT_THROW(p.validate(), DomainError);
    EXPECT_NO_THROW(p.validate_for_simulation());
    p = params(0.5, 0.5, 1.0, 1.0, 0.0);
    EXPECT_THROW(p.validate(), DomainError);
    EXPECT_NO_THROW(p.validate_for_simulation());
}

TEST(Drift, Examples) {
    EXPECT_DOUBLE_EQ(drift(1.0, params(0.5, 0.5, 2.0)), 2.0);
    EXPECT_DOUBLE_EQ(drift(0.0, params()), 0.0);
    EXPECT_DOUBLE_EQ(drift(-4.0, params()), -2.0);
}

TEST(Flow, Examples) {
    const auto p = params();
    for (double x : {-3.0, -0.1, 0.0, 0.2, 5.0}) EXPECT_EQ(flow(0.0, x, p), x);
    EXPECT_NEAR(flow(1.0, 0.25, p), 1.0, 1e-15);
    EXPECT_NEAR(flow(1.0, flow(1.0, 0.25, p), p), flow(2.0, 0.25, p), 1e-12);
    EXPECT_EQ(flow(3.0, 0.0, p), 0.0);
    EXPECT_NEAR(flow(1.0, -0.25, p), -1.0, 1e-15);
}

TEST(Flow, SemigroupProperty) {
    RandomStream r(21, 0);
    const auto p = params(0.3, 0.7, 1.3, 0.6);
    for (int i = 0; i < 2000; ++i) {
        const double s = r.uniform(0, 10), t = r.uniform(0, 10), x = r.uniform(-10, 10);
        const double direct = flow(s + t, x, p);
        EXPECT_LE(std::abs(direct - flow(t, flow(s, x, p), p)), 1e-12 * (1.0 + std::abs(direct)));
    }
}

TEST(Flow, MonotoneInInitialCondition) {
    RandomStream r(22, 0);
    const auto p = params(0.4, 0.6, 1.0, 2.0);
    std::vector<double> xs(500);
    for (auto& x : xs) x = r.uniform(-5, 5);
    xs.push_back(0.0);
    std::sort(xs.begin(), xs.end());
    for (double t : {0.1, 1.0, 7.0}) {
        for (std::size_t i = 1; i < xs.size(); ++i) EXPECT_LE(flow(t, xs[i - 1], p), flow(t, xs[i], p));
    }
}

TEST(Flow, OdeResidualIsFirstOrder) {
    const auto p = params(0.3, 0.7, 1.5, 0.8);
    for (double x : {-2.0, -0.3, 0.05, 1.7}) {
        const double t = 0.4;
        const double u = flow(t, x, p);
        const double e1 = std::abs((flow(t + 1e-3, x, p) - u) / 1e-3 - drift(u, p));
        const double e2 = std::abs((flow(t + 1e-4, x, p) - u) / 1e-4 - drift(u, p));
        EXPECT_LT(e2, 0.2 * e1 + 1e-9) << x;
    }
}

TEST(Flow, DominatesExtremalSolution) {
    const auto p = params(0.3, 0.7);
    for (double x : {1e-3, 0.1, 1.0}) {
        for (double t : {0.0, 0.01, 1.0, 10.0}) EXPECT_GE(flow(t, x, p), extremal_solution(t, Side::plus, p));
    }
}

TEST(Extremal, Examples) {
    const auto p = params();
    EXPECT_EQ(extremal_solution(0.0, Side::plus, p), 0.0);
    EXPECT_EQ(extremal_solution(0.0, Side::minus, p), 0.0);
    EXPECT_NEAR(extremal_solution(1.0, Side::plus, p), 0.25, 1e-15);
    for (double t : {0.3, 2.0}) EXPECT_DOUBLE_EQ(extremal_solution(t, Side::minus, p), -extremal_solution(t, Side::plus, p));
}

TEST(Extremal, SolvesOde) {
    const auto p = params(0.3, 0.6, 2.0, 0.5);
    for (Side s : {Side::plus, Side::minus}) {
        for (double t : {0.2, 1.0, 3.0}) {
            const double h = 1e-6;
            const double d = (extremal_solution(t + h, s, p) - extremal_solution(t - h, s, p)) / (2 * h);
            EXPECT_NEAR(d, drift(extremal_solution(t, s, p), p), 1e-6 * (1 + std::abs(d)));
        }
    }
}

TEST(Classify, MarginRule) {
    const auto p = params();
    const double xp = extremal_solution(1.0, Side::plus, p);
    EXPECT_EQ(classify_branch(0.6 * xp, 1.0, p), Branch::plus);
    EXPECT_EQ(classify_branch(0.4 * xp, 1.0, p), Branch::unclassified);
    EXPECT_EQ(classify_branch(-0.6 * xp, 1.0, p), Branch::minus);
}

TEST(IntegrateGrid, DeterministicLimitIsExact) {
    auto p = params(0.5, 0.5, 1.0, 1.0, 0.0);
    RandomStream r(23, 0);
    const auto path = integrate_grid(p, 1.0, 1.0, 0.01, r);
    EXPECT_EQ(path.times.front(), 0.0);
    EXPECT_EQ(path.values.front(), 1.0);
    EXPECT_NEAR(path.values.back(), 2.25, 1e-12);
    for (std::size_t i = 0; i < path.times.size(); ++i) {
        EXPECT_NEAR(path.values[i], flow(path.times[i], 1.0, p), 1e-12 * (1 + path.values[i]));
    }
    const auto zero = integrate_grid(p, 0.0, 1.0, 0.01, r);
    for (double v : zero.values) EXPECT_EQ(v, 0.0);
}

TEST(IntegrateGrid, NoiseOnlyMarginal) {
    auto p = params(0.5, 0.5, 0.0, 0.0, 0.1);
    const noise::StableLaw law(p.alpha, p.c);
    const long n = 100000;
    std::vector<double> a(n), b(n);
    RandomStream r2(24, 1);
    for (long i = 0; i < n; ++i) {
        RandomStream r(24, 1000 + static_cast<std::uint64_t>(i));
        a[i] = integrate_grid(p, 0.3, 0.5, 0.5, r).values.back();
        b[i] = 0.3 + p.epsilon * noise::sample_stable_increment(law, 0.5, r2);
    }
    EXPECT_LE(stats::ks_two_sample(a, b), 0.01);
}

TEST(IntegrateGrid, RejectsBadStep) {
    RandomStream r(25, 0);
    EXPECT_THROW(integrate_grid(params(), 0.0, 1.0, 0.0, r), DomainError);
    EXPECT_THROW(integrate_grid(params(), 0.0, 0.1, 0.5, r), DomainError);
}

TEST(IntegrateEvent, DeterministicMatchesGrid) {
    auto p = params(0.4, 0.6, 1.0, 1.0, 0.0);
    const auto d = noise::make_decomposition(noise::StableLaw(p.alpha), 0.1, 0.5);
    RandomStream r1(26, 0), r2(26, 1);
    const auto a = integrate_event(p, d, 0.7, 2.0, r1);
    const auto b = integrate_grid(p, 0.7, 2.0, 0.01, r2);
    EXPECT_NEAR(a.values.back(), b.values.back(), 1e-12 * b.values.back());
    EXPECT_EQ(a.scheme, Scheme::event_driven);
}

TEST(IntegrateEvent, EventsLieOnGridAndRespectThreshold) {
    auto p = params(0.5, 0.5, 1.0, 1.0, 0.05);
    const auto d = noise::make_decomposition(noise::StableLaw(p.alpha), p.epsilon, 0.3);
    RandomStream r(27, 0);
    const auto path = integrate_event(p, d, 0.0, 30.0, r);
    ASSERT_FALSE(path.events.empty());
    for (const auto& e : path.events) {
        EXPECT_TRUE(std::binary_search(path.times.begin(), path.times.end(), e.time));
        EXPECT_GT(std::abs(e.size), d.threshold);
    }
    for (std::size_t i = 1; i < path.times.size(); ++i) EXPECT_GT(path.times[i], path.times[i - 1]);
}

TEST(IntegrateEvent, CrossSchemeMarginal) {
    auto p = params(0.5, 0.5, 1.0, 1.0, 0.1);
    const auto d = noise::make_decomposition(noise::StableLaw(p.alpha), p.epsilon, 0.5);
    const long n = 10000;
    const double T = 0.05;
    std::vector<double> a(n), b(n);
    for (long i = 0; i < n; ++i) {
        RandomStream r1(28, static_cast<std::uint64_t>(i)), r2(29, static_cast<std::uint64_t>(i));
        a[i] = integrate_event(p, d, 0.2, T, r1).values.back();
        b[i] = integrate_grid(p, 0.2, T, T / 64, r2).values.back();
    }
    EXPECT_LE(stats::ks_two_sample(a, b), 0.02);
}

TEST(Comparison, NoEventsFollowsShiftedFlow) {
    const auto p = params();
    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i) grid.push_back(0.05 * i);
    const double delta = 0.01, gamma = 1.5, x = 0.1;
    const auto z = comparison_process(p, {}, gamma, delta, x, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_NEAR(z.values[i], std::min(flow(grid[i], x - delta, p) - delta, gamma), 1e-12);
    }
    const auto z0 = comparison_process(p, {}, std::numeric_limits<double>::infinity(), 0.0, x, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(z0.values[i], flow(grid[i], x, p), 1e-12);
}
