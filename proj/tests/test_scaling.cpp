#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/zeta.hpp>

#include "peano/error.hpp"
#include "peano/scaling.hpp"

using namespace peano;
using namespace peano::scaling;
using dynamics::ModelParams;

namespace {

ModelParams params(double alpha, double bp, double bm, double eps = 1e-3, double Bp = 1.0, double Bm = 1.0) {
    ModelParams p;
    p.alpha = alpha;
    p.beta_plus = bp;
    p.beta_minus = bm;
    p.B_plus = Bp;
    p.B_minus = Bm;
    p.epsilon = eps;
    return p;
}

std::vector<ModelParams> sweep() {
    std::vector<ModelParams> out;
    for (double a : {1.1, 1.5, 1.9}) {
        for (double bp : {0.2, 0.5, 0.8}) {
            for (double bm : {0.2, 0.5, 0.8}) {
                if (a > 1.0 - std::min(bp, bm)) out.push_back(params(a, bp, bm));
            }
        }
    }
    return out;
}

// Plain partial sums, used as an independent reference away from x = 1.
double polylog_direct(double a, double x) {
    double s = 0.0, xk = 1.0;
    for (int k = 1; k < 200000; ++k) {
        xk *= x;
        const double t = xk / std::pow(k, a);
        s += t;
        if (t < 1e-18 * s) break;
    }
    return s;
}

}  // namespace

TEST(LogValue, RoundTripAndAdd) {
    for (double v : {-3.5, -1e-200, 1e-300, 2.0, 7e250}) EXPECT_NEAR(LogValue::from(v).value(), v, 1e-12 * std::abs(v));
    EXPECT_NEAR(log_add(LogValue::from(2.0), LogValue::from(3.0)).value(), 5.0, 1e-14);
    EXPECT_NEAR(log_add(LogValue::from(2.0), LogValue::from(-3.0)).value(), -1.0, 1e-14);
    const LogValue big{1000.0, 1};
    EXPECT_NEAR(log_add(big, big).log, 1000.0 + std::log(2.0), 1e-12);
}

TEST(Bundle, LambdaExample) {
    Overrides o;
    o.rho = 0.5;
    const auto b = scaling_bundle(params(1.0, 0.5, 0.5, 0.01), o);
    EXPECT_NEAR(b.lambda_eps.value(), 0.2, 1e-14);
}

TEST(Bundle, DeltaAtExtremeEpsilon) {
    Overrides o;
    o.rho = 0.4;
    const double eps = 1e-40;
    const auto b = scaling_bundle(params(1.0, 0.5, 0.5, eps), o);
    const double L = std::log(eps);
    EXPECT_NEAR(b.delta_eps.log, 0.2 * L + 4.0 * std::log(std::abs(L)), 1e-12);
    EXPECT_NEAR(b.delta_eps.log, -0.33, 0.01);
    EXPECT_NEAR(b.delta_eps.value(), 0.72, 0.01);
}

TEST(Bundle, RhoBelowUpperBoundAndWindows) {
    for (const auto& p : sweep()) {
        const auto b = scaling_bundle(p);
        EXPECT_GT(b.rho, 0.0);
        EXPECT_LT(b.rho, 1.0 / (1.0 + p.alpha));
        for (const auto* s : {&b.plus, &b.minus}) {
            EXPECT_GT(s->Gamma, 1.0);
            EXPECT_LT(s->Gamma, 1.0 / (1.0 - s->beta));
        }
        EXPECT_LT(b.pi1, 0.0);
    }
}

TEST(Bundle, RejectsStandingAssumption) { EXPECT_THROW(scaling_bundle(params(0.4, 0.5, 0.5)), DomainError); }

TEST(Bundle, FiniteDownToTinyEpsilon) {
    for (double eps : {0.5, 1e-3, 1e-100, 1e-300}) {
        const auto b = scaling_bundle(params(1.5, 0.3, 0.7, eps));
        for (const auto& v : {b.lambda_eps, b.delta_eps, b.r_eps, b.n_eps, b.gamma_eps, b.Theta_plus, b.Theta_minus,
                              b.t_eps, b.Psi1, b.s_eps}) {
            EXPECT_TRUE(std::isfinite(v.log)) << eps;
        }
    }
}

TEST(Bundle, CancellationIdentities) {
    for (const auto& p0 : sweep()) {
        for (int k = 2; k <= 12; ++k) {
            auto p = p0;
            p.epsilon = std::pow(10.0, -k);
            const auto b = scaling_bundle(p);
            const double L = std::log(p.epsilon), ll = 2.0 * std::log(std::abs(L));
            EXPECT_NEAR(p.alpha * b.rho * L + b.r_eps.log, ll, 1e-12 * std::abs(ll));
            EXPECT_NEAR(b.delta_eps.log - (1.0 - b.rho) * L - b.r_eps.log, ll, 1e-12 * std::abs(ll));
        }
    }
}

TEST(Bundle, GammaFallbackIsFlagged) {
    // The displayed choice is singular at beta = 1/2 and too large at beta = 0.3.
    bool fb = false;
    EXPECT_DOUBLE_EQ(gamma_choice(0.5, &fb), 1.5);
    EXPECT_TRUE(fb);
    EXPECT_GT(gamma_choice_paper(0.3), 1.0 / 0.7);
    gamma_choice(0.3, &fb);
    EXPECT_TRUE(fb);
    const auto b = scaling_bundle(params(1.5, 0.3, 0.7));
    EXPECT_TRUE(b.plus.Gamma_fallback);
    EXPECT_NE(std::find(b.flags.begin(), b.flags.end(), "Gamma_fallback_plus"), b.flags.end());
}

TEST(Bundle, ThetaStar) {
    EXPECT_DOUBLE_EQ(theta_star(params(1.5, 0.5, 0.5)), 0.5 * (1.0 + 0.5 / 1.5));
    EXPECT_DOUBLE_EQ(theta_star(params(1.5, 0.3, 0.7)), 1.0);
}

TEST(TransitionBox, SymmetricCase) {
    const auto p = params(1.5, 0.5, 0.5, 1e-4);
    const auto box = transition_box(p, 1.0);
    EXPECT_NEAR(box.Theta_plus.log, box.Theta_minus.log, 1e-12);
}

TEST(TransitionBox, EpsilonExponent) {
    const auto box = transition_box(params(1.5, 0.5, 0.5), 1.0);
    EXPECT_NEAR(box.eps_exponent, 0.75, 1e-12);
    const auto b1 = transition_box(params(1.5, 0.5, 0.5, 1e-3), 1.0);
    const auto b2 = transition_box(params(1.5, 0.5, 0.5, 1e-9), 1.0);
    EXPECT_NEAR((b2.t_eps.log - b1.t_eps.log) / (std::log(1e-9) - std::log(1e-3)), 0.75, 1e-10);
}

TEST(TransitionBox, ResidualSmallAcrossSweep) {
    for (const auto& p0 : sweep()) {
        for (double eps : {1e-2, 1e-5, 1e-9, 1e-12}) {
            auto p = p0;
            p.epsilon = eps;
            const double th = theta_star(p);
            if (!(th * p.alpha + p.beta_min() > 1.0)) continue;
            const auto box = transition_box(p, th);
            EXPECT_LE(transition_box_residual(p, th, box).max(), 1e-9);
        }
    }
}

TEST(TransitionBox, PreconditionNamed) {
    try {
        transition_box(params(1.1, 0.2, 0.5), 0.5);
        FAIL() << "expected a domain error";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("alpha"), std::string::npos);
    }
}

TEST(TransitionBox, EqualBetaRatioOpenQuestion) {
    const auto b = scaling_bundle(params(1.5, 0.5, 0.5, 1e-4, 1.0, 2.0));
    // Computed from the primary formulas; the displayed expression is reported alongside.
    EXPECT_NEAR(std::abs(std::log(b.Theta_ratio_computed)), std::log(2.0) / 1.5, 1e-9);
    EXPECT_TRUE(std::isfinite(b.Theta_ratio_displayed));
}

TEST(Kappa, WorkedExample) {
    EXPECT_NEAR(kappa_of(params(1.5, 0.3, 0.7), 1.0), -0.19 / 1.76, 1e-12);
    EXPECT_NEAR(kappa_of(params(1.5, 0.7, 0.3), 1.0), -0.19 / 1.76, 1e-12);
    const auto audit = exponent_audit(params(1.5, 0.3, 0.7), 1.0);
    ASSERT_NE(audit.find("kappa_window"), nullptr);
    EXPECT_TRUE(audit.find("kappa_window")->pass);
    EXPECT_GT(g_of(params(1.5, 0.3, 0.7)), 0.0);
}

TEST(Audit, SignPositiveForAlphaAtLeastOne) {
    for (const auto& p : sweep()) {
        const auto a = exponent_audit(p, theta_star(p));
        ASSERT_NE(a.find("sign_plus"), nullptr);
        EXPECT_TRUE(a.find("sign_plus")->pass);
        EXPECT_TRUE(a.find("sign_minus")->pass);
    }
}

TEST(Audit, StandingAssumptionReported) {
    const auto a = exponent_audit(params(0.4, 0.5, 0.5), 1.0);
    EXPECT_FALSE(a.all_pass());
    EXPECT_FALSE(a.find("standing_assumption")->pass);
}

// Every gating flag except the ramp inequality holds on the whole sweep.
TEST(Audit, SweepFlagsOtherThanRamp) {
    for (const auto& p : sweep()) {
        const auto a = exponent_audit(p, theta_star(p));
        for (const auto& f : a.flags) {
            if (!f.applicable || !f.gating || f.name == "ramp_inequality") continue;
            EXPECT_TRUE(f.pass) << f.name << " alpha=" << p.alpha << " b+=" << p.beta_plus << " b-=" << p.beta_minus;
        }
    }
}

// The ramp inequality with equal exponents reduces to vartheta* alpha > 1, which
// fails for alpha = 1.1 and beta <= 1/2. Pinned here so a change is noticed.
TEST(Audit, RampInequalityAtSmallAlphaEqualBeta) {
    const auto a1 = exponent_audit(params(1.1, 0.2, 0.2), theta_star(params(1.1, 0.2, 0.2)));
    EXPECT_FALSE(a1.find("ramp_inequality")->pass);
    EXPECT_NEAR(a1.find("ramp_inequality")->value, 0.0857142857, 1e-6);
    const auto a2 = exponent_audit(params(1.1, 0.5, 0.5), theta_star(params(1.1, 0.5, 0.5)));
    EXPECT_NEAR(a2.find("ramp_inequality")->value, 0.0, 1e-12);
    const auto a3 = exponent_audit(params(1.1, 0.8, 0.8), theta_star(params(1.1, 0.8, 0.8)));
    EXPECT_TRUE(a3.find("ramp_inequality")->pass);
}

TEST(BoundTerms, PositiveAndS1Order) {
    const auto p = params(1.5, 0.5, 0.5);
    const auto b = scaling_bundle(p);
    std::vector<double> grid;
    for (int k = 2; k <= 12; ++k) grid.push_back(std::pow(10.0, -k));
    const auto rows = bound_terms(p, b, grid);
    ASSERT_EQ(rows.size(), grid.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (const auto& s : {rows[i].S1, rows[i].S2, rows[i].S3, rows[i].S4, rows[i].S5, rows[i].S}) {
            EXPECT_EQ(s.sign, 1);
            EXPECT_TRUE(std::isfinite(s.log));
        }
        EXPECT_NEAR(rows[i].S1.log, (2.0 + p.alpha * (1.0 - b.rho)) * std::log(grid[i]), 1e-9);
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_LT(rows[i].S1.log, rows[i - 1].S1.log);
        EXPECT_LT(rows[i].S2.log, rows[i - 1].S2.log);
        EXPECT_LT(rows[i].S4.log, rows[i - 1].S4.log);
        EXPECT_LT(rows[i].S5.log, rows[i - 1].S5.log);
    }
}

TEST(Polylog, Basics) {
    for (double a : {-1.0, 0.5, 1.0, 2.5}) EXPECT_EQ(polylog(a, 0.0), 0.0);
    EXPECT_NEAR(polylog(1.0, 0.5), std::log(2.0), 1e-12);
    EXPECT_NEAR(polylog(2.0, 0.5), std::numbers::pi * std::numbers::pi / 12 - std::log(2.0) * std::log(2.0) / 2, 1e-12);
    EXPECT_NEAR(polylog(0.0, 0.3), 0.3 / 0.7, 1e-14);
    EXPECT_THROW(polylog(0.5, 1.0), DomainError);
    EXPECT_THROW(polylog(0.5, -0.1), DomainError);
}

TEST(Polylog, SeriesAgainstDirectSums) {
    for (double a : {0.3, 0.5, 1.0, 1.7, 3.0}) {
        for (double x : {0.1, 0.5, 0.9, 0.99}) {
            const double ref = polylog_direct(a, x);
            EXPECT_NEAR(polylog(a, x), ref, 1e-10 * ref) << a << " " << x;
        }
    }
}

TEST(Polylog, ExpansionContinuousAtSwitch) {
    for (double a : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0}) {
        const double lo = polylog(a, 1.0 - 1.0001e-4), hi = polylog(a, 1.0 - 0.9999e-4);
        EXPECT_NEAR(lo, hi, 1e-3 * std::abs(hi)) << a;
        EXPECT_LT(lo, hi);
    }
}

TEST(Polylog, NearOneExpansionAgainstZeta) {
    // Li_a(x) = Gamma(1-a) w^{a-1} + sum_k zeta(a-k) (-w)^k / k!, w = -ln x; the
    // leading terms, written out independently with Boost's zeta.
    const double a = 0.5, x = 1.0 - 1e-6, w = -std::log(x);
    double ref = std::tgamma(1.0 - a) * std::pow(w, a - 1.0);
    double term = 1.0;
    for (int k = 0; k < 6; ++k) {
        ref += boost::math::zeta(a - k) * term;
        term *= -w / (k + 1);
    }
    EXPECT_NEAR(polylog(a, x), ref, 1e-10 * ref);
    EXPECT_NEAR(polylog(a, x) * std::sqrt(1.0 - x), std::sqrt(std::numbers::pi), 2e-3);
}

TEST(Ramp, ParametersAndSigns) {
    for (const auto& p : sweep()) {
        const auto b = scaling_bundle(p);
        const auto r = ramp_parameters(p, b);
        EXPECT_LT(r.pi1, 0.0);
        EXPECT_NEAR(r.Psi1.log, std::log(3.0) + 0.5 * b.delta_eps.log, 1e-12);
        EXPECT_NEAR(r.s_eps.log, std::log(2.0 / p.B_plus) + 0.5 * (1.0 - p.beta_plus) * r.Psi1.log, 1e-12);
    }
}

TEST(Ramp, MonotoneInEpsilon) {
    double prev_psi = INFINITY, prev_s = INFINITY;
    for (int k = 2; k <= 15; ++k) {
        const auto p = params(1.5, 0.5, 0.5, std::pow(10.0, -k));
        const auto r = ramp_parameters(p, scaling_bundle(p));
        if (k > 6) {
            EXPECT_LT(r.Psi1.log, prev_psi);
            EXPECT_LT(r.s_eps.log, prev_s);
        }
        prev_psi = r.Psi1.log;
        prev_s = r.s_eps.log;
    }
}
