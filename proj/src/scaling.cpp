#include "peano/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "peano/error.hpp"

namespace peano::scaling {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

LogValue lv(double log) { return LogValue{log, 1}; }

void check_eps(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("epsilon must lie in (0,1) for the scaling quantities");
}

struct BetaPair {
    double circ, star;    // min and max exponent
    double B_circ, B_star;  // weights attached to them
};

BetaPair order_betas(const ModelParams& p) {
    if (p.beta_plus <= p.beta_minus) return {p.beta_plus, p.beta_minus, p.B_plus, p.B_minus};
    return {p.beta_minus, p.beta_plus, p.B_minus, p.B_plus};
}

double box_denominator(double alpha, double vartheta, const BetaPair& b) {
    return vartheta * alpha + b.star - 1.0 + b.star * (vartheta * alpha + b.circ - 1.0);
}

double rel_residual(double log_lhs, double log_rhs) { return std::abs(std::expm1(log_lhs - log_rhs)); }

}  // namespace

double LogValue::value() const { return sign * std::exp(log); }

LogValue LogValue::from(double v) {
    if (v == 0.0) return {-std::numeric_limits<double>::infinity(), 1};
    return {std::log(std::abs(v)), v < 0.0 ? -1 : 1};
}

LogValue log_add(LogValue a, LogValue b) {
    if (a.sign != 1 || b.sign != 1) return LogValue::from(a.value() + b.value());
    if (a.log < b.log) std::swap(a, b);
    if (b.log == -std::numeric_limits<double>::infinity()) return a;
    return {a.log + std::log1p(std::exp(b.log - a.log)), 1};
}

double gamma_choice_paper(double beta) {
    const double q = 1.0 - beta;
    return 0.5 * (1.0 + 0.5 * (1.0 / q + 2.0 * q / (2.0 * q - 1.0)));
}

double gamma_choice(double beta, bool* fallback) {
    const double q = 1.0 - beta;
    const double paper = gamma_choice_paper(beta);
    const bool ok = std::isfinite(paper) && paper > 1.0 && paper < 1.0 / q;
    if (fallback) *fallback = !ok;
    return ok ? paper : 0.5 * (1.0 + 1.0 / q);
}

double rho1_of(double beta, double Gamma) {
    const double u = (1.0 - 1.0 / Gamma) * (1.0 - beta);
    return u / (u + 1.0);
}

double rho0_of(double alpha, double beta, double Gamma) {
    const double u = Gamma * (1.0 - alpha) * (1.0 - beta);
    return u / (u + alpha);
}

double rho_choice(double alpha, double beta, double Gamma) {
    return 0.5 * (rho1_of(beta, Gamma) + 1.0 / (1.0 + alpha));
}

double theta_star(const ModelParams& p) {
    if (p.beta_plus == p.beta_minus) return 0.5 * (1.0 + (1.0 - p.beta_plus) / p.alpha);
    return 1.0;
}

SideScaling side_scaling(const ModelParams& p, double beta, double B, const Overrides& o) {
    check_eps(p.epsilon);
    SideScaling s;
    s.beta = beta;
    s.B = B;
    s.Gamma_paper = gamma_choice_paper(beta);
    if (o.Gamma) {
        s.Gamma = *o.Gamma;
        if (!(s.Gamma > 1.0 && s.Gamma < 1.0 / (1.0 - beta))) {
            throw DomainError("Gamma override must lie in (1, 1/(1-beta))");
        }
    } else {
        s.Gamma = gamma_choice(beta, &s.Gamma_fallback);
    }
    s.rho0 = rho0_of(p.alpha, beta, s.Gamma);
    s.rho1 = rho1_of(beta, s.Gamma);
    s.rho = o.rho ? *o.rho : rho_choice(p.alpha, beta, s.Gamma);
    if (!(s.rho > 0.0 && s.rho < 1.0)) throw DomainError("rho must lie in (0,1)");

    const double a = p.alpha;
    const double L = std::log(p.epsilon);
    const double ll = std::log(std::abs(L));
    s.lambda_eps = lv(std::log(2.0 * p.c / a) + a * s.rho * L);
    s.delta_eps = lv((1.0 - s.rho * (1.0 + a)) * L + 4.0 * ll);
    s.r_eps = lv(2.0 * ll - a * s.rho * L);
    s.n_eps = lv(2.0 * ll - a * (1.0 - s.rho) * L);

    const double q = 1.0 - beta;
    const double la = -s.lambda_eps.log / s.Gamma;             // ln lambda^{-1/Gamma}
    const double lb = q * (std::log(3.0) + s.delta_eps.log);  // ln (3 delta)^{1-beta}
    if (la > lb) {
        s.gamma_eps = lv((la + std::log1p(-std::exp(lb - la))) / q);
    } else {
        s.gamma_eps = lv(la / q);
        s.gamma_eps_asymptotic = true;
    }
    return s;
}

TransitionBox transition_box(const ModelParams& p, double vartheta) {
    p.validate();
    check_eps(p.epsilon);
    if (!(vartheta > 0.0 && vartheta <= 1.0)) throw DomainError("transition_box: vartheta must lie in (0,1]");
    if (!(vartheta * p.alpha + p.beta_min() > 1.0)) {
        throw DomainError("transition_box: vartheta*alpha + min(beta) > 1 violated");
    }
    const double D0 = 1.0 - p.beta_plus * p.beta_minus;
    const double lBp = std::log(p.B_plus);
    const double lBm = std::log(p.B_minus);
    const double lKp = (lBm + p.beta_minus * lBp) / D0;
    const double lKm = (lBp + p.beta_plus * lBm) / D0;
    TransitionBox box;
    box.exp_plus = vartheta * (1.0 + p.beta_minus) / D0;
    box.exp_minus = vartheta * (1.0 + p.beta_plus) / D0;
    // The smaller box for t < 1 has the larger exponent; ties go to the
    // smaller prefactor.
    if (box.exp_plus != box.exp_minus) {
        box.circ_is_plus = box.exp_plus > box.exp_minus;
    } else {
        box.circ_is_plus = lKp < lKm;
    }
    const double lK = box.circ_is_plus ? lKp : lKm;
    const double e = box.circ_is_plus ? box.exp_plus : box.exp_minus;
    const double denom = e - 1.0 / p.alpha;
    box.eps_exponent = 1.0 / denom;
    const double lt = (std::log(p.epsilon) - lK) / denom;
    box.t_eps = lv(lt);
    box.Theta_plus = lv(lKp + box.exp_plus * lt);
    box.Theta_minus = lv(lKm + box.exp_minus * lt);
    return box;
}

double BoxResidual::max() const { return std::max({eq_plus, eq_minus, eq_third}); }

BoxResidual transition_box_residual(const ModelParams& p, double vartheta, const TransitionBox& b) {
    const double lt = b.t_eps.log;
    BoxResidual r;
    r.eq_plus = rel_residual(std::log(p.B_plus) + lt + p.beta_plus * b.Theta_plus.log,
                             b.Theta_minus.log + (1.0 - vartheta) * lt);
    r.eq_minus = rel_residual(std::log(p.B_minus) + lt + p.beta_minus * b.Theta_minus.log,
                              b.Theta_plus.log + (1.0 - vartheta) * lt);
    const double circ = b.circ_is_plus ? b.Theta_plus.log : b.Theta_minus.log;
    r.eq_third = rel_residual(circ, std::log(p.epsilon) + lt / p.alpha);
    return r;
}

double kappa_of(const ModelParams& p, double vartheta) {
    const auto b = order_betas(p);
    const double N = box_denominator(p.alpha, vartheta, b);
    return -((1.0 - b.circ * b.star) - vartheta * vartheta * p.alpha * (b.star - b.circ)) / N;
}

double g_of(const ModelParams& p) {
    const auto b = order_betas(p);
    const double N1 = box_denominator(p.alpha, 1.0, b);
    return 0.5 * p.alpha * (b.star - b.circ) * (1.0 + b.star) / N1;
}

double kappa_laplace(double alpha, double rho, double Gamma, double beta) {
    const double ar = alpha * rho;
    return ar * (1.0 + ar / (Gamma * (1.0 - beta)));
}

RampParameters ramp_parameters(const ModelParams& p, const ScalingBundle& bundle) {
    const auto& s = bundle.plus;
    RampParameters r;
    r.Psi0 = bundle.box.circ_is_plus ? bundle.box.Theta_plus : bundle.box.Theta_minus;
    r.Psi1 = lv(std::log(3.0) + 0.5 * s.delta_eps.log);
    r.s_eps = lv(std::log(2.0 / s.B) + 0.5 * (1.0 - s.beta) * r.Psi1.log);
    // ln_eps(Psi1) taken as the polynomial order of 3 sqrt(delta_eps), so the
    // sign of pi1 does not depend on where the log factor of delta_eps sits.
    const double order_psi1 = 0.5 * (1.0 - s.rho * (1.0 + p.alpha));
    r.pi1 = -0.5 * (1.0 - s.beta) * bundle.pi_gamma * order_psi1;
    return r;
}

ScalingBundle scaling_bundle(const ModelParams& p, const Overrides& o) {
    p.validate();
    check_eps(p.epsilon);
    ScalingBundle b;
    b.params = p;
    b.plus = side_scaling(p, p.beta_plus, p.B_plus, o);
    b.minus = side_scaling(p, p.beta_minus, p.B_minus, o);
    b.rho = b.plus.rho;
    b.rho0 = b.plus.rho0;
    b.rho1 = b.plus.rho1;
    b.Gamma = b.plus.Gamma;
    b.lambda_eps = b.plus.lambda_eps;
    b.delta_eps = b.plus.delta_eps;
    b.r_eps = b.plus.r_eps;
    b.n_eps = b.plus.n_eps;
    b.gamma_eps = b.plus.gamma_eps;

    for (const auto* side : {&b.plus, &b.minus}) {
        const char* tag = side == &b.plus ? "plus" : "minus";
        if (side->Gamma_fallback) b.flags.push_back(std::string("Gamma_fallback_") + tag);
        if (side->gamma_eps_asymptotic) b.flags.push_back(std::string("gamma_eps_asymptotic_") + tag);
        if (!(side->rho < 1.0 / (1.0 + p.alpha))) b.flags.push_back(std::string("rho_above_bound_") + tag);
    }

    b.theta_star = o.vartheta ? *o.vartheta : theta_star(p);
    b.box = transition_box(p, b.theta_star);
    b.Theta_plus = b.box.Theta_plus;
    b.Theta_minus = b.box.Theta_minus;
    b.t_eps = b.box.t_eps;
    b.kappa = kappa_of(p, b.theta_star);
    b.g = g_of(p);
    b.pi_gamma = o.pi_gamma ? *o.pi_gamma : 1.0 / (2.0 * p.alpha);

    const auto ramp = ramp_parameters(p, b);
    b.Psi0 = ramp.Psi0;
    b.Psi1 = ramp.Psi1;
    b.s_eps = ramp.s_eps;
    b.pi1 = ramp.pi1;

    const double lo = std::min(b.Theta_plus.log, b.Theta_minus.log);
    const double hi = std::max(b.Theta_plus.log, b.Theta_minus.log);
    b.Theta_ratio_computed = std::exp(lo - hi);
    if (p.beta_plus == p.beta_minus) {
        const double Bc = std::min(p.B_plus, p.B_minus);
        const double Bs = std::max(p.B_plus, p.B_minus);
        b.Theta_ratio_displayed = std::pow(Bc / Bs, -1.0 / (1.0 + p.beta_plus));
    } else {
        b.Theta_ratio_displayed = kNaN;
    }
    if (!(b.kappa < 0.0)) b.flags.push_back("kappa_nonnegative");
    return b;
}

bool AuditReport::all_pass() const {
    return std::all_of(flags.begin(), flags.end(),
                       [](const AuditFlag& f) { return !f.gating || !f.applicable || f.pass; });
}

const AuditFlag* AuditReport::find(const std::string& name) const {
    for (const auto& f : flags) {
        if (f.name == name) return &f;
    }
    return nullptr;
}

AuditReport exponent_audit(const ModelParams& p, double vartheta, const Overrides& o) {
    AuditReport rep;
    const double a = p.alpha;
    auto add = [&](std::string name, double value, bool pass, bool applicable = true, bool gating = true,
                   std::string note = {}) {
        rep.flags.push_back({std::move(name), value, pass, applicable, gating, std::move(note)});
    };

    add("standing_assumption", a - (1.0 - p.beta_min()), a > 1.0 - p.beta_min());

    for (int k = 0; k < 2; ++k) {
        const bool plus = k == 0;
        const std::string tag = plus ? "_plus" : "_minus";
        const double beta = plus ? p.beta_plus : p.beta_minus;
        bool fb = false;
        const double G = o.Gamma ? *o.Gamma : gamma_choice(beta, &fb);
        const double r0 = rho0_of(a, beta, G);
        const double r1 = rho1_of(beta, G);
        const double rho = o.rho ? *o.rho : rho_choice(a, beta, G);
        const double q = 1.0 - beta;

        add("Gamma_window" + tag, std::min(G - 1.0, 1.0 / q - G), G > 1.0 && G < 1.0 / q, true, true,
            fb ? "displayed choice outside (1, 1/(1-beta)); fallback used" : "");
        const double sign = (a - 1.0) * (1.0 - rho) + rho * a / (G * q);
        add("sign" + tag, sign, sign > 0.0);
        const double win = std::min(rho - r0, 1.0 / (1.0 + a) - rho);
        add("rho_window" + tag, win, win > 0.0);
        add("rho1_below_rho" + tag, rho - r1, rho > r1);
        const double d = a * rho * (1.0 - 1.0 / G) - a * (1.0 - rho) * q;
        add("S3_last_term_exponent" + tag, d, d > 0.0, true, false,
            "informational: exponent of the fourth S3 summand");
    }

    const auto b = order_betas(p);
    const bool unequal = b.circ != b.star;
    const double N = box_denominator(a, vartheta, b);
    add("box_precondition", vartheta * a + b.circ - 1.0, vartheta * a + b.circ > 1.0);

    const double lower = vartheta * a * (1.0 + b.circ) / N - 1.0;
    const double upper = (1.0 - b.circ * b.star) / N;
    add("kappa_window", upper - lower, upper > lower, unequal, true,
        unequal ? "" : "window has zero width when beta_plus == beta_minus");
    const double kappa = kappa_of(p, vartheta);
    add("kappa_inside_window", std::min(-kappa - lower, upper + kappa), -kappa > lower && -kappa < upper, unequal,
        false, "informational");

    // Section-5 inequality as displayed (its denominator carries alpha where
    // the box exponent has vartheta*alpha).
    const double Np = vartheta * a + b.star - 1.0 + b.star * (a + b.circ - 1.0);
    const double ramp = (vartheta * a * b.circ * (1.0 + b.star) - Np) / Np;
    add("ramp_inequality", ramp, Np > 0.0 && ramp < -1e-12);

    const double g = g_of(p);
    add("g_positive", g, g > 0.0, unequal, true, unequal ? "" : "g vanishes when beta_plus == beta_minus");
    return rep;
}

std::vector<BoundRow> bound_terms(const ModelParams& p, const ScalingBundle& bundle,
                                  std::span<const double> eps_grid) {
    const double a = p.alpha;
    const double rho = bundle.plus.rho;
    const double G = bundle.plus.Gamma;
    const double beta = bundle.plus.beta;
    const double q = 1.0 - beta;
    const double kl = kappa_laplace(a, rho, G, beta);
    std::vector<BoundRow> rows;
    rows.reserve(eps_grid.size());
    for (double eps : eps_grid) {
        check_eps(eps);
        const double L = std::log(eps);
        const double ll = std::log(std::abs(L));
        BoundRow r;
        r.epsilon = eps;
        r.S1 = lv((2.0 + a * (1.0 - rho)) * L);
        r.S2 = lv(std::log(2.0) + 2.0 * ll + (2.0 - a + a * rho) * L);
        r.S3a = lv((a * (1.0 - rho) + a * a * rho / (G * q)) * L);
        r.S3b = lv(a * rho * (1.0 - 1.0 / G) * L);
        r.S3c = lv(a * ((1.0 - rho * (1.0 - a / (G * q))) - (2.0 - a) * (1.0 - rho)) * L + 2.0 * (2.0 - a) * ll);
        r.S3d = lv((a * rho * (1.0 - 1.0 / G) - a * (1.0 - rho) * q) * L + (2.0 - beta) * ll);
        r.S3 = log_add(log_add(r.S3a, r.S3b), log_add(r.S3c, r.S3d));
        r.S4 = lv(kl * a * rho * L);
        r.S5 = lv((2.0 + kl * a * rho - kl) * L);
        r.S = log_add(log_add(log_add(r.S1, r.S2), log_add(r.S3, r.S4)), r.S5);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace peano::scaling
