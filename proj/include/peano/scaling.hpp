#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "peano/dynamics.hpp"

namespace peano::scaling {

using dynamics::ModelParams;

// A real stored as sign * exp(log).
struct LogValue {
    double log = 0.0;
    int sign = 1;

    double value() const;
    static LogValue from(double v);
};

LogValue log_add(LogValue a, LogValue b);

// Exponents and epsilon-dependent quantities of the half-line analysis for one
// side of the drift (beta, B).
struct SideScaling {
    double beta = 0.0;
    double B = 0.0;
    double Gamma = 0.0;
    double Gamma_paper = 0.0;  // value of the displayed choice before any fallback
    bool Gamma_fallback = false;
    double rho0 = 0.0;
    double rho1 = 0.0;
    double rho = 0.0;
    LogValue lambda_eps;
    LogValue delta_eps;
    LogValue r_eps;
    LogValue n_eps;
    LogValue gamma_eps;
    bool gamma_eps_asymptotic = false;  // closed form undefined at this epsilon
};

struct Overrides {
    std::optional<double> rho;
    std::optional<double> Gamma;
    std::optional<double> vartheta;
    std::optional<double> pi_gamma;  // the free factor gamma in (-pi1)
};

struct TransitionBox {
    LogValue Theta_plus;
    LogValue Theta_minus;
    LogValue t_eps;
    bool circ_is_plus = false;  // which side carries the smaller box
    double exp_plus = 0.0;      // Theta_plus ~ t^{exp_plus}
    double exp_minus = 0.0;
    double eps_exponent = 0.0;  // t_eps ~ eps^{eps_exponent}
};

struct ScalingBundle {
    ModelParams params;
    SideScaling plus;
    SideScaling minus;

    // The positive half-line values; mirrors `plus`.
    double rho = 0.0, rho0 = 0.0, rho1 = 0.0, Gamma = 0.0;
    LogValue lambda_eps, delta_eps, r_eps, n_eps, gamma_eps;

    double theta_star = 0.0;
    TransitionBox box;
    LogValue Theta_plus, Theta_minus, t_eps;
    double kappa = 0.0;
    double g = 0.0;
    double pi_gamma = 0.0;
    double pi1 = 0.0;
    LogValue Psi0, Psi1, s_eps;

    // Open question on the equal-beta box ratio: computed vs displayed.
    double Theta_ratio_computed = 0.0;
    double Theta_ratio_displayed = 0.0;

    std::vector<std::string> flags;
};

double gamma_choice_paper(double beta);
double gamma_choice(double beta, bool* fallback = nullptr);
double rho1_of(double beta, double Gamma);
double rho0_of(double alpha, double beta, double Gamma);
double rho_choice(double alpha, double beta, double Gamma);
double theta_star(const ModelParams& p);

SideScaling side_scaling(const ModelParams& p, double beta, double B, const Overrides& o = {});

ScalingBundle scaling_bundle(const ModelParams& p, const Overrides& o = {});

TransitionBox transition_box(const ModelParams& p, double vartheta);

// Relative residuals of the two balance equations and of the third equation.
struct BoxResidual {
    double eq_plus = 0.0;
    double eq_minus = 0.0;
    double eq_third = 0.0;
    double max() const;
};
BoxResidual transition_box_residual(const ModelParams& p, double vartheta, const TransitionBox& box);

double kappa_of(const ModelParams& p, double vartheta);
double g_of(const ModelParams& p);

struct AuditFlag {
    std::string name;
    double value = 0.0;
    bool pass = false;
    bool applicable = true;
    bool gating = true;
    std::string note;
};

struct AuditReport {
    std::vector<AuditFlag> flags;
    bool all_pass() const;  // over gating, applicable flags
    const AuditFlag* find(const std::string& name) const;
};

AuditReport exponent_audit(const ModelParams& p, double vartheta, const Overrides& o = {});

struct BoundRow {
    double epsilon = 0.0;
    LogValue S1, S2, S3, S4, S5, S;
    // the four summands of S3, for diagnostics
    LogValue S3a, S3b, S3c, S3d;
};

std::vector<BoundRow> bound_terms(const ModelParams& p, const ScalingBundle& bundle, std::span<const double> eps_grid);

// Exponent of the Laplace-section sums: alpha rho (1 + alpha rho / (Gamma(1-beta))).
double kappa_laplace(double alpha, double rho, double Gamma, double beta);

double polylog(double a, double x);

struct RampParameters {
    LogValue Psi0, Psi1, s_eps;
    double pi1 = 0.0;
};

RampParameters ramp_parameters(const ModelParams& p, const ScalingBundle& bundle);

}  // namespace peano::scaling
