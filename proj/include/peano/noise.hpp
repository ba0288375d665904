#pragma once

#include <span>
#include <vector>

#include "peano/random.hpp"

namespace peano::noise {

// Symmetric alpha-stable law with Levy density c|y|^{-1-alpha}. The marginal
// scale sigma of L_1 is computed in closed form and cross-checked against a
// quadrature of the characteristic exponent before the object is usable.
class StableLaw {
public:
    explicit StableLaw(double alpha, double c = 1.0);

    // Bypasses the quadrature check; only for negative controls.
    static StableLaw with_sigma_override(double alpha, double c, double sigma);

    double alpha() const noexcept { return alpha_; }
    double c() const noexcept { return c_; }
    double sigma() const noexcept { return sigma_; }
    bool validated() const noexcept { return validated_; }

    // psi(z) = -sigma^alpha |z|^alpha
    double char_exponent(double z) const noexcept;

private:
    StableLaw(double alpha, double c, double sigma, bool validated)
        : alpha_(alpha), c_(c), sigma_(sigma), validated_(validated) {}

    double alpha_;
    double c_;
    double sigma_;
    bool validated_;
};

double closed_form_sigma(double alpha, double c);

// -2c * int_0^inf (1 - cos(zy)) y^{-1-alpha} dy, by direct quadrature in y.
double char_exponent_quadrature(double alpha, double c, double z);

// Chambers-Mallows-Stuck variate with characteristic function exp(-|z|^alpha).
double standard_stable(double alpha, RandomStream& rng) noexcept;

double sample_stable_increment(const StableLaw& law, double dt, RandomStream& rng);

// nu(R \ [-u,u]) = 2c / (alpha u^alpha)
double levy_tail_mass(const StableLaw& law, double u);

double sample_large_jump(const StableLaw& law, double threshold, RandomStream& rng);

struct JumpEvent {
    double time;
    double size;
};

struct NoiseDecomposition {
    double alpha;
    double c;
    double epsilon;
    double rho;
    double threshold;     // eps^{-rho}
    double lambda_eps;    // rate of |jumps| > threshold
    double inner_cutoff;  // h: jumps below are replaced by a Brownian part
    double mid_rate;      // rate of jumps with h < |y| <= threshold
    double gauss_var_rate;  // 2c h^{2-alpha} / (2-alpha)

    double gauss_ratio() const;  // sigma(h)/h per unit time
};

inline constexpr double kMaxMidRate = 1e4;
inline constexpr double kMinGaussRatio = 10.0;

NoiseDecomposition make_decomposition(const StableLaw& law, double epsilon, double rho);

// Same as make_decomposition but with an explicit jump cutoff (threshold)
// instead of eps^{-rho}; lambda_eps is then the tail mass beyond it.
NoiseDecomposition make_truncation(const StableLaw& law, double threshold);

// Lazily generated arrival stream of large jumps.
class EventClock {
public:
    EventClock(const NoiseDecomposition& d, RandomStream rng);
    const JumpEvent& peek() const noexcept { return next_; }
    JumpEvent pop();

private:
    void draw();
    const NoiseDecomposition* d_;
    RandomStream rng_;
    JumpEvent next_{};
};

std::vector<JumpEvent> sample_event_stream(const NoiseDecomposition& decomp, const StableLaw& law, double horizon,
                                           RandomStream& rng);

// One increment of xi^eps (unscaled) over dt: Brownian part plus exact mid jumps.
double sample_small_jump_increment(const NoiseDecomposition& decomp, double dt, RandomStream& rng);

std::vector<double> sample_small_jump_path(const NoiseDecomposition& decomp, const StableLaw& law,
                                           std::span<const double> grid, RandomStream& rng);

}  // namespace peano::noise
