#include "peano/noise.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <mutex>
#include <random>
#include <set>
#include <string>

#include "peano/error.hpp"

namespace peano::noise {

namespace {

constexpr double kPi = std::numbers::pi;

void check_law(double alpha, double c) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("stable law: alpha must lie in (0,2)");
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("stable law: c must be positive");
}

}  // namespace

double closed_form_sigma(double alpha, double c) {
    check_law(alpha, c);
    if (alpha == 1.0) return c * kPi;
    const double s_alpha = 2.0 * c * std::tgamma(1.0 - alpha) * std::cos(kPi * alpha / 2.0) / alpha;
    return std::pow(s_alpha, 1.0 / alpha);
}

double char_exponent_quadrature(double alpha, double c, double z) {
    check_law(alpha, c);
    z = std::abs(z);
    if (z == 0.0) return 0.0;
    // 1 - cos(zy) written as 2 sin^2(zy/2) to avoid cancellation near y = 0.
    auto f = [=](double y) {
        const double zy = z * y;
        if (zy < 1e-4) return 0.5 * z * z * std::pow(y, 1.0 - alpha) * (1.0 - zy * zy / 12.0);
        const double s = std::sin(0.5 * z * y);
        return 2.0 * s * s * std::pow(y, -1.0 - alpha);
    };
    const double panel = kPi / z;
    boost::math::quadrature::tanh_sinh<double> ts;
    double sum = ts.integrate(f, 0.0, panel);
    constexpr int kPanels = 800;  // even, so cos(zY) = 1 and sin(zY) = 0 at Y
    for (int k = 1; k < kPanels; ++k) {
        sum += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, k * panel, (k + 1) * panel, 0);
    }
    // Tail: int_Y^inf y^{-1-a} dy - int_Y^inf cos(zy) y^{-1-a} dy, the latter
    // by two integrations by parts.
    const double Y = kPanels * panel;
    const double a = 1.0 + alpha;
    sum += std::pow(Y, -alpha) / alpha - a * std::pow(Y, -a - 1.0) / (z * z) +
           a * (a + 1.0) * (a + 2.0) * std::pow(Y, -a - 3.0) / std::pow(z, 4);
    return -2.0 * c * sum;
}

StableLaw::StableLaw(double alpha, double c) : alpha_(alpha), c_(c), sigma_(closed_form_sigma(alpha, c)), validated_(true) {
    // Laws are constructed per path; the quadrature check runs once per (alpha, c).
    static std::mutex mu;
    static std::set<std::pair<double, double>> checked;
    std::lock_guard lock(mu);
    if (checked.count({alpha, c})) return;
    const double closed = char_exponent(1.0);
    const double quad = char_exponent_quadrature(alpha, c, 1.0);
    if (!(std::abs(closed - quad) <= 1e-6 * std::abs(quad))) {
        throw DomainError("stable law: closed-form sigma disagrees with quadrature of psi (closed " +
                          std::to_string(closed) + ", quadrature " + std::to_string(quad) + ")");
    }
    checked.insert({alpha, c});
}

StableLaw StableLaw::with_sigma_override(double alpha, double c, double sigma) {
    check_law(alpha, c);
    if (!(sigma > 0.0)) throw DomainError("stable law: sigma must be positive");
    return StableLaw(alpha, c, sigma, false);
}

double StableLaw::char_exponent(double z) const noexcept {
    return -std::pow(sigma_ * std::abs(z), alpha_);
}

double standard_stable(double alpha, RandomStream& rng) noexcept {
    const double v = kPi * (rng.uniform() - 0.5);
    if (alpha == 1.0) return std::tan(v);
    const double w = rng.exponential();
    const double av = alpha * v;
    return std::sin(av) / std::pow(std::cos(v), 1.0 / alpha) *
           std::pow(std::cos(v - av) / w, (1.0 - alpha) / alpha);
}

double sample_stable_increment(const StableLaw& law, double dt, RandomStream& rng) {
    if (!(dt > 0.0)) throw DomainError("sample_stable_increment: dt must be positive");
    return law.sigma() * std::pow(dt, 1.0 / law.alpha()) * standard_stable(law.alpha(), rng);
}

double levy_tail_mass(const StableLaw& law, double u) {
    if (!(u > 0.0)) throw DomainError("levy_tail_mass: u must be positive");
    return 2.0 * law.c() / (law.alpha() * std::pow(u, law.alpha()));
}

double sample_large_jump(const StableLaw& law, double threshold, RandomStream& rng) {
    if (!(threshold > 0.0)) throw DomainError("sample_large_jump: threshold must be positive");
    const double mag = threshold * std::pow(rng.uniform(), -1.0 / law.alpha());
    return rng.coin() ? mag : -mag;
}

double NoiseDecomposition::gauss_ratio() const {
    return std::sqrt(gauss_var_rate) / inner_cutoff;
}

NoiseDecomposition make_truncation(const StableLaw& law, double threshold) {
    if (!(threshold > 0.0)) throw DomainError("decomposition: threshold must be positive");
    const double a = law.alpha();
    const double c = law.c();
    // Largest h with sigma(h)/h >= kMinGaussRatio; it minimises the mid-jump count.
    const double h_gauss = std::pow(std::sqrt(2.0 * c / (2.0 - a)) / kMinGaussRatio, 2.0 / a);
    const double h = std::min(h_gauss, 0.5 * threshold);
    NoiseDecomposition d{};
    d.alpha = a;
    d.c = c;
    d.epsilon = std::numeric_limits<double>::quiet_NaN();
    d.rho = std::numeric_limits<double>::quiet_NaN();
    d.threshold = threshold;
    d.lambda_eps = levy_tail_mass(law, threshold);
    d.inner_cutoff = h;
    d.mid_rate = 2.0 * c / a * (std::pow(h, -a) - std::pow(threshold, -a));
    d.gauss_var_rate = 2.0 * c * std::pow(h, 2.0 - a) / (2.0 - a);
    if (d.mid_rate > kMaxMidRate) {
        throw DomainError("decomposition: no inner cutoff satisfies both the mid-jump rate cap and the Gaussian ratio (rate " +
                          std::to_string(d.mid_rate) + ")");
    }
    return d;
}

NoiseDecomposition make_decomposition(const StableLaw& law, double epsilon, double rho) {
    if (!(epsilon > 0.0)) throw DomainError("decomposition: epsilon must be positive");
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("decomposition: rho must lie in (0,1)");
    auto d = make_truncation(law, std::exp(-rho * std::log(epsilon)));
    d.epsilon = epsilon;
    d.rho = rho;
    d.lambda_eps = 2.0 * law.c() / law.alpha() * std::exp(law.alpha() * rho * std::log(epsilon));
    return d;
}

EventClock::EventClock(const NoiseDecomposition& d, RandomStream rng) : d_(&d), rng_(rng) {
    next_.time = 0.0;
    draw();
}

void EventClock::draw() {
    if (d_->lambda_eps <= 0.0) {
        next_ = {std::numeric_limits<double>::infinity(), 0.0};
        return;
    }
    next_.time += rng_.exponential() / d_->lambda_eps;
    const double mag = d_->threshold * std::pow(rng_.uniform(), -1.0 / d_->alpha);
    next_.size = rng_.coin() ? mag : -mag;
}

JumpEvent EventClock::pop() {
    const JumpEvent e = next_;
    draw();
    return e;
}

std::vector<JumpEvent> sample_event_stream(const NoiseDecomposition& decomp, const StableLaw&, double horizon,
                                           RandomStream& rng) {
    std::vector<JumpEvent> out;
    if (!(horizon > 0.0)) return out;
    // The clock owns a substream keyed off the caller's stream, which advances
    // so that consecutive calls are independent.
    EventClock clock(decomp, RandomStream(derive_seed(rng.next_u64(), 1), 0));
    while (clock.peek().time <= horizon) out.push_back(clock.pop());
    return out;
}

double sample_small_jump_increment(const NoiseDecomposition& d, double dt, RandomStream& rng) {
    double x = std::sqrt(d.gauss_var_rate * dt) * rng.normal();
    const double mean = d.mid_rate * dt;
    if (mean > 0.0) {
        const long k = std::poisson_distribution<long>(mean)(rng);
        const double q = 1.0 - std::pow(d.inner_cutoff / d.threshold, d.alpha);
        const double inv_a = -1.0 / d.alpha;
        for (long i = 0; i < k; ++i) {
            const double mag = d.inner_cutoff * std::pow(1.0 - rng.uniform() * q, inv_a);
            x += rng.coin() ? mag : -mag;
        }
    }
    return x;
}

std::vector<double> sample_small_jump_path(const NoiseDecomposition& decomp, const StableLaw&,
                                           std::span<const double> grid, RandomStream& rng) {
    if (grid.empty() || grid.front() != 0.0) throw DomainError("sample_small_jump_path: grid must start at 0");
    std::vector<double> path(grid.size(), 0.0);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double dt = grid[i] - grid[i - 1];
        if (!(dt > 0.0)) throw DomainError("sample_small_jump_path: grid must be strictly increasing");
        path[i] = path[i - 1] + sample_small_jump_increment(decomp, dt, rng);
    }
    return path;
}

}  // namespace peano::noise
