#include "peano/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "peano/error.hpp"

namespace peano::dynamics {

namespace {

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

void check_common(const ModelParams& p) {
    if (!(p.alpha > 0.0 && p.alpha < 2.0)) throw DomainError("alpha must lie in (0,2)");
    if (!(p.beta_plus > 0.0 && p.beta_plus < 1.0)) throw DomainError("beta_plus must lie in (0,1)");
    if (!(p.beta_minus > 0.0 && p.beta_minus < 1.0)) throw DomainError("beta_minus must lie in (0,1)");
    if (!finite_positive(p.c)) throw DomainError("c must be positive");
}

}  // namespace

void ModelParams::validate() const {
    check_common(*this);
    if (!finite_positive(B_plus)) throw DomainError("B_plus must be positive");
    if (!finite_positive(B_minus)) throw DomainError("B_minus must be positive");
    if (!finite_positive(epsilon)) throw DomainError("epsilon must be positive");
    if (!(alpha > 1.0 - beta_min())) {
        throw DomainError("alpha > 1 - min(beta_plus, beta_minus) violated: alpha=" + std::to_string(alpha) +
                          ", 1 - beta_min=" + std::to_string(1.0 - beta_min()));
    }
}

void ModelParams::validate_for_simulation() const {
    check_common(*this);
    if (!(B_plus >= 0.0 && std::isfinite(B_plus))) throw DomainError("B_plus must be non-negative");
    if (!(B_minus >= 0.0 && std::isfinite(B_minus))) throw DomainError("B_minus must be non-negative");
    if (!(epsilon >= 0.0 && std::isfinite(epsilon))) throw DomainError("epsilon must be non-negative");
}

std::string_view to_string(Scheme s) noexcept {
    return s == Scheme::grid_splitting ? "grid-splitting" : "event-driven";
}

std::string_view to_string(Branch b) noexcept {
    switch (b) {
        case Branch::plus: return "plus";
        case Branch::minus: return "minus";
        default: return "unclassified";
    }
}

double drift(double x, const ModelParams& p) noexcept {
    if (x > 0.0) return p.B_plus * std::pow(x, p.beta_plus);
    if (x < 0.0) return -p.B_minus * std::pow(-x, p.beta_minus);
    return 0.0;
}

double flow(double t, double x, const ModelParams& p) {
    if (!(t >= 0.0)) throw DomainError("flow: t must be non-negative");
    if (t == 0.0 || x == 0.0) return x;
    if (x > 0.0) {
        const double q = 1.0 - p.beta_plus;
        return std::pow(p.B_plus * q * t + std::pow(x, q), 1.0 / q);
    }
    const double q = 1.0 - p.beta_minus;
    return -std::pow(p.B_minus * q * t + std::pow(-x, q), 1.0 / q);
}

double extremal_solution(double t, Side side, const ModelParams& p) {
    if (!(t >= 0.0)) throw DomainError("extremal_solution: t must be non-negative");
    const bool plus = side == Side::plus;
    const double q = 1.0 - (plus ? p.beta_plus : p.beta_minus);
    const double B = plus ? p.B_plus : p.B_minus;
    const double v = std::pow(B * q * t, 1.0 / q);
    return plus ? v : -v;
}

Branch classify_branch(double x_T, double T, const ModelParams& p, double margin) {
    if (x_T > 0.0 && x_T >= margin * extremal_solution(T, Side::plus, p)) return Branch::plus;
    if (x_T < 0.0 && -x_T >= margin * -extremal_solution(T, Side::minus, p)) return Branch::minus;
    return Branch::unclassified;
}

double GridStepper::advance(double x, double dt, RandomStream& rng, double& noise_inc) const {
    const double y = flow(dt, x, p_);
    noise_inc = p_.epsilon == 0.0 ? 0.0 : p_.epsilon * noise::sample_stable_increment(law_, dt, rng);
    return y + noise_inc;
}

PathSample integrate_grid(const ModelParams& p, double x0, double horizon, double step, RandomStream& rng) {
    p.validate_for_simulation();
    if (!(step > 0.0)) throw DomainError("integrate_grid: step must be positive");
    if (!(horizon >= step)) throw DomainError("integrate_grid: horizon must be at least one step");
    const noise::StableLaw law(p.alpha, p.c);
    const GridStepper stepper(p, law);
    const double steps = std::ceil(horizon / step * (1.0 - 1e-12));
    if (!(steps <= kMaxGridSteps)) throw DomainError("integrate_grid: more than 1e8 steps requested; increase step");
    const auto n = static_cast<long>(steps);
    PathSample out;
    out.scheme = Scheme::grid_splitting;
    out.times.reserve(n + 1);
    out.values.reserve(n + 1);
    out.noise.reserve(n + 1);
    out.times.push_back(0.0);
    out.values.push_back(x0);
    out.noise.push_back(0.0);
    double x = x0;
    double cum = 0.0;
    for (long k = 1; k <= n; ++k) {
        const double t_prev = (k - 1) * step;
        const double t = k == n ? horizon : k * step;
        double inc = 0.0;
        x = stepper.advance(x, t - t_prev, rng, inc);
        cum += inc;
        if (!std::isfinite(x)) throw NumericalFailure("integrate_grid: non-finite state", t);
        out.times.push_back(t);
        out.values.push_back(x);
        out.noise.push_back(cum);
    }
    return out;
}

double default_fine_step(const noise::NoiseDecomposition& d, double horizon) noexcept {
    const double mean_wait = d.lambda_eps > 0.0 ? 1.0 / d.lambda_eps : horizon;
    return std::min(mean_wait, horizon) / 64.0;
}

EventStepper::EventStepper(const ModelParams& p, const noise::NoiseDecomposition& d, double x0, double horizon,
                           RandomStream rng, double fine_step)
    : p_(p),
      d_(&d),
      horizon_(horizon),
      dt_(fine_step > 0.0 ? fine_step : default_fine_step(d, horizon)),
      small_(rng.split(kSmallNoiseTag)),
      clock_(d, rng.split(kEventStreamTag)),
      x_(x0) {
    if (!(horizon > 0.0)) throw DomainError("integrate_event: horizon must be positive");
}

bool EventStepper::step() {
    double next_grid = (k_ + 1) * dt_;
    if (next_grid >= horizon_ * (1.0 - 1e-12)) next_grid = horizon_;
    const double T = clock_.peek().time;
    const bool jump = T <= next_grid;
    const double target = jump ? T : next_grid;
    const double len = target - t_;
    if (len > 0.0) {
        x_ = flow(len, x_, p_);
        if (p_.epsilon != 0.0) {
            const double inc = p_.epsilon * noise::sample_small_jump_increment(*d_, len, small_);
            x_ += inc;
            noise_ += inc;
        }
    }
    if (jump) {
        last_ = clock_.pop();
        const double inc = p_.epsilon * last_.size;
        x_ += inc;
        noise_ += inc;
        if (T == next_grid) ++k_;
    } else {
        ++k_;
    }
    t_ = target;
    if (!std::isfinite(x_)) throw NumericalFailure("integrate_event: non-finite state", t_);
    return jump;
}

PathSample integrate_event(const ModelParams& p, const noise::NoiseDecomposition& decomp, double x0, double horizon,
                           RandomStream& rng) {
    p.validate_for_simulation();
    EventStepper st(p, decomp, x0, horizon, rng);
    PathSample out;
    out.scheme = Scheme::event_driven;
    out.times.push_back(0.0);
    out.values.push_back(x0);
    out.noise.push_back(0.0);
    while (!st.done()) {
        if (st.step()) out.events.push_back(st.last_event());
        out.times.push_back(st.time());
        out.values.push_back(st.state());
        out.noise.push_back(st.noise());
    }
    return out;
}

PathSample comparison_process(const ModelParams& p, std::span<const noise::JumpEvent> events, double gamma,
                              double delta, double x0, std::span<const double> grid) {
    if (!(gamma > 0.0)) throw DomainError("comparison_process: gamma must be positive");
    if (!(delta >= 0.0)) throw DomainError("comparison_process: delta must be non-negative");
    PathSample out;
    out.scheme = Scheme::event_driven;
    out.times.assign(grid.begin(), grid.end());
    out.values.reserve(grid.size());
    double z = x0;  // value at the start s of the current segment
    double s = 0.0;
    bool at_jump = false;
    std::size_t next = 0;
    for (double t : grid) {
        while (next < events.size() && events[next].time <= t) {
            const auto& e = events[next++];
            z = std::min(flow(e.time - s, z - delta, p) - delta + p.epsilon * e.size, gamma);
            s = e.time;
            at_jump = true;
            out.events.push_back(e);
        }
        if (at_jump && t == s) {
            out.values.push_back(z);
        } else {
            out.values.push_back(std::min(flow(t - s, z - delta, p) - delta, gamma));
        }
    }
    return out;
}

}  // namespace peano::dynamics
