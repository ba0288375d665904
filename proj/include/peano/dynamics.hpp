#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "peano/noise.hpp"
#include "peano/random.hpp"

namespace peano::dynamics {

struct ModelParams {
    double alpha = 1.5;
    double beta_plus = 0.5;
    double beta_minus = 0.5;
    double B_plus = 1.0;
    double B_minus = 1.0;
    double epsilon = 1e-3;
    double c = 1.0;

    double beta_min() const noexcept { return beta_plus < beta_minus ? beta_plus : beta_minus; }
    double beta_max() const noexcept { return beta_plus < beta_minus ? beta_minus : beta_plus; }

    // Standing assumptions of the selection theorem: positive weights,
    // exponents in (0,1), alpha > 1 - min(beta), epsilon > 0.
    void validate() const;
    // Looser check for simulation: B = 0 (pure noise) and epsilon = 0
    // (deterministic flow) are allowed.
    void validate_for_simulation() const;
};

enum class Side { plus, minus };
enum class Scheme { grid_splitting, event_driven };
enum class Branch { plus, minus, unclassified };

std::string_view to_string(Scheme s) noexcept;
std::string_view to_string(Branch b) noexcept;

struct PathSample {
    std::vector<double> times;
    std::vector<double> values;
    // Cumulative eps*L_t on the same grid (small plus large jumps).
    std::vector<double> noise;
    std::vector<noise::JumpEvent> events;
    Scheme scheme = Scheme::grid_splitting;
};

double drift(double x, const ModelParams& p) noexcept;
double flow(double t, double x, const ModelParams& p);
double extremal_solution(double t, Side side, const ModelParams& p);

// Terminal-state rule: "+" if X_T > 0 and |X_T| >= margin |x+(T)|.
Branch classify_branch(double x_T, double T, const ModelParams& p, double margin = 0.5);

// Lie splitting: exact drift flow over dt, then eps times a stable increment.
class GridStepper {
public:
    GridStepper(const ModelParams& p, const noise::StableLaw& law) : p_(p), law_(law) {}
    // Returns the new state; `noise_inc` receives eps*dL.
    double advance(double x, double dt, RandomStream& rng, double& noise_inc) const;

private:
    ModelParams p_;
    noise::StableLaw law_;
};

// Event-driven cursor. Between large-jump arrivals the state follows the
// small-jump SDE on a fine grid of step min(1/lambda, horizon)/64; arrivals
// are inserted as extra grid points where the jump eps*W is applied.
class EventStepper {
public:
    EventStepper(const ModelParams& p, const noise::NoiseDecomposition& d, double x0, double horizon,
                 RandomStream rng, double fine_step = 0.0);

    bool done() const noexcept { return t_ >= horizon_; }
    // Advance to the next grid point or arrival time. Returns true if a large
    // jump was applied at the new time.
    bool step();

    double time() const noexcept { return t_; }
    double state() const noexcept { return x_; }
    double noise() const noexcept { return noise_; }
    double fine_step() const noexcept { return dt_; }
    const noise::JumpEvent& last_event() const noexcept { return last_; }

private:
    ModelParams p_;
    const noise::NoiseDecomposition* d_;
    double horizon_;
    double dt_;
    RandomStream small_;
    noise::EventClock clock_;
    double t_ = 0.0;
    double x_;
    double noise_ = 0.0;
    long k_ = 0;
    noise::JumpEvent last_{};
};

double default_fine_step(const noise::NoiseDecomposition& d, double horizon) noexcept;

inline constexpr double kMaxGridSteps = 1e8;

PathSample integrate_grid(const ModelParams& p, double x0, double horizon, double step, RandomStream& rng);

PathSample integrate_event(const ModelParams& p, const noise::NoiseDecomposition& decomp, double x0, double horizon,
                           RandomStream& rng);

// Child streams used by integrate_event; exposed so a coupled process can
// replay the same large-jump stream.
inline constexpr std::uint64_t kEventStreamTag = 1;
inline constexpr std::uint64_t kSmallNoiseTag = 2;

// Piecewise-deterministic lower comparison process Z, evaluated on `grid`.
PathSample comparison_process(const ModelParams& p, std::span<const noise::JumpEvent> events, double gamma,
                              double delta, double x0, std::span<const double> grid);

}  // namespace peano::dynamics
