#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "peano/dynamics.hpp"
#include "peano/noise.hpp"
#include "peano/scaling.hpp"
#include "peano/stats.hpp"

namespace peano::exitlab {

using dynamics::ModelParams;
using stats::EstimateWithCI;

// Fan-out over path indices. Estimators write per-path results into slots
// indexed by path, then reduce in index order, so the result does not depend
// on the executor.
class Executor {
public:
    virtual ~Executor() = default;
    virtual void for_each(std::size_t n, const std::function<void(std::size_t)>& task) const = 0;
};

class SerialExecutor final : public Executor {
public:
    void for_each(std::size_t n, const std::function<void(std::size_t)>& task) const override;
};

const Executor& serial_executor();

// Path i of an experiment uses RandomStream(seed, i).
struct PathStreams {
    std::uint64_t seed = 0;
    RandomStream for_path(std::size_t i) const { return RandomStream(seed, i); }
};

enum class ExitSide { below, above, censored };
std::string_view to_string(ExitSide s) noexcept;

struct ExitRecord {
    double exit_time = 0.0;
    ExitSide exit_side = ExitSide::censored;
    double exit_value = 0.0;
    std::uint64_t path_seed = 0;  // stream index of the path
};

// exp(-(z^{1-beta} - x^{1-beta}) lambda / (B(1-beta)))
double weibull_tail(double z, double x, double beta, double B, double lambda);

struct HalflineOptions {
    std::optional<double> barrier;  // explicit lower barrier; default min(delta_eps, clamp)
    double clamp = 0.1;
    std::optional<double> upper;    // optional second barrier (two-sided exit)
    double fine_step = 0.0;         // 0: decomposition default
    bool keep_records = false;
};

struct HalflineResult {
    EstimateWithCI p_exit;   // P(tau <= m) through the lower barrier
    EstimateWithCI p_above;  // through the upper barrier, if any
    double barrier = 0.0;
    bool clamped = false;
    noise::NoiseDecomposition decomposition{};
    std::vector<ExitRecord> records;
};

HalflineResult estimate_halfline_exit(const ModelParams& p, const scaling::ScalingBundle& bundle, double x0, double m,
                                      long N, const PathStreams& streams, const HalflineOptions& opt = {},
                                      const Executor& exec = serial_executor());

struct BoxExitResult {
    EstimateWithCI p_above;
    EstimateWithCI p_below;
    EstimateWithCI p_censored;
    std::vector<double> exit_time_quantiles;  // at q = 0.1, 0.5, 0.9 over exited paths
};

BoxExitResult estimate_box_exit(const ModelParams& p, const noise::NoiseDecomposition& decomp, double Theta_minus,
                                double Theta_plus, double t_hat, long N, const PathStreams& streams,
                                const Executor& exec = serial_executor());

double optional_stopping_bound(double r_plus, double r_minus, double eps_jump);

// Exit of the compensated process with jumps bounded by 1 (scaled units) from
// (-r_minus, r_plus), started at 0. Returns P(upper side first).
EstimateWithCI estimate_martingale_exit(double alpha, double r_plus, double r_minus, double dt, long N,
                                        const PathStreams& streams, const Executor& exec = serial_executor());

EstimateWithCI estimate_ramp_escape(const ModelParams& p, const noise::NoiseDecomposition& decomp, double Psi0,
                                    double Psi1, double s, long N, const PathStreams& streams,
                                    const Executor& exec = serial_executor());

struct SelectionResult {
    EstimateWithCI p_plus;
    EstimateWithCI p_minus;
    EstimateWithCI p_unclassified;
    long n_plus = 0, n_minus = 0, n_unclassified = 0;
    double step = 0.0;
};

// Natural grid step for selection runs: min(horizon/min_steps, t_eps/steps_per_t)
// with t_eps the transition time at vartheta = 1.
double selection_step(const ModelParams& p, double horizon, double steps_per_t = 50.0, double min_steps = 200.0);

SelectionResult estimate_selection(const ModelParams& p, double horizon, double step, long N,
                                   const PathStreams& streams, const Executor& exec = serial_executor());

struct TubeOptions {
    double delta = 0.0;
    double Delta = 0.0;
    std::optional<double> radius;  // default max(delta^{beta^2/2}, Delta^{1-beta})
};

double tube_radius(double delta, double Delta, double beta);

EstimateWithCI tube_deviation(const ModelParams& p, const noise::NoiseDecomposition& decomp, double x0,
                              double horizon, long N, const TubeOptions& opt, const PathStreams& streams,
                              const Executor& exec = serial_executor());

std::vector<double> v_component(const dynamics::PathSample& path, std::span<const double> noise_path);

// Mean over paths of the fraction of grid points with X >= Z, where Z is the
// comparison process built from the same large-jump stream.
EstimateWithCI comparison_coverage(const ModelParams& p, const noise::NoiseDecomposition& decomp, double gamma,
                                   double delta, double x0, double horizon, long N, const PathStreams& streams,
                                   const Executor& exec = serial_executor());

}  // namespace peano::exitlab
