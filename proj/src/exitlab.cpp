#include "peano/exitlab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "peano/error.hpp"

namespace peano::exitlab {

namespace {

using dynamics::EventStepper;
using dynamics::GridStepper;

std::string path_context(double eps, std::size_t i) {
    std::ostringstream os;
    os << "epsilon=" << eps << ", path=" << i;
    return os.str();
}

// Runs task(i) for every path, tagging numerical failures with the path index.
template <class F>
void run_paths(const Executor& exec, long N, double eps, F&& task) {
    exec.for_each(static_cast<std::size_t>(N), [&](std::size_t i) {
        try {
            task(i);
        } catch (const NumericalFailure& e) {
            throw NumericalFailure(e, path_context(eps, i));
        }
    });
}

void check_paths(long N) {
    if (N < 1) throw DomainError("number of paths must be positive");
}

}  // namespace

void SerialExecutor::for_each(std::size_t n, const std::function<void(std::size_t)>& task) const {
    for (std::size_t i = 0; i < n; ++i) task(i);
}

const Executor& serial_executor() {
    static const SerialExecutor exec;
    return exec;
}

std::string_view to_string(ExitSide s) noexcept {
    switch (s) {
        case ExitSide::below: return "below";
        case ExitSide::above: return "above";
        default: return "censored";
    }
}

double weibull_tail(double z, double x, double beta, double B, double lambda) {
    if (!(x >= 0.0)) throw DomainError("weibull_tail: x must be non-negative");
    if (!(z >= x)) throw DomainError("weibull_tail: z must be >= x");
    if (!(lambda > 0.0)) throw DomainError("weibull_tail: lambda must be positive");
    const double q = 1.0 - beta;
    return std::exp(-(std::pow(z, q) - std::pow(x, q)) * lambda / (B * q));
}

HalflineResult estimate_halfline_exit(const ModelParams& p, const scaling::ScalingBundle& bundle, double x0, double m,
                                      long N, const PathStreams& streams, const HalflineOptions& opt,
                                      const Executor& exec) {
    if (N < 100) throw DomainError("estimate_halfline_exit: N must be at least 100");
    if (!(m > 0.0)) throw DomainError("estimate_halfline_exit: horizon must be positive");
    HalflineResult res;
    const double delta = bundle.delta_eps.value();
    if (opt.barrier) {
        res.barrier = *opt.barrier;
    } else {
        res.barrier = std::min(delta, opt.clamp);
        res.clamped = delta > opt.clamp;
    }
    if (!(res.barrier > 0.0)) throw DomainError("estimate_halfline_exit: barrier must be positive");
    if (!(x0 >= 3.0 * res.barrier * (1.0 - 1e-12))) throw DomainError("estimate_halfline_exit: x0 must be at least 3 * barrier");
    if (opt.upper && !(*opt.upper > x0)) throw DomainError("estimate_halfline_exit: upper barrier must exceed x0");

    const noise::StableLaw law(p.alpha, p.c);
    res.decomposition = noise::make_decomposition(law, bundle.params.epsilon, bundle.rho);
    const auto& d = res.decomposition;
    const double upper = opt.upper.value_or(std::numeric_limits<double>::infinity());

    std::vector<ExitRecord> recs(static_cast<std::size_t>(N));
    run_paths(exec, N, p.epsilon, [&](std::size_t i) {
        EventStepper st(p, d, x0, m, streams.for_path(i), opt.fine_step);
        ExitRecord r{m, ExitSide::censored, x0, i};
        while (!st.done()) {
            st.step();
            const double x = st.state();
            if (x <= res.barrier || x >= upper) {
                r = {st.time(), x <= res.barrier ? ExitSide::below : ExitSide::above, x, i};
                break;
            }
            r.exit_value = x;
        }
        recs[i] = r;
    });
    long below = 0, above = 0;
    for (const auto& r : recs) {
        below += r.exit_side == ExitSide::below;
        above += r.exit_side == ExitSide::above;
    }
    res.p_exit = stats::proportion(below, N);
    res.p_above = stats::proportion(above, N);
    if (opt.keep_records) res.records = std::move(recs);
    return res;
}

BoxExitResult estimate_box_exit(const ModelParams& p, const noise::NoiseDecomposition& decomp, double Theta_minus,
                                double Theta_plus, double t_hat, long N, const PathStreams& streams,
                                const Executor& exec) {
    check_paths(N);
    if (!(Theta_minus > 0.0 && Theta_plus > 0.0)) throw DomainError("estimate_box_exit: boxes must be positive");
    if (!(t_hat > 0.0)) throw DomainError("estimate_box_exit: t_hat must be positive");
    std::vector<ExitRecord> recs(static_cast<std::size_t>(N));
    run_paths(exec, N, p.epsilon, [&](std::size_t i) {
        EventStepper st(p, decomp, 0.0, t_hat, streams.for_path(i));
        ExitRecord r{t_hat, ExitSide::censored, 0.0, i};
        while (!st.done()) {
            st.step();
            const double x = st.state();
            if (x >= Theta_plus || x <= -Theta_minus) {
                r = {st.time(), x >= Theta_plus ? ExitSide::above : ExitSide::below, x, i};
                break;
            }
            r.exit_value = x;
        }
        recs[i] = r;
    });
    long above = 0, below = 0, cens = 0;
    std::vector<double> times;
    for (const auto& r : recs) {
        above += r.exit_side == ExitSide::above;
        below += r.exit_side == ExitSide::below;
        cens += r.exit_side == ExitSide::censored;
        if (r.exit_side != ExitSide::censored) times.push_back(r.exit_time);
    }
    std::sort(times.begin(), times.end());
    BoxExitResult res;
    res.p_above = stats::proportion(above, N);
    res.p_below = stats::proportion(below, N);
    res.p_censored = stats::proportion(cens, N);
    for (double q : {0.1, 0.5, 0.9}) res.exit_time_quantiles.push_back(stats::quantile_sorted(times, q));
    return res;
}

double optional_stopping_bound(double r_plus, double r_minus, double eps_jump) {
    if (!(r_plus > 0.0)) throw DomainError("optional_stopping_bound: r_plus must be positive");
    if (!(r_minus >= 0.0 && eps_jump >= 0.0)) throw DomainError("optional_stopping_bound: arguments must be >= 0");
    const double den = r_plus + r_minus + eps_jump;
    if (!(den > 0.0)) throw DomainError("optional_stopping_bound: zero denominator");
    return (r_minus + eps_jump) / den;
}

EstimateWithCI estimate_martingale_exit(double alpha, double r_plus, double r_minus, double dt, long N,
                                        const PathStreams& streams, const Executor& exec) {
    check_paths(N);
    if (!(r_plus > 0.0 && r_minus > 0.0)) throw DomainError("estimate_martingale_exit: radii must be positive");
    if (!(dt > 0.0)) throw DomainError("estimate_martingale_exit: dt must be positive");
    const noise::StableLaw law(alpha);
    const auto d = noise::make_truncation(law, 1.0);
    constexpr long kMaxSteps = 100'000'000;
    std::vector<char> up(static_cast<std::size_t>(N), 0);
    run_paths(exec, N, 0.0, [&](std::size_t i) {
        RandomStream rng = streams.for_path(i);
        double x = 0.0;
        for (long k = 0; k < kMaxSteps; ++k) {
            x += noise::sample_small_jump_increment(d, dt, rng);
            if (x >= r_plus) {
                up[i] = 1;
                return;
            }
            if (x <= -r_minus) return;
        }
    });
    long n_up = 0;
    for (char u : up) n_up += u;
    return stats::proportion(n_up, N);
}

EstimateWithCI estimate_ramp_escape(const ModelParams& p, const noise::NoiseDecomposition& decomp, double Psi0,
                                    double Psi1, double s, long N, const PathStreams& streams, const Executor& exec) {
    check_paths(N);
    if (!(Psi0 > 0.0 && Psi0 < Psi1)) throw DomainError("estimate_ramp_escape: need 0 < Psi0 < Psi1");
    if (!(s > 0.0)) throw DomainError("estimate_ramp_escape: s must be positive");
    std::vector<char> late(static_cast<std::size_t>(N), 1);
    run_paths(exec, N, p.epsilon, [&](std::size_t i) {
        EventStepper st(p, decomp, Psi0, s, streams.for_path(i));
        while (!st.done()) {
            st.step();
            if (st.state() >= Psi1) {
                late[i] = 0;
                return;
            }
        }
    });
    long n_late = 0;
    for (char l : late) n_late += l;
    return stats::proportion(n_late, N);
}

double selection_step(const ModelParams& p, double horizon, double steps_per_t, double min_steps) {
    const double t_eps = scaling::transition_box(p, 1.0).t_eps.value();
    return std::min(horizon / min_steps, t_eps / steps_per_t);
}

SelectionResult estimate_selection(const ModelParams& p, double horizon, double step, long N,
                                   const PathStreams& streams, const Executor& exec) {
    if (N < 100) throw DomainError("estimate_selection: N must be at least 100");
    if (!(step > 0.0 && horizon >= step)) throw DomainError("estimate_selection: need 0 < step <= horizon");
    p.validate_for_simulation();
    const noise::StableLaw law(p.alpha, p.c);
    const GridStepper stepper(p, law);
    const auto n = static_cast<long>(std::ceil(horizon / step * (1.0 - 1e-12)));
    std::vector<dynamics::Branch> branch(static_cast<std::size_t>(N));
    run_paths(exec, N, p.epsilon, [&](std::size_t i) {
        RandomStream rng = streams.for_path(i);
        double x = 0.0, inc = 0.0;
        for (long k = 1; k <= n; ++k) {
            const double dt = k == n ? horizon - (n - 1) * step : step;
            x = stepper.advance(x, dt, rng, inc);
            if (!std::isfinite(x)) throw NumericalFailure("estimate_selection: non-finite state", k * step);
        }
        branch[i] = dynamics::classify_branch(x, horizon, p);
    });
    SelectionResult res;
    res.step = step;
    for (auto b : branch) {
        res.n_plus += b == dynamics::Branch::plus;
        res.n_minus += b == dynamics::Branch::minus;
        res.n_unclassified += b == dynamics::Branch::unclassified;
    }
    res.p_plus = stats::proportion(res.n_plus, N);
    res.p_minus = stats::proportion(res.n_minus, N);
    res.p_unclassified = stats::proportion(res.n_unclassified, N);
    return res;
}

double tube_radius(double delta, double Delta, double beta) {
    return std::max(std::pow(delta, 0.5 * beta * beta), std::pow(Delta, 1.0 - beta));
}

EstimateWithCI tube_deviation(const ModelParams& p, const noise::NoiseDecomposition& decomp, double x0,
                              double horizon, long N, const TubeOptions& opt, const PathStreams& streams,
                              const Executor& exec) {
    check_paths(N);
    if (!(opt.delta > 0.0 && opt.Delta > 0.0)) throw DomainError("tube_deviation: delta and Delta must be positive");
    if (!(x0 >= 3.0 * opt.delta * (1.0 - 1e-12) && x0 <= opt.Delta)) throw DomainError("tube_deviation: x0 must lie in [3 delta, Delta]");
    const double radius = opt.radius.value_or(tube_radius(opt.delta, opt.Delta, p.beta_plus));
    std::vector<char> out(static_cast<std::size_t>(N), 0);
    run_paths(exec, N, p.epsilon, [&](std::size_t i) {
        EventStepper st(p, decomp, x0, horizon, streams.for_path(i));
        if (std::abs(x0) > radius) {
            out[i] = 1;
            return;
        }
        while (!st.done()) {
            st.step();
            const double dev = std::abs(st.state() - dynamics::extremal_solution(st.time(), dynamics::Side::plus, p));
            if (dev > radius) {
                out[i] = 1;
                return;
            }
        }
    });
    long hits = 0;
    for (char o : out) hits += o;
    return stats::proportion(hits, N);
}

std::vector<double> v_component(const dynamics::PathSample& path, std::span<const double> noise_path) {
    if (noise_path.size() != path.values.size()) throw DomainError("v_component: path and noise grid differ");
    std::vector<double> v(path.values.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = path.values[i] - noise_path[i];
    return v;
}

EstimateWithCI comparison_coverage(const ModelParams& p, const noise::NoiseDecomposition& decomp, double gamma,
                                   double delta, double x0, double horizon, long N, const PathStreams& streams,
                                   const Executor& exec) {
    check_paths(N);
    std::vector<double> frac(static_cast<std::size_t>(N), 0.0);
    run_paths(exec, N, p.epsilon, [&](std::size_t i) {
        RandomStream rng = streams.for_path(i);
        const auto X = dynamics::integrate_event(p, decomp, x0, horizon, rng);
        const auto Z = dynamics::comparison_process(p, X.events, gamma, delta, x0, X.times);
        long ok = 0;
        for (std::size_t k = 0; k < X.values.size(); ++k) ok += X.values[k] >= Z.values[k];
        frac[i] = static_cast<double>(ok) / static_cast<double>(X.values.size());
    });
    return stats::mean_estimate(frac);
}

}  // namespace peano::exitlab
