#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "peano/error.hpp"
#include "peano/harness.hpp"
#include "peano/scaling.hpp"

namespace peano::harness {

using nlohmann::json;

void ThreadExecutor::for_each(std::size_t n, const std::function<void(std::size_t)>& task) const {
    const auto w = static_cast<std::size_t>(workers_);
    if (w <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::exception_ptr first_error;
    std::size_t first_index = n;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) return;
            try {
                task(i);
            } catch (...) {
                std::lock_guard lock(mu);
                // Report the lowest failing index, which is schedule-independent.
                if (i < first_index) {
                    first_index = i;
                    first_error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(std::min(w, n));
    for (std::size_t k = 0; k < std::min(w, n); ++k) pool.emplace_back(worker);
    pool.clear();
    if (first_error) std::rethrow_exception(first_error);
}

namespace {

std::string fmt_num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

std::optional<double> opt_number(const json& o, const char* key) {
    if (!o.contains(key) || o.at(key).is_null()) return std::nullopt;
    if (!o.at(key).is_number()) throw ConfigError(std::string("options.") + key, "expected a number or null");
    return o.at(key).get<double>();
}

double number(const json& o, const char* key) {
    const auto v = opt_number(o, key);
    if (!v) throw ConfigError(std::string("options.") + key, "required");
    return *v;
}

ResultRow value_row(const ExperimentConfig& cfg, double eps, std::string quantity, double value,
                    std::vector<std::string> flags = {}) {
    ResultRow r;
    r.experiment = to_string(cfg.experiment);
    r.params = cfg.params;
    r.params.epsilon = eps;
    r.epsilon = eps;
    r.n_paths = cfg.n_paths;
    r.horizon = cfg.horizon;
    r.quantity = std::move(quantity);
    r.point = value;
    r.master_seed = cfg.master_seed;
    r.flags = std::move(flags);
    return r;
}

std::string kv(const std::string& k, double v) { return k + "=" + fmt_num(v); }

std::vector<std::string> decomposition_flags(const noise::NoiseDecomposition& d) {
    return {kv("threshold", d.threshold), kv("lambda_eps", d.lambda_eps), kv("inner_cutoff", d.inner_cutoff),
            kv("mid_rate", d.mid_rate), kv("gauss_ratio", d.gauss_ratio())};
}

scaling::Overrides overrides_from(const json& o) {
    scaling::Overrides ov;
    if (o.contains("rho")) ov.rho = opt_number(o, "rho");
    if (o.contains("Gamma")) ov.Gamma = opt_number(o, "Gamma");
    if (o.contains("vartheta")) ov.vartheta = opt_number(o, "vartheta");
    return ov;
}

json log_value_json(const scaling::LogValue& v) { return {{"log", v.log}, {"sign", v.sign}, {"value", v.value()}}; }

json bundle_json(const scaling::ScalingBundle& b) {
    auto side = [](const scaling::SideScaling& s) {
        return json{{"beta", s.beta},
                    {"B", s.B},
                    {"Gamma", s.Gamma},
                    {"Gamma_paper", std::isfinite(s.Gamma_paper) ? json(s.Gamma_paper) : json(nullptr)},
                    {"Gamma_fallback", s.Gamma_fallback},
                    {"rho0", s.rho0},
                    {"rho1", s.rho1},
                    {"rho", s.rho},
                    {"lambda_eps", log_value_json(s.lambda_eps)},
                    {"delta_eps", log_value_json(s.delta_eps)},
                    {"r_eps", log_value_json(s.r_eps)},
                    {"n_eps", log_value_json(s.n_eps)},
                    {"gamma_eps", log_value_json(s.gamma_eps)},
                    {"gamma_eps_asymptotic", s.gamma_eps_asymptotic}};
    };
    return json{{"epsilon", b.params.epsilon},
                {"plus", side(b.plus)},
                {"minus", side(b.minus)},
                {"theta_star", b.theta_star},
                {"Theta_plus", log_value_json(b.Theta_plus)},
                {"Theta_minus", log_value_json(b.Theta_minus)},
                {"t_eps", log_value_json(b.t_eps)},
                {"t_eps_exponent", b.box.eps_exponent},
                {"kappa", b.kappa},
                {"g", b.g},
                {"pi_gamma", b.pi_gamma},
                {"pi1", b.pi1},
                {"Psi0", log_value_json(b.Psi0)},
                {"Psi1", log_value_json(b.Psi1)},
                {"s_eps", log_value_json(b.s_eps)},
                {"Theta_ratio_computed", b.Theta_ratio_computed},
                {"Theta_ratio_displayed",
                 std::isfinite(b.Theta_ratio_displayed) ? json(b.Theta_ratio_displayed) : json(nullptr)},
                {"flags", b.flags}};
}

json audit_json(const scaling::AuditReport& a) {
    json arr = json::array();
    for (const auto& f : a.flags) {
        arr.push_back({{"name", f.name},
                       {"value", f.value},
                       {"pass", f.pass},
                       {"applicable", f.applicable},
                       {"gating", f.gating},
                       {"note", f.note}});
    }
    return {{"all_pass", a.all_pass()}, {"flags", arr}};
}

void run_scaling_report(ExperimentConfig& cfg, RunResult& out) {
    const auto ov = overrides_from(cfg.options);
    json per_eps = json::array();
    for (double eps : cfg.eps_grid) {
        auto p = cfg.params;
        p.epsilon = eps;
        const auto b = scaling::scaling_bundle(p, ov);
        const auto audit = scaling::exponent_audit(p, b.theta_star, ov);
        const std::vector<double> grid{eps};
        const auto s = scaling::bound_terms(p, b, grid).front();

        auto add = [&](const std::string& q, double v, std::vector<std::string> flags = {}) {
            out.rows.push_back(value_row(cfg, eps, q, v, std::move(flags)));
        };
        auto add_log = [&](const std::string& q, const scaling::LogValue& v, std::vector<std::string> flags = {}) {
            add(q, v.value(), flags);
            add("ln_" + q, v.log, std::move(flags));
        };
        add("rho", b.rho);
        add("rho0", b.rho0);
        add("rho1", b.rho1);
        add("Gamma", b.Gamma, b.plus.Gamma_fallback ? std::vector<std::string>{"Gamma_fallback"}
                                                    : std::vector<std::string>{});
        add_log("lambda_eps", b.lambda_eps);
        add_log("delta_eps", b.delta_eps);
        add_log("r_eps", b.r_eps);
        add_log("n_eps", b.n_eps);
        add_log("gamma_eps", b.gamma_eps, b.plus.gamma_eps_asymptotic ? std::vector<std::string>{"asymptotic_order"}
                                                                      : std::vector<std::string>{});
        add("theta_star", b.theta_star);
        add_log("Theta_plus", b.Theta_plus);
        add_log("Theta_minus", b.Theta_minus);
        add_log("t_eps", b.t_eps);
        add("kappa", b.kappa);
        add("g", b.g);
        add("pi1", b.pi1);
        add_log("Psi0", b.Psi0);
        add_log("Psi1", b.Psi1);
        add_log("s_eps", b.s_eps);
        add_log("S1", s.S1);
        add_log("S2", s.S2);
        add_log("S3", s.S3);
        add_log("S4", s.S4);
        add_log("S5", s.S5);
        add_log("S", s.S);
        for (const auto& f : audit.flags) {
            std::vector<std::string> flags{!f.applicable ? "n/a" : (f.pass ? "pass" : "fail")};
            if (!f.gating) flags.push_back("informational");
            add("audit." + f.name, f.value, std::move(flags));
        }
        for (auto& r : out.rows) {
            if (r.epsilon == eps && r.flags.empty()) r.flags = b.flags;
        }
        per_eps.push_back({{"bundle", bundle_json(b)}, {"audit", audit_json(audit)}});
    }
    out.extra["scaling"] = per_eps;
}

}  // namespace

ResultRow estimate_row(const ExperimentConfig& cfg, double eps, const std::string& quantity,
                       const stats::EstimateWithCI& e) {
    auto r = value_row(cfg, eps, quantity, e.point);
    r.std_error = e.std_error;
    r.ci_lo = e.ci_lo;
    r.ci_hi = e.ci_hi;
    r.n_paths = e.n;
    return r;
}

RunResult execute(ExperimentConfig& cfg) {
    if (cfg.experiment == Experiment::validate_noise) return validate_noise(cfg);
    RunResult out;
    if (cfg.experiment == Experiment::scaling_report) {
        run_scaling_report(cfg, out);
        return out;
    }
    const ThreadExecutor exec(resolve_workers(cfg));
    const auto& o = cfg.options;
    for (double eps : cfg.eps_grid) {
        const auto t0 = std::chrono::steady_clock::now();
        const std::size_t first_row = out.rows.size();
        auto p = cfg.params;
        p.epsilon = eps;
        const exitlab::PathStreams streams{derive_seed(cfg.master_seed, std::bit_cast<std::uint64_t>(eps))};
        const auto ov = overrides_from(o);

        switch (cfg.experiment) {
            case Experiment::simulate: {
                const double step = opt_number(o, "step").value_or(exitlab::selection_step(
                    p, cfg.horizon, number(o, "steps_per_transition_time"), number(o, "min_steps")));
                const double x0 = number(o, "x0");
                const std::string scheme = o.at("scheme").get<std::string>();
                if (scheme != "grid" && scheme != "event") throw ConfigError("options.scheme", "expected grid or event");
                std::optional<noise::NoiseDecomposition> d;
                if (scheme == "event") {
                    const auto b = scaling::scaling_bundle(p, ov);
                    d = noise::make_decomposition(noise::StableLaw(p.alpha, p.c), eps, b.rho);
                }
                std::vector<double> terminal(static_cast<std::size_t>(cfg.n_paths));
                exec.for_each(terminal.size(), [&](std::size_t i) {
                    RandomStream rng = streams.for_path(i);
                    try {
                        const auto path = d ? dynamics::integrate_event(p, *d, x0, cfg.horizon, rng)
                                            : dynamics::integrate_grid(p, x0, cfg.horizon, step, rng);
                        terminal[i] = path.values.back();
                    } catch (const NumericalFailure& e) {
                        throw NumericalFailure(e, "epsilon=" + fmt_num(eps) + ", path=" + std::to_string(i));
                    }
                });
                long positive = 0;
                for (double x : terminal) positive += x > 0.0;
                std::vector<std::string> flags{"scheme=" + scheme};
                if (!d) flags.push_back(kv("step", step));
                auto r1 = estimate_row(cfg, eps, "terminal_mean", stats::mean_estimate(terminal));
                auto r2 = estimate_row(cfg, eps, "terminal_positive_fraction", stats::proportion(positive, cfg.n_paths));
                r1.flags = r2.flags = flags;
                out.rows.push_back(r1);
                out.rows.push_back(r2);
                break;
            }
            case Experiment::select_prob: {
                const double step =
                    exitlab::selection_step(p, cfg.horizon, number(o, "steps_per_transition_time"), number(o, "min_steps"));
                const auto s = exitlab::estimate_selection(p, cfg.horizon, step, cfg.n_paths, streams, exec);
                const std::vector<std::string> flags{kv("step", step), "margin=0.5"};
                for (auto [name, e] : {std::pair{"p_plus", s.p_plus}, std::pair{"p_minus", s.p_minus},
                                       std::pair{"p_unclassified", s.p_unclassified}}) {
                    auto r = estimate_row(cfg, eps, name, e);
                    r.flags = flags;
                    out.rows.push_back(r);
                }
                break;
            }
            case Experiment::exit_time: {
                const auto b = scaling::scaling_bundle(p, ov);
                exitlab::HalflineOptions hopt;
                hopt.barrier = opt_number(o, "barrier");
                hopt.clamp = number(o, "clamp");
                const double barrier = hopt.barrier.value_or(std::min(b.delta_eps.value(), hopt.clamp));
                const double x0 = opt_number(o, "x0").value_or(3.0 * barrier);
                const double m = number(o, "m_scale") * std::pow(eps, -p.alpha);
                const auto res = exitlab::estimate_halfline_exit(p, b, x0, m, cfg.n_paths, streams, hopt, exec);
                auto r = estimate_row(cfg, eps, "p_exit_below", res.p_exit);
                r.horizon = m;
                r.flags = {kv("barrier", res.barrier), kv("x0", x0)};
                if (res.clamped) r.flags.push_back("BARRIER_CLAMPED:delta_eps=" + fmt_num(b.delta_eps.value()));
                for (auto& f : decomposition_flags(res.decomposition)) r.flags.push_back(std::move(f));
                out.rows.push_back(r);
                break;
            }
            case Experiment::box_exit: {
                const auto b = scaling::scaling_bundle(p, ov);
                const double clamp = number(o, "clamp");
                std::vector<std::string> flags;
                double tp = b.Theta_plus.value(), tm = b.Theta_minus.value();
                if (tp > clamp) flags.push_back("THETA_PLUS_CLAMPED:" + fmt_num(tp)), tp = clamp;
                if (tm > clamp) flags.push_back("THETA_MINUS_CLAMPED:" + fmt_num(tm)), tm = clamp;
                const double t_hat = number(o, "t_hat_factor") * b.t_eps.value() * std::abs(std::log(eps));
                const auto d = noise::make_decomposition(noise::StableLaw(p.alpha, p.c), eps, b.rho);
                const auto res = exitlab::estimate_box_exit(p, d, tm, tp, t_hat, cfg.n_paths, streams, exec);
                flags.push_back(kv("Theta_plus", tp));
                flags.push_back(kv("Theta_minus", tm));
                flags.push_back(kv("vartheta", b.theta_star));
                for (auto [name, e] : {std::pair{"p_above", res.p_above}, std::pair{"p_below", res.p_below},
                                       std::pair{"p_censored", res.p_censored}}) {
                    auto r = estimate_row(cfg, eps, name, e);
                    r.horizon = t_hat;
                    r.flags = flags;
                    out.rows.push_back(r);
                }
                const char* qn[] = {"chi_q10", "chi_q50", "chi_q90"};
                for (int k = 0; k < 3; ++k) {
                    auto r = value_row(cfg, eps, qn[k], res.exit_time_quantiles[k], flags);
                    r.horizon = t_hat;
                    out.rows.push_back(r);
                }
                break;
            }
            case Experiment::ramp: {
                const auto b = scaling::scaling_bundle(p, ov);
                const double clamp = number(o, "clamp");
                std::vector<std::string> flags;
                double psi1 = b.Psi1.value(), psi0 = b.Psi0.value();
                if (psi1 > clamp) flags.push_back("PSI1_CLAMPED:" + fmt_num(psi1)), psi1 = clamp;
                if (!(psi0 < psi1)) flags.push_back("PSI0_CLAMPED:" + fmt_num(psi0)), psi0 = 0.5 * psi1;
                const double s = number(o, "s_factor") * b.s_eps.value() * std::abs(std::log(eps));
                const auto d = noise::make_decomposition(noise::StableLaw(p.alpha, p.c), eps, b.rho);
                const auto e = exitlab::estimate_ramp_escape(p, d, psi0, psi1, s, cfg.n_paths, streams, exec);
                flags.push_back(kv("Psi0", psi0));
                flags.push_back(kv("Psi1", psi1));
                auto r = estimate_row(cfg, eps, "p_escape_later_than_s", e);
                r.horizon = s;
                r.flags = flags;
                out.rows.push_back(r);
                break;
            }
            default:
                break;
        }
        if (cfg.timing) {
            const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            for (std::size_t k = first_row; k < out.rows.size(); ++k) out.rows[k].runtime_ms = ms;
        }
    }
    return out;
}

const char* const kCsvHeader =
    "experiment,alpha,beta_plus,beta_minus,B_plus,B_minus,c,epsilon,n_paths,horizon,quantity,point,stderr,ci_lo,"
    "ci_hi,runtime_ms,master_seed,flags";

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
    auto opt = [](const std::optional<double>& v) { return v ? fmt_num(*v) : std::string(); };
    os << kCsvHeader << '\n';
    for (const auto& r : rows) {
        std::string flags;
        for (std::size_t i = 0; i < r.flags.size(); ++i) flags += (i ? ";" : "") + r.flags[i];
        os << r.experiment << ',' << fmt_num(r.params.alpha) << ',' << fmt_num(r.params.beta_plus) << ','
           << fmt_num(r.params.beta_minus) << ',' << fmt_num(r.params.B_plus) << ',' << fmt_num(r.params.B_minus)
           << ',' << fmt_num(r.params.c) << ',' << fmt_num(r.epsilon) << ',' << r.n_paths << ','
           << fmt_num(r.horizon) << ',' << r.quantity << ',' << fmt_num(r.point) << ',' << opt(r.std_error) << ','
           << opt(r.ci_lo) << ',' << opt(r.ci_hi) << ',' << opt(r.runtime_ms) << ',' << r.master_seed << ",\""
           << flags << "\"\n";
    }
}

json to_json(const ExperimentConfig& cfg, const RunResult& r) {
    ExperimentConfig copy = cfg;
    json rows = json::array();
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : json(nullptr); };
    for (const auto& row : r.rows) {
        rows.push_back({{"experiment", row.experiment},
                        {"alpha", row.params.alpha},
                        {"beta_plus", row.params.beta_plus},
                        {"beta_minus", row.params.beta_minus},
                        {"B_plus", row.params.B_plus},
                        {"B_minus", row.params.B_minus},
                        {"c", row.params.c},
                        {"epsilon", row.epsilon},
                        {"n_paths", row.n_paths},
                        {"horizon", num(row.horizon)},
                        {"quantity", row.quantity},
                        {"point", num(row.point)},
                        {"stderr", opt(row.std_error)},
                        {"ci_lo", opt(row.ci_lo)},
                        {"ci_hi", opt(row.ci_hi)},
                        {"runtime_ms", opt(row.runtime_ms)},
                        {"master_seed", row.master_seed},
                        {"flags", row.flags}});
    }
    return {{"schema_version", 1},
            {"config", materialize(copy)},
            {"status", r.status},
            {"failures", r.failures},
            {"rows", rows},
            {"extra", r.extra}};
}

void print_summary(std::ostream& os, const RunResult& r, double runtime_ms) {
    os << std::left << std::setw(16) << "experiment" << std::setw(12) << "epsilon" << std::setw(34) << "quantity"
       << std::setw(14) << "point" << std::setw(12) << "stderr" << "flags\n";
    for (const auto& row : r.rows) {
        std::string flags;
        for (std::size_t i = 0; i < row.flags.size(); ++i) flags += (i ? ";" : "") + row.flags[i];
        if (flags.size() > 60) flags = flags.substr(0, 57) + "...";
        os << std::left << std::setw(16) << row.experiment << std::setw(12) << fmt_short(row.epsilon)
           << std::setw(34) << row.quantity << std::setw(14) << fmt_short(row.point) << std::setw(12)
           << (row.std_error ? fmt_short(*row.std_error) : "-") << flags << '\n';
    }
    for (const auto& f : r.failures) os << "FAILED: " << f << '\n';
    os << "runtime " << std::fixed << std::setprecision(1) << runtime_ms << " ms\n";
    os.unsetf(std::ios::fixed);
}

int run(ExperimentConfig& cfg, std::ostream& summary, std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    RunResult res;
    try {
        res = execute(cfg);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const NumericalFailure& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalError;
    } catch (const DomainError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!cfg.output_path.empty()) {
        file.open(cfg.output_path, std::ios::binary);
        if (!file) {
            err << "config error: cannot write '" << cfg.output_path << "'\n";
            return kConfigError;
        }
        os = &file;
    }
    if (cfg.format == Format::csv) {
        write_csv(*os, res.rows);
    } else {
        *os << to_json(cfg, res).dump(2) << '\n';
    }
    print_summary(summary, res, ms);
    if (res.status == kValidationError) {
        for (const auto& f : res.failures) err << "validation failed: " << f << '\n';
    }
    return res.status;
}

}  // namespace peano::harness
