#include <cmath>
#include <numbers>
#include <string>

#include "peano/harness.hpp"
#include "peano/noise.hpp"
#include "peano/stats.hpp"

namespace peano::harness {

using nlohmann::json;

namespace {

struct Oracle {
    std::string name;
    double statistic;
    double threshold;
    bool pass;
    std::string detail;
};

long count_option(const json& o, const char* key) {
    const auto& v = o.at(key);
    if (!v.is_number() || v.get<double>() < 1) throw ConfigError(std::string("options.") + key, "expected a positive count");
    return static_cast<long>(v.get<double>());
}

double num_option(const json& o, const char* key) {
    const auto& v = o.at(key);
    if (!v.is_number()) throw ConfigError(std::string("options.") + key, "expected a number");
    return v.get<double>();
}

// Independent per-oracle streams, so adding an oracle never shifts another.
RandomStream oracle_stream(std::uint64_t master, std::uint64_t tag) { return RandomStream(derive_seed(master, tag), 0); }

}  // namespace

RunResult validate_noise(ExperimentConfig& cfg) {
    const auto& o = cfg.options;
    const double alpha = cfg.params.alpha;
    const double c = cfg.params.c;
    if (!(alpha > 0.0 && alpha < 2.0)) throw ConfigError("params.alpha", "must lie in (0,2)");
    if (!(c > 0.0)) throw ConfigError("params.c", "must be positive");

    const long n_cauchy = count_option(o, "n_cauchy");
    const long n = count_option(o, "n_samples");
    const double a = num_option(o, "self_similarity_a");
    if (!(a > 0.0)) throw ConfigError("options.self_similarity_a", "must be positive");

    const bool override = o.contains("sigma_override") && !o.at("sigma_override").is_null();
    const noise::StableLaw law = override
                                     ? noise::StableLaw::with_sigma_override(alpha, c, num_option(o, "sigma_override"))
                                     : noise::StableLaw(alpha, c);
    std::vector<Oracle> oracles;
    const double ks_tol = 0.01;

    // sigma against the quadrature of the characteristic exponent at z = 1
    {
        const double q = -noise::char_exponent_quadrature(alpha, c, 1.0);
        const double s = std::pow(q, 1.0 / alpha);
        const double rel = std::abs(law.sigma() - s) / s;
        oracles.push_back({"sigma_quadrature", rel, 1e-6, rel <= 1e-6, "quadrature sigma=" + std::to_string(s)});
    }

    // Cauchy point check: with c = 1 and alpha = 1 the scale is pi, so P(L_1 <= pi) = 3/4
    {
        const noise::StableLaw cauchy = override && alpha == 1.0 ? law : noise::StableLaw(1.0, 1.0);
        auto rng = oracle_stream(cfg.master_seed, 1);
        long hits = 0;
        for (long i = 0; i < n_cauchy; ++i) hits += noise::sample_stable_increment(cauchy, 1.0, rng) <= std::numbers::pi;
        const double p = static_cast<double>(hits) / static_cast<double>(n_cauchy);
        const double dev = std::abs(p - 0.75);
        oracles.push_back({"cauchy_point", dev, 0.005, dev <= 0.005, "p_hat=" + std::to_string(p)});
    }

    // Tail ratio of large jumps: P(|W| > 2u | |W| > u) = 2^{-alpha}
    {
        auto rng = oracle_stream(cfg.master_seed, 2);
        const double u = 1.0;
        long hits = 0;
        for (long i = 0; i < n; ++i) hits += std::abs(noise::sample_large_jump(law, u, rng)) > 2.0 * u;
        const double p = static_cast<double>(hits) / static_cast<double>(n);
        const double target = noise::levy_tail_mass(law, 2.0 * u) / noise::levy_tail_mass(law, u);
        const double dev = std::abs(p - target);
        oracles.push_back({"tail_ratio", dev, 0.01, dev <= 0.01, "p_hat=" + std::to_string(p)});
    }

    // Self-similarity: L_a against a^{1/alpha} L_1
    {
        auto r1 = oracle_stream(cfg.master_seed, 3);
        auto r2 = oracle_stream(cfg.master_seed, 4);
        std::vector<double> xa(static_cast<std::size_t>(n)), x1(static_cast<std::size_t>(n));
        const double scale = std::pow(a, 1.0 / alpha);
        for (auto& x : xa) x = noise::sample_stable_increment(law, a, r1);
        for (auto& x : x1) x = scale * noise::sample_stable_increment(law, 1.0, r2);
        const double d = stats::ks_two_sample(std::move(xa), std::move(x1));
        oracles.push_back({"self_similarity_ks", d, ks_tol, d <= ks_tol, "a=" + std::to_string(a)});
    }

    // Levy-Ito reassembly: small-jump part plus large-jump events against the direct sampler
    const auto decomp = noise::make_decomposition(law, num_option(o, "reassembly_epsilon"), num_option(o, "reassembly_rho"));
    {
        auto r1 = oracle_stream(cfg.master_seed, 5);
        auto r2 = oracle_stream(cfg.master_seed, 6);
        std::vector<double> joined(static_cast<std::size_t>(n)), direct(static_cast<std::size_t>(n));
        for (auto& x : joined) {
            x = noise::sample_small_jump_increment(decomp, 1.0, r1);
            for (const auto& e : noise::sample_event_stream(decomp, law, 1.0, r1)) x += e.size;
        }
        for (auto& x : direct) x = noise::sample_stable_increment(law, 1.0, r2);
        const double d = stats::ks_two_sample(std::move(joined), std::move(direct));
        oracles.push_back({"levy_ito_reassembly_ks", d, ks_tol, d <= ks_tol,
                           "threshold=" + std::to_string(decomp.threshold)});
    }

    // Event counts on [0,1] have mean lambda_eps
    {
        auto rng = oracle_stream(cfg.master_seed, 7);
        std::vector<double> counts(static_cast<std::size_t>(n));
        for (auto& k : counts) k = static_cast<double>(noise::sample_event_stream(decomp, law, 1.0, rng).size());
        const auto e = stats::mean_estimate(counts);
        const double dev = std::abs(e.point - decomp.lambda_eps);
        const double tol = 4.0 * std::sqrt(decomp.lambda_eps / static_cast<double>(n));
        oracles.push_back({"event_rate", dev, tol, dev <= tol, "lambda_eps=" + std::to_string(decomp.lambda_eps)});
    }

    // Characteristic function against the quadrature exponent
    {
        auto rng = oracle_stream(cfg.master_seed, 8);
        std::vector<double> xs(static_cast<std::size_t>(n));
        for (auto& x : xs) x = noise::sample_stable_increment(law, 1.0, rng);
        const double tol = 4.0 / std::sqrt(static_cast<double>(n));
        for (const auto& zj : o.at("cf_z")) {
            if (!zj.is_number()) throw ConfigError("options.cf_z", "entries must be numbers");
            const double z = zj.get<double>();
            double s = 0.0;
            for (double x : xs) s += std::cos(z * x);
            const double emp = s / static_cast<double>(n);
            const double dev = std::abs(emp - std::exp(noise::char_exponent_quadrature(alpha, c, z)));
            oracles.push_back({"char_function_z=" + std::to_string(z), dev, tol, dev <= tol, ""});
        }
        long positive = 0;
        for (double x : xs) positive += x > 0.0;
        const double dev = std::abs(static_cast<double>(positive) / static_cast<double>(n) - 0.5);
        const double stol = 4.0 * 0.5 / std::sqrt(static_cast<double>(n));
        oracles.push_back({"symmetry", dev, stol, dev <= stol, ""});
    }

    RunResult out;
    json report = json::array();
    for (const auto& orc : oracles) {
        ResultRow r;
        r.experiment = to_string(cfg.experiment);
        r.params = cfg.params;
        r.epsilon = cfg.eps_grid.front();
        r.n_paths = orc.name == "cauchy_point" ? n_cauchy : n;
        r.horizon = cfg.horizon;
        r.quantity = "oracle." + orc.name;
        r.point = orc.statistic;
        r.master_seed = cfg.master_seed;
        r.flags = {orc.pass ? "pass" : "fail", "threshold=" + std::to_string(orc.threshold)};
        if (!orc.detail.empty()) r.flags.push_back(orc.detail);
        if (override) r.flags.push_back("SIGMA_OVERRIDE");
        out.rows.push_back(std::move(r));
        report.push_back({{"name", orc.name},
                          {"statistic", orc.statistic},
                          {"threshold", orc.threshold},
                          {"pass", orc.pass}});
        if (!orc.pass) out.failures.push_back(orc.name);
    }
    out.extra["oracles"] = report;
    out.extra["decomposition"] = {{"threshold", decomp.threshold},      {"lambda_eps", decomp.lambda_eps},
                                  {"inner_cutoff", decomp.inner_cutoff}, {"mid_rate", decomp.mid_rate},
                                  {"gauss_var_rate", decomp.gauss_var_rate}};
    if (!out.failures.empty()) out.status = kValidationError;
    return out;
}

}  // namespace peano::harness
