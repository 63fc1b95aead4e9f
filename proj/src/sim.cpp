#include "hetbandit/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "hetbandit/eluder.hpp"

namespace hetbandit {
namespace sim {

namespace {

std::vector<int> sample_distinct(int n, int m, std::mt19937_64& rng) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    if (m >= n) return idx;
    for (int i = 0; i < m; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(idx[static_cast<std::size_t>(i)],
                  idx[static_cast<std::size_t>(pick(rng))]);
    }
    idx.resize(static_cast<std::size_t>(m));
    std::sort(idx.begin(), idx.end());
    return idx;
}

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
    throw std::invalid_argument("config: " + path + ": " + what);
}

const nlohmann::json& require_field(const nlohmann::json& j, const char* key,
                                    const std::string& path) {
    if (!j.contains(key)) config_error(path + "." + key, "missing field");
    return j.at(key);
}

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

FiniteClassEnv::FiniteClassEnv(FiniteFunctionClass cls,
                               std::optional<int> f_star_index, NoiseSpec noise,
                               int decision_set_size, std::uint64_t seed)
    : cls_(std::move(cls)),
      noise_(std::move(noise)),
      m_(decision_set_size),
      env_seed_(split_seed(seed, 1)),
      noise_seed_(split_seed(seed, 2)) {
    cls_.validate();
    noise_.validate();
    if (m_ < 1) throw std::invalid_argument("FiniteClassEnv: decision_set_size >= 1");
    if (f_star_index) {
        if (*f_star_index < 0 || *f_star_index >= cls_.num_functions()) {
            throw std::invalid_argument("FiniteClassEnv: f_star_index out of range");
        }
        f_star_ = *f_star_index;
    } else {
        std::mt19937_64 rng(split_seed(env_seed_, 0));
        std::uniform_int_distribution<int> pick(0, cls_.num_functions() - 1);
        f_star_ = pick(rng);
    }
}

const std::vector<int>& FiniteClassEnv::decision_set(int t) {
    if (t != cached_t_) {
        std::mt19937_64 rng(split_seed(env_seed_, static_cast<std::uint64_t>(t)));
        cached_set_ = sample_distinct(cls_.num_actions(), m_, rng);
        cached_t_ = t;
    }
    return cached_set_;
}

double FiniteClassEnv::true_value(const int& a) const {
    return cls_.value(f_star_, a);
}

std::pair<double, double> FiniteClassEnv::pull(int t, const int& a) {
    std::mt19937_64 rng(split_seed(noise_seed_, static_cast<std::uint64_t>(t)));
    const double eps = sample_noise(noise_, t, rng);
    return {true_value(a) + eps, noise_.sigma(t)};
}

GlmEnv::GlmEnv(GlmModel model, Eigen::VectorXd theta_star, NoiseSpec noise,
               int decision_set_size, std::uint64_t seed,
               std::optional<std::vector<Eigen::VectorXd>> fixed_actions)
    : model_(std::move(model)),
      theta_star_(std::move(theta_star)),
      noise_(std::move(noise)),
      m_(decision_set_size),
      env_seed_(split_seed(seed, 1)),
      noise_seed_(split_seed(seed, 2)),
      fixed_(std::move(fixed_actions)) {
    noise_.validate();
    if (theta_star_.size() != model_.d) {
        throw std::invalid_argument("GlmEnv: theta_star dimension mismatch");
    }
    if (theta_star_.norm() > model_.B * (1.0 + 1e-9)) {
        throw std::invalid_argument("GlmEnv: ||theta_star|| exceeds B");
    }
    if (fixed_) {
        for (const auto& a : *fixed_) {
            if (a.size() != model_.d || a.norm() > model_.A * (1.0 + 1e-9)) {
                throw std::invalid_argument("GlmEnv: fixed action invalid");
            }
        }
        if (fixed_->empty()) throw std::invalid_argument("GlmEnv: empty fixed action list");
    } else if (m_ < 1) {
        throw std::invalid_argument("GlmEnv: decision_set_size >= 1");
    }
}

const std::vector<Eigen::VectorXd>& GlmEnv::decision_set(int t) {
    if (fixed_) return *fixed_;
    if (t != cached_t_) {
        std::mt19937_64 rng(split_seed(env_seed_, static_cast<std::uint64_t>(t)));
        std::normal_distribution<double> gauss(0.0, 1.0);
        cached_set_.assign(static_cast<std::size_t>(m_),
                           Eigen::VectorXd::Zero(model_.d));
        for (auto& a : cached_set_) {
            double n2 = 0.0;
            do {
                for (int i = 0; i < model_.d; ++i) a[i] = gauss(rng);
                n2 = a.norm();
            } while (n2 < 1e-12);
            a *= model_.A / n2;
        }
        cached_t_ = t;
    }
    return cached_set_;
}

double GlmEnv::true_value(const Eigen::VectorXd& a) const {
    return model_.h(theta_star_.dot(a));
}

std::pair<double, double> GlmEnv::pull(int t, const Eigen::VectorXd& a) {
    std::mt19937_64 rng(split_seed(noise_seed_, static_cast<std::uint64_t>(t)));
    const double eps = sample_noise(noise_, t, rng);
    return {true_value(a) + eps, noise_.sigma(t)};
}

void ExperimentConfig::validate() const {
    if (T < 1) config_error("horizon", "must be >= 1");
    if (noise.horizon() < T) config_error("noise", "schedule shorter than horizon");
    if (seeds.empty()) config_error("seeds", "need at least one seed");
    std::vector<std::uint64_t> s = seeds;
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) {
        config_error("seeds", "seeds must be distinct");
    }
    if (!(delta > 0.0) || !(delta < 1.0)) config_error("delta", "must be in (0,1)");
    if (alpha && *alpha < 0.0) config_error("alpha", "must be >= 0");
    if (sigma_bar && !(*sigma_bar > 0.0)) config_error("sigma_bar", "must be > 0");
    if (!(lambda > 0.0)) config_error("lambda", "must be > 0");

    const bool is_erm = algorithm == "ml2-erm-4.1" || algorithm == "ml2-erm-5.2" ||
                        algorithm == "baseline-eluder-ucb";
    const bool is_gloc = algorithm == "ml2-gloc";
    const bool is_oracle = algorithm == "oracle";
    if (!is_erm && !is_gloc && !is_oracle) {
        config_error("algorithm", "unknown algorithm '" + algorithm + "'");
    }
    if (is_erm && env_type != EnvType::finite) {
        config_error("algorithm", algorithm + " requires a finite-class environment");
    }
    if (is_gloc && env_type != EnvType::glm) {
        config_error("algorithm", "ml2-gloc requires a glm environment");
    }
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    cfg.echo = j;
    try {
        const auto& env = require_field(j, "environment", "");
        const std::string etype = require_field(env, "type", "environment").get<std::string>();
        cfg.decision_set_size = env.value("decision_set_size", 20);
        if (etype == "finite") {
            cfg.env_type = EnvType::finite;
            if (env.contains("class_file")) {
                cfg.cls = FiniteFunctionClass::from_json_file(
                    env.at("class_file").get<std::string>());
            } else if (env.contains("class")) {
                cfg.cls = FiniteFunctionClass::from_json_text(env.at("class").dump());
            } else {
                config_error("environment", "finite env needs 'class' or 'class_file'");
            }
            if (env.contains("f_star_index")) {
                cfg.f_star_index = env.at("f_star_index").get<int>();
            }
        } else if (etype == "glm") {
            cfg.env_type = EnvType::glm;
            const int d = require_field(env, "d", "environment").get<int>();
            const double A = env.value("A", 1.0);
            const double B = env.value("B", 1.0);
            const std::string link =
                require_field(env, "link", "environment").get<std::string>();
            if (link == "identity") {
                cfg.glm = GlmModel::identity_link(d, A, B);
            } else if (link == "logistic") {
                cfg.glm = GlmModel::logistic_link(d, A, B);
            } else if (link == "scaled") {
                cfg.glm = GlmModel::scaled_link(d, A, B, env.value("slope", 1.0));
            } else {
                config_error("environment.link", "unknown link '" + link + "'");
            }
            const auto& ts = require_field(env, "theta_star", "environment");
            if (static_cast<int>(ts.size()) != d) {
                config_error("environment.theta_star", "dimension mismatch");
            }
            cfg.theta_star.resize(d);
            for (int i = 0; i < d; ++i) cfg.theta_star[i] = ts[static_cast<std::size_t>(i)].get<double>();
            nlohmann::json action_rows;
            if (env.contains("fixed_actions")) {
                action_rows = env.at("fixed_actions");
            } else if (env.contains("actions_file")) {
                std::ifstream in(env.at("actions_file").get<std::string>());
                if (!in) config_error("environment.actions_file", "cannot open file");
                in >> action_rows;
            }
            if (!action_rows.is_null()) {
                std::vector<Eigen::VectorXd> fixed;
                for (const auto& row : action_rows) {
                    Eigen::VectorXd a(d);
                    if (static_cast<int>(row.size()) != d) {
                        config_error("environment.fixed_actions", "dimension mismatch");
                    }
                    for (int i = 0; i < d; ++i) a[i] = row[static_cast<std::size_t>(i)].get<double>();
                    fixed.push_back(std::move(a));
                }
                cfg.fixed_actions = std::move(fixed);
            }
        } else {
            config_error("environment.type", "unknown type '" + etype + "'");
        }

        cfg.T = require_field(j, "horizon", "").get<int>();

        const auto& noise = require_field(j, "noise", "");
        const double R = require_field(noise, "R", "noise").get<double>();
        const std::string nkind = noise.value("kind", "constant");
        const NoiseKind dist = noise.value("distribution", "gaussian") == "bounded"
                                   ? NoiseKind::bounded_uniform
                                   : NoiseKind::gaussian;
        if (nkind == "constant") {
            cfg.noise = NoiseSpec::constant(
                R, require_field(noise, "sigma", "noise").get<double>(), cfg.T, dist);
        } else if (nkind == "bursty") {
            cfg.noise = NoiseSpec::bursty(
                R, require_field(noise, "sigma_high", "noise").get<double>(),
                require_field(noise, "sigma_low", "noise").get<double>(),
                require_field(noise, "period", "noise").get<int>(), cfg.T, dist);
        } else if (nkind == "decaying") {
            cfg.noise = NoiseSpec::decaying(
                R, require_field(noise, "sigma0", "noise").get<double>(),
                noise.value("floor", 0.0), cfg.T, dist);
        } else if (nkind == "table") {
            cfg.noise.R = R;
            cfg.noise.kind = dist;
            cfg.noise.schedule.assign(static_cast<std::size_t>(cfg.T), 0.0);
            for (const auto& row : require_field(noise, "table", "noise")) {
                const int t = require_field(row, "t", "noise.table").get<int>();
                if (t < 1 || t > cfg.T) config_error("noise.table", "round out of range");
                cfg.noise.schedule[static_cast<std::size_t>(t - 1)] =
                    require_field(row, "sigma", "noise.table").get<double>();
            }
            cfg.noise.validate();
        } else {
            config_error("noise.kind", "unknown kind '" + nkind + "'");
        }

        cfg.algorithm = require_field(j, "algorithm", "").get<std::string>();

        const auto& seeds = require_field(j, "seeds", "");
        if (seeds.is_array()) {
            for (const auto& s : seeds) cfg.seeds.push_back(s.get<std::uint64_t>());
        } else {
            const std::uint64_t base = seeds.value("base", 1);
            const int count = require_field(seeds, "count", "seeds").get<int>();
            for (int i = 0; i < count; ++i) cfg.seeds.push_back(base + static_cast<std::uint64_t>(i));
        }

        cfg.delta = j.value("delta", 0.1);
        if (j.contains("alpha") && !j.at("alpha").is_string()) {
            cfg.alpha = j.at("alpha").get<double>();
        }
        if (j.contains("sigma_bar") && !j.at("sigma_bar").is_string()) {
            cfg.sigma_bar = j.at("sigma_bar").get<double>();
        }
        cfg.lambda = j.value("lambda", 1.0);
        cfg.clip_predictions = j.value("clip_predictions", false);
        cfg.workers = j.value("workers", 0);
        cfg.out_dir = j.value("out_dir", std::string{});
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string{"config: malformed json: "} + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

ResolvedRunParams resolve_params(const ExperimentConfig& cfg) {
    ResolvedRunParams rp;
    rp.alpha = cfg.alpha.value_or(1.0 / (static_cast<double>(cfg.T) * cfg.T));
    const double R = cfg.noise.R;

    if (cfg.env_type == ExperimentConfig::EnvType::finite) {
        rp.n_alpha = static_cast<double>(cfg.cls.num_functions());
    } else {
        rp.n_alpha = 1.0;
    }

    if (cfg.algorithm == "baseline-eluder-ucb") {
        // Single level: collapses the multi-level loop to plain optimistic
        // elimination with the homoscedastic envelope R.
        rp.sigma_bar = R;
        rp.L = 1;
        return rp;
    }
    if (cfg.sigma_bar) {
        rp.sigma_bar = *cfg.sigma_bar;
        rp.L = num_levels(R, rp.sigma_bar);
        return rp;
    }
    if (cfg.algorithm == "ml2-gloc") {
        rp.sigma_bar = R / std::sqrt(static_cast<double>(cfg.glm.d));
        rp.L = num_levels(R, rp.sigma_bar);
        return rp;
    }
    if (cfg.algorithm == "ml2-erm-5.2") {
        // Unit deviation floor in the rescaled (|f| <= 1) units.
        rp.sigma_bar = cfg.cls.bound > 0.0 ? cfg.cls.bound : 1.0;
        rp.L = num_levels(R, rp.sigma_bar);
        return rp;
    }
    // sigma_bar = 1 / (dim_E log(2 N L / delta) sqrt(T)), with L resolved by
    // fixed point since it depends on sigma_bar itself.
    if (cfg.env_type == ExperimentConfig::EnvType::finite) {
        const double eps = 1.0 / (static_cast<double>(cfg.T) * cfg.T);
        const bool exact = cfg.cls.num_actions() <= eluder::kExactActionLimit;
        const auto res = eluder::eluder_dimension(
            cfg.cls, eps,
            exact ? eluder::EluderMode::exact : eluder::EluderMode::greedy_lower_bound);
        rp.dim_e = static_cast<double>(res.dimension);
    } else {
        rp.dim_e = static_cast<double>(cfg.glm.d);
    }
    const double dim = std::max(1.0, rp.dim_e);
    int L = 1;
    double sigma_bar = 1.0;
    for (int iter = 0; iter < 20; ++iter) {
        sigma_bar = 1.0 / (dim *
                           std::log(2.0 * rp.n_alpha * static_cast<double>(L) /
                                    cfg.delta) *
                           std::sqrt(static_cast<double>(cfg.T)));
        const int newL = num_levels(R, sigma_bar);
        if (newL == L) break;
        L = newL;
    }
    rp.sigma_bar = sigma_bar;
    rp.L = L;
    return rp;
}

RunTrace run_single_episode(const ExperimentConfig& cfg,
                            const ResolvedRunParams& rp, std::uint64_t seed) {
    Ml2Config mc;
    mc.T = cfg.T;
    mc.R = cfg.noise.R;
    mc.sigma_bar = rp.sigma_bar;
    mc.delta = cfg.delta;
    mc.alpha = rp.alpha;

    if (cfg.env_type == ExperimentConfig::EnvType::finite) {
        FiniteClassEnv env(cfg.cls, cfg.f_star_index, cfg.noise,
                           cfg.decision_set_size, seed);
        if (cfg.algorithm == "oracle") {
            return run_oracle_episode(env, cfg.T, rp.sigma_bar, rp.L, seed);
        }
        BetaSchedule beta;
        beta.C = cfg.cls.bound;
        beta.R = cfg.noise.R;
        beta.sigma_bar = rp.sigma_bar;
        beta.L = rp.L;
        beta.delta = cfg.delta;
        beta.alpha = rp.alpha;
        beta.n_alpha = rp.n_alpha;
        bool rescale = false;
        if (cfg.algorithm == "ml2-erm-5.2") {
            beta.kind = BetaKind::variance_aware_union;
            rescale = true;
        } else {
            beta.kind = BetaKind::subgaussian;
        }
        ErmSubroutine sub(cfg.cls, beta, rescale, env.f_star_index());
        RunTrace trace = run_episode<int>(env, mc, sub, seed);
        trace.reward_scale = sub.reward_scale();
        return trace;
    }

    GlmEnv env(cfg.glm, cfg.theta_star, cfg.noise, cfg.decision_set_size, seed,
               cfg.fixed_actions);
    if (cfg.algorithm == "oracle") {
        return run_oracle_episode(env, cfg.T, rp.sigma_bar, rp.L, seed);
    }
    GlmBetaParams bp = GlmBetaParams::from_model(cfg.glm, cfg.noise.R, rp.sigma_bar,
                                                 cfg.delta, rp.L, cfg.lambda);
    GlocSubroutine sub(cfg.glm, bp, cfg.clip_predictions, cfg.theta_star);
    return run_episode<Eigen::VectorXd>(env, mc, sub, seed);
}

AggregateReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const ResolvedRunParams rp = resolve_params(cfg);

    const int n = static_cast<int>(cfg.seeds.size());
    std::vector<std::optional<RunTrace>> results(static_cast<std::size_t>(n));
    std::vector<std::string> errors(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    int nworkers = cfg.workers > 0
                       ? cfg.workers
                       : static_cast<int>(std::thread::hardware_concurrency());
    nworkers = std::clamp(nworkers, 1, n);

    const auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                results[static_cast<std::size_t>(i)] =
                    run_single_episode(cfg, rp, cfg.seeds[static_cast<std::size_t>(i)]);
            } catch (const std::exception& e) {
                errors[static_cast<std::size_t>(i)] = e.what();
            }
        }
    };
    if (nworkers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nworkers));
        for (int w = 0; w < nworkers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    AggregateReport rep;
    rep.config_echo = cfg.echo;
    rep.resolved = rp;
    for (int i = 0; i < n; ++i) {
        if (results[static_cast<std::size_t>(i)]) {
            rep.traces.push_back(std::move(*results[static_cast<std::size_t>(i)]));
        } else {
            ++rep.failures;
        }
    }
    if (rep.failures * 10 > n) {
        std::string first;
        for (const auto& e : errors) {
            if (!e.empty()) {
                first = e;
                break;
            }
        }
        throw std::runtime_error("run_experiment: " + std::to_string(rep.failures) +
                                 "/" + std::to_string(n) +
                                 " seeds failed (first: " + first + ")");
    }

    const int ok = static_cast<int>(rep.traces.size());
    rep.mean_curve.assign(static_cast<std::size_t>(cfg.T), 0.0);
    rep.median_curve.assign(static_cast<std::size_t>(cfg.T), 0.0);
    rep.q25_curve.assign(static_cast<std::size_t>(cfg.T), 0.0);
    rep.q75_curve.assign(static_cast<std::size_t>(cfg.T), 0.0);
    rep.level_occupancy.assign(static_cast<std::size_t>(rp.L), 0.0);
    long violations = 0, rounds_total = 0, seeds_with_violation = 0, final_violations = 0;
    std::vector<double> column(static_cast<std::size_t>(ok));
    for (int t = 0; t < cfg.T; ++t) {
        for (int i = 0; i < ok; ++i) {
            column[static_cast<std::size_t>(i)] =
                rep.traces[static_cast<std::size_t>(i)].rounds[static_cast<std::size_t>(t)].regret_cum;
        }
        std::sort(column.begin(), column.end());
        const auto q = [&](double p) {
            const double pos = p * (ok - 1);
            const int lo = static_cast<int>(pos);
            const int hi = std::min(lo + 1, ok - 1);
            const double w = pos - lo;
            return column[static_cast<std::size_t>(lo)] * (1.0 - w) +
                   column[static_cast<std::size_t>(hi)] * w;
        };
        rep.mean_curve[static_cast<std::size_t>(t)] =
            std::accumulate(column.begin(), column.end(), 0.0) / ok;
        rep.median_curve[static_cast<std::size_t>(t)] = q(0.5);
        rep.q25_curve[static_cast<std::size_t>(t)] = q(0.25);
        rep.q75_curve[static_cast<std::size_t>(t)] = q(0.75);
    }
    for (const auto& tr : rep.traces) {
        rep.per_seed_final_regret.push_back(tr.final_regret());
        rep.mean_j += tr.final_j();
        bool any = false;
        for (const auto& r : tr.rounds) {
            ++rounds_total;
            if (!r.coverage_ok) {
                ++violations;
                any = true;
            }
            if (r.level >= 0 && r.level < rp.L) {
                rep.level_occupancy[static_cast<std::size_t>(r.level)] += 1.0;
            }
        }
        if (any) ++seeds_with_violation;
        if (!tr.rounds.empty() && !tr.rounds.back().coverage_ok) ++final_violations;
    }
    if (ok > 0) {
        rep.mean_j /= ok;
        for (auto& v : rep.level_occupancy) v /= ok;
        rep.coverage_violation_rate =
            rounds_total > 0 ? static_cast<double>(violations) / rounds_total : 0.0;
        rep.any_violation_rate = static_cast<double>(seeds_with_violation) / ok;
        rep.final_round_violation_rate = static_cast<double>(final_violations) / ok;
    }
    rep.wall_clock_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        emit_csv(rep.traces, cfg.out_dir + "/trace.csv");
        std::ofstream out(cfg.out_dir + "/aggregate.json");
        out << rep.to_json().dump(2) << "\n";
    }
    return rep;
}

nlohmann::json AggregateReport::to_json() const {
    nlohmann::json j;
    j["config_echo"] = config_echo;
    j["per_seed_final_regret"] = per_seed_final_regret;
    j["mean_curve"] = mean_curve;
    j["median_curve"] = median_curve;
    j["q25_curve"] = q25_curve;
    j["q75_curve"] = q75_curve;
    j["mean_J"] = mean_j;
    j["coverage"] = {{"round_violation_rate", coverage_violation_rate},
                     {"any_violation_rate", any_violation_rate},
                     {"final_round_violation_rate", final_round_violation_rate}};
    j["level_occupancy"] = level_occupancy;
    j["failures"] = failures;
    j["wall_clock_sec"] = wall_clock_sec;
    j["resolved"] = {{"sigma_bar", resolved.sigma_bar},
                     {"alpha", resolved.alpha},
                     {"L", resolved.L},
                     {"n_alpha", resolved.n_alpha},
                     {"dim_e", resolved.dim_e}};
    return j;
}

nlohmann::json coverage_report(const std::vector<RunTrace>& traces) {
    nlohmann::json j;
    if (traces.empty()) {
        j["overall"] = nullptr;
        return j;
    }
    int L = 0, T = 0;
    for (const auto& tr : traces) {
        T = std::max(T, static_cast<int>(tr.rounds.size()));
        for (const auto& r : tr.rounds) L = std::max(L, r.level + 1);
    }
    std::vector<int> viol_level(static_cast<std::size_t>(L), 0);
    std::vector<int> count_level(static_cast<std::size_t>(L), 0);
    std::vector<int> viol_t(static_cast<std::size_t>(T), 0);
    std::vector<int> count_t(static_cast<std::size_t>(T), 0);
    int viol = 0, total = 0, seeds_any = 0;
    for (const auto& tr : traces) {
        bool any = false;
        for (const auto& r : tr.rounds) {
            ++total;
            ++count_level[static_cast<std::size_t>(r.level)];
            ++count_t[static_cast<std::size_t>(r.t - 1)];
            if (!r.coverage_ok) {
                ++viol;
                any = true;
                ++viol_level[static_cast<std::size_t>(r.level)];
                ++viol_t[static_cast<std::size_t>(r.t - 1)];
            }
        }
        if (any) ++seeds_any;
    }
    const auto rate_json = [](int k, int n) {
        const RateEstimate e = binomial_rate(k, n);
        return nlohmann::json{{"violations", k},
                              {"count", n},
                              {"rate", e.rate},
                              {"stderr", e.stderr_}};
    };
    j["overall"] = rate_json(viol, total);
    j["any_seed"] = rate_json(seeds_any, static_cast<int>(traces.size()));
    j["per_level"] = nlohmann::json::array();
    for (int l = 0; l < L; ++l) {
        auto e = rate_json(viol_level[static_cast<std::size_t>(l)],
                           count_level[static_cast<std::size_t>(l)]);
        e["level"] = l;
        j["per_level"].push_back(e);
    }
    j["per_round_violation_rate"] = nlohmann::json::array();
    for (int t = 0; t < T; ++t) {
        j["per_round_violation_rate"].push_back(
            count_t[static_cast<std::size_t>(t)] > 0
                ? static_cast<double>(viol_t[static_cast<std::size_t>(t)]) /
                      count_t[static_cast<std::size_t>(t)]
                : 0.0);
    }
    return j;
}

void emit_csv(const std::vector<RunTrace>& traces, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
    out << "seed,t,action_index,level,sigma_t,reward,regret_inst,regret_cum,J_cum,coverage_ok\n";
    for (const auto& tr : traces) {
        for (const auto& r : tr.rounds) {
            out << tr.seed << ',' << r.t << ',' << r.action_index << ',' << r.level
                << ',' << g17(r.sigma) << ',' << g17(r.reward) << ','
                << g17(r.regret_inst) << ',' << g17(r.regret_cum) << ','
                << g17(r.j_cum) << ',' << (r.coverage_ok ? 1 : 0) << '\n';
        }
    }
    if (!out) throw std::runtime_error("emit_csv: write failed for " + path);
}

std::vector<CsvRow> read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_trace_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("read_trace_csv: empty file " + path);
    }
    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        CsvRow row;
        const auto next = [&]() -> std::string {
            if (!std::getline(ss, field, ',')) {
                throw std::runtime_error("read_trace_csv: short row in " + path);
            }
            return field;
        };
        row.seed = std::stoull(next());
        row.t = std::stoi(next());
        row.action_index = std::stoi(next());
        row.level = std::stoi(next());
        row.sigma_t = std::stod(next());
        row.reward = std::stod(next());
        row.regret_inst = std::stod(next());
        row.regret_cum = std::stod(next());
        row.j_cum = std::stod(next());
        row.coverage_ok = std::stoi(next());
        rows.push_back(row);
    }
    return rows;
}

RateEstimate binomial_rate(int k, int n) {
    RateEstimate e;
    if (n <= 0) return e;
    e.rate = static_cast<double>(k) / n;
    e.stderr_ = std::sqrt(std::max(0.0, e.rate * (1.0 - e.rate) / n));
    return e;
}

}  // namespace sim
}  // namespace hetbandit
