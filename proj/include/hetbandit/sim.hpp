#pragma once
// Experiment orchestration: seeded environments, the algorithm drivers,
// a Monte-Carlo runner with a worker pool, and CSV/JSON artifact emission.
//
// Determinism contract: everything an episode consumes is derived from
// (config, seed) through per-round splitmix streams, so traces and the CSV
// bytes they produce are reproducible regardless of call interleaving or
// worker count.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetbandit/core.hpp"
#include "hetbandit/erm.hpp"
#include "hetbandit/glm.hpp"
#include "hetbandit/ml2.hpp"

namespace hetbandit {
namespace sim {

// Finite-universe environment: f* drawn from the class (or pinned), fresh
// decision sets of size m per round.
class FiniteClassEnv final : public Environment<int> {
public:
    FiniteClassEnv(FiniteFunctionClass cls, std::optional<int> f_star_index,
                   NoiseSpec noise, int decision_set_size, std::uint64_t seed);

    int horizon() const override { return noise_.horizon(); }
    const std::vector<int>& decision_set(int t) override;
    double true_value(const int& a) const override;
    std::pair<double, double> pull(int t, const int& a) override;

    int f_star_index() const { return f_star_; }
    const FiniteFunctionClass& function_class() const { return cls_; }

private:
    FiniteFunctionClass cls_;
    NoiseSpec noise_;
    int m_;
    std::uint64_t env_seed_, noise_seed_;
    int f_star_ = 0;
    int cached_t_ = -1;
    std::vector<int> cached_set_;
};

// Generalized linear environment: rewards h(theta*^T a), decision sets of m
// uniform directions scaled to norm A (or a fixed action list).
class GlmEnv final : public Environment<Eigen::VectorXd> {
public:
    GlmEnv(GlmModel model, Eigen::VectorXd theta_star, NoiseSpec noise,
           int decision_set_size, std::uint64_t seed,
           std::optional<std::vector<Eigen::VectorXd>> fixed_actions = std::nullopt);

    int horizon() const override { return noise_.horizon(); }
    const std::vector<Eigen::VectorXd>& decision_set(int t) override;
    double true_value(const Eigen::VectorXd& a) const override;
    std::pair<double, double> pull(int t, const Eigen::VectorXd& a) override;

    const Eigen::VectorXd& theta_star() const { return theta_star_; }
    const GlmModel& model() const { return model_; }

private:
    GlmModel model_;
    Eigen::VectorXd theta_star_;
    NoiseSpec noise_;
    int m_;
    std::uint64_t env_seed_, noise_seed_;
    std::optional<std::vector<Eigen::VectorXd>> fixed_;
    int cached_t_ = -1;
    std::vector<Eigen::VectorXd> cached_set_;
};

// Greedy baseline with oracle access to f*: always plays the argmax.
template <class Action>
RunTrace run_oracle_episode(Environment<Action>& env, int T, double sigma_bar,
                            int L, std::uint64_t seed) {
    RunTrace trace;
    trace.seed = seed;
    for (int t = 1; t <= T; ++t) {
        const auto& ds = env.decision_set(t);
        int best = 0;
        for (int i = 1; i < static_cast<int>(ds.size()); ++i) {
            if (env.true_value(ds[static_cast<std::size_t>(i)]) >
                env.true_value(ds[static_cast<std::size_t>(best)])) {
                best = i;
            }
        }
        const auto [reward, sigma_t] = env.pull(t, ds[static_cast<std::size_t>(best)]);
        const int level = assign_level(sigma_t, sigma_bar, L);
        std::vector<double> truth(ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) truth[i] = env.true_value(ds[i]);
        record_round(trace, truth, best, reward, sigma_t, level);
        trace.rounds.back().chosen_score = truth[static_cast<std::size_t>(best)];
    }
    return trace;
}

struct ExperimentConfig {
    enum class EnvType { finite, glm };

    EnvType env_type = EnvType::finite;
    // finite
    FiniteFunctionClass cls;
    std::optional<int> f_star_index;
    // glm
    GlmModel glm;
    Eigen::VectorXd theta_star;
    std::optional<std::vector<Eigen::VectorXd>> fixed_actions;
    // common
    int decision_set_size = 20;
    NoiseSpec noise;
    std::string algorithm;  // ml2-erm-4.1 | ml2-erm-5.2 | ml2-gloc |
                            // baseline-eluder-ucb | oracle
    int T = 1;
    std::vector<std::uint64_t> seeds;
    double delta = 0.1;
    std::optional<double> alpha;      // nullopt: T^-2
    std::optional<double> sigma_bar;  // nullopt: per-algorithm default
    double lambda = 1.0;
    bool clip_predictions = false;
    int workers = 0;  // 0: hardware concurrency
    std::string out_dir;
    nlohmann::json echo;

    void validate() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::string& path);
};

struct ResolvedRunParams {
    double sigma_bar = 1.0;
    double alpha = 0.0;
    int L = 1;
    double n_alpha = 1.0;
    double dim_e = 0.0;  // eluder dimension used by the auto rule, if any
};

ResolvedRunParams resolve_params(const ExperimentConfig& cfg);

RunTrace run_single_episode(const ExperimentConfig& cfg,
                            const ResolvedRunParams& rp, std::uint64_t seed);

struct AggregateReport {
    nlohmann::json config_echo;
    std::vector<double> per_seed_final_regret;
    std::vector<double> mean_curve;
    std::vector<double> median_curve;
    std::vector<double> q25_curve;
    std::vector<double> q75_curve;
    double mean_j = 0.0;
    double coverage_violation_rate = 0.0;   // over all (seed, round) pairs
    double any_violation_rate = 0.0;        // fraction of seeds with a violation
    double final_round_violation_rate = 0.0;
    std::vector<double> level_occupancy;    // mean rounds per level
    int failures = 0;
    double wall_clock_sec = 0.0;
    ResolvedRunParams resolved;
    std::vector<RunTrace> traces;  // successful seeds, in seed order

    nlohmann::json to_json() const;
};

// Runs every seed as an independent episode (worker pool), aggregates, and
// when out_dir is set writes <out_dir>/trace.csv and <out_dir>/aggregate.json.
// Aborts when more than 10% of seeds fail.
AggregateReport run_experiment(const ExperimentConfig& cfg);

// Violation rates with binomial standard errors, per level and per round.
nlohmann::json coverage_report(const std::vector<RunTrace>& traces);

// One row per (seed, t); header pinned; floats at 17 significant digits.
void emit_csv(const std::vector<RunTrace>& traces, const std::string& path);

struct CsvRow {
    std::uint64_t seed = 0;
    int t = 0;
    int action_index = 0;
    int level = 0;
    double sigma_t = 0.0;
    double reward = 0.0;
    double regret_inst = 0.0;
    double regret_cum = 0.0;
    double j_cum = 0.0;
    int coverage_ok = 1;
};

std::vector<CsvRow> read_trace_csv(const std::string& path);

// Fraction and 95% interval half-width (normal approximation) for k/n.
struct RateEstimate {
    double rate = 0.0;
    double stderr_ = 0.0;
};
RateEstimate binomial_rate(int k, int n);

}  // namespace sim
}  // namespace hetbandit
