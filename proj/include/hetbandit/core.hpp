#pragma once
// Core domain types for bandit learning under heteroscedastic noise:
// per-round variance proxies sigma_t, dyadic variance levels, regret
// accounting, and finite reward-function classes.
//
// Levels are 0-indexed {0,...,L-1}. Round t with effective deviation
// sigma_eff = max(sigma_bar, sigma_t) lands in level floor(log2(sigma_eff /
// sigma_bar)), clamped to the top level, so within a level sigma_eff varies
// by at most a factor of 2 (except above the top boundary, which is clamped).

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hetbandit {

// L = max(1, ceil(log2(R / sigma_bar))). The floor of 1 covers the
// degenerate case R <= sigma_bar, where a single level suffices.
int num_levels(double R, double sigma_bar);

// clamp(floor(log2(max(sigma_bar, sigma_t) / sigma_bar)), 0, L - 1).
// Exact powers of two are resolved by exponent extraction with a 1e-12
// relative tolerance, and ties go to the level whose lower endpoint they hit.
int assign_level(double sigma_t, double sigma_bar, int L);

enum class NoiseKind { gaussian, bounded_uniform };

// Pre-run noise schedule: sigma_t for t = 1..T plus the sub-Gaussian
// envelope R. Gaussian draws have std exactly sigma_t; bounded draws are
// uniform on [-sigma_t*sqrt(3), sigma_t*sqrt(3)] (second moment sigma_t^2).
struct NoiseSpec {
    double R = 1.0;
    NoiseKind kind = NoiseKind::gaussian;
    std::vector<double> schedule;  // schedule[t-1] = sigma_t

    void validate() const;  // requires 0 <= sigma_t < R for all t
    double sigma(int t) const;
    int horizon() const { return static_cast<int>(schedule.size()); }

    static NoiseSpec constant(double R, double sigma, int T,
                              NoiseKind kind = NoiseKind::gaussian);
    // sigma_high on rounds t with t % period == 1 (0-phase burst), else low.
    static NoiseSpec bursty(double R, double sigma_high, double sigma_low,
                            int period, int T,
                            NoiseKind kind = NoiseKind::gaussian);
    // sigma_t = max(floor_sigma, sigma0 / sqrt(t)).
    static NoiseSpec decaying(double R, double sigma0, double floor_sigma,
                              int T, NoiseKind kind = NoiseKind::gaussian);
};

// One draw of epsilon_t. sigma_t = 0 returns exactly 0.
double sample_noise(const NoiseSpec& spec, int t, std::mt19937_64& rng);

// Round-index sets Psi_l, one per level; disjoint and covering 1..t.
struct LevelPartition {
    double sigma_bar = 1.0;
    std::vector<std::vector<int>> sets;

    LevelPartition() = default;
    LevelPartition(double sigma_bar_, int L) : sigma_bar(sigma_bar_), sets(L) {}

    int levels() const { return static_cast<int>(sets.size()); }
    void add(int t, int level);
    int total() const;
};

struct RoundRecord {
    int t = 0;
    int action_index = 0;  // index into that round's decision set
    int level = 0;
    double sigma = 0.0;
    double reward = 0.0;
    double regret_inst = 0.0;
    double regret_cum = 0.0;
    double j_cum = 0.0;
    bool coverage_ok = true;      // truth in the refreshed level's set
    bool coverage_all = true;     // truth in every level's set at selection
    double chosen_score = 0.0;    // OFU score of the chosen action
    double opt_value = 0.0;       // max_a f*(a) over the decision set
};

// Per-run log: one RoundRecord per round plus the run-level gap and
// coverage summary. Owned by exactly one episode.
struct RunTrace {
    std::uint64_t seed = 0;
    double reward_scale = 1.0;  // reward units per internal unit (see erm)
    std::vector<RoundRecord> rounds;
    double gap = std::numeric_limits<double>::infinity();
    int coverage_violations = 0;

    double final_regret() const {
        return rounds.empty() ? 0.0 : rounds.back().regret_cum;
    }
    double final_j() const {
        return rounds.empty() ? 0.0 : rounds.back().j_cum;
    }
};

// Appends one round. truth_values[i] = f*(decision_set[i]); the chosen
// action must index into it. Updates instantaneous/cumulative regret and
// the running J = sum sigma_s^2, and folds the round's gap into trace.gap.
void record_round(RunTrace& trace, const std::vector<double>& truth_values,
                  int action_index, double reward, double sigma_t, int level);

// Smallest positive optimality gap across rounds; +inf when every action in
// every round is optimal.
double minimum_gap(const std::vector<std::vector<double>>& truth_values_per_round);

// Finite family of bounded reward functions: value table indexed by
// (function, action), entries bounded by `bound` in absolute value.
struct FiniteFunctionClass {
    Eigen::MatrixXd table;  // num_functions x num_actions
    double bound = 1.0;     // C
    std::vector<std::string> action_ids;  // optional labels, size num_actions

    int num_functions() const { return static_cast<int>(table.rows()); }
    int num_actions() const { return static_cast<int>(table.cols()); }
    double value(int f, int a) const { return table(f, a); }

    void validate() const;
    // {"actions": [...], "functions": [[...],...], "bound": C}
    static FiniteFunctionClass from_json_text(const std::string& text);
    static FiniteFunctionClass from_json_file(const std::string& path);
};

// Deterministic stream splitting so environment and noise draws stay
// reproducible independent of call interleaving.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace hetbandit
