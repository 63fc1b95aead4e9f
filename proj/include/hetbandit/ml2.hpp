#pragma once
// Multi-level OFU loop. Each round: score every action in the decision set
// by min over levels of that level's optimistic value, act on the argmax,
// observe (r_t, sigma_t), route the data point to its variance level, and
// refresh only that level's confidence set. Untouched levels carry their
// sets over; their thresholds are re-evaluated lazily at query time with
// the current round index, which only enlarges them.

#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "hetbandit/core.hpp"

namespace hetbandit {

template <class Action>
struct LevelData {
    std::vector<int> rounds;
    std::vector<Action> actions;
    std::vector<double> rewards;

    bool empty() const { return rounds.empty(); }
    std::size_t size() const { return rounds.size(); }
    void push(int t, const Action& a, double r) {
        rounds.push_back(t);
        actions.push_back(a);
        rewards.push_back(r);
    }
};

// Pluggable per-level confidence-set builder. Implementations own their
// per-level set state; the framework owns the raw level data. A truth
// oracle may be installed for test-side coverage flags; the policy path
// never reads it.
template <class Action>
class ConfidenceSubroutine {
public:
    virtual ~ConfidenceSubroutine() = default;

    virtual void begin(int num_levels) = 0;

    // max_{f in C_{t,level}} f(a); nullopt signals an empty set (the caller
    // skips the level in the min).
    virtual std::optional<double> optimistic_value(int level, int t,
                                                   const Action& a) const = 0;

    // Incorporate round t, assigned to `level`; `data` is the level's full
    // history including the new point. Returns the coverage flag for this
    // subroutine's C_{t,level} when a truth oracle is installed.
    virtual std::optional<bool> refresh(int level, int t,
                                        const LevelData<Action>& data) = 0;

    // Truth membership of the set currently in force for `level`, with the
    // threshold evaluated at round t. Diagnostics only.
    virtual std::optional<bool> truth_in_current_set(int level, int t) const = 0;
};

struct Ml2Config {
    int T = 1;
    double R = 1.0;
    double sigma_bar = 1.0;
    double delta = 0.1;
    double alpha = 0.0;

    void validate() const {
        if (T < 1) throw std::invalid_argument("Ml2Config: T must be >= 1");
        if (!(R > 0.0)) throw std::invalid_argument("Ml2Config: R must be positive");
        if (!(sigma_bar > 0.0)) {
            throw std::invalid_argument("Ml2Config: sigma_bar must be positive");
        }
        if (!(delta > 0.0) || !(delta < 1.0)) {
            throw std::invalid_argument("Ml2Config: delta must be in (0,1)");
        }
        if (alpha < 0.0) throw std::invalid_argument("Ml2Config: alpha must be >= 0");
    }
};

struct OfuChoice {
    int action_index = 0;
    double score = 0.0;
};

// argmax over actions of min over levels of the optimistic value. Levels
// reporting an empty set are skipped; ties break to the lowest action index.
// level_value(l, a) -> std::optional<double>.
template <class Action, class LevelValueFn>
OfuChoice select_action_ofu(const std::vector<Action>& decision_set,
                            int num_levels, LevelValueFn&& level_value) {
    if (decision_set.empty()) {
        throw std::invalid_argument("select_action_ofu: empty decision set");
    }
    if (num_levels < 1) {
        throw std::invalid_argument("select_action_ofu: need at least one level");
    }
    OfuChoice best{-1, -std::numeric_limits<double>::infinity()};
    for (int i = 0; i < static_cast<int>(decision_set.size()); ++i) {
        double score = std::numeric_limits<double>::infinity();
        bool any = false;
        for (int l = 0; l < num_levels; ++l) {
            const auto v = level_value(l, decision_set[static_cast<std::size_t>(i)]);
            if (!v) continue;  // empty set: treated as +inf in the min
            any = true;
            if (*v < score) score = *v;
        }
        if (!any) {
            throw std::runtime_error(
                "select_action_ofu: every level's confidence set is empty");
        }
        if (best.action_index < 0 || score > best.score) {
            best = {i, score};
        }
    }
    return best;
}

// Environment protocol: per-round finite decision sets, truth oracle for
// regret accounting, and reward observation revealing sigma_t after acting.
template <class Action>
class Environment {
public:
    virtual ~Environment() = default;
    virtual int horizon() const = 0;
    virtual const std::vector<Action>& decision_set(int t) = 0;
    virtual double true_value(const Action& a) const = 0;
    // (reward, sigma_t); sigma_t is revealed only after the action commits.
    virtual std::pair<double, double> pull(int t, const Action& a) = 0;
};

class EpisodeError : public std::runtime_error {
public:
    EpisodeError(int round, const std::string& what)
        : std::runtime_error("round " + std::to_string(round) + ": " + what),
          round_(round) {}
    int round() const { return round_; }

private:
    int round_;
};

// Runs one episode of the multi-level loop. The returned trace carries
// per-round coverage flags when the subroutine has a truth oracle.
template <class Action>
RunTrace run_episode(Environment<Action>& env, const Ml2Config& cfg,
                     ConfidenceSubroutine<Action>& subroutine,
                     std::uint64_t seed) {
    cfg.validate();
    if (env.horizon() < cfg.T) {
        throw std::invalid_argument("run_episode: environment horizon shorter than T");
    }
    const int L = num_levels(cfg.R, cfg.sigma_bar);
    subroutine.begin(L);

    std::vector<LevelData<Action>> levels(static_cast<std::size_t>(L));
    RunTrace trace;
    trace.seed = seed;

    for (int t = 1; t <= cfg.T; ++t) {
        const auto& ds = env.decision_set(t);
        bool cov_all = true;
        for (int l = 0; l < L; ++l) {
            const auto c = subroutine.truth_in_current_set(l, t);
            if (c && !*c) cov_all = false;
        }
        OfuChoice choice;
        try {
            choice = select_action_ofu(ds, L, [&](int l, const Action& a) {
                return subroutine.optimistic_value(l, t, a);
            });
        } catch (const std::exception& e) {
            throw EpisodeError(t, e.what());
        }
        const Action& a_t = ds[static_cast<std::size_t>(choice.action_index)];
        const auto [reward, sigma_t] = env.pull(t, a_t);
        const int l_t = assign_level(sigma_t, cfg.sigma_bar, L);
        levels[static_cast<std::size_t>(l_t)].push(t, a_t, reward);

        std::optional<bool> cov;
        try {
            cov = subroutine.refresh(l_t, t, levels[static_cast<std::size_t>(l_t)]);
        } catch (const std::exception& e) {
            throw EpisodeError(t, e.what());
        }

        std::vector<double> truth(ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) {
            truth[i] = env.true_value(ds[i]);
        }
        record_round(trace, truth, choice.action_index, reward, sigma_t, l_t);
        RoundRecord& rec = trace.rounds.back();
        rec.coverage_ok = cov.value_or(true);
        rec.coverage_all = cov_all;
        rec.chosen_score = choice.score;
        if (!rec.coverage_ok) ++trace.coverage_violations;
    }
    return trace;
}

}  // namespace hetbandit
