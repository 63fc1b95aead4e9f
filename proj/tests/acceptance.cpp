// Acceptance suite. Each criterion prints one line:
//   [PASS|FAIL] criterion N: <what was measured>
// Run with a criterion number (1..9) or with no argument for all of them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "hetbandit/eluder.hpp"
#include "hetbandit/erm.hpp"
#include "hetbandit/glm.hpp"
#include "hetbandit/ml2.hpp"
#include "hetbandit/sim.hpp"

using namespace hetbandit;
using namespace hetbandit::sim;

namespace {

nlohmann::json random_class_json(int F, int A, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    nlohmann::json funcs = nlohmann::json::array();
    for (int f = 0; f < F; ++f) {
        nlohmann::json row = nlohmann::json::array();
        for (int a = 0; a < A; ++a) row.push_back(u(rng));
        funcs.push_back(row);
    }
    return nlohmann::json{{"functions", funcs}, {"bound", 1.0}};
}

FiniteFunctionClass random_class(int F, int A, unsigned seed) {
    return FiniteFunctionClass::from_json_text(random_class_json(F, A, seed).dump());
}

Eigen::VectorXd random_direction(int d, double norm, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = g(rng);
    return v * (norm / v.norm());
}

// Small worker pool over seed indices for the library-level criteria.
void parallel_for_seeds(int n, const std::function<void(int)>& body) {
    std::atomic<int> next{0};
    const int workers =
        std::clamp(static_cast<int>(std::thread::hardware_concurrency()), 1, n);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                body(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

struct MeanCi {
    double mean = 0.0;
    double se = 0.0;
    double lo() const { return mean - 1.96 * se; }
    double hi() const { return mean + 1.96 * se; }
};

MeanCi mean_ci(const std::vector<double>& xs) {
    MeanCi m;
    if (xs.empty()) return m;
    m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - m.mean) * (x - m.mean);
    if (xs.size() > 1) var /= static_cast<double>(xs.size() - 1);
    m.se = std::sqrt(var / static_cast<double>(xs.size()));
    return m;
}

bool report(int n, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", n, detail.c_str());
    std::fflush(stdout);
    return pass;
}

// --- criterion 1: variance-aware confidence coverage at the final round ---
bool criterion_1() {
    const int T = 500, n_seeds = 400;
    const double delta = 0.1, R = 2.0, sigma_bar = 0.1;
    const auto cls = random_class(20, 10, 101);
    const int L = num_levels(R, sigma_bar);
    const auto noise = NoiseSpec::bursty(R, 1.9, 0.05, 5, T);

    std::vector<int> violated(n_seeds, 0);
    parallel_for_seeds(n_seeds, [&](int i) {
        const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(i);
        FiniteClassEnv env(cls, std::nullopt, noise, 10, seed);
        BetaSchedule beta;
        beta.kind = BetaKind::variance_aware;
        beta.C = 1.0;
        beta.R = R;
        beta.sigma_bar = sigma_bar;
        beta.L = L;
        beta.delta = delta;
        beta.alpha = 1.0 / (static_cast<double>(T) * T);
        beta.n_alpha = 20.0;
        ErmSubroutine sub(cls, beta, false, env.f_star_index());
        Ml2Config cfg;
        cfg.T = T;
        cfg.R = R;
        cfg.sigma_bar = sigma_bar;
        cfg.delta = delta;
        cfg.alpha = beta.alpha;
        const auto trace = run_episode<int>(env, cfg, sub, seed);
        if (!trace.rounds.back().coverage_ok) violated[static_cast<std::size_t>(i)] = 1;
    });
    const int k = std::accumulate(violated.begin(), violated.end(), 0);
    const double rate = static_cast<double>(k) / n_seeds;
    const double budget = 2.0 * delta + 0.06;
    std::ostringstream os;
    os << "final-round coverage violation rate " << rate << " (" << k << "/"
       << n_seeds << ") <= " << budget;
    return report(1, rate <= budget, os.str());
}

// --- criterion 2: ellipsoid coverage across all rounds ---
bool criterion_2() {
    nlohmann::json j{
        {"environment",
         {{"type", "glm"},
          {"d", 3},
          {"link", "identity"},
          {"A", 1.0},
          {"B", 1.0},
          {"theta_star", {0.54, -0.432, 0.576}},
          {"decision_set_size", 10}}},
        {"noise",
         {{"kind", "bursty"}, {"R", 1.0}, {"sigma_high", 0.9}, {"sigma_low", 0.05}, {"period", 4}}},
        {"algorithm", "ml2-gloc"},
        {"horizon", 300},
        {"seeds", {{"base", 2000}, {"count", 400}}},
        {"delta", 0.05},
        {"sigma_bar", 0.1},
        {"lambda", 1.0}};
    const auto rep = run_experiment(ExperimentConfig::from_json(j));
    const double rate = rep.any_violation_rate;
    const double budget = 0.20 + 0.06;
    std::ostringstream os;
    os << "any-round ellipsoid violation rate " << rate << " <= " << budget
       << " (failures " << rep.failures << ")";
    return report(2, rate <= budget && rep.failures == 0, os.str());
}

// --- criteria 3 and 4 share the online-regression runs ---
struct FtrlRuns {
    int bound_ok = 0;
    int prediction_bound_violations = 0;
    int n = 0;
};

FtrlRuns run_ftrl_monte_carlo() {
    const int T = 500, n_seeds = 200, d = 2;
    const double sigma = 0.2, R = 1.0, delta = 0.05;
    const auto model = GlmModel::identity_link(d, 1.0, 1.0);
    const double bound = ftrl_regret_bound(T, sigma, R, model, delta);

    std::vector<int> ok(n_seeds, 0), viol(n_seeds, 0);
    parallel_for_seeds(n_seeds, [&](int i) {
        std::mt19937_64 rng(split_seed(3000 + static_cast<std::uint64_t>(i), 0));
        const Eigen::VectorXd star = random_direction(d, 0.9, rng);
        FtrlOnlineLearner learner(model);
        std::normal_distribution<double> noise(0.0, sigma);
        for (int t = 1; t <= T; ++t) {
            const Eigen::VectorXd a = random_direction(d, 1.0, rng);
            learner.observe(a, star.dot(a) + noise(rng));
        }
        if (online_regression_regret(learner.trace(), star, model) <= bound) {
            ok[static_cast<std::size_t>(i)] = 1;
        }
        if (!check_prediction_error_bound(learner.trace(), star, model, R, delta).holds) {
            viol[static_cast<std::size_t>(i)] = 1;
        }
    });
    FtrlRuns out;
    out.n = n_seeds;
    out.bound_ok = std::accumulate(ok.begin(), ok.end(), 0);
    out.prediction_bound_violations = std::accumulate(viol.begin(), viol.end(), 0);
    return out;
}

bool criterion_3() {
    const auto runs = run_ftrl_monte_carlo();
    const double frac = static_cast<double>(runs.bound_ok) / runs.n;
    std::ostringstream os;
    os << "online-regression regret within the closed-form envelope on "
       << runs.bound_ok << "/" << runs.n << " seeds (need >= 85%)";
    return report(3, frac >= 0.85, os.str());
}

bool criterion_4() {
    const auto runs = run_ftrl_monte_carlo();
    const double rate =
        static_cast<double>(runs.prediction_bound_violations) / runs.n;
    std::ostringstream os;
    os << "prediction-error bound violated on " << rate
       << " of seeds (budget delta + 0.05 = 0.10)";
    return report(4, rate <= 0.10, os.str());
}

// --- criterion 5: oracle equivalences ---
bool criterion_5() {
    std::mt19937_64 rng(505);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    // (a) erm_fit vs exhaustive loss minimum, 1000 instances
    int erm_ok = 0;
    {
        std::uniform_int_distribution<int> nf(1, 50), na(1, 20), nd(0, 120);
        for (int trial = 0; trial < 1000; ++trial) {
            const int F = nf(rng), A = na(rng), n = nd(rng);
            FiniteFunctionClass cls;
            cls.table.resize(F, A);
            for (int f = 0; f < F; ++f) {
                for (int a = 0; a < A; ++a) cls.table(f, a) = u(rng);
            }
            cls.bound = 1.0;
            std::vector<int> actions;
            std::vector<double> rewards;
            std::uniform_int_distribution<int> pick(0, A - 1);
            for (int i = 0; i < n; ++i) {
                actions.push_back(pick(rng));
                rewards.push_back(2.0 * u(rng));
            }
            std::vector<double> losses(static_cast<std::size_t>(F), 0.0);
            for (int f = 0; f < F; ++f) {
                for (int i = 0; i < n; ++i) {
                    const double d = cls.value(f, actions[static_cast<std::size_t>(i)]) -
                                     rewards[static_cast<std::size_t>(i)];
                    losses[static_cast<std::size_t>(f)] += d * d;
                }
            }
            const int oracle = static_cast<int>(
                std::min_element(losses.begin(), losses.end()) - losses.begin());
            if (erm_fit(actions, rewards, cls) == oracle) ++erm_ok;
        }
    }

    // (b) ftrl_step vs closed-form regularized least squares, 200 instances
    int ftrl_ok = 0;
    {
        std::uniform_int_distribution<int> nd(1, 10), nn(0, 500);
        for (int trial = 0; trial < 200; ++trial) {
            const int d = nd(rng), n = nn(rng);
            const auto model = GlmModel::identity_link(d, 1.0, 1.0);
            std::vector<Eigen::VectorXd> actions;
            std::vector<double> rewards;
            std::uniform_real_distribution<double> un(0.05, 1.0);
            for (int i = 0; i < n; ++i) {
                actions.push_back(random_direction(d, un(rng), rng));
                rewards.push_back(2.0 * u(rng));
            }
            Eigen::MatrixXd lhs = 4.0 * Eigen::MatrixXd::Identity(d, d);
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
            for (std::size_t i = 0; i < actions.size(); ++i) {
                lhs += actions[i] * actions[i].transpose();
                rhs += rewards[i] * actions[i];
            }
            const Eigen::VectorXd oracle = lhs.ldlt().solve(rhs);
            if ((ftrl_step(actions, rewards, model) - oracle).norm() <= 1e-8) {
                ++ftrl_ok;
            }
        }
    }

    // (c) ellipsoid ucb vs dense boundary sampling, 100 instances
    int ucb_ok = 0;
    {
        for (int trial = 0; trial < 100; ++trial) {
            Eigen::MatrixXd base(2, 2);
            base << 1.0 + std::abs(u(rng)), 0.5 * u(rng), 0.5 * u(rng),
                1.0 + std::abs(u(rng));
            const Eigen::MatrixXd shape =
                base * base.transpose() + 0.3 * Eigen::MatrixXd::Identity(2, 2);
            Eigen::VectorXd center(2);
            center << 0.5 * u(rng), 0.5 * u(rng);
            const double beta = 0.2 + std::abs(u(rng));
            const auto model = GlmModel::identity_link(2, 1.0, 50.0);
            const EllipsoidConfidenceSet set{center, shape, beta};
            const Eigen::VectorXd a = random_direction(2, 1.0, rng);
            const double ucb = ucb_value_glm(set, a, model);

            const Eigen::LLT<Eigen::MatrixXd> llt(shape);
            const Eigen::MatrixXd l_inv =
                llt.matrixL().solve(Eigen::MatrixXd::Identity(2, 2));
            double sampled = -1e300;
            const int n = 10000;
            for (int k = 0; k < n; ++k) {
                const double phi = 2.0 * M_PI * k / n;
                Eigen::VectorXd dir(2);
                dir << std::cos(phi), std::sin(phi);
                const Eigen::VectorXd theta =
                    center + std::sqrt(beta) * (l_inv.transpose() * dir);
                sampled = std::max(sampled, model.h(a.dot(theta)));
            }
            if (sampled <= ucb + 1e-12 && ucb - sampled <= 1e-3) ++ucb_ok;
        }
    }

    std::ostringstream os;
    os << "oracle equivalences: erm " << erm_ok << "/1000, ftrl " << ftrl_ok
       << "/200, ellipsoid ucb " << ucb_ok << "/100";
    return report(5, erm_ok == 1000 && ftrl_ok == 200 && ucb_ok == 100, os.str());
}

// --- criterion 6: variance-dependent advantage and worst-case degradation ---
bool criterion_6() {
    const int T = 2000, n_seeds = 100;
    const double R = 2.0;
    // sigma = R exactly would leave the sub-Gaussian envelope non-strict, so
    // the homoscedastic arm sits one part in a million below it.
    const double sigma_high = R * (1.0 - 1e-6);
    nlohmann::json base{
        {"environment",
         {{"type", "finite"},
          {"class", random_class_json(20, 10, 606)},
          {"decision_set_size", 10}}},
        {"noise",
         {{"kind", "bursty"}, {"R", R}, {"sigma_high", sigma_high}, {"sigma_low", 0.02}, {"period", 100}}},
        {"algorithm", "ml2-erm-4.1"},
        {"horizon", T},
        {"seeds", {{"base", 4000}, {"count", n_seeds}}},
        {"delta", 0.1}};

    auto run_mean = [&](const nlohmann::json& j) {
        const auto rep = run_experiment(ExperimentConfig::from_json(j));
        return mean_ci(rep.per_seed_final_regret);
    };

    auto bursty_ml2 = base;
    auto bursty_base = base;
    bursty_base["algorithm"] = "baseline-eluder-ucb";
    const auto m_ml2 = run_mean(bursty_ml2);
    const auto m_base = run_mean(bursty_base);

    auto flat_ml2 = base;
    flat_ml2["noise"] = {{"kind", "constant"}, {"R", R}, {"sigma", sigma_high}};
    // Align the dyadic grid so the constant noise sits at the lower edge of
    // the top level: its threshold envelope is then (2 sigma)^2, the same
    // scale the single-level baseline uses. Where R falls inside the top
    // band is otherwise an arbitrary rounding of sigma_bar, not a property
    // of either algorithm.
    flat_ml2["sigma_bar"] = sigma_high / 8.0;
    auto flat_base = flat_ml2;
    flat_base["algorithm"] = "baseline-eluder-ucb";
    const auto f_ml2 = run_mean(flat_ml2);
    const auto f_base = run_mean(flat_base);

    const bool advantage = m_ml2.mean < 0.5 * m_base.mean;
    const bool overlap = f_ml2.lo() <= f_base.hi() && f_base.lo() <= f_ml2.hi();
    std::ostringstream os;
    os << "bursty mean regret " << m_ml2.mean << " vs baseline " << m_base.mean
       << " (need < 0.5x); flat-noise means " << f_ml2.mean << " [" << f_ml2.lo()
       << "," << f_ml2.hi() << "] vs " << f_base.mean << " [" << f_base.lo() << ","
       << f_base.hi() << "] (need overlapping 95% CIs)";
    return report(6, advantage && overlap, os.str());
}

// --- criterion 7: eluder brute force ---
namespace naive {

bool independent(const FiniteFunctionClass& cls, int a, const std::vector<int>& prefix,
                 double ep) {
    for (int f = 0; f < cls.num_functions(); ++f) {
        for (int g = 0; g < cls.num_functions(); ++g) {
            double s = 0.0;
            for (int b : prefix) {
                const double d = cls.value(f, b) - cls.value(g, b);
                s += d * d;
            }
            if (std::sqrt(s) <= ep && cls.value(f, a) - cls.value(g, a) > ep) {
                return true;
            }
        }
    }
    return false;
}

int longest(const FiniteFunctionClass& cls, double ep, std::vector<int>& prefix,
            std::vector<bool>& used) {
    int best = static_cast<int>(prefix.size());
    for (int a = 0; a < cls.num_actions(); ++a) {
        if (used[static_cast<std::size_t>(a)] || !independent(cls, a, prefix, ep)) {
            continue;
        }
        used[static_cast<std::size_t>(a)] = true;
        prefix.push_back(a);
        best = std::max(best, longest(cls, ep, prefix, used));
        prefix.pop_back();
        used[static_cast<std::size_t>(a)] = false;
    }
    return best;
}

int dimension(const FiniteFunctionClass& cls, double eps) {
    const int n = cls.num_actions();
    std::vector<double> cands{eps};
    for (int f = 0; f < cls.num_functions(); ++f) {
        for (int g = 0; g < cls.num_functions(); ++g) {
            for (int mask = 0; mask < (1 << n); ++mask) {
                double s = 0.0;
                for (int a = 0; a < n; ++a) {
                    if (mask & (1 << a)) {
                        const double d = cls.value(f, a) - cls.value(g, a);
                        s += d * d;
                    }
                }
                if (std::sqrt(s) >= eps) cands.push_back(std::sqrt(s));
            }
        }
    }
    int best = 0;
    for (double ep : cands) {
        std::vector<int> prefix;
        std::vector<bool> used(static_cast<std::size_t>(n), false);
        best = std::max(best, longest(cls, ep, prefix, used));
    }
    return best;
}

}  // namespace naive

bool criterion_7() {
    // singleton class
    FiniteFunctionClass single;
    single.table.resize(1, 3);
    single.table << 0.2, -0.4, 0.9;
    single.bound = 1.0;
    const bool a = eluder::eluder_dimension(single, 0.5).dimension == 0;

    // all binary functions on three actions
    FiniteFunctionClass binary;
    binary.table.resize(8, 3);
    for (int mask = 0; mask < 8; ++mask) {
        for (int i = 0; i < 3; ++i) binary.table(mask, i) = (mask >> i) & 1;
    }
    binary.bound = 1.0;
    const bool b = eluder::eluder_dimension(binary, 0.5).dimension == 3 &&
                   naive::dimension(binary, 0.5) == 3;

    // random instances vs the unmemoized sweep
    std::mt19937_64 rng(707);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> nf(1, 8), na(1, 5);
    std::uniform_real_distribution<double> ue(0.1, 1.2);
    int agree = 0;
    const int trials = 300;
    for (int trial = 0; trial < trials; ++trial) {
        const int F = nf(rng), A = na(rng);
        FiniteFunctionClass cls;
        cls.table.resize(F, A);
        for (int f = 0; f < F; ++f) {
            for (int x = 0; x < A; ++x) cls.table(f, x) = u(rng);
        }
        cls.bound = 1.0;
        const double eps = ue(rng);
        if (eluder::eluder_dimension(cls, eps).dimension ==
            naive::dimension(cls, eps)) {
            ++agree;
        }
    }
    std::ostringstream os;
    os << "eluder: singleton->0 " << (a ? "ok" : "BAD") << ", binary3->3 "
       << (b ? "ok" : "BAD") << ", exact agrees with naive sweep on " << agree
       << "/" << trials << " random instances";
    return report(7, a && b && agree == trials, os.str());
}

// --- criterion 8: determinism and CSV schema ---
bool criterion_8() {
    const auto tmp = std::filesystem::temp_directory_path();
    const auto dir_a = (tmp / "hetbandit_acc8_a").string();
    const auto dir_b = (tmp / "hetbandit_acc8_b").string();
    nlohmann::json j{
        {"environment",
         {{"type", "finite"},
          {"class", random_class_json(8, 6, 808)},
          {"decision_set_size", 4}}},
        {"noise",
         {{"kind", "bursty"}, {"R", 1.0}, {"sigma_high", 0.9}, {"sigma_low", 0.05}, {"period", 7}}},
        {"algorithm", "ml2-erm-4.1"},
        {"horizon", 120},
        {"seeds", {{"base", 10}, {"count", 5}}},
        {"delta", 0.1},
        {"out_dir", dir_a},
        {"workers", 2}};
    run_experiment(ExperimentConfig::from_json(j));
    j["out_dir"] = dir_b;
    j["workers"] = 1;
    run_experiment(ExperimentConfig::from_json(j));

    const auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const std::string bytes_a = slurp(dir_a + "/trace.csv");
    const bool identical = !bytes_a.empty() && bytes_a == slurp(dir_b + "/trace.csv");

    bool schema_ok = bytes_a.rfind(
                         "seed,t,action_index,level,sigma_t,reward,regret_inst,"
                         "regret_cum,J_cum,coverage_ok\n", 0) == 0;
    // Round trip: cumulative regret reconstructs exactly.
    bool roundtrip = true;
    const auto rows = read_trace_csv(dir_a + "/trace.csv");
    std::uint64_t cur = 0;
    bool have = false;
    double cum = 0.0;
    for (const auto& r : rows) {
        if (!have || r.seed != cur) {
            cur = r.seed;
            have = true;
            cum = 0.0;
        }
        cum += r.regret_inst;
        if (cum != r.regret_cum) roundtrip = false;
    }
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
    std::ostringstream os;
    os << "byte-identical CSV " << (identical ? "ok" : "BAD") << ", pinned header "
       << (schema_ok ? "ok" : "BAD") << ", exact cumulative round trip "
       << (roundtrip ? "ok" : "BAD") << " (" << rows.size() << " rows)";
    return report(8, identical && schema_ok && roundtrip, os.str());
}

// --- criterion 9: larger gaps give smaller regret ---
bool criterion_9() {
    const int T = 2000, n_seeds = 100;
    // The truth peaks on the second action; lowest-index tie-breaking starts
    // every run on the suboptimal arm until the swapped competitor leaves
    // the confidence set, so the elimination speed (driven by the gap)
    // shows up in the regret.
    auto gap_config = [&](double gap) {
        return nlohmann::json{
            {"environment",
             {{"type", "finite"},
              {"class",
               {{"functions", {{0.0, gap}, {gap, 0.0}, {-0.2, -0.2}}},
                {"bound", 1.0}}},
              {"f_star_index", 0},
              {"decision_set_size", 2}}},
            {"noise", {{"kind", "constant"}, {"R", 1.0}, {"sigma", 0.25}}},
            {"algorithm", "ml2-erm-4.1"},
            {"horizon", T},
            {"seeds", {{"base", 9000}, {"count", n_seeds}}},
            {"delta", 0.1}};
    };
    const auto wide = run_experiment(ExperimentConfig::from_json(gap_config(0.5)));
    const auto narrow = run_experiment(ExperimentConfig::from_json(gap_config(0.1)));
    // The environments really do have the configured gaps.
    bool gaps_ok = true;
    for (const auto& tr : wide.traces) gaps_ok = gaps_ok && tr.gap == 0.5;
    for (const auto& tr : narrow.traces) gaps_ok = gaps_ok && tr.gap == 0.1;
    const auto m_wide = mean_ci(wide.per_seed_final_regret);
    const auto m_narrow = mean_ci(narrow.per_seed_final_regret);
    std::ostringstream os;
    os << "mean final regret gap=0.5: " << m_wide.mean << ", gap=0.1: "
       << m_narrow.mean << " (need strictly smaller for the wider gap)";
    return report(9, gaps_ok && m_wide.mean < m_narrow.mean, os.str());
}

}  // namespace

int main(int argc, char** argv) {
    using Criterion = bool (*)();
    const Criterion criteria[] = {criterion_1, criterion_2, criterion_3,
                                  criterion_4, criterion_5, criterion_6,
                                  criterion_7, criterion_8, criterion_9};
    bool all_ok = true;
    const auto run_one = [&](int n) {
        const auto t0 = std::chrono::steady_clock::now();
        const bool ok = criteria[n - 1]();
        const double sec =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("        criterion %d wall clock: %.1fs\n", n, sec);
        all_ok = all_ok && ok;
    };
    try {
        if (argc > 1) {
            const int n = std::atoi(argv[1]);
            if (n < 1 || n > 9) {
                std::fprintf(stderr, "usage: acceptance [1..9]\n");
                return 2;
            }
            run_one(n);
        } else {
            for (int n = 1; n <= 9; ++n) run_one(n);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "acceptance: unexpected error: %s\n", e.what());
        return 2;
    }
    return all_ok ? 0 : 1;
}
