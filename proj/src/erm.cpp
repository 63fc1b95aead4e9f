#include "hetbandit/erm.hpp"

#include <algorithm>
#include <cmath>

namespace hetbandit {

void BetaSchedule::validate() const {
    if (!(delta > 0.0) || !(delta < 1.0)) {
        throw std::invalid_argument("BetaSchedule: delta must be in (0,1)");
    }
    if (!(sigma_bar > 0.0)) {
        throw std::invalid_argument("BetaSchedule: sigma_bar must be positive");
    }
    if (!(R > 0.0)) throw std::invalid_argument("BetaSchedule: R must be positive");
    if (C < 0.0) throw std::invalid_argument("BetaSchedule: C must be >= 0");
    if (alpha < 0.0) throw std::invalid_argument("BetaSchedule: alpha must be >= 0");
    if (n_alpha < 1.0) throw std::invalid_argument("BetaSchedule: n_alpha must be >= 1");
    if (L < 1) throw std::invalid_argument("BetaSchedule: L must be >= 1");
    if (kind == BetaKind::variance_aware_union && C != 1.0) {
        throw std::invalid_argument(
            "BetaSchedule: union form requires C = 1 (rescale rewards)");
    }
}

double BetaSchedule::beta2(int t, int level) const {
    if (t < 1) throw std::invalid_argument("BetaSchedule: t must be >= 1");
    if (level < 0 || level >= L) {
        throw std::invalid_argument("BetaSchedule: level out of range");
    }
    const double td = static_cast<double>(t);
    const double Ld = static_cast<double>(L);
    const double s = std::ldexp(sigma_bar, level + 1);  // 2^{l+1} sigma_bar
    const double s2 = s * s;
    switch (kind) {
        case BetaKind::subgaussian: {
            double v = 8.0 * s2 * std::log(2.0 * n_alpha * Ld / delta);
            v += 4.0 * td * alpha *
                 (C + std::sqrt(s2 * std::log(4.0 * td * (td + 1.0) * Ld / delta)));
            return v;
        }
        case BetaKind::variance_aware: {
            const double rbar = R * std::sqrt(2.0 * std::log(4.0 * td * td / delta));
            const double lg = std::log(2.0 * n_alpha * td * td / delta);
            return 12.0 * C * alpha * td + 4.0 * alpha * rbar * td +
                   (8.0 / 3.0) * C * rbar * lg + 16.0 * s2 * lg;
        }
        case BetaKind::variance_aware_union: {
            const double rbar =
                R * std::sqrt(2.0 * std::log(4.0 * td * td * Ld / delta));
            const double lg = std::log(2.0 * n_alpha * td * td * Ld / delta);
            return 12.0 * alpha * td + 4.0 * alpha * rbar * td +
                   (8.0 / 3.0) * rbar * lg + 16.0 * s2 * lg;
        }
    }
    throw std::logic_error("BetaSchedule: unknown kind");
}

bool EnumeratedConfidenceSet::contains(int f) const {
    return std::binary_search(members.begin(), members.end(), f);
}

int erm_fit(const std::vector<int>& actions, const std::vector<double>& rewards,
            const FiniteFunctionClass& cls) {
    if (actions.size() != rewards.size()) {
        throw std::invalid_argument("erm_fit: actions/rewards size mismatch");
    }
    for (int a : actions) {
        if (a < 0 || a >= cls.num_actions()) {
            throw std::invalid_argument("erm_fit: action outside class universe");
        }
    }
    int best = 0;
    double best_loss = std::numeric_limits<double>::infinity();
    for (int f = 0; f < cls.num_functions(); ++f) {
        double loss = 0.0;
        for (std::size_t i = 0; i < actions.size(); ++i) {
            const double d = cls.value(f, actions[i]) - rewards[i];
            loss += d * d;
        }
        if (loss < best_loss) {  // strict: ties keep the lowest index
            best_loss = loss;
            best = f;
        }
    }
    return best;
}

EnumeratedConfidenceSet build_confidence_set(const FiniteFunctionClass& cls,
                                             const std::vector<int>& actions,
                                             int fhat, double beta2) {
    EnumeratedConfidenceSet set;
    set.fhat = fhat;
    set.beta2 = beta2;
    for (int g = 0; g < cls.num_functions(); ++g) {
        double d2 = 0.0;
        for (int a : actions) {
            const double d = cls.value(g, a) - cls.value(fhat, a);
            d2 += d * d;
        }
        if (d2 <= beta2) set.members.push_back(g);
    }
    return set;
}

std::optional<double> ucb_value(const EnumeratedConfidenceSet& set,
                                const FiniteFunctionClass& cls, int action) {
    if (set.members.empty()) return std::nullopt;
    double best = -std::numeric_limits<double>::infinity();
    for (int g : set.members) {
        best = std::max(best, cls.value(g, action));
    }
    return best;
}

ErmSubroutine::ErmSubroutine(FiniteFunctionClass cls, BetaSchedule beta,
                             bool rescale_to_unit_bound,
                             std::optional<int> truth_index)
    : cls_(std::move(cls)), beta_(beta), truth_(truth_index) {
    cls_.validate();
    if (rescale_to_unit_bound && cls_.bound != 1.0) {
        if (!(cls_.bound > 0.0)) {
            throw std::invalid_argument("ErmSubroutine: cannot rescale with bound 0");
        }
        scale_ = cls_.bound;
        cls_.table /= scale_;
        cls_.bound = 1.0;
        beta_.C = 1.0;
        beta_.R /= scale_;
        beta_.sigma_bar /= scale_;
    }
    beta_.validate();
    if (truth_ && (*truth_ < 0 || *truth_ >= cls_.num_functions())) {
        throw std::invalid_argument("ErmSubroutine: truth index out of range");
    }
}

void ErmSubroutine::begin(int num_levels) {
    if (num_levels != beta_.L) {
        throw std::invalid_argument("ErmSubroutine: level count disagrees with schedule L");
    }
    levels_.assign(static_cast<std::size_t>(num_levels), Level{});
    for (auto& lv : levels_) {
        lv.loss.assign(static_cast<std::size_t>(cls_.num_functions()), 0.0);
        lv.dist2.assign(static_cast<std::size_t>(cls_.num_functions()), 0.0);
    }
}

std::optional<double> ErmSubroutine::optimistic_value(int level, int t,
                                                      const int& action) const {
    const auto& lv = levels_.at(static_cast<std::size_t>(level));
    const double b2 = beta_.beta2(t, level);
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (int g = 0; g < cls_.num_functions(); ++g) {
        if (lv.dist2[static_cast<std::size_t>(g)] <= b2) {
            any = true;
            best = std::max(best, cls_.value(g, action));
        }
    }
    if (!any) return std::nullopt;  // unreachable: fhat has distance 0
    return best * scale_;
}

std::optional<bool> ErmSubroutine::refresh(int level, int t,
                                           const LevelData<int>& data) {
    auto& lv = levels_.at(static_cast<std::size_t>(level));
    // Coverage is checked against the set in force before this refresh,
    // i.e. the one built from rounds before t, with the threshold at t.
    std::optional<bool> covered = truth_in_current_set(level, t);

    const int a = data.actions.back();
    const double r = data.rewards.back() / scale_;
    if (a < 0 || a >= cls_.num_actions()) {
        throw std::invalid_argument("ErmSubroutine: action outside class universe");
    }
    lv.actions.push_back(a);
    lv.rewards.push_back(r);
    for (int g = 0; g < cls_.num_functions(); ++g) {
        const double d = cls_.value(g, a) - r;
        lv.loss[static_cast<std::size_t>(g)] += d * d;
    }
    int new_fhat = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int g = 0; g < cls_.num_functions(); ++g) {
        if (lv.loss[static_cast<std::size_t>(g)] < best) {
            best = lv.loss[static_cast<std::size_t>(g)];
            new_fhat = g;
        }
    }
    if (new_fhat == lv.fhat) {
        for (int g = 0; g < cls_.num_functions(); ++g) {
            const double d = cls_.value(g, a) - cls_.value(lv.fhat, a);
            lv.dist2[static_cast<std::size_t>(g)] += d * d;
        }
    } else {
        lv.fhat = new_fhat;
        for (int g = 0; g < cls_.num_functions(); ++g) {
            double d2 = 0.0;
            for (int s : lv.actions) {
                const double d = cls_.value(g, s) - cls_.value(new_fhat, s);
                d2 += d * d;
            }
            lv.dist2[static_cast<std::size_t>(g)] = d2;
        }
    }
    return covered;
}

std::optional<bool> ErmSubroutine::truth_in_current_set(int level, int t) const {
    if (!truth_) return std::nullopt;
    const auto& lv = levels_.at(static_cast<std::size_t>(level));
    return lv.dist2[static_cast<std::size_t>(*truth_)] <= beta_.beta2(t, level);
}

EnumeratedConfidenceSet ErmSubroutine::current_set(int level, int t) const {
    const auto& lv = levels_.at(static_cast<std::size_t>(level));
    EnumeratedConfidenceSet set;
    set.fhat = lv.fhat;
    set.beta2 = beta_.beta2(t, level);
    for (int g = 0; g < cls_.num_functions(); ++g) {
        if (lv.dist2[static_cast<std::size_t>(g)] <= set.beta2) {
            set.members.push_back(g);
        }
    }
    return set;
}

}  // namespace hetbandit
