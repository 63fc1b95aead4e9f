#pragma once
// Least-squares ERM over a finite function class, per level, with
// enumerated confidence sets
//
//   C = { g : sum_{s in Psi} (g(a_s) - fhat(a_s))^2 <= beta2(t, l) },
//
// where fhat is the empirical risk minimizer on the level's data and beta2
// is one of three thresholds (all applied on the sum-of-squares scale):
//
//   subgaussian:     8 (2^{l+1} sb)^2 log(2 N L / delta)
//                      + 4 t alpha (C + sqrt((2^{l+1} sb)^2 log(4 t (t+1) L / delta)))
//   variance_aware:  12 C alpha t + 4 alpha Rbar t
//                      + (8/3) C Rbar log(2 N t^2 / delta)
//                      + 16 (2^{l+1} sb)^2 log(2 N t^2 / delta),
//                    Rbar = R sqrt(2 log(4 t^2 / delta))
//   variance_aware_union:  the same shape with C = 1 and every log argument
//                    carrying an extra factor L; Rbar = R sqrt(2 log(4 t^2 L / delta))
//
// The union form requires rewards normalized to |f| <= 1; callers with
// bound C != 1 rescale rewards by 1/C (and R, sigma_bar with them).

#include <optional>
#include <vector>

#include "hetbandit/core.hpp"
#include "hetbandit/ml2.hpp"

namespace hetbandit {

enum class BetaKind { subgaussian, variance_aware, variance_aware_union };

struct BetaSchedule {
    BetaKind kind = BetaKind::subgaussian;
    double C = 1.0;        // reward bound
    double R = 1.0;        // sub-Gaussian envelope
    double sigma_bar = 1.0;
    int L = 1;
    double delta = 0.1;
    double alpha = 0.0;    // sup-norm cover radius
    double n_alpha = 1.0;  // covering number at radius alpha

    void validate() const;
    // Sum-of-squares threshold beta^2 at round t, level l.
    double beta2(int t, int level) const;
};

struct EnumeratedConfidenceSet {
    std::vector<int> members;  // function indices, ascending
    int fhat = 0;
    double beta2 = 0.0;

    bool contains(int f) const;
};

// argmin over the class of sum (f(a_s) - r_s)^2 by full enumeration; ties
// and empty data resolve to the lowest index.
int erm_fit(const std::vector<int>& actions, const std::vector<double>& rewards,
            const FiniteFunctionClass& cls);

EnumeratedConfidenceSet build_confidence_set(const FiniteFunctionClass& cls,
                                             const std::vector<int>& actions,
                                             int fhat, double beta2);

// max over members of f(a); nullopt for an empty set (caller skips level).
std::optional<double> ucb_value(const EnumeratedConfidenceSet& set,
                                const FiniteFunctionClass& cls, int action);

// ML2 subroutine backed by enumerated ERM sets. Keeps, per level, the
// running per-function losses and squared distances to the current fit, so
// a refresh is O(|F|) except when the minimizer changes.
class ErmSubroutine final : public ConfidenceSubroutine<int> {
public:
    // rescale_to_unit_bound divides rewards (and R, sigma_bar, C) by the
    // class bound so the union threshold's normalization holds; optimistic
    // values are reported back in original units.
    ErmSubroutine(FiniteFunctionClass cls, BetaSchedule beta,
                  bool rescale_to_unit_bound = false,
                  std::optional<int> truth_index = std::nullopt);

    void begin(int num_levels) override;
    std::optional<double> optimistic_value(int level, int t,
                                           const int& action) const override;
    std::optional<bool> refresh(int level, int t,
                                const LevelData<int>& data) override;
    std::optional<bool> truth_in_current_set(int level, int t) const override;

    // Members of C_{t,level} under the current data (diagnostics/tests).
    EnumeratedConfidenceSet current_set(int level, int t) const;
    double reward_scale() const { return scale_; }
    const BetaSchedule& schedule() const { return beta_; }

private:
    struct Level {
        int fhat = 0;
        std::vector<double> loss;   // running squared loss per function
        std::vector<double> dist2;  // running squared distance to fhat
        std::vector<int> actions;   // scaled-units data for refits
        std::vector<double> rewards;
    };

    FiniteFunctionClass cls_;  // scaled table when rescaling
    BetaSchedule beta_;        // scaled parameters when rescaling
    double scale_ = 1.0;
    std::optional<int> truth_;
    std::vector<Level> levels_;
};

}  // namespace hetbandit
