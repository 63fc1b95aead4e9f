#include "hetbandit/eluder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace hetbandit {
namespace eluder {

namespace {

// Disjoint, sorted, half-open [lo, hi) intervals.
using Intervals = std::vector<std::pair<double, double>>;

Intervals merge_union(Intervals v) {
    if (v.empty()) return v;
    std::sort(v.begin(), v.end());
    Intervals out;
    out.push_back(v.front());
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i].first <= out.back().second) {
            out.back().second = std::max(out.back().second, v[i].second);
        } else {
            out.push_back(v[i]);
        }
    }
    return out;
}

Intervals intersect(const Intervals& a, const Intervals& b) {
    Intervals out;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double lo = std::max(a[i].first, b[j].first);
        const double hi = std::min(a[i].second, b[j].second);
        if (lo < hi) out.emplace_back(lo, hi);
        if (a[i].second < b[j].second) {
            ++i;
        } else {
            ++j;
        }
    }
    return out;
}

// True when every interval of `inner` lies inside a single interval of
// `outer` (sufficient for disjoint sorted lists).
bool subset_of(const Intervals& inner, const Intervals& outer) {
    std::size_t j = 0;
    for (const auto& [lo, hi] : inner) {
        while (j < outer.size() && outer[j].second < hi) ++j;
        if (j == outer.size() || outer[j].first > lo) return false;
    }
    return true;
}

struct PairTable {
    // ordered pairs (f, g), f != g; gap[p][a] = F(f,a) - F(g,a)
    std::vector<std::vector<double>> gap;

    PairTable(const FiniteFunctionClass& cls, const std::vector<int>& universe) {
        const int nf = cls.num_functions();
        gap.reserve(static_cast<std::size_t>(nf) * (nf - 1));
        for (int f = 0; f < nf; ++f) {
            for (int g = 0; g < nf; ++g) {
                if (f == g) continue;
                std::vector<double> row(universe.size());
                for (std::size_t a = 0; a < universe.size(); ++a) {
                    row[a] = cls.value(f, universe[a]) - cls.value(g, universe[a]);
                }
                gap.push_back(std::move(row));
            }
        }
    }
};

class ExactSearch {
public:
    ExactSearch(const FiniteFunctionClass& cls, const std::vector<int>& universe,
                double eps)
        : universe_(universe), eps_(eps), pairs_(cls, universe) {
    }

    EluderResult run() {
        Intervals feas{{eps_, std::numeric_limits<double>::infinity()}};
        prefix_sq_stack_.push_back(
            std::vector<double>(pairs_.gap.size(), 0.0));
        descend(0u, feas);
        EluderResult res;
        res.dimension = best_;
        res.sequence.reserve(best_path_.size());
        for (int a : best_path_) res.sequence.push_back(universe_[static_cast<std::size_t>(a)]);
        res.mode = EluderMode::exact;
        return res;
    }

private:
    void descend(std::uint32_t used, const Intervals& feas) {
        const int depth = __builtin_popcount(used);
        if (depth > best_) {
            best_ = depth;
            best_path_ = path_;
        }
        if (depth == static_cast<int>(universe_.size()) ||
            best_ == static_cast<int>(universe_.size())) {
            return;
        }
        for (int a = 0; a < static_cast<int>(universe_.size()); ++a) {
            if (used & (1u << a)) continue;
            // Indexed access: deeper recursion grows the stack and may
            // reallocate it, so no reference may be held across extensions.
            const std::size_t here = static_cast<std::size_t>(depth);
            Intervals witness;
            for (std::size_t p = 0; p < pairs_.gap.size(); ++p) {
                const double g = pairs_.gap[p][static_cast<std::size_t>(a)];
                if (g <= eps_) continue;
                const double s = std::sqrt(prefix_sq_stack_[here][p]);
                if (g <= s) continue;
                witness.emplace_back(std::max(eps_, s), g);
            }
            if (witness.empty()) continue;
            const Intervals next = intersect(feas, merge_union(std::move(witness)));
            if (next.empty()) continue;
            const std::uint32_t mask = used | (1u << a);
            if (dominated(mask, next)) continue;
            explored_[mask].push_back(next);

            path_.push_back(a);
            // Snapshot rather than add-and-subtract: backtracking must
            // restore the prefix sums bit-exactly.
            std::vector<double> grown = prefix_sq_stack_[here];
            for (std::size_t p = 0; p < pairs_.gap.size(); ++p) {
                const double g = pairs_.gap[p][static_cast<std::size_t>(a)];
                grown[p] += g * g;
            }
            prefix_sq_stack_.push_back(std::move(grown));
            descend(mask, next);
            prefix_sq_stack_.pop_back();
            path_.pop_back();
        }
    }

    bool dominated(std::uint32_t mask, const Intervals& feas) const {
        const auto it = explored_.find(mask);
        if (it == explored_.end()) return false;
        for (const auto& seen : it->second) {
            if (subset_of(feas, seen)) return true;
        }
        return false;
    }

    const std::vector<int>& universe_;
    double eps_;
    PairTable pairs_;
    std::vector<std::vector<double>> prefix_sq_stack_;
    std::vector<int> path_;
    std::vector<int> best_path_;
    int best_ = 0;
    std::unordered_map<std::uint32_t, std::vector<Intervals>> explored_;
};

}  // namespace

bool is_eps_dependent(const DependenceQuery& q) {
    if (q.cls == nullptr) throw std::invalid_argument("is_eps_dependent: null class");
    if (!(q.eps > 0.0)) throw std::invalid_argument("is_eps_dependent: eps must be positive");
    const auto& cls = *q.cls;
    const auto check_action = [&](int a) {
        if (a < 0 || a >= cls.num_actions()) {
            throw std::invalid_argument("is_eps_dependent: action outside universe");
        }
    };
    check_action(q.candidate);
    for (int a : q.predecessors) check_action(a);

    const double eps_sq = q.eps * q.eps;
    for (int f = 0; f < cls.num_functions(); ++f) {
        for (int g = 0; g < cls.num_functions(); ++g) {
            double sum_sq = 0.0;
            for (int a : q.predecessors) {
                const double d = cls.value(f, a) - cls.value(g, a);
                sum_sq += d * d;
            }
            if (sum_sq > eps_sq) continue;  // pair filtered out
            if (cls.value(f, q.candidate) - cls.value(g, q.candidate) > q.eps) {
                return false;  // witness of independence
            }
        }
    }
    return true;
}

EluderResult eluder_dimension(const FiniteFunctionClass& cls,
                              const std::vector<int>& universe, double eps,
                              EluderMode mode) {
    if (!(eps > 0.0)) throw std::invalid_argument("eluder_dimension: eps must be positive");
    for (int a : universe) {
        if (a < 0 || a >= cls.num_actions()) {
            throw std::invalid_argument("eluder_dimension: universe action out of range");
        }
    }
    if (mode == EluderMode::exact) {
        if (static_cast<int>(universe.size()) > kExactActionLimit) {
            throw std::invalid_argument(
                "eluder_dimension: exact mode limited to " +
                std::to_string(kExactActionLimit) +
                " actions; use greedy_lower_bound mode for larger universes");
        }
        return ExactSearch(cls, universe, eps).run();
    }

    // Greedy: repeatedly append the first action eps-independent of the
    // sequence built so far. Certified lower bound at eps' = eps.
    EluderResult res;
    res.mode = EluderMode::greedy_lower_bound;
    DependenceQuery q;
    q.cls = &cls;
    q.eps = eps;
    bool grew = true;
    while (grew) {
        grew = false;
        for (int a : universe) {
            if (std::find(res.sequence.begin(), res.sequence.end(), a) !=
                res.sequence.end()) {
                continue;
            }
            q.candidate = a;
            q.predecessors = res.sequence;
            if (!is_eps_dependent(q)) {
                res.sequence.push_back(a);
                grew = true;
                break;
            }
        }
    }
    res.dimension = static_cast<int>(res.sequence.size());
    return res;
}

EluderResult eluder_dimension(const FiniteFunctionClass& cls, double eps,
                              EluderMode mode) {
    std::vector<int> universe(static_cast<std::size_t>(cls.num_actions()));
    for (int a = 0; a < cls.num_actions(); ++a) universe[static_cast<std::size_t>(a)] = a;
    return eluder_dimension(cls, universe, eps, mode);
}

std::optional<double> width(const std::vector<int>& member_subset,
                            const FiniteFunctionClass& cls, int action) {
    if (member_subset.empty()) return std::nullopt;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int f : member_subset) {
        const double v = cls.value(f, action);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi - lo;
}

double covering_number_upper(int d, double B, double lipschitz, double alpha) {
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("covering_number_upper: alpha must be positive");
    }
    if (d < 1 || !(B >= 0.0) || !(lipschitz >= 0.0)) {
        throw std::invalid_argument("covering_number_upper: bad parameters");
    }
    const double per_axis = std::ceil(2.0 * B * lipschitz / alpha + 1.0);
    return std::pow(per_axis, static_cast<double>(d));
}

double covering_number_upper(const FiniteFunctionClass& cls, double alpha) {
    if (!(alpha >= 0.0)) {
        throw std::invalid_argument("covering_number_upper: alpha must be nonnegative");
    }
    return static_cast<double>(cls.num_functions());
}

}  // namespace eluder
}  // namespace hetbandit
