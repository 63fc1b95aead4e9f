#pragma once
// Desk-scale combinatorics for function-class complexity: dependence tests,
// brute-force eluder dimension, widths, and a grid covering-number bound.
//
// An action a is eps-dependent on predecessors (a_1..a_n) when every ordered
// pair (f, g) with sqrt(sum_i (f(a_i) - g(a_i))^2) <= eps also has
// f(a) - g(a) <= eps. The dimension is the longest sequence whose every
// element is eps'-independent of its predecessors for some eps' >= eps.
//
// Exact mode searches sequences depth-first while propagating the exact set
// of eps' values that keep the prefix alive, as a union of half-open
// intervals: a pair (f, g) witnesses independence of a after prefix P for
// eps' in [sqrt(sum_{b in P} gap(b)^2), gap(a)). The supremum over eps' is
// therefore resolved without discretization. States are pruned against
// previously explored (prefix-set, interval-set) pairs.

#include <optional>
#include <vector>

#include "hetbandit/core.hpp"

namespace hetbandit {
namespace eluder {

struct DependenceQuery {
    int candidate = 0;                  // action index
    std::vector<int> predecessors;      // action indices
    const FiniteFunctionClass* cls = nullptr;
    double eps = 0.0;
};

bool is_eps_dependent(const DependenceQuery& q);

enum class EluderMode { exact, greedy_lower_bound };

struct EluderResult {
    int dimension = 0;
    std::vector<int> sequence;  // witness, action indices
    EluderMode mode = EluderMode::exact;
};

inline constexpr int kExactActionLimit = 12;

// Exact mode requires |universe| <= kExactActionLimit and throws a size
// limit error pointing to greedy mode otherwise. Greedy mode reports a
// certified lower bound only.
EluderResult eluder_dimension(const FiniteFunctionClass& cls,
                              const std::vector<int>& universe, double eps,
                              EluderMode mode = EluderMode::exact);
EluderResult eluder_dimension(const FiniteFunctionClass& cls, double eps,
                              EluderMode mode = EluderMode::exact);

// max f(a) - min f(a) over the subset; nullopt for an empty subset.
std::optional<double> width(const std::vector<int>& member_subset,
                            const FiniteFunctionClass& cls, int action);

// Axis-aligned grid bound ceil(2 B Lip / alpha + 1)^d for a Lip-Lipschitz
// parametrization over the B-ball. Finite classes cover themselves: |F|.
double covering_number_upper(int d, double B, double lipschitz, double alpha);
double covering_number_upper(const FiniteFunctionClass& cls, double alpha);

}  // namespace eluder
}  // namespace hetbandit
