#include "hetbandit/core.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hetbandit {

namespace {

constexpr double kLog2RelTol = 1e-12;

// floor(log2(x)) for x >= 1, resolving near-powers-of-two upward when x is
// within relative tolerance of the next power.
int floor_log2_guarded(double x) {
    int e = std::ilogb(x);  // exact: 2^e <= x < 2^(e+1)
    const double next = std::ldexp(1.0, e + 1);
    if (x * (1.0 + kLog2RelTol) >= next) ++e;
    return e;
}

}  // namespace

int num_levels(double R, double sigma_bar) {
    if (!(R > 0.0) || !std::isfinite(R) || !(sigma_bar > 0.0) ||
        !std::isfinite(sigma_bar)) {
        throw std::invalid_argument("num_levels: R and sigma_bar must be positive finite");
    }
    const double ratio = R / sigma_bar;
    if (ratio <= 1.0) return 1;
    // ceil(log2(ratio)) with the same tolerance treatment as the floor.
    int e = std::ilogb(ratio);
    const double pow_e = std::ldexp(1.0, e);
    const int L = (ratio <= pow_e * (1.0 + kLog2RelTol)) ? e : e + 1;
    return std::max(1, L);
}

int assign_level(double sigma_t, double sigma_bar, int L) {
    if (!std::isfinite(sigma_t) || sigma_t < 0.0) {
        throw std::invalid_argument("assign_level: sigma_t must be finite and nonnegative");
    }
    if (!(sigma_bar > 0.0) || !std::isfinite(sigma_bar)) {
        throw std::invalid_argument("assign_level: sigma_bar must be positive finite");
    }
    if (L < 1) throw std::invalid_argument("assign_level: L must be >= 1");
    const double sigma_eff = std::max(sigma_bar, sigma_t);
    const int l = floor_log2_guarded(sigma_eff / sigma_bar);
    return std::clamp(l, 0, L - 1);
}

void NoiseSpec::validate() const {
    if (!(R > 0.0) || !std::isfinite(R)) {
        throw std::invalid_argument("NoiseSpec: R must be positive finite");
    }
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const double s = schedule[i];
        if (!std::isfinite(s) || s < 0.0 || s >= R) {
            throw std::invalid_argument(
                "NoiseSpec: schedule[" + std::to_string(i) +
                "] must satisfy 0 <= sigma_t < R");
        }
    }
}

double NoiseSpec::sigma(int t) const {
    if (t < 1 || t > horizon()) {
        throw std::invalid_argument("NoiseSpec: round " + std::to_string(t) +
                                    " outside schedule");
    }
    return schedule[static_cast<std::size_t>(t - 1)];
}

NoiseSpec NoiseSpec::constant(double R, double sigma, int T, NoiseKind kind) {
    NoiseSpec spec;
    spec.R = R;
    spec.kind = kind;
    spec.schedule.assign(static_cast<std::size_t>(T), sigma);
    spec.validate();
    return spec;
}

NoiseSpec NoiseSpec::bursty(double R, double sigma_high, double sigma_low,
                            int period, int T, NoiseKind kind) {
    if (period < 1) throw std::invalid_argument("NoiseSpec::bursty: period >= 1");
    NoiseSpec spec;
    spec.R = R;
    spec.kind = kind;
    spec.schedule.resize(static_cast<std::size_t>(T));
    for (int t = 1; t <= T; ++t) {
        spec.schedule[static_cast<std::size_t>(t - 1)] =
            (t % period == 1 % period) ? sigma_high : sigma_low;
    }
    spec.validate();
    return spec;
}

NoiseSpec NoiseSpec::decaying(double R, double sigma0, double floor_sigma,
                              int T, NoiseKind kind) {
    NoiseSpec spec;
    spec.R = R;
    spec.kind = kind;
    spec.schedule.resize(static_cast<std::size_t>(T));
    for (int t = 1; t <= T; ++t) {
        spec.schedule[static_cast<std::size_t>(t - 1)] =
            std::max(floor_sigma, sigma0 / std::sqrt(static_cast<double>(t)));
    }
    spec.validate();
    return spec;
}

double sample_noise(const NoiseSpec& spec, int t, std::mt19937_64& rng) {
    const double s = spec.sigma(t);
    if (s == 0.0) return 0.0;
    switch (spec.kind) {
        case NoiseKind::gaussian: {
            // Fresh distribution per draw: keeps the stream position a pure
            // function of the number of draws.
            std::normal_distribution<double> dist(0.0, s);
            return dist(rng);
        }
        case NoiseKind::bounded_uniform: {
            const double half = s * std::sqrt(3.0);
            std::uniform_real_distribution<double> dist(-half, half);
            return dist(rng);
        }
    }
    throw std::logic_error("sample_noise: unknown noise kind");
}

void LevelPartition::add(int t, int level) {
    if (level < 0 || level >= levels()) {
        throw std::invalid_argument("LevelPartition::add: level out of range");
    }
    sets[static_cast<std::size_t>(level)].push_back(t);
}

int LevelPartition::total() const {
    int n = 0;
    for (const auto& s : sets) n += static_cast<int>(s.size());
    return n;
}

void record_round(RunTrace& trace, const std::vector<double>& truth_values,
                  int action_index, double reward, double sigma_t, int level) {
    if (action_index < 0 ||
        action_index >= static_cast<int>(truth_values.size())) {
        throw std::invalid_argument("record_round: action outside decision set");
    }
    RoundRecord rec;
    rec.t = static_cast<int>(trace.rounds.size()) + 1;
    rec.action_index = action_index;
    rec.level = level;
    rec.sigma = sigma_t;
    rec.reward = reward;
    const double best =
        *std::max_element(truth_values.begin(), truth_values.end());
    rec.opt_value = best;
    rec.regret_inst = best - truth_values[static_cast<std::size_t>(action_index)];
    const double prev_cum = trace.rounds.empty() ? 0.0 : trace.rounds.back().regret_cum;
    const double prev_j = trace.rounds.empty() ? 0.0 : trace.rounds.back().j_cum;
    rec.regret_cum = prev_cum + rec.regret_inst;
    rec.j_cum = prev_j + sigma_t * sigma_t;
    trace.rounds.push_back(rec);

    // Fold this round's gap into the run-level minimum.
    for (double v : truth_values) {
        if (v < best && best - v < trace.gap) trace.gap = best - v;
    }
}

double minimum_gap(const std::vector<std::vector<double>>& truth_values_per_round) {
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& vals : truth_values_per_round) {
        if (vals.empty()) continue;
        const double best = *std::max_element(vals.begin(), vals.end());
        for (double v : vals) {
            if (v < best && best - v < gap) gap = best - v;
        }
    }
    return gap;
}

void FiniteFunctionClass::validate() const {
    if (table.rows() < 1 || table.cols() < 1) {
        throw std::invalid_argument("FiniteFunctionClass: table must be non-empty");
    }
    if (!(bound >= 0.0) || !std::isfinite(bound)) {
        throw std::invalid_argument("FiniteFunctionClass: bound must be nonnegative finite");
    }
    if (!action_ids.empty() &&
        static_cast<int>(action_ids.size()) != num_actions()) {
        throw std::invalid_argument("FiniteFunctionClass: action_ids size mismatch");
    }
    for (int f = 0; f < num_functions(); ++f) {
        for (int a = 0; a < num_actions(); ++a) {
            const double v = table(f, a);
            if (!std::isfinite(v) || std::abs(v) > bound) {
                throw std::invalid_argument(
                    "FiniteFunctionClass: |table[" + std::to_string(f) + "][" +
                    std::to_string(a) + "]| exceeds bound");
            }
        }
    }
}

FiniteFunctionClass FiniteFunctionClass::from_json_text(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    FiniteFunctionClass cls;
    if (!j.contains("functions") || !j["functions"].is_array() ||
        j["functions"].empty()) {
        throw std::invalid_argument("finite class json: missing 'functions' array");
    }
    const auto& funcs = j["functions"];
    const auto cols = funcs[0].size();
    cls.table.resize(static_cast<Eigen::Index>(funcs.size()),
                     static_cast<Eigen::Index>(cols));
    for (std::size_t f = 0; f < funcs.size(); ++f) {
        if (funcs[f].size() != cols) {
            throw std::invalid_argument("finite class json: ragged 'functions' rows");
        }
        for (std::size_t a = 0; a < cols; ++a) {
            cls.table(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(a)) =
                funcs[f][a].get<double>();
        }
    }
    cls.bound = j.value("bound", 1.0);
    if (j.contains("actions")) {
        for (const auto& id : j["actions"]) {
            cls.action_ids.push_back(id.is_string()
                                         ? id.get<std::string>()
                                         : id.dump());
        }
    }
    cls.validate();
    return cls;
}

FiniteFunctionClass FiniteFunctionClass::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open finite class file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 over (seed, stream)
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace hetbandit
