#pragma once

// Per-episode records and their aggregates for the three tasks. Everything
// here is a pure fold over records, so reports can be recomputed from
// per-episode files at any time.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

namespace textgrid {

// Floating-point addition is not associative; summing in sorted order makes
// every aggregate bit-identical under permutation of its records.
inline double sorted_sum(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    double s = 0;
    for (double x : xs) s += x;
    return s;
}

// ============================================================ predict

struct PredictRecord {
    bool parse_ok = false;
    bool success = false;    // position AND direction match
    bool pos_match = false;  // position alone
    int manhattan = 0;       // meaningful only when parse_ok
};

struct PredictOptions {
    // Default: parse failures count as failures but contribute no distance.
    // When set, each parse failure contributes the largest distance recorded
    // among parsed episodes instead of being left out of the mean.
    bool penalize_parse_failures = false;
};

struct PredictAggregate {
    std::size_t n = 0;
    std::size_t parse_failures = 0;
    double success_rate = 0;   // headline: position and direction
    double position_rate = 0;  // position-only variant
    std::optional<double> mean_manhattan;            // all parsed episodes
    std::optional<double> mean_manhattan_incorrect;  // position mismatches only
};

inline PredictAggregate aggregate_predict(const std::vector<PredictRecord>& records,
                                          const PredictOptions& opts = {}) {
    PredictAggregate agg;
    agg.n = records.size();
    if (records.empty()) return agg;
    double dist_sum = 0, wrong_sum = 0;
    std::size_t dist_n = 0, wrong_n = 0;
    int max_dist = 0;
    for (const PredictRecord& r : records) {
        if (!r.parse_ok) {
            ++agg.parse_failures;
            continue;
        }
        agg.success_rate += r.success ? 1 : 0;
        agg.position_rate += r.pos_match ? 1 : 0;
        dist_sum += r.manhattan;
        ++dist_n;
        max_dist = r.manhattan > max_dist ? r.manhattan : max_dist;
        if (!r.pos_match) {
            wrong_sum += r.manhattan;
            ++wrong_n;
        }
    }
    if (opts.penalize_parse_failures && agg.parse_failures > 0) {
        dist_sum += static_cast<double>(max_dist) * agg.parse_failures;
        dist_n += agg.parse_failures;
        wrong_sum += static_cast<double>(max_dist) * agg.parse_failures;
        wrong_n += agg.parse_failures;
    }
    agg.success_rate /= static_cast<double>(agg.n);
    agg.position_rate /= static_cast<double>(agg.n);
    if (dist_n > 0) agg.mean_manhattan = dist_sum / static_cast<double>(dist_n);
    if (wrong_n > 0)
        agg.mean_manhattan_incorrect = wrong_sum / static_cast<double>(wrong_n);
    return agg;
}

// ============================================================ plan

struct PlanRecord {
    bool parse_ok = false;
    bool success = false;
    std::size_t expert_len = 0;
    std::size_t llm_len = 0;  // meaningful only when parse_ok
};

// expert length over model length, successes only, unclamped
inline std::optional<double> efficiency_of(const PlanRecord& r) {
    if (!r.parse_ok || !r.success) return std::nullopt;
    if (r.llm_len == 0)
        return r.expert_len == 0 ? std::optional<double>(1.0) : std::nullopt;
    return static_cast<double>(r.expert_len) / static_cast<double>(r.llm_len);
}

struct PlanAggregate {
    std::size_t n = 0;
    std::size_t parse_failures = 0;
    double success_rate = 0;
    std::optional<double> mean_efficiency;  // over successes
};

inline PlanAggregate aggregate_plan(const std::vector<PlanRecord>& records) {
    PlanAggregate agg;
    agg.n = records.size();
    if (records.empty()) return agg;
    std::vector<double> effs;
    for (const PlanRecord& r : records) {
        if (!r.parse_ok) ++agg.parse_failures;
        agg.success_rate += r.success ? 1 : 0;
        if (auto e = efficiency_of(r)) effs.push_back(*e);
    }
    agg.success_rate /= static_cast<double>(agg.n);
    if (!effs.empty()) {
        auto count = static_cast<double>(effs.size());
        agg.mean_efficiency = sorted_sum(std::move(effs)) / count;
    }
    return agg;
}

// ============================================================ decompose

struct DecomposeRecord {
    bool parse_ok = false;
    bool success = false;
    int added = 0;  // subgoals the expert inserted while executing the stack
    int limit = 0;  // the row's help_count: the expert-alone insertion count
};

inline bool success_at(const DecomposeRecord& r, int k) {
    return r.success && r.added <= k;
}

// Mean area under the success@k step curve over k in [0, limit), normalized
// by limit; a record with limit 0 degenerates to its success@0 indicator.
inline double record_aci(const DecomposeRecord& r) {
    if (r.limit <= 0) return success_at(r, 0) ? 1.0 : 0.0;
    int hits = 0;
    for (int k = 0; k < r.limit; ++k) hits += success_at(r, k) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(r.limit);
}

struct DecomposeAggregate {
    std::size_t n = 0;
    std::size_t parse_failures = 0;
    double cr = 0;   // completion: success regardless of help
    double pr = 0;   // planning: success with zero help
    double aci = 0;  // assisted-completion integral, mean of record_aci
};

inline DecomposeAggregate aggregate_decompose(
    const std::vector<DecomposeRecord>& records) {
    DecomposeAggregate agg;
    agg.n = records.size();
    if (records.empty()) return agg;
    std::vector<double> acis;
    acis.reserve(records.size());
    for (const DecomposeRecord& r : records) {
        if (!r.parse_ok) ++agg.parse_failures;
        agg.cr += r.success ? 1 : 0;
        agg.pr += success_at(r, 0) ? 1 : 0;
        acis.push_back(record_aci(r));
    }
    agg.cr /= static_cast<double>(agg.n);
    agg.pr /= static_cast<double>(agg.n);
    agg.aci = sorted_sum(std::move(acis)) / static_cast<double>(agg.n);
    return agg;
}

inline double success_rate_at(const std::vector<DecomposeRecord>& records, int k) {
    if (records.empty()) return 0;
    double s = 0;
    for (const DecomposeRecord& r : records) s += success_at(r, k) ? 1 : 0;
    return s / static_cast<double>(records.size());
}

// Difficulty class of a row by its expert help count.
inline constexpr const char* kSaBucketName[4] = {"0-2", "3-6", "7-9", "10+"};

inline int sa_bucket(int subgoals_added) {
    if (subgoals_added <= 2) return 0;
    if (subgoals_added <= 6) return 1;
    if (subgoals_added <= 9) return 2;
    return 3;
}

}  // namespace textgrid
