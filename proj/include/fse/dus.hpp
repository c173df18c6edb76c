#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fse/types.hpp"

namespace fse::dus {

/// Demand uplift observed in one event week.
struct UpliftSample {
    int week_index = 0;
    EventCombination combination;  // full factor assignment for that week
    double uplift = 0.0;
};

struct SignificantFactor {
    EventFactor factor;
    double f_stat = 0.0;
    double p_value = 1.0;
};

struct CombinationStats {
    EventCombination combination;
    double mean = 0.0;
    int count = 0;
    std::optional<double> variance;  // absent for single-sample combinations
    std::vector<double> samples;
};

struct MergePolicy {
    double test_alpha = 0.05;
    double fallback_rel_tol = 0.15;
};

enum class AssignMode { Nearest, NewState, Manual };

struct DusConfig {
    double anova_alpha = 0.05;
    MergePolicy merge;
};

struct DusResult {
    StateMap state_map;
    std::vector<SignificantFactor> factors;
    std::vector<std::string> audit_log;
};

/// Uplift = actual - baseline on every event week; non-event weeks produce
/// no samples. Throws naming the week if the baseline is missing there.
std::vector<UpliftSample> compute_uplifts(const DemandSeries& demand,
                                          std::span<const double> baseline,
                                          const EventCalendar& calendar);

/// Step 1: keep factors whose main-effect ANOVA p-value is below alpha.
std::vector<SignificantFactor> screen_significant_factors(
    const std::vector<UpliftSample>& samples, const std::vector<EventFactor>& candidate_factors,
    double alpha = 0.05, std::vector<std::string>* audit = nullptr);

/// Step 2: the observed combinations of the significant factors' levels, in
/// deterministic lexicographic order (labels 1..k implied by position).
std::vector<EventCombination> enumerate_combinations(
    const std::vector<SignificantFactor>& significant_factors,
    const std::vector<UpliftSample>& samples);

/// Step 3: mean uplift per combination.
std::vector<CombinationStats> average_uplift_per_combination(
    const std::vector<UpliftSample>& samples, const std::vector<EventCombination>& combinations);

/// Step 4: merge statistically indistinguishable combinations (pairwise Welch
/// test, with a relative-tolerance fallback for groups of fewer than two
/// samples) via transitive closure. States are relabelled 1..m in descending
/// mean-uplift order.
StateMap merge_into_states(const std::vector<CombinationStats>& combination_stats,
                           const MergePolicy& policy = {},
                           std::vector<std::string>* audit = nullptr);

/// Route a previously unseen combination into an existing map.
StateMap assign_new_combination(const StateMap& state_map, const EventCombination& combination,
                                std::optional<double> expected_uplift, AssignMode mode,
                                int manual_state = 0);

/// Steps 0-4 composed, with an audit log of every decision.
DusResult run_dus(const DemandSeries& demand, std::span<const double> baseline,
                  const EventCalendar& calendar, const std::vector<EventFactor>& candidate_factors,
                  const DusConfig& config = {});

}  // namespace fse::dus
