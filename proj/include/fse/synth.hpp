#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fse/types.hpp"

namespace fse::synth {

/// Ground-truth parameters for the simulated demand process: an AR(p) base
/// series plus additive per-state uplifts on scheduled event weeks.
struct GeneratorSpec {
    int n_weeks = 0;
    int p = 0;
    double alpha0 = 0.0;
    std::vector<double> alphas;
    std::vector<double> betas;  // per state, length = state_map.state_count()
    double sigma = 1.0;
    std::vector<std::pair<int, EventCombination>> calendar_pattern;
    StateMap state_map;
    std::vector<EventFactor> factors;
    std::uint64_t seed = 0;
};

struct SyntheticBundle {
    DemandSeries demand;
    EventCalendar calendar;
    GeneratorSpec truth;
    // Promotion-blind company baseline: one-step SES forecasts computed on
    // the no-event counterfactual path (same noise stream).
    std::vector<double> baseline;
};

/// Forward-simulate the demand process after a 200-step burn-in. Identical
/// seeds give bit-identical output (fixed xoshiro256++/Box-Muller stream).
/// Throws ValidationError with the offending root moduli if the AR
/// polynomial is not stationary.
SyntheticBundle generate(const GeneratorSpec& spec);

/// Case-shaped specs: shape 'A' is 100 weeks with 16 promotions (major and
/// minor mechanics) across 5 states; shape 'B' is 120 weeks with 60 promotions
/// across 6 combinations, two of which share nearly identical uplifts.
GeneratorSpec make_company_shaped_spec(char shape, std::uint64_t seed);

}  // namespace fse::synth
