#include "fse/synth.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fse/baselines.hpp"
#include "fse/rng.hpp"

namespace fse::synth {

namespace {

constexpr int kBurnIn = 200;

double max_inverse_root_modulus(const std::vector<double>& alphas) {
    const int p = static_cast<int>(alphas.size());
    if (p == 0) return 0.0;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i) companion(0, i) = alphas[i];
    for (int i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
    const auto eigs = companion.eigenvalues();
    double max_mod = 0.0;
    for (int i = 0; i < p; ++i) max_mod = std::max(max_mod, std::abs(eigs(i)));
    return max_mod;
}

}  // namespace

SyntheticBundle generate(const GeneratorSpec& spec) {
    if (spec.n_weeks <= 0) throw ValidationError("generate: n_weeks must be positive");
    if (static_cast<int>(spec.alphas.size()) != spec.p) {
        throw ValidationError("generate: alphas length must equal p");
    }
    if (static_cast<int>(spec.betas.size()) != spec.state_map.state_count()) {
        throw ValidationError("generate: betas length must equal the state count");
    }
    if (spec.sigma < 0.0) throw ValidationError("generate: sigma must be nonnegative");
    const double max_mod = max_inverse_root_modulus(spec.alphas);
    if (max_mod >= 1.0) {
        std::ostringstream os;
        os << "generate: nonstationary AR polynomial, max inverse-root modulus " << max_mod;
        throw ValidationError(os.str());
    }

    SyntheticBundle bundle;
    bundle.truth = spec;
    for (const auto& [week, combination] : spec.calendar_pattern) {
        if (week < 0 || week >= spec.n_weeks) {
            throw ValidationError("generate: event week " + std::to_string(week) +
                                  " outside 0.." + std::to_string(spec.n_weeks - 1));
        }
        bundle.calendar.events[week] = combination;
    }

    const double alpha_sum = std::accumulate(spec.alphas.begin(), spec.alphas.end(), 0.0);
    const double mu = spec.p == 0 ? spec.alpha0 : spec.alpha0 / (1.0 - alpha_sum);

    // One noise draw per step, consumed identically with and without events,
    // so the event and no-event paths share a noise stream.
    Rng rng(spec.seed);
    std::vector<double> noise(kBurnIn + spec.n_weeks);
    for (auto& e : noise) e = spec.sigma * rng.normal();

    auto simulate = [&](const std::map<int, double>& uplifts) {
        std::vector<double> history(spec.p, mu);  // most recent last
        std::vector<double> out;
        out.reserve(spec.n_weeks);
        for (int t = -kBurnIn; t < spec.n_weeks; ++t) {
            double x = spec.alpha0;
            for (int i = 1; i <= spec.p; ++i) {
                x += spec.alphas[i - 1] * history[history.size() - i];
            }
            auto it = uplifts.find(t);
            if (it != uplifts.end()) x += it->second;
            x += noise[t + kBurnIn];
            history.push_back(x);
            if (t >= 0) out.push_back(x);
        }
        return out;
    };

    std::map<int, double> uplifts;
    for (const auto& [week, combination] : bundle.calendar.events) {
        auto state_it = spec.state_map.combination_index.find(combination);
        if (state_it == spec.state_map.combination_index.end()) {
            throw ValidationError("generate: calendar combination " +
                                  combination_to_string(combination) +
                                  " not indexed in the state map");
        }
        uplifts[week] = spec.betas[state_it->second - 1];
    }

    bundle.demand.start_week = 0;
    bundle.demand.values = simulate(uplifts);

    // Promotion-blind company baseline: SES one-step forecasts over the
    // no-event counterfactual path, the way an existing planning system that
    // never reacts to promotional spikes would forecast the base demand.
    const auto counterfactual = simulate({});
    const auto ses = baselines::ses_fit(counterfactual);
    bundle.baseline = baselines::ses_one_step_forecasts(counterfactual, ses.alpha);
    return bundle;
}

namespace {

StateMap truth_state_map(const std::vector<std::pair<EventCombination, double>>& combo_uplifts) {
    // One state per combination, labelled in descending uplift order.
    std::vector<std::pair<EventCombination, double>> sorted = combo_uplifts;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.second > b.second; });
    StateMap map;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        StateInfo info;
        info.members.push_back(sorted[j].first);
        info.mean_uplift = sorted[j].second;
        map.states.push_back(std::move(info));
        map.combination_index[sorted[j].first] = static_cast<int>(j) + 1;
    }
    return map;
}

}  // namespace

GeneratorSpec make_company_shaped_spec(char shape, std::uint64_t seed) {
    GeneratorSpec spec;
    spec.seed = seed;
    spec.p = 2;

    if (shape == 'A' || shape == 'a') {
        // 100 weeks, base demand around 450, 16 promotions (a mix of major
        // and minor mechanics) in five distinct uplift states.
        spec.n_weeks = 100;
        spec.alpha0 = 450.0 * (1.0 - 0.25 - 0.15);
        spec.alphas = {0.25, 0.15};
        spec.sigma = 60.0;
        spec.factors = {{"display", {"entrance", "fge", "fixture", "gondola"}},
                        {"promotion", {"major", "minor"}}};

        const std::vector<std::pair<EventCombination, double>> combos = {
            {{{"promotion", "major"}, {"display", "entrance"}}, 19816.0},
            {{{"promotion", "major"}, {"display", "fge"}}, 14833.0},
            {{{"promotion", "minor"}, {"display", "fge"}}, 5091.0},
            {{{"promotion", "minor"}, {"display", "fixture"}}, 4121.0},
            {{{"promotion", "minor"}, {"display", "gondola"}}, 3466.0},
        };
        spec.state_map = truth_state_map(combos);
        spec.betas = {19816.0, 14833.0, 5091.0, 4121.0, 3466.0};

        // Promotions every 6 weeks, cycling through the five combinations so
        // each one always follows the same predecessor (keeps the AR
        // carryover a constant offset within each group).
        for (int k = 0; k < 16; ++k) {
            spec.calendar_pattern.emplace_back(4 + 6 * k, combos[k % 5].first);
        }
        return spec;
    }

    if (shape == 'B' || shape == 'b') {
        // 120 weeks, base demand around 7, 60 promotions across six
        // combinations; the two in-store combinations carry nearly identical
        // uplifts (16 vs 15.8).
        spec.n_weeks = 120;
        spec.alpha0 = 7.0 * (1.0 - 0.2 - 0.1);
        spec.alphas = {0.2, 0.1};
        spec.sigma = 5.0;
        spec.factors = {{"advertisement", {"catalogue", "in_store", "minor_catalogue"}},
                        {"promotion", {"single_buy", "multiple_buy"}}};

        const EventCombination c1 = {{"promotion", "single_buy"}, {"advertisement", "catalogue"}};
        const EventCombination c2 = {{"promotion", "single_buy"},
                                     {"advertisement", "minor_catalogue"}};
        const EventCombination c3 = {{"promotion", "multiple_buy"},
                                     {"advertisement", "catalogue"}};
        const EventCombination c4 = {{"promotion", "single_buy"}, {"advertisement", "in_store"}};
        const EventCombination c5 = {{"promotion", "multiple_buy"},
                                     {"advertisement", "in_store"}};
        const EventCombination c6 = {{"promotion", "multiple_buy"},
                                     {"advertisement", "minor_catalogue"}};
        const std::vector<std::pair<EventCombination, double>> combos = {
            {c1, 311.0}, {c2, 213.3}, {c3, 160.48}, {c4, 16.0}, {c5, 15.8}, {c6, 7.3}};
        spec.state_map = truth_state_map(combos);
        spec.betas = {311.0, 213.3, 160.48, 16.0, 15.8, 7.3};

        // One promotion every other week. The 12-slot super-cycle is
        // symmetric under a half-cycle shift that swaps the two in-store
        // combinations, so c4 and c5 see identical predecessor mixes at
        // every lag and their AR carryover offsets match.
        const std::vector<EventCombination> cycle = {c1, c2, c4, c1, c2, c5,
                                                     c3, c6, c5, c3, c6, c4};
        for (int i = 0; i < 60; ++i) {
            spec.calendar_pattern.emplace_back(1 + 2 * i, cycle[i % 12]);
        }
        return spec;
    }

    throw ValidationError(std::string("make_company_shaped_spec: unknown shape '") + shape +
                          "' (expected A or B)");
}

}  // namespace fse::synth
