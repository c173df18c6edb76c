#include "fse/dus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "fse/stats.hpp"

namespace fse::dus {

namespace {

EventCombination project(const EventCombination& full, const std::set<std::string>& factors) {
    EventCombination out;
    for (const auto& name : factors) {
        auto it = full.find(name);
        if (it == full.end()) {
            throw ValidationError("dus: sample combination missing factor " + name);
        }
        out[name] = it->second;
    }
    return out;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

std::vector<UpliftSample> compute_uplifts(const DemandSeries& demand,
                                          std::span<const double> baseline,
                                          const EventCalendar& calendar) {
    const int n = static_cast<int>(demand.values.size());
    std::vector<UpliftSample> samples;
    for (const auto& [week, combination] : calendar.events) {
        const int idx = week - demand.start_week;
        if (idx < 0 || idx >= n) {
            throw ValidationError("compute_uplifts: event week " + std::to_string(week) +
                                  " outside the demand series range");
        }
        if (idx >= static_cast<int>(baseline.size())) {
            throw ValidationError("compute_uplifts: missing baseline forecast for event week " +
                                  std::to_string(week));
        }
        UpliftSample s;
        s.week_index = week;
        s.combination = combination;
        s.uplift = demand.values[idx] - baseline[idx];
        samples.push_back(std::move(s));
    }
    return samples;
}

std::vector<SignificantFactor> screen_significant_factors(
    const std::vector<UpliftSample>& samples, const std::vector<EventFactor>& candidate_factors,
    double alpha, std::vector<std::string>* audit) {
    if (samples.size() < 2) {
        throw ValidationError("screen_significant_factors: need at least 2 uplift samples");
    }

    std::vector<double> responses;
    responses.reserve(samples.size());
    for (const auto& s : samples) responses.push_back(s.uplift);

    std::map<std::string, std::vector<std::string>> assignments;
    for (const auto& factor : candidate_factors) {
        std::vector<std::string> labels;
        labels.reserve(samples.size());
        for (const auto& s : samples) {
            auto it = s.combination.find(factor.name);
            if (it == s.combination.end()) {
                throw ValidationError("screen_significant_factors: sample at week " +
                                      std::to_string(s.week_index) + " lacks factor " +
                                      factor.name);
            }
            labels.push_back(it->second);
        }
        assignments[factor.name] = std::move(labels);
    }

    std::vector<std::string> excluded;
    const auto screens = stats::anova_factor_screen(responses, assignments, &excluded);
    for (const auto& name : excluded) {
        if (audit) audit->push_back("step1: factor " + name + " excluded (single observed level)");
    }

    std::vector<SignificantFactor> significant;
    for (const auto& screen : screens) {
        const bool keep = screen.p_value < alpha;
        if (audit) {
            audit->push_back("step1: factor " + screen.factor + " F=" + fmt(screen.f_stat) +
                             " p=" + fmt(screen.p_value) +
                             (keep ? " -> significant" : " -> not significant"));
        }
        if (!keep) continue;
        SignificantFactor sf;
        sf.f_stat = screen.f_stat;
        sf.p_value = screen.p_value;
        for (const auto& factor : candidate_factors) {
            if (factor.name == screen.factor) sf.factor = factor;
        }
        significant.push_back(std::move(sf));
    }
    return significant;
}

std::vector<EventCombination> enumerate_combinations(
    const std::vector<SignificantFactor>& significant_factors,
    const std::vector<UpliftSample>& samples) {
    if (significant_factors.empty()) {
        throw ValidationError("enumerate_combinations: no significant factors");
    }
    std::set<std::string> names;
    for (const auto& sf : significant_factors) names.insert(sf.factor.name);

    // Observed combinations only; map ordering gives the deterministic
    // lexicographic labelling.
    std::set<EventCombination> observed;
    for (const auto& s : samples) observed.insert(project(s.combination, names));
    return {observed.begin(), observed.end()};
}

std::vector<CombinationStats> average_uplift_per_combination(
    const std::vector<UpliftSample>& samples, const std::vector<EventCombination>& combinations) {
    std::set<std::string> names;
    if (!combinations.empty()) {
        for (const auto& [factor, level] : combinations.front()) names.insert(factor);
    }
    std::vector<CombinationStats> stats;
    for (const auto& combo : combinations) {
        CombinationStats cs;
        cs.combination = combo;
        for (const auto& s : samples) {
            if (project(s.combination, names) == combo) cs.samples.push_back(s.uplift);
        }
        cs.count = static_cast<int>(cs.samples.size());
        if (cs.count == 0) {
            throw ValidationError("average_uplift_per_combination: combination " +
                                  combination_to_string(combo) + " has no samples");
        }
        cs.mean = std::accumulate(cs.samples.begin(), cs.samples.end(), 0.0) / cs.count;
        if (cs.count >= 2) {
            double ss = 0.0;
            for (double v : cs.samples) ss += (v - cs.mean) * (v - cs.mean);
            cs.variance = ss / (cs.count - 1);
        }
        stats.push_back(std::move(cs));
    }
    return stats;
}

StateMap merge_into_states(const std::vector<CombinationStats>& combination_stats,
                           const MergePolicy& policy, std::vector<std::string>* audit) {
    const int k = static_cast<int>(combination_stats.size());
    if (k == 0) throw ValidationError("merge_into_states: no combinations");

    UnionFind uf(k);
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            const auto& a = combination_stats[i];
            const auto& b = combination_stats[j];
            bool merge = false;
            std::string reason;
            if (a.count >= 2 && b.count >= 2) {
                const auto test = stats::welch_t_test(a.samples, b.samples);
                merge = *test.p_value >= policy.test_alpha;
                reason = "welch_p=" + fmt(*test.p_value);
            } else {
                const double scale = std::max(std::fabs(a.mean), std::fabs(b.mean));
                const double rel = scale > 0.0 ? std::fabs(a.mean - b.mean) / scale : 0.0;
                merge = rel <= policy.fallback_rel_tol;
                reason = "rel_diff=" + fmt(rel) + " (small-sample fallback)";
            }
            if (merge) uf.unite(i, j);
            if (audit) {
                audit->push_back("step4: " + combination_to_string(a.combination) + " vs " +
                                 combination_to_string(b.combination) + " " + reason +
                                 (merge ? " -> merge" : " -> distinct"));
            }
        }
    }

    // Gather groups, compute sample-weighted means, order by descending mean.
    std::map<int, std::vector<int>> groups;
    for (int i = 0; i < k; ++i) groups[uf.find(i)].push_back(i);

    struct Group {
        std::vector<int> members;
        double mean = 0.0;
        int count = 0;
    };
    std::vector<Group> ordered;
    for (auto& [root, members] : groups) {
        Group g;
        g.members = members;
        for (int i : members) {
            g.mean += combination_stats[i].mean * combination_stats[i].count;
            g.count += combination_stats[i].count;
        }
        g.mean /= g.count;
        ordered.push_back(std::move(g));
    }
    std::sort(ordered.begin(), ordered.end(), [&](const Group& a, const Group& b) {
        if (a.mean != b.mean) return a.mean > b.mean;
        return combination_stats[a.members.front()].combination <
               combination_stats[b.members.front()].combination;
    });

    StateMap map;
    for (std::size_t j = 0; j < ordered.size(); ++j) {
        StateInfo info;
        info.mean_uplift = ordered[j].mean;
        info.sample_count = ordered[j].count;
        for (int i : ordered[j].members) {
            info.members.push_back(combination_stats[i].combination);
            map.combination_index[combination_stats[i].combination] = static_cast<int>(j) + 1;
        }
        map.states.push_back(std::move(info));
    }
    return map;
}

StateMap assign_new_combination(const StateMap& state_map, const EventCombination& combination,
                                std::optional<double> expected_uplift, AssignMode mode,
                                int manual_state) {
    if (state_map.combination_index.count(combination)) {
        throw ValidationError("assign_new_combination: combination " +
                              combination_to_string(combination) + " already indexed");
    }
    StateMap out = state_map;
    switch (mode) {
        case AssignMode::Nearest: {
            if (!expected_uplift) {
                throw ValidationError("assign_new_combination: nearest mode needs expected_uplift");
            }
            int best = 1;
            double best_dist = std::fabs(out.states[0].mean_uplift - *expected_uplift);
            for (int j = 2; j <= out.state_count(); ++j) {
                const double d = std::fabs(out.states[j - 1].mean_uplift - *expected_uplift);
                if (d < best_dist) {
                    best_dist = d;
                    best = j;
                }
            }
            out.states[best - 1].members.push_back(combination);
            out.combination_index[combination] = best;
            break;
        }
        case AssignMode::NewState: {
            StateInfo info;
            info.members.push_back(combination);
            info.mean_uplift = expected_uplift.value_or(0.0);
            info.sample_count = 0;
            out.states.push_back(std::move(info));
            out.combination_index[combination] = out.state_count();
            break;
        }
        case AssignMode::Manual: {
            if (manual_state < 1 || manual_state > out.state_count()) {
                throw ValidationError("assign_new_combination: manual state " +
                                      std::to_string(manual_state) + " out of range 1.." +
                                      std::to_string(out.state_count()));
            }
            out.states[manual_state - 1].members.push_back(combination);
            out.combination_index[combination] = manual_state;
            break;
        }
    }
    return out;
}

namespace {

template <typename Fn>
auto tagged(const char* step, Fn&& fn) {
    try {
        return fn();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("[DUS ") + step + "] " + e.what());
    } catch (const StatError& e) {
        throw StatError(std::string("[DUS ") + step + "] " + e.what());
    }
}

}  // namespace

DusResult run_dus(const DemandSeries& demand, std::span<const double> baseline,
                  const EventCalendar& calendar, const std::vector<EventFactor>& candidate_factors,
                  const DusConfig& config) {
    DusResult result;

    const auto samples =
        tagged("step0", [&] { return compute_uplifts(demand, baseline, calendar); });
    result.audit_log.push_back("step0: " + std::to_string(samples.size()) + " uplift samples");

    result.factors = tagged("step1", [&] {
        return screen_significant_factors(samples, candidate_factors, config.anova_alpha,
                                          &result.audit_log);
    });
    if (result.factors.empty()) {
        throw StatError("[DUS step1] no significant factor found; define states manually");
    }

    const auto combinations =
        tagged("step2", [&] { return enumerate_combinations(result.factors, samples); });
    result.audit_log.push_back("step2: " + std::to_string(combinations.size()) +
                               " observed combinations");

    const auto combo_stats = tagged(
        "step3", [&] { return average_uplift_per_combination(samples, combinations); });
    for (const auto& cs : combo_stats) {
        result.audit_log.push_back("step3: " + combination_to_string(cs.combination) +
                                   " mean=" + fmt(cs.mean) + " n=" + std::to_string(cs.count));
    }

    result.state_map = tagged(
        "step4", [&] { return merge_into_states(combo_stats, config.merge, &result.audit_log); });
    for (int j = 1; j <= result.state_map.state_count(); ++j) {
        const auto& st = result.state_map.states[j - 1];
        result.audit_log.push_back("state " + std::to_string(j) + ": mean=" +
                                   fmt(st.mean_uplift) + " combinations=" +
                                   std::to_string(st.members.size()));
    }
    return result;
}

}  // namespace fse::dus
