#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fse {

/// Input/validation failures (bad files, bad arguments). CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Statistical-stage failures (rank deficiency, degenerate data, failed
/// stationarity treatment). CLI exit code 1.
class StatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Weekly demand observations with an integer week origin.
struct DemandSeries {
    int start_week = 0;
    std::vector<double> values;
    int differencing_applied = 0;
};

/// A systematic-event factor and its possible levels (expert input).
struct EventFactor {
    std::string name;
    std::vector<std::string> levels;
};

/// factor name -> level. Ordered map so combinations compare and print
/// deterministically (lexicographic by factor name).
using EventCombination = std::map<std::string, std::string>;

std::string combination_to_string(const EventCombination& c);

/// Per-week event assignments. Weeks absent from `events` are non-event weeks.
struct EventCalendar {
    std::map<int, EventCombination> events;

    bool has_event(int week) const { return events.count(week) > 0; }
};

struct StateInfo {
    std::vector<EventCombination> members;
    double mean_uplift = 0.0;
    int sample_count = 0;
};

/// Output of the DUS algorithm: states labelled 1..m plus the index mapping
/// every observed combination to its state.
struct StateMap {
    std::vector<StateInfo> states;                 // states[j-1] is state j
    std::map<EventCombination, int> combination_index;

    int state_count() const { return static_cast<int>(states.size()); }
    int combination_count() const { return static_cast<int>(combination_index.size()); }
};

/// Generic hypothesis-test outcome. p_value is absent for tests decided
/// against tabulated critical values (KPSS).
struct TestResult {
    double statistic = 0.0;
    std::optional<double> p_value;
    bool reject_at_5pct = false;
    bool degenerate = false;
    std::map<std::string, double> meta;
};

/// OLS estimate with the usual t-based inference.
struct RegressionFit {
    std::vector<double> coefficients;
    std::vector<double> standard_errors;
    std::vector<double> t_statistics;
    std::vector<double> p_values;
    std::vector<double> residuals;
    double sse = 0.0;
    int n_obs = 0;
    int n_params = 0;
};

}  // namespace fse
