#include "fse/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fse::io {

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

struct CsvFile {
    std::filesystem::path path;
    std::vector<std::string> header;
    std::vector<std::pair<int, std::vector<std::string>>> rows;  // (line number, cells)
};

CsvFile read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path.string());
    CsvFile csv;
    csv.path = path;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (csv.header.empty()) {
            csv.header = std::move(cells);
        } else {
            csv.rows.emplace_back(line_no, std::move(cells));
        }
    }
    if (csv.header.empty()) {
        throw ValidationError(path.string() + ": missing header row");
    }
    return csv;
}

[[noreturn]] void cell_error(const CsvFile& csv, int line, const std::string& column,
                             const std::string& message) {
    std::ostringstream os;
    os << csv.path.string() << ":" << line << " (column " << column << "): " << message;
    throw ValidationError(os.str());
}

double parse_number(const CsvFile& csv, int line, const std::string& column,
                    const std::string& cell) {
    try {
        std::size_t consumed = 0;
        const double v = std::stod(cell, &consumed);
        if (consumed != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        cell_error(csv, line, column, "expected a number, got '" + cell + "'");
    }
}

// days-from-civil (Gregorian), Hinnant's algorithm.
long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

// Weeks are either plain integers or ISO-8601 dates on a strict 7-day grid;
// dates map to absolute week numbers (days since epoch / 7). Each file must
// use one format throughout.
int parse_week(const CsvFile& csv, int line, const std::string& cell, int* format_seen) {
    const bool looks_like_date = cell.size() == 10 && cell[4] == '-' && cell[7] == '-';
    const int format = looks_like_date ? 2 : 1;
    if (*format_seen == 0) *format_seen = format;
    if (*format_seen != format) {
        cell_error(csv, line, "week", "mixed integer and date week formats in one file");
    }
    if (!looks_like_date) {
        int v = 0;
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
            cell_error(csv, line, "week", "expected integer week or ISO-8601 date, got '" +
                                              cell + "'");
        }
        return v;
    }
    int y = 0, m = 0, d = 0;
    try {
        y = std::stoi(cell.substr(0, 4));
        m = std::stoi(cell.substr(5, 2));
        d = std::stoi(cell.substr(8, 2));
    } catch (const std::exception&) {
        cell_error(csv, line, "week", "malformed ISO-8601 date '" + cell + "'");
    }
    if (m < 1 || m > 12 || d < 1 || d > 31) {
        cell_error(csv, line, "week", "date out of range '" + cell + "'");
    }
    // Off-grid dates surface as gaps/duplicates in the contiguity check.
    return static_cast<int>(days_from_civil(y, m, d) / 7);
}

void check_contiguous(const std::filesystem::path& path, const std::vector<int>& weeks) {
    if (weeks.empty()) throw ValidationError(path.string() + ": no data rows");
    std::vector<int> gaps;
    for (std::size_t i = 1; i < weeks.size(); ++i) {
        if (weeks[i] != weeks[i - 1] + 1) gaps.push_back(weeks[i - 1] + 1);
    }
    if (!gaps.empty()) {
        std::ostringstream os;
        os << path.string() << ": weeks are not contiguous; missing weeks start at:";
        for (int g : gaps) os << " " << g;
        throw ValidationError(os.str());
    }
}

}  // namespace

std::vector<EventFactor> load_factors(const std::filesystem::path& path) {
    const auto csv = read_csv(path);
    if (csv.header != std::vector<std::string>{"factor", "level"}) {
        throw ValidationError(path.string() + ": expected header 'factor,level'");
    }
    std::vector<EventFactor> factors;
    for (const auto& [line, cells] : csv.rows) {
        if (cells.size() != 2 || cells[0].empty() || cells[1].empty()) {
            cell_error(csv, line, "factor", "expected 'factor,level'");
        }
        auto it = std::find_if(factors.begin(), factors.end(),
                               [&](const EventFactor& f) { return f.name == cells[0]; });
        if (it == factors.end()) {
            factors.push_back({cells[0], {cells[1]}});
        } else {
            if (std::find(it->levels.begin(), it->levels.end(), cells[1]) != it->levels.end()) {
                cell_error(csv, line, "level",
                           "duplicate level '" + cells[1] + "' for factor " + cells[0]);
            }
            it->levels.push_back(cells[1]);
        }
    }
    if (factors.empty()) throw ValidationError(path.string() + ": no factors declared");
    return factors;
}

DemandSeries load_demand(const std::filesystem::path& path) {
    const auto csv = read_csv(path);
    if (csv.header != std::vector<std::string>{"week", "demand"}) {
        throw ValidationError(path.string() + ": expected header 'week,demand'");
    }
    DemandSeries series;
    std::vector<int> weeks;
    int format = 0;
    for (const auto& [line, cells] : csv.rows) {
        if (cells.size() != 2) cell_error(csv, line, "demand", "expected 'week,demand'");
        weeks.push_back(parse_week(csv, line, cells[0], &format));
        series.values.push_back(parse_number(csv, line, "demand", cells[1]));
    }
    check_contiguous(path, weeks);
    series.start_week = weeks.front();
    return series;
}

EventCalendar load_calendar(const std::filesystem::path& path,
                            const std::vector<EventFactor>& factors,
                            std::vector<int>* weeks_out) {
    const auto csv = read_csv(path);
    if (csv.header.size() < 2 || csv.header[0] != "week") {
        throw ValidationError(path.string() + ": expected header 'week,<factor_1>,...'");
    }
    std::vector<const EventFactor*> columns;
    for (std::size_t c = 1; c < csv.header.size(); ++c) {
        auto it = std::find_if(factors.begin(), factors.end(),
                               [&](const EventFactor& f) { return f.name == csv.header[c]; });
        if (it == factors.end()) {
            throw ValidationError(path.string() + ": calendar column '" + csv.header[c] +
                                  "' is not a declared factor");
        }
        columns.push_back(&*it);
    }

    EventCalendar calendar;
    std::vector<int> weeks;
    int format = 0;
    for (const auto& [line, cells] : csv.rows) {
        if (cells.size() != csv.header.size()) {
            cell_error(csv, line, "week", "expected " + std::to_string(csv.header.size()) +
                                              " cells");
        }
        const int week = parse_week(csv, line, cells[0], &format);
        weeks.push_back(week);
        int filled = 0;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            if (!cells[c].empty()) ++filled;
        }
        if (filled == 0) continue;  // non-event week
        if (filled != static_cast<int>(columns.size())) {
            cell_error(csv, line, csv.header[1],
                       "partial event row: all factor cells must be empty or all non-empty");
        }
        EventCombination combo;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            const auto* factor = columns[c - 1];
            if (std::find(factor->levels.begin(), factor->levels.end(), cells[c]) ==
                factor->levels.end()) {
                cell_error(csv, line, factor->name,
                           "undeclared level '" + cells[c] + "' for factor " + factor->name);
            }
            combo[factor->name] = cells[c];
        }
        calendar.events[week] = std::move(combo);
    }
    check_contiguous(path, weeks);
    if (weeks_out) *weeks_out = std::move(weeks);
    return calendar;
}

namespace {

struct ForecastColumns {
    std::vector<int> weeks;
    std::vector<double> baseline;
    std::optional<std::vector<double>> adjusted;
};

ForecastColumns load_forecasts(const std::filesystem::path& path) {
    const auto csv = read_csv(path);
    const bool has_adjusted =
        csv.header == std::vector<std::string>{"week", "baseline", "adjusted"};
    if (!has_adjusted && csv.header != std::vector<std::string>{"week", "baseline"}) {
        throw ValidationError(path.string() +
                              ": expected header 'week,baseline' or 'week,baseline,adjusted'");
    }
    ForecastColumns out;
    if (has_adjusted) out.adjusted.emplace();
    int format = 0;
    for (const auto& [line, cells] : csv.rows) {
        if (cells.size() != csv.header.size()) {
            cell_error(csv, line, "baseline", "wrong cell count");
        }
        out.weeks.push_back(parse_week(csv, line, cells[0], &format));
        out.baseline.push_back(parse_number(csv, line, "baseline", cells[1]));
        if (has_adjusted) out.adjusted->push_back(parse_number(csv, line, "adjusted", cells[2]));
    }
    check_contiguous(path, out.weeks);
    return out;
}

}  // namespace

DatasetBundle load_bundle(const std::filesystem::path& demand_path,
                          const std::filesystem::path& calendar_path,
                          const std::optional<std::filesystem::path>& forecasts_path,
                          const std::filesystem::path& factors_path) {
    DatasetBundle bundle;
    bundle.factor_declarations = load_factors(factors_path);
    bundle.demand = load_demand(demand_path);

    std::vector<int> calendar_weeks;
    bundle.calendar = load_calendar(calendar_path, bundle.factor_declarations, &calendar_weeks);
    const int n = static_cast<int>(bundle.demand.values.size());
    if (calendar_weeks.front() != bundle.demand.start_week ||
        static_cast<int>(calendar_weeks.size()) != n) {
        std::ostringstream os;
        os << calendar_path.string() << ": calendar weeks " << calendar_weeks.front() << ".."
           << calendar_weeks.back() << " misaligned with demand weeks "
           << bundle.demand.start_week << ".." << bundle.demand.start_week + n - 1;
        throw ValidationError(os.str());
    }

    if (forecasts_path) {
        const auto forecasts = load_forecasts(*forecasts_path);
        if (forecasts.weeks.front() != bundle.demand.start_week ||
            forecasts.weeks.size() != static_cast<std::size_t>(n)) {
            throw ValidationError(forecasts_path->string() +
                                  ": forecast weeks misaligned with demand weeks");
        }
        bundle.baseline_forecasts = forecasts.baseline;
        bundle.adjusted_forecasts = forecasts.adjusted;
    }
    return bundle;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write file: " + tmp);
        out << content;
        if (!out.good()) throw ValidationError("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::ostringstream os;
    os.precision(17);

    os << "week,demand\n";
    for (std::size_t i = 0; i < bundle.demand.values.size(); ++i) {
        os << bundle.demand.start_week + static_cast<int>(i) << "," << bundle.demand.values[i]
           << "\n";
    }
    write_file_atomic(out_dir / "demand.csv", os.str());

    os.str("");
    os << "factor,level\n";
    for (const auto& factor : bundle.factor_declarations) {
        for (const auto& level : factor.levels) os << factor.name << "," << level << "\n";
    }
    write_file_atomic(out_dir / "factors.csv", os.str());

    os.str("");
    os << "week";
    for (const auto& factor : bundle.factor_declarations) os << "," << factor.name;
    os << "\n";
    for (std::size_t i = 0; i < bundle.demand.values.size(); ++i) {
        const int week = bundle.demand.start_week + static_cast<int>(i);
        os << week;
        auto it = bundle.calendar.events.find(week);
        for (const auto& factor : bundle.factor_declarations) {
            os << ",";
            if (it != bundle.calendar.events.end()) os << it->second.at(factor.name);
        }
        os << "\n";
    }
    write_file_atomic(out_dir / "calendar.csv", os.str());

    if (bundle.baseline_forecasts) {
        os.str("");
        os << "week,baseline" << (bundle.adjusted_forecasts ? ",adjusted" : "") << "\n";
        for (std::size_t i = 0; i < bundle.baseline_forecasts->size(); ++i) {
            os << bundle.demand.start_week + static_cast<int>(i) << ","
               << (*bundle.baseline_forecasts)[i];
            if (bundle.adjusted_forecasts) os << "," << (*bundle.adjusted_forecasts)[i];
            os << "\n";
        }
        write_file_atomic(out_dir / "forecasts.csv", os.str());
    }
}

RunConfig parse_config_text(const std::string& text, const std::string& source_name) {
    RunConfig config;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(source_name + ":" + std::to_string(line_no) +
                                  ": expected 'key = value'");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        try {
            if (key == "train_length") {
                config.train_length = std::stoi(value);
            } else if (key == "p_max") {
                config.p_max = std::stoi(value);
            } else if (key == "alpha") {
                config.alpha = std::stod(value);
            } else if (key == "msae_variant") {
                if (value != "ratio_of_sums" && value != "mean_of_shares") {
                    throw ValidationError(source_name + ":" + std::to_string(line_no) +
                                          ": msae_variant must be ratio_of_sums or mean_of_shares");
                }
                config.msae_variant = value;
            } else if (key == "forecast_mode") {
                if (value != "recursive" && value != "rolling") {
                    throw ValidationError(source_name + ":" + std::to_string(line_no) +
                                          ": forecast_mode must be recursive or rolling");
                }
                config.forecast_mode = value;
            } else if (key == "seed") {
                config.seed = std::stoull(value);
            } else if (key == "fallback_rel_tol") {
                config.fallback_rel_tol = std::stod(value);
            } else {
                throw ValidationError(source_name + ":" + std::to_string(line_no) +
                                      ": unknown key '" + key + "'");
            }
        } catch (const ValidationError&) {
            throw;
        } catch (const std::exception&) {
            throw ValidationError(source_name + ":" + std::to_string(line_no) +
                                  ": invalid value '" + value + "' for key '" + key + "'");
        }
    }
    return config;
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config_text(os.str(), path.string());
}

std::string state_map_to_json(const StateMap& map) {
    nlohmann::json j;
    j["states"] = nlohmann::json::array();
    for (const auto& state : map.states) {
        nlohmann::json s;
        s["mean_uplift"] = state.mean_uplift;
        s["sample_count"] = state.sample_count;
        s["members"] = nlohmann::json::array();
        for (const auto& combo : state.members) s["members"].push_back(combo);
        j["states"].push_back(std::move(s));
    }
    return j.dump(2);
}

StateMap state_map_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("state map: invalid JSON: ") + e.what());
    }
    try {
        StateMap map;
        int label = 0;
        for (const auto& s : j.at("states")) {
            ++label;
            StateInfo info;
            info.mean_uplift = s.at("mean_uplift").get<double>();
            info.sample_count = s.at("sample_count").get<int>();
            for (const auto& m : s.at("members")) {
                EventCombination combo = m.get<std::map<std::string, std::string>>();
                map.combination_index[combo] = label;
                info.members.push_back(std::move(combo));
            }
            map.states.push_back(std::move(info));
        }
        if (map.states.empty()) throw ValidationError("state map: no states");
        return map;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("state map: missing or malformed field: ") + e.what());
    }
}

std::string format_sig6(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace fse::io
