#include "legible/results.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <stdexcept>
#include <cstdio>
#include <set>
#include <sstream>
#include <tuple>

#include "legible/errors.hpp"

namespace legible {
namespace {

constexpr std::size_t kNumColumns = 18;

std::string format_number(double v, const char* format) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, format, v);
    return buffer;
}

std::string format_optional(const std::optional<double>& v) {
    return v ? format_number(*v, "%.10g") : std::string();
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        const std::size_t end = line.find(sep, pos);
        fields.push_back(line.substr(pos, end == std::string_view::npos ? line.npos : end - pos));
        if (end == std::string_view::npos) break;
        pos = end + 1;
    }
    return fields;
}

template <typename T>
T parse_integer(std::string_view field, const char* column, std::size_t line) {
    T value{};
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError(std::string("bad integer in column ") + column, line);
    }
    return value;
}

double parse_real(std::string_view field, const char* column, std::size_t line) {
    // from_chars for double is missing from older libstdc++.
    const std::string text(field);
    char* end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size()) {
        throw ParseError(std::string("bad number in column ") + column, line);
    }
    return value;
}

std::optional<double> parse_optional(std::string_view field, const char* column, std::size_t line) {
    if (field.empty()) return std::nullopt;
    return parse_real(field, column, line);
}

}  // namespace

std::string to_csv_line(const ResultRow& row) {
    std::string notes = row.notes;
    std::replace(notes.begin(), notes.end(), ',', ';');
    std::ostringstream out;
    out << row.experiment << ',' << row.framework << ',' << row.maze << ',' << row.goals << ','
        << row.states << ',' << row.sample_id << ',' << row.start << ',' << row.goal << ','
        << (row.success ? "true" : "false") << ',' << format_number(row.seconds, "%.6f") << ','
        << format_optional(row.leg_polmdp) << ',' << format_optional(row.leg_miura_kl) << ','
        << format_optional(row.leg_miura_euclid) << ',' << row.seed << ','
        << format_number(row.beta, "%.17g") << ',' << format_number(row.gamma, "%.17g") << ','
        << format_number(row.eta, "%.17g") << ',' << notes;
    return out.str();
}

ResultRow parse_csv_line(std::string_view line, std::size_t line_number) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto f = split(line, ',');
    if (f.size() != kNumColumns) {
        throw ParseError("expected " + std::to_string(kNumColumns) + " columns, found " +
                             std::to_string(f.size()),
                         line_number);
    }
    ResultRow row;
    row.experiment = f[0];
    row.framework = f[1];
    row.maze = f[2];
    row.goals = parse_integer<std::size_t>(f[3], "goals", line_number);
    row.states = parse_integer<std::size_t>(f[4], "states", line_number);
    row.sample_id = parse_integer<std::size_t>(f[5], "sample_id", line_number);
    row.start = f[6];
    row.goal = f[7];
    if (f[8] == "true") {
        row.success = true;
    } else if (f[8] != "false") {
        throw ParseError("success must be true or false", line_number);
    }
    row.seconds = parse_real(f[9], "seconds", line_number);
    row.leg_polmdp = parse_optional(f[10], "leg_polmdp", line_number);
    row.leg_miura_kl = parse_optional(f[11], "leg_miura_kl", line_number);
    row.leg_miura_euclid = parse_optional(f[12], "leg_miura_euclid", line_number);
    row.seed = parse_integer<std::uint64_t>(f[13], "seed", line_number);
    row.beta = parse_real(f[14], "beta", line_number);
    row.gamma = parse_real(f[15], "gamma", line_number);
    row.eta = parse_real(f[16], "eta", line_number);
    row.notes = f[17];
    return row;
}

std::vector<ResultRow> read_results(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("missing header", 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kResultsHeader) throw ParseError("unexpected header", 1);
    std::vector<ResultRow> rows;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        rows.push_back(parse_csv_line(line, number));
    }
    return rows;
}

std::vector<ResultRow> read_results(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open results file " + path.string());
    try {
        return read_results(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    }
}

void write_results(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << kResultsHeader << '\n';
    for (const ResultRow& row : rows) out << to_csv_line(row) << '\n';
}

ResultSink::ResultSink(const std::filesystem::path& path) : out_(path, std::ios::trunc) {
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
    out_ << kResultsHeader << '\n' << std::flush;
}

void ResultSink::submit(std::size_t index, ResultRow row) {
    std::lock_guard lock(mutex_);
    pending_.emplace(index, std::move(row));
    while (!pending_.empty() && pending_.begin()->first == next_) {
        out_ << to_csv_line(pending_.begin()->second) << '\n' << std::flush;
        pending_.erase(pending_.begin());
        ++next_;
    }
}

std::size_t ResultSink::written() const {
    std::lock_guard lock(mutex_);
    return next_;
}

std::vector<ResultRow> balance_results(const std::vector<ResultRow>& rows, std::size_t quota) {
    if (quota == 0) throw std::invalid_argument("quota must be >= 1");
    using ConfigKey = std::tuple<std::string, std::string, std::size_t>;

    std::set<std::string> frameworks;
    for (const ResultRow& r : rows) frameworks.insert(r.framework);

    struct Sample {
        std::map<std::string, const ResultRow*> by_framework;
    };
    std::map<ConfigKey, std::map<std::size_t, Sample>> configs;
    for (const ResultRow& r : rows) {
        configs[{r.experiment, r.maze, r.goals}][r.sample_id].by_framework[r.framework] = &r;
    }

    std::set<std::pair<ConfigKey, std::size_t>> kept;
    std::size_t achievable = std::numeric_limits<std::size_t>::max();
    std::string short_config;
    for (const auto& [key, samples] : configs) {
        std::vector<std::pair<double, std::size_t>> paired;  // (slower time, sample id)
        for (const auto& [id, sample] : samples) {
            bool ok = sample.by_framework.size() == frameworks.size();
            double slowest = 0.0;
            for (const auto& [name, row] : sample.by_framework) {
                ok = ok && row->success;
                slowest = std::max(slowest, row->seconds);
            }
            if (ok) paired.emplace_back(slowest, id);
        }
        if (paired.size() < achievable) {
            achievable = paired.size();
            short_config = std::get<0>(key) + "/" + std::get<1>(key) + "/" +
                           std::to_string(std::get<2>(key)) + " goals";
        }
        std::sort(paired.begin(), paired.end());
        for (std::size_t i = 0; i < std::min(quota, paired.size()); ++i) {
            kept.emplace(key, paired[i].second);
        }
    }
    if (!configs.empty() && achievable < quota) {
        throw InsufficientSamples("configuration " + short_config + " has only " +
                                      std::to_string(achievable) +
                                      " paired successes; achievable quota is " +
                                      std::to_string(achievable),
                                  achievable);
    }

    std::vector<ResultRow> out;
    for (const ResultRow& r : rows) {
        if (kept.contains({{r.experiment, r.maze, r.goals}, r.sample_id})) out.push_back(r);
    }
    return out;
}

}  // namespace legible
