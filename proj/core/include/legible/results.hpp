#pragma once

// Benchmark result rows: the CSV schema, an incremental writer, and the
// paired-success balancing step applied before comparing frameworks.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace legible {

inline constexpr std::string_view kResultsHeader =
    "experiment,framework,maze,goals,states,sample_id,start,goal,success,seconds,leg_polmdp,"
    "leg_miura_kl,leg_miura_euclid,seed,beta,gamma,eta,notes";

struct ResultRow {
    std::string experiment;
    std::string framework;  // "polmdp" or "lmdp"
    std::string maze;
    std::size_t goals = 0;
    std::size_t states = 0;
    std::size_t sample_id = 0;
    std::string start;  // "row:col"
    std::string goal;   // label
    bool success = false;
    double seconds = 0.0;
    // Empty in the CSV (nullopt here) for failed samples.
    std::optional<double> leg_polmdp;
    std::optional<double> leg_miura_kl;
    std::optional<double> leg_miura_euclid;
    std::uint64_t seed = 0;
    double beta = 0.0;
    double gamma = 0.0;
    double eta = 0.0;
    std::string notes;  // remaining config fingerprint, ';'-separated, no commas

    bool operator==(const ResultRow&) const = default;
};

std::string to_csv_line(const ResultRow& row);
// Throws ParseError naming `line_number`.
ResultRow parse_csv_line(std::string_view line, std::size_t line_number);

std::vector<ResultRow> read_results(std::istream& in);
std::vector<ResultRow> read_results(const std::filesystem::path& path);
void write_results(std::ostream& out, const std::vector<ResultRow>& rows);

// Appends rows to a CSV file and flushes after each one. Rows are released in
// submission-index order so concurrent workers still produce a stable file.
class ResultSink {
public:
    explicit ResultSink(const std::filesystem::path& path);

    // `index` numbers rows 0, 1, 2, ... across the whole run.
    void submit(std::size_t index, ResultRow row);
    std::size_t written() const;

private:
    mutable std::mutex mutex_;
    std::ofstream out_;
    std::size_t next_ = 0;
    std::map<std::size_t, ResultRow> pending_;
};

// Keeps, per configuration (experiment, maze, goals), only samples where every
// framework succeeded, then the `quota` fastest of those by the slower
// framework's time. Throws InsufficientSamples when a configuration has fewer
// paired successes than the quota.
std::vector<ResultRow> balance_results(const std::vector<ResultRow>& rows, std::size_t quota);

}  // namespace legible
