#pragma once

#include "abpsim/protocols.hpp"
#include "abpsim/sim_config.hpp"
#include "abpsim/sim_engine.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace abpsim {

struct ExperimentSpec {
    std::string name = "default";
    SimConfig config;
    SweepAxis axis = SweepAxis::NONE;
    std::vector<double> values;
    std::vector<ProtocolVariant> variants{std::begin(kAllVariants), std::end(kAllVariants)};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::vector<std::string> figures{"fig6", "fig7", "fig8", "fig9"};
    std::string out = "results";

    /// Throws ConfigError naming the offending key.
    void validate() const;
};

/// Shortest round-trip decimal text, '.' separator.
std::string format_number(double x);

/// Sets one key. Unknown key, malformed value -> ConfigError naming the key.
void apply_setting(ExperimentSpec& spec, std::string_view key, std::string_view value);

/// Parses `key = value` lines (`#` comments, blank lines ignored) onto spec.
void apply_config_text(ExperimentSpec& spec, std::string_view text, std::string_view origin = "<text>");

/// Defaults, then the file (if any), then `key=value` overrides; validated.
ExperimentSpec load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides = {});

/// Fully resolved configuration as config text; loads back to the same spec.
std::string echo_config(const ExperimentSpec& spec);

struct FigureRow {
    ProtocolVariant variant;
    double value;
    double mean;
    double stddev; // sample stddev over seeds, 0 for a single seed
};

struct FigureDataset {
    std::string id; // fig6..fig9
    Metric metric;
    std::string filename;
    std::vector<FigureRow> rows;
};

/// Metric and file name for a figure id; throws ConfigError for unknown ids.
Metric figure_metric(std::string_view id);
std::string figure_filename(std::string_view id);

std::vector<FigureDataset> build_figures(const std::vector<SweepRow>& rows, const std::vector<std::string>& figures);

std::string figure_csv(const FigureDataset& fig, SweepAxis axis);
/// Header `variant,axis,value,seed,metric,value`; one row per run and requested metric.
std::string long_csv(const std::vector<SweepRow>& rows, SweepAxis axis, const std::vector<std::string>& figures);

inline constexpr const char* kLongCsvName = "runs_long.csv";
inline constexpr const char* kResolvedConfigName = "resolved.conf";

/// Runs the sweep and writes every CSV plus the resolved config into spec.out.
/// Returns the written paths. I/O failures throw std::runtime_error.
std::vector<std::string> cmd_run(const ExperimentSpec& spec, unsigned threads = 0);

/// Reference CHC table: MH 1..15 with their degree and battery columns.
struct Table1Row {
    int id;
    int d;
    double b;
};
std::vector<Table1Row> table1_fixture();
Graph table1_graph();

/// Tab-separated MH ID, d, b, CHC rows. Throws std::invalid_argument when the
/// column lengths differ.
std::string format_table1(const std::vector<int>& d, const std::vector<double>& b, const ChcParams& params,
                          bool comma_decimal);

/// Thread cap from ABP_SIM_THREADS (0 or unset = auto).
unsigned threads_from_env();

} // namespace abpsim
