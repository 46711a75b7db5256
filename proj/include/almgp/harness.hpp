#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "almgp/active_learning.hpp"
#include "almgp/benchmarks.hpp"

namespace almgp {

inline constexpr int kExperimentConfigVersion = 1;

/// Name of the environment variable that relocates relative output dirs.
inline constexpr const char* kOutputRootEnv = "ALMGP_OUTPUT_ROOT";

/// One experiment: a problem with its defaults plus overrides, run for a
/// number of seeded repetitions under each strategy.
struct ExperimentConfig {
    ProblemName problem = ProblemName::trig1d;
    std::size_t repetitions = 10;
    std::uint64_t base_seed = 0;
    std::vector<Strategy> strategies{Strategy::alc, Strategy::random};
    std::filesystem::path output_dir = "results";
    /// When false every wall_ms is written as 0 so outputs are byte-stable.
    bool record_timing = true;
    /// Worker threads for repetitions; 0 means one per hardware thread.
    std::size_t threads = 0;

    MlpArch arch;
    AlConfig al;
    OptimConfig opt;
    OptimizerLoss optimizer_loss = OptimizerLoss::nlml;
    double rho_raw_init = 0.1;

    /// The problem's published configuration.
    static ExperimentConfig defaults(ProblemName problem);
    /// Problem defaults overlaid with the document's values. Unknown keys
    /// are rejected.
    static ExperimentConfig from_json(std::string_view text);
    [[nodiscard]] std::string to_json() const;

    /// The problem definition with this config's overrides applied.
    [[nodiscard]] Problem problem_definition() const;
    void validate() const;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Applies one `section.key=value` override (value parsed as JSON, falling
/// back to a plain string) to a config document.
std::string apply_override(std::string_view config_json, std::string_view assignment);

/// output_dir, placed under $ALMGP_OUTPUT_ROOT when it is relative and the
/// variable is set.
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg);

/// Creates the directory and proves it writable; throws an io error otherwise.
void ensure_writable_dir(const std::filesystem::path& dir);

/// Run id of a (repetition, strategy) pair: rep * strategy_count + strategy_index.
std::size_t make_run_id(std::size_t repetition, std::size_t strategy_index, std::size_t strategy_count);

struct AggregateRow {
    Strategy strategy = Strategy::alc;
    std::size_t iteration = 0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t runs = 0;
};

/// Per (strategy, iteration) mean/min/max of test RMSE. A run that ended
/// early keeps contributing its last RMSE up to the strategy's last
/// iteration. Rows are ordered by strategy then iteration.
std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records);

struct RunSummary {
    std::size_t run_id = 0;
    std::size_t repetition = 0;
    Strategy strategy = Strategy::alc;
    std::uint64_t seed = 0;
    double initial_test_rmse = 0.0;
    std::optional<double> final_test_rmse;
    std::size_t rounds = 0;
    bool stopped_early = false;
    std::optional<std::string> failure;
};

struct ExperimentResult {
    std::filesystem::path output_dir;
    std::vector<RunRecord> records;
    std::vector<AggregateRow> aggregate;
    std::vector<RunSummary> runs;
    double wall_seconds = 0.0;

    /// Mean over runs of the final test RMSE for one strategy; empty when no
    /// run of that strategy produced a record.
    [[nodiscard]] std::optional<double> mean_final_rmse(Strategy strategy) const;
};

/// Runs every repetition and strategy and writes records.csv,
/// selected_points.csv, aggregate.csv, rmse.svg, summary.json and one
/// checkpoint per run into the output directory.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// ---- files -------------------------------------------------------------------

inline constexpr std::string_view kRecordsHeader = "run_id,strategy,iteration,n_train,test_rmse,wall_ms";

/// %.17g, the form every number takes in the CSV files.
std::string format_number(double value);

void write_records_csv(const std::filesystem::path& path, const std::vector<RunRecord>& records,
                       bool record_timing);
std::vector<RunRecord> read_records_csv(const std::filesystem::path& path);
void write_selected_points_csv(const std::filesystem::path& path, const std::vector<RunRecord>& records);
void write_aggregate_csv(const std::filesystem::path& path, const std::vector<AggregateRow>& rows);
std::vector<AggregateRow> read_aggregate_csv(const std::filesystem::path& path);

/// RMSE curves: mean polyline and min-max band per strategy, ALC solid green,
/// random dashed red. Values are embedded verbatim as data attributes.
std::string render_rmse_svg(const std::vector<AggregateRow>& rows, std::string_view title);

/// Rebuilds aggregate.csv and rmse.svg from records.csv in dir.
std::vector<AggregateRow> aggregate_directory(const std::filesystem::path& dir);
/// Rewrites rmse.svg from aggregate.csv in dir.
void plot_directory(const std::filesystem::path& dir);

} // namespace almgp
