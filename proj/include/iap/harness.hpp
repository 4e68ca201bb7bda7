#ifndef IAP_HARNESS_HPP
#define IAP_HARNESS_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iap/ap_core.hpp"
#include "iap/app.hpp"
#include "iap/data.hpp"

namespace iap::harness {

enum class Algorithm { AP, IAPNA, APP };
enum class Setting { Uniform, Variable, Ablation };

std::string to_string(Algorithm a);
std::string to_string(Setting s);
Algorithm parse_algorithm(const std::string& s);
Setting parse_setting(const std::string& s);

struct ExperimentConfig {
    Algorithm algorithm = Algorithm::APP;
    Setting setting = Setting::Uniform;
    APConfig ap;
    double th_gamma = 1.0;
    std::optional<std::size_t> q;        // variable setting; default_q() when unset
    std::size_t steps = 6;
    std::optional<std::size_t> first_n;  // uniform setting; |ds| - (steps - 1) * step_n when unset
    std::size_t step_n = 10;
    std::vector<std::uint64_t> seeds{1};
    Normalization normalization = Normalization::MinMax;
    bool parallel_seeds = true;
};

struct StepRecord {
    std::uint64_t seed = 0;
    int step = 0;
    std::size_t n_objects = 0;  // evaluated (retained) objects
    double purity = 0.0;
    double nmi = 0.0;
    std::size_t nc = 0;
    int ni = 0;
    double ct_seconds = 0.0;
    double mu_mb = 0.0;
};

struct StepLabels {
    int step = 0;
    std::vector<std::size_t> objects;  // dataset indices, ascending
    std::vector<int> predicted;
};

struct SeedRun {
    std::uint64_t seed = 0;
    std::vector<StepRecord> records;
    std::vector<StepLabels> labels;
    std::vector<StratificationEvent> events;  // APP only
    std::vector<std::size_t> ap_input_sizes;  // matrix dimension per step
    std::optional<nlohmann::json> final_state; // APP only
};

struct ExperimentResult {
    std::vector<ScheduleRecord> schedules;
    std::vector<SeedRun> runs;                       // ascending seed
    std::map<std::uint64_t, std::string> failures;   // seed -> schedule error
};

/// Matrix footprint proxy: similarity, responsibility and availability matrices, 8 bytes per entry, in MB.
double matrix_footprint_mb(std::size_t n);

/// The schedule used for `seed`; identical for every algorithm.
ScheduleRecord make_schedule(const Dataset& ds, const ExperimentConfig& config, std::uint64_t seed);

/// Feeds the schedule to one algorithm, normalizing cumulatively at every step.
SeedRun run_seed(const Dataset& ds, const ExperimentConfig& config, const ScheduleRecord& schedule);

/// Runs every seed (in parallel when enabled). Schedule failures abort only their seed.
/// `replay` supplies pre-generated schedules instead of generating them.
ExperimentResult run_experiment(const Dataset& ds, const ExperimentConfig& config,
                                const std::vector<ScheduleRecord>* replay = nullptr);

/// Median with the even-count convention (mean of the central pair).
double median(std::vector<double> values);

struct MedianRow {
    int step = 0;
    std::size_t seeds = 0;
    double purity = 0.0, nmi = 0.0, nc = 0.0, ni = 0.0, ct_seconds = 0.0, mu_mb = 0.0;
};

/// Per-step medians over seeds; step 0 rows are dropped unless include_step0.
std::vector<MedianRow> aggregate_median(const std::vector<StepRecord>& records, bool include_step0 = false);

/// Writes records.csv, timings.csv, labels.csv, medians.csv, events.jsonl, series.json
/// and schedules.jsonl into outdir (created if needed). Throws IoError on failure.
void export_results(const ExperimentResult& result, const std::vector<MedianRow>& medians, const std::string& outdir);

std::vector<StepRecord> all_records(const ExperimentResult& result);

/// Reads records.csv, merging ct_seconds from timings.csv when a path is given.
std::vector<StepRecord> read_records(const std::string& records_csv, const std::string& timings_csv = "");
void write_medians_csv(const std::vector<MedianRow>& rows, const std::string& path);

}  // namespace iap::harness

#endif  // IAP_HARNESS_HPP
