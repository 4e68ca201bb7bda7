// iapbench: run AP / IAPNA / APP over incremental arrival schedules and export metrics.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "iap/error.hpp"
#include "iap/harness.hpp"

namespace {

using namespace iap;

double parse_threshold(const std::string& s) {
    if (s == "inf" || s == "infinity" || s == "+inf") return kNoPruning;
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw InvalidInput("th-gamma must be a number or 'inf'");
    return v;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) seeds.push_back(std::stoull(tok));
    return seeds;
}

bool flag_on_command_line(int argc, char** argv, const std::string& flag) {
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    }
    return false;
}

struct DataOptions {
    std::string path;
    std::string schema;
    bool header = false;
    std::size_t top_k = 0;
    std::size_t subset_n = 0;
    bool balanced = false;
    std::uint64_t subset_seed = 0;

    Dataset load() const {
        CsvSchema s = schema.empty() ? CsvSchema{} : load_schema(schema);
        if (header) s.header = true;
        Dataset ds = load_csv(path, s);
        if (top_k > 0) {
            Rng rng(subset_seed);
            ds = subset_top_categories(ds, top_k, subset_n ? subset_n : ds.size(), rng, balanced);
        }
        return ds;
    }
};

void add_data_options(CLI::App* cmd, DataOptions& d) {
    cmd->add_option("--data", d.path, "CSV dataset: feature columns then a label column")->required();
    cmd->add_option("--schema", d.schema, "JSON sidecar declaring header and categorical columns");
    cmd->add_flag("--header", d.header, "First CSV row is a header");
    cmd->add_option("--top-k", d.top_k, "Keep only the k most populous categories");
    cmd->add_option("--subset-n", d.subset_n, "Objects to sample from the kept categories");
    cmd->add_flag("--balanced", d.balanced, "Sample subset-n / top-k objects per category");
    cmd->add_option("--subset-seed", d.subset_seed, "Seed for category subsetting");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Incremental affinity propagation benchmark"};
    cli.set_config("--config", "", "TOML/INI file supplying any flag");
    cli.require_subcommand(1);

    // run
    auto* run = cli.add_subcommand("run", "Run one algorithm over seeded schedules");
    DataOptions run_data;
    add_data_options(run, run_data);
    std::string algorithm = "app", setting = "uniform", preference = "median", th_gamma = "1",
                normalization = "minmax", seed_list, replay, output_dir = "results";
    int seed_count = 1;
    std::size_t q = 0, first_n = 0;
    bool snapshots = false, serial_seeds = false;
    harness::ExperimentConfig cfg;
    run->add_option("--algorithm", algorithm, "ap | iapna | app")->check(CLI::IsMember({"ap", "iapna", "app"}));
    run->add_option("--setting", setting, "uniform | variable | ablation")
        ->check(CLI::IsMember({"uniform", "variable", "ablation"}));
    run->add_option("--seeds", seed_count, "Number of seeds (1..N)")->check(CLI::PositiveNumber);
    run->add_option("--seed-list", seed_list, "Comma-separated explicit seeds");
    run->add_option("--damping", cfg.ap.damping, "Message damping in [0.5, 1)");
    run->add_option("--max-iterations", cfg.ap.max_iterations, "AP iteration cap");
    run->add_option("--convergence-window", cfg.ap.convergence_window, "Iterations with an unchanged exemplar set");
    run->add_option("--preference", preference, "median | minimum | <number>");
    run->add_option("--th-gamma", th_gamma, "APP pruning threshold (>= 1, or inf)");
    run->add_option("--q", q, "Minimum objects per active category (variable setting)");
    run->add_option("--steps", cfg.steps, "Time-steps");
    run->add_option("--first-n", first_n, "Objects at step 0 (uniform)");
    run->add_option("--step-n", cfg.step_n, "Objects per later step (uniform)");
    run->add_option("--normalization", normalization, "minmax | zscore | none");
    run->add_option("--replay", replay, "schedules.jsonl to replay instead of generating");
    run->add_option("-o,--output-dir", output_dir, "Output directory (env IAP_OUTPUT_DIR)");
    run->add_flag("--snapshots", snapshots, "Write the final APP state of every seed");
    run->add_flag("--serial-seeds", serial_seeds, "Run seeds one after another");

    // aggregate
    auto* agg = cli.add_subcommand("aggregate", "Per-step medians from records.csv");
    std::string records_path, timings_path, medians_path = "medians.csv";
    bool include_step0 = false;
    agg->add_option("--records", records_path, "records.csv")->required()->check(CLI::ExistingFile);
    agg->add_option("--timings", timings_path, "timings.csv")->check(CLI::ExistingFile);
    agg->add_option("--output", medians_path, "Median table to write");
    agg->add_flag("--include-step0", include_step0, "Keep step 0 rows");

    // validate-schedule
    auto* val = cli.add_subcommand("validate-schedule", "Audit schedules.jsonl against the arrival constraints");
    DataOptions val_data;
    add_data_options(val, val_data);
    std::string schedules_path;
    val->add_option("--schedules", schedules_path, "schedules.jsonl")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(cli, argc, argv);

    try {
        if (*run) {
            if (const char* env = std::getenv("IAP_OUTPUT_DIR"); env && *env && !flag_on_command_line(argc, argv, "--output-dir") &&
                                                               !flag_on_command_line(argc, argv, "-o"))
                output_dir = env;

            const Dataset ds = run_data.load();
            cfg.algorithm = harness::parse_algorithm(algorithm);
            cfg.setting = harness::parse_setting(setting);
            cfg.ap.preference = parse_preference_policy(preference);
            cfg.th_gamma = parse_threshold(th_gamma);
            cfg.normalization = parse_normalization(normalization);
            cfg.parallel_seeds = !serial_seeds;
            if (q > 0) cfg.q = q;
            if (first_n > 0) cfg.first_n = first_n;
            if (!seed_list.empty()) {
                cfg.seeds = parse_seed_list(seed_list);
            } else {
                cfg.seeds.clear();
                for (int s = 1; s <= seed_count; ++s) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
            }

            std::vector<ScheduleRecord> schedules;
            if (!replay.empty()) schedules = load_schedules(replay);
            const auto result = harness::run_experiment(ds, cfg, replay.empty() ? nullptr : &schedules);
            for (const auto& [seed, msg] : result.failures) std::cerr << "seed " << seed << " failed: " << msg << '\n';

            const auto medians = harness::aggregate_median(harness::all_records(result));
            harness::export_results(result, medians, output_dir);
            if (snapshots)
                for (const auto& r : result.runs)
                    if (r.final_state) {
                        const auto p = std::filesystem::path(output_dir) / ("app_state_seed" + std::to_string(r.seed) + ".json");
                        std::ofstream(p) << r.final_state->dump(2) << '\n';
                    }

            std::cout << ds.name << " " << algorithm << " " << setting << ": " << result.runs.size() << " seeds ok, "
                      << result.failures.size() << " failed\n";
            std::cout << "step  PUR    NMI    NC    NI     CT(s)     MU(MB)\n";
            for (const auto& m : medians)
                std::cout << m.step << "     " << std::fixed << std::setprecision(3) << m.purity << "  " << m.nmi << "  "
                          << std::setprecision(1) << m.nc << "  " << m.ni << "  " << std::setprecision(4) << m.ct_seconds
                          << "  " << m.mu_mb << '\n';
            return result.runs.empty() ? 1 : 0;
        }
        if (*agg) {
            const auto records = harness::read_records(records_path, timings_path);
            harness::write_medians_csv(harness::aggregate_median(records, include_step0), medians_path);
            return 0;
        }
        if (*val) {
            const Dataset ds = val_data.load();
            const auto records = load_schedules(schedules_path);
            std::size_t bad = 0;
            for (const auto& r : records) {
                auto violations = r.setting == "uniform" ? audit_schedule_basics(r.schedule, ds.size())
                                                         : audit_variable_schedule(r.schedule, ds.gold, r.schemas, r.q);
                for (const auto& v : violations) std::cout << "seed " << r.seed << ": " << v << '\n';
                if (!violations.empty()) ++bad;
            }
            std::cout << records.size() - bad << "/" << records.size() << " schedules valid\n";
            return bad == 0 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
