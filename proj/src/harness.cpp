#include "iap/harness.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "iap/error.hpp"
#include "iap/iapna.hpp"
#include "iap/metrics.hpp"

namespace iap::harness {

namespace fs = std::filesystem;

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::AP: return "ap";
        case Algorithm::IAPNA: return "iapna";
        case Algorithm::APP: return "app";
    }
    return "?";
}

std::string to_string(Setting s) {
    switch (s) {
        case Setting::Uniform: return "uniform";
        case Setting::Variable: return "variable";
        case Setting::Ablation: return "ablation";
    }
    return "?";
}

Algorithm parse_algorithm(const std::string& s) {
    if (s == "ap") return Algorithm::AP;
    if (s == "iapna") return Algorithm::IAPNA;
    if (s == "app") return Algorithm::APP;
    throw InvalidInput("algorithm must be ap, iapna or app");
}

Setting parse_setting(const std::string& s) {
    if (s == "uniform") return Setting::Uniform;
    if (s == "variable") return Setting::Variable;
    if (s == "ablation") return Setting::Ablation;
    throw InvalidInput("setting must be uniform, variable or ablation");
}

double matrix_footprint_mb(std::size_t n) { return 3.0 * static_cast<double>(n) * static_cast<double>(n) * 8.0 / 1e6; }

ScheduleRecord make_schedule(const Dataset& ds, const ExperimentConfig& config, std::uint64_t seed) {
    ScheduleRecord r;
    r.seed = seed;
    r.setting = to_string(config.setting);
    Rng rng(seed);
    if (config.setting == Setting::Uniform) {
        const std::size_t later = (config.steps - 1) * config.step_n;
        if (!config.first_n && later >= ds.size()) throw InvalidInput("dataset too small for the uniform schedule");
        const std::size_t first = config.first_n.value_or(ds.size() - later);
        r.schedule = uniform_schedule(ds.size(), first, config.step_n, config.steps, rng);
        return r;
    }
    r.q = config.setting == Setting::Ablation ? 0 : config.q.value_or(default_q(ds.size(), ds.category_count()));
    auto v = variable_schedule(ds.gold, r.q, config.steps, rng);
    r.schedule = std::move(v.schedule);
    r.schemas = std::move(v.schemas);
    return r;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

StepRecord evaluate(std::uint64_t seed, int step, const Dataset& ds, const StepLabels& labels) {
    std::vector<int> gold;
    gold.reserve(labels.objects.size());
    for (std::size_t i : labels.objects) gold.push_back(ds.gold[i]);
    StepRecord rec;
    rec.seed = seed;
    rec.step = step;
    rec.n_objects = labels.objects.size();
    rec.purity = metrics::purity(labels.predicted, gold);
    rec.nmi = metrics::nmi(labels.predicted, gold);
    rec.nc = metrics::cluster_count(labels.predicted);
    return rec;
}

}  // namespace

SeedRun run_seed(const Dataset& ds, const ExperimentConfig& config, const ScheduleRecord& schedule) {
    SeedRun run;
    run.seed = schedule.seed;

    std::vector<std::size_t> arrived;  // cumulative dataset indices, arrival order
    std::vector<FeatureVector> arrived_raw;

    std::optional<IapnaSession> iapna;
    std::optional<AppSession> app;
    if (config.algorithm == Algorithm::IAPNA) iapna.emplace(config.ap);
    if (config.algorithm == Algorithm::APP) app.emplace(config.ap, config.th_gamma);

    for (std::size_t t = 0; t < schedule.schedule.steps(); ++t) {
        const auto& batch = schedule.schedule.batches[t];
        if (batch.empty()) throw InvalidInput("schedule step " + std::to_string(t) + " is empty");
        std::vector<FeatureVector> batch_raw;
        for (std::size_t i : batch) {
            if (i >= ds.size()) throw InvalidInput("schedule index out of range");
            batch_raw.push_back(ds.objects[i]);
        }
        arrived.insert(arrived.end(), batch.begin(), batch.end());
        arrived_raw.insert(arrived_raw.end(), batch_raw.begin(), batch_raw.end());
        const FeatureScaler scaler = fit_scaler(arrived_raw, config.normalization);

        StepLabels labels;
        labels.step = static_cast<int>(t);
        int iterations = 0;
        std::size_t matrix_n = 0;
        const auto start = Clock::now();
        switch (config.algorithm) {
            case Algorithm::AP: {
                const auto s = build_similarity_matrix(scaler.apply(arrived_raw), config.ap.preference);
                const auto res = run_ap(s, config.ap);
                iterations = res.iterations_run;
                matrix_n = s.size();
                labels.objects = arrived;
                labels.predicted = res.labels;
                break;
            }
            case Algorithm::IAPNA: {
                const auto& res = iapna->step(batch_raw, &scaler);
                iterations = res.iterations_run;
                matrix_n = iapna->size();
                labels.objects = arrived;
                labels.predicted = res.labels;
                break;
            }
            case Algorithm::APP: {
                const std::vector<ObjectId> ids(batch.begin(), batch.end());
                auto outcome = app->step(ids, batch_raw, &scaler);
                iterations = outcome.ap_result.iterations_run;
                matrix_n = outcome.ap_input_size;
                for (const auto& [obj, cluster] : app->assignment()) {
                    labels.objects.push_back(static_cast<std::size_t>(obj));
                    labels.predicted.push_back(static_cast<int>(cluster));
                }
                run.events.insert(run.events.end(), outcome.events.begin(), outcome.events.end());
                break;
            }
        }
        const double ct = seconds_since(start);

        if (config.algorithm != Algorithm::APP) {
            // report in ascending object order like APP
            std::vector<std::size_t> order(labels.objects.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return labels.objects[a] < labels.objects[b]; });
            StepLabels sorted{labels.step, {}, {}};
            for (std::size_t i : order) {
                sorted.objects.push_back(labels.objects[i]);
                sorted.predicted.push_back(labels.predicted[i]);
            }
            labels = std::move(sorted);
        }

        auto rec = evaluate(run.seed, static_cast<int>(t), ds, labels);
        rec.ni = iterations;
        rec.ct_seconds = ct;
        rec.mu_mb = matrix_footprint_mb(matrix_n);
        run.records.push_back(rec);
        run.labels.push_back(std::move(labels));
        run.ap_input_sizes.push_back(matrix_n);
    }
    if (app) run.final_state = app->snapshot();
    return run;
}

ExperimentResult run_experiment(const Dataset& ds, const ExperimentConfig& config,
                                const std::vector<ScheduleRecord>* replay) {
    if (config.seeds.empty() && !replay) throw InvalidInput("seed list is empty");
    config.ap.validate();
    ExperimentResult result;

    std::vector<ScheduleRecord> schedules;
    if (replay) {
        schedules = *replay;
    } else {
        for (std::uint64_t seed : config.seeds) {
            try {
                schedules.push_back(make_schedule(ds, config, seed));
            } catch (const ScheduleError& e) {
                result.failures[seed] = e.what();
            }
        }
    }

    std::vector<SeedRun> runs(schedules.size());
    std::vector<std::string> errors(schedules.size());
    const auto n = static_cast<std::ptrdiff_t>(schedules.size());
#pragma omp parallel for schedule(dynamic) if (config.parallel_seeds)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        try {
            runs[k] = run_seed(ds, config, schedules[k]);
        } catch (const std::exception& e) {
            errors[k] = e.what();
        }
    }

    for (std::size_t k = 0; k < schedules.size(); ++k) {
        if (!errors[k].empty()) {
            result.failures[schedules[k].seed] = errors[k];
            continue;
        }
        result.schedules.push_back(schedules[k]);
        result.runs.push_back(std::move(runs[k]));
    }
    std::sort(result.runs.begin(), result.runs.end(), [](const SeedRun& a, const SeedRun& b) { return a.seed < b.seed; });
    std::sort(result.schedules.begin(), result.schedules.end(),
              [](const ScheduleRecord& a, const ScheduleRecord& b) { return a.seed < b.seed; });
    return result;
}

double median(std::vector<double> values) {
    if (values.empty()) throw InvalidInput("median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size();
    return m % 2 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

std::vector<MedianRow> aggregate_median(const std::vector<StepRecord>& records, bool include_step0) {
    std::map<int, std::vector<const StepRecord*>> by_step;
    for (const auto& r : records)
        if (include_step0 || r.step != 0) by_step[r.step].push_back(&r);

    std::vector<MedianRow> rows;
    for (const auto& [step, recs] : by_step) {
        auto column = [&](auto field) {
            std::vector<double> v;
            for (const auto* r : recs) v.push_back(static_cast<double>(field(*r)));
            return median(std::move(v));
        };
        MedianRow row;
        row.step = step;
        row.seeds = recs.size();
        row.purity = column([](const StepRecord& r) { return r.purity; });
        row.nmi = column([](const StepRecord& r) { return r.nmi; });
        row.nc = column([](const StepRecord& r) { return r.nc; });
        row.ni = column([](const StepRecord& r) { return r.ni; });
        row.ct_seconds = column([](const StepRecord& r) { return r.ct_seconds; });
        row.mu_mb = column([](const StepRecord& r) { return r.mu_mb; });
        rows.push_back(row);
    }
    return rows;
}

std::vector<StepRecord> all_records(const ExperimentResult& result) {
    std::vector<StepRecord> out;
    for (const auto& run : result.runs) out.insert(out.end(), run.records.begin(), run.records.end());
    return out;
}

namespace {

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    out << std::setprecision(12);
    return out;
}

std::vector<std::vector<std::string>> read_csv_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

}  // namespace

void write_medians_csv(const std::vector<MedianRow>& rows, const std::string& path) {
    auto out = open_out(path);
    out << "step,purity,nmi,nc,ni,ct_seconds,mu_mb,seeds\n";
    for (const auto& r : rows)
        out << r.step << ',' << r.purity << ',' << r.nmi << ',' << r.nc << ',' << r.ni << ',' << r.ct_seconds << ','
            << r.mu_mb << ',' << r.seeds << '\n';
    if (!out) throw IoError("failed writing " + path);
}

void export_results(const ExperimentResult& result, const std::vector<MedianRow>& medians, const std::string& outdir) {
    const fs::path dir(outdir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + outdir + ": " + ec.message());

    {
        auto out = open_out(dir / "records.csv");
        out << "seed,step,n_objects,purity,nmi,nc,ni,mu_mb\n";
        for (const auto& run : result.runs)
            for (const auto& r : run.records)
                out << r.seed << ',' << r.step << ',' << r.n_objects << ',' << r.purity << ',' << r.nmi << ',' << r.nc
                    << ',' << r.ni << ',' << r.mu_mb << '\n';
    }
    {
        auto out = open_out(dir / "timings.csv");
        out << "seed,step,ct_seconds\n";
        for (const auto& run : result.runs)
            for (const auto& r : run.records) out << r.seed << ',' << r.step << ',' << r.ct_seconds << '\n';
    }
    {
        auto out = open_out(dir / "labels.csv");
        out << "seed,step,object,predicted\n";
        for (const auto& run : result.runs)
            for (const auto& l : run.labels)
                for (std::size_t i = 0; i < l.objects.size(); ++i)
                    out << run.seed << ',' << l.step << ',' << l.objects[i] << ',' << l.predicted[i] << '\n';
    }
    {
        auto out = open_out(dir / "events.jsonl");
        for (const auto& run : result.runs)
            for (const auto& e : run.events) {
                auto j = to_json(e);
                j["seed"] = run.seed;
                out << j.dump() << '\n';
            }
    }
    {
        auto out = open_out(dir / "schedules.jsonl");
        for (const auto& s : result.schedules) out << to_json(s).dump() << '\n';
    }
    write_medians_csv(medians, (dir / "medians.csv").string());
    {
        nlohmann::json series = {{"step", nlohmann::json::array()}};
        for (const char* key : {"purity", "nmi", "nc", "ni", "ct_seconds", "mu_mb"}) series[key] = nlohmann::json::array();
        for (const auto& r : aggregate_median(all_records(result), true)) {
            series["step"].push_back(r.step);
            series["purity"].push_back(r.purity);
            series["nmi"].push_back(r.nmi);
            series["nc"].push_back(r.nc);
            series["ni"].push_back(r.ni);
            series["ct_seconds"].push_back(r.ct_seconds);
            series["mu_mb"].push_back(r.mu_mb);
        }
        auto out = open_out(dir / "series.json");
        out << series.dump(2) << '\n';
    }
}

std::vector<StepRecord> read_records(const std::string& records_csv, const std::string& timings_csv) {
    const auto rows = read_csv_rows(records_csv);
    if (rows.empty() || rows.front().empty() || rows.front().front() != "seed")
        throw ParseError("records file lacks its header: " + records_csv);
    std::vector<StepRecord> out;
    try {
        for (std::size_t k = 1; k < rows.size(); ++k) {
            const auto& c = rows[k];
            if (c.size() != 8) throw ParseError("records row has " + std::to_string(c.size()) + " columns", k + 1);
            StepRecord r;
            r.seed = std::stoull(c[0]);
            r.step = std::stoi(c[1]);
            r.n_objects = std::stoull(c[2]);
            r.purity = std::stod(c[3]);
            r.nmi = std::stod(c[4]);
            r.nc = std::stoull(c[5]);
            r.ni = std::stoi(c[6]);
            r.mu_mb = std::stod(c[7]);
            out.push_back(r);
        }
        if (!timings_csv.empty()) {
            std::map<std::pair<std::uint64_t, int>, double> ct;
            const auto trows = read_csv_rows(timings_csv);
            for (std::size_t k = 1; k < trows.size(); ++k) {
                if (trows[k].size() != 3) throw ParseError("timings row malformed", k + 1);
                ct[{std::stoull(trows[k][0]), std::stoi(trows[k][1])}] = std::stod(trows[k][2]);
            }
            for (auto& r : out)
                if (const auto it = ct.find({r.seed, r.step}); it != ct.end()) r.ct_seconds = it->second;
        }
    } catch (const std::logic_error& e) {  // stoi / stod failures
        throw ParseError(std::string("malformed number: ") + e.what());
    }
    return out;
}

}  // namespace iap::harness
