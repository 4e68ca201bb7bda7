#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "iap/error.hpp"
#include "iap/harness.hpp"
#include "iap/metrics.hpp"
#include "metric_oracle.hpp"

using namespace iap;
using namespace iap::harness;
namespace fs = std::filesystem;

namespace {

const Dataset& iris() {
    static const Dataset ds = load_csv(std::string(IAP_DATA_DIR) + "/iris.csv");
    return ds;
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("iap_harness_" + name);
    fs::remove_all(p);
    return p;
}

std::vector<std::vector<std::string>> read_rows(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

ExperimentConfig small(Algorithm a, Setting s = Setting::Uniform) {
    ExperimentConfig c;
    c.algorithm = a;
    c.setting = s;
    c.seeds = {1, 2, 3};
    return c;
}

}  // namespace

TEST_CASE("median convention") {
    CHECK(median({0.1, 0.2, 0.9}) == doctest::Approx(0.2));
    CHECK(median({0.1, 0.3}) == doctest::Approx(0.2));
    CHECK(median({4.0}) == 4.0);
    CHECK_THROWS_AS(median({}), InvalidInput);
}

TEST_CASE("aggregation per step") {
    std::vector<StepRecord> recs;
    for (std::uint64_t seed = 1; seed <= 3; ++seed)
        for (int step = 0; step < 3; ++step) {
            StepRecord r;
            r.seed = seed;
            r.step = step;
            r.nmi = 0.1 * static_cast<double>(seed) + step;
            r.nc = seed;
            recs.push_back(r);
        }
    const auto rows = aggregate_median(recs);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].step == 1);
    CHECK(rows[0].nmi == doctest::Approx(1.2));
    CHECK(rows[1].nc == 2.0);
    CHECK(rows[1].seeds == 3);
    CHECK(aggregate_median(recs, true).size() == 3);

    recs.resize(1);
    const auto single = aggregate_median(recs, true);
    REQUIRE(single.size() == 1);
    CHECK(single[0].nmi == recs[0].nmi);
}

TEST_CASE("footprint proxy") {
    CHECK(matrix_footprint_mb(1000) == doctest::Approx(24.0));
    CHECK(matrix_footprint_mb(0) == 0.0);
}

TEST_CASE("schedules do not depend on the algorithm") {
    for (auto setting : {Setting::Uniform, Setting::Variable}) {
        std::vector<ScheduleRecord> per_algo;
        for (auto a : {Algorithm::AP, Algorithm::IAPNA, Algorithm::APP})
            per_algo.push_back(make_schedule(iris(), small(a, setting), 7));
        CHECK(per_algo[0].schedule.batches == per_algo[1].schedule.batches);
        CHECK(per_algo[0].schedule.batches == per_algo[2].schedule.batches);
    }
    const auto u = make_schedule(iris(), small(Algorithm::AP), 1);
    CHECK(u.schedule.steps() == 6);
    CHECK(u.schedule.batches[0].size() == 100);
    CHECK(u.schedule.total() == 150);
}

TEST_CASE("step 0 agrees across algorithms") {
    std::map<Algorithm, ExperimentResult> results;
    for (auto a : {Algorithm::AP, Algorithm::IAPNA, Algorithm::APP}) results[a] = run_experiment(iris(), small(a));
    for (std::size_t k = 0; k < 3; ++k) {
        const auto& ap = results[Algorithm::AP].runs[k].labels[0];
        for (auto a : {Algorithm::IAPNA, Algorithm::APP}) {
            const auto& other = results[a].runs[k].labels[0];
            REQUIRE(other.objects == ap.objects);
            CHECK(metrics::nmi(other.predicted, ap.predicted) == doctest::Approx(1.0));
            CHECK(metrics::cluster_count(other.predicted) == metrics::cluster_count(ap.predicted));
        }
    }
    // AP and IAPNA always cover every arrived object
    for (const auto& r : results[Algorithm::IAPNA].runs)
        for (const auto& rec : r.records) CHECK(rec.n_objects == 100 + 10 * static_cast<std::size_t>(rec.step));
    // APP's AP input is centroids plus the batch
    for (const auto& r : results[Algorithm::APP].runs)
        for (std::size_t t = 1; t < r.records.size(); ++t) CHECK(r.ap_input_sizes[t] <= r.records[t - 1].nc + 10);
}

TEST_CASE("export writes every artefact and metrics are reproducible from labels") {
    const auto dir = scratch("export");
    auto cfg = small(Algorithm::APP);
    const auto result = run_experiment(iris(), cfg);
    export_results(result, aggregate_median(all_records(result)), dir.string());
    for (const char* f : {"records.csv", "timings.csv", "labels.csv", "events.jsonl", "schedules.jsonl", "medians.csv",
                          "series.json"})
        CHECK(fs::exists(dir / f));

    const auto medians = read_rows(dir / "medians.csv");
    CHECK(medians.size() == 1 + 5);

    // recompute purity and NMI from labels.csv with the oracle
    std::map<std::pair<int, int>, std::pair<std::vector<int>, std::vector<int>>> groups;
    const auto labels = read_rows(dir / "labels.csv");
    REQUIRE(labels[0] == std::vector<std::string>{"seed", "step", "object", "predicted"});
    for (std::size_t i = 1; i < labels.size(); ++i) {
        auto& g = groups[{std::stoi(labels[i][0]), std::stoi(labels[i][1])}];
        g.first.push_back(std::stoi(labels[i][3]));
        g.second.push_back(iris().gold[std::stoul(labels[i][2])]);
    }
    const auto recs = read_records((dir / "records.csv").string(), (dir / "timings.csv").string());
    REQUIRE(recs.size() == 18);
    for (const auto& r : recs) {
        const auto& g = groups.at({static_cast<int>(r.seed), r.step});
        CHECK(oracle::purity(g.first, g.second) == doctest::Approx(r.purity).epsilon(1e-9));
        CHECK(oracle::nmi(g.first, g.second) == doctest::Approx(r.nmi).epsilon(1e-9));
        CHECK(r.ct_seconds >= 0.0);
    }

    // events are JSON lines with the seed attached
    std::ifstream ev(dir / "events.jsonl");
    std::string line;
    std::size_t lines = 0;
    while (std::getline(ev, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j.contains("seed"));
        CHECK(j.contains("kind"));
        ++lines;
    }
    std::size_t total = 0;
    for (const auto& r : result.runs) total += r.events.size();
    CHECK(lines == total);

    const auto sched = load_schedules((dir / "schedules.jsonl").string());
    REQUIRE(sched.size() == 3);
    CHECK(sched[1].schedule.batches == result.schedules[1].schedule.batches);
    fs::remove_all(dir);
}

TEST_CASE("AP leaves the event log empty") {
    const auto dir = scratch("ap_events");
    const auto result = run_experiment(iris(), small(Algorithm::AP));
    export_results(result, aggregate_median(all_records(result)), dir.string());
    CHECK(fs::file_size(dir / "events.jsonl") == 0);
    fs::remove_all(dir);
}

TEST_CASE("replaying saved schedules reproduces the run") {
    auto cfg = small(Algorithm::IAPNA, Setting::Variable);
    const auto a = run_experiment(iris(), cfg);
    const auto b = run_experiment(iris(), cfg, &a.schedules);
    REQUIRE(a.runs.size() == b.runs.size());
    for (std::size_t k = 0; k < a.runs.size(); ++k)
        for (std::size_t t = 0; t < a.runs[k].labels.size(); ++t)
            CHECK(a.runs[k].labels[t].predicted == b.runs[k].labels[t].predicted);
}

TEST_CASE("serial and parallel seeds give identical records") {
    auto cfg = small(Algorithm::APP, Setting::Variable);
    cfg.parallel_seeds = false;
    const auto a = all_records(run_experiment(iris(), cfg));
    cfg.parallel_seeds = true;
    const auto b = all_records(run_experiment(iris(), cfg));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].nmi == b[i].nmi);
        CHECK(a[i].nc == b[i].nc);
        CHECK(a[i].ni == b[i].ni);
    }
}

TEST_CASE("a failing seed does not abort the others") {
    // a q no category can satisfy is a configuration error, not a per-seed failure
    auto cfg = small(Algorithm::AP, Setting::Variable);
    cfg.q = 40;
    CHECK_THROWS_AS(run_experiment(iris(), cfg), InvalidInput);

    std::vector<ScheduleRecord> replay;
    replay.push_back(make_schedule(iris(), small(Algorithm::AP), 1));
    replay.push_back(replay.back());
    replay.back().seed = 2;
    replay.back().schedule.batches[3].clear();
    auto ucfg = small(Algorithm::AP);
    const auto mixed = run_experiment(iris(), ucfg, &replay);
    CHECK(mixed.runs.size() == 1);
    CHECK(mixed.failures.count(2) == 1);
}

TEST_CASE("unwritable output directory") {
    const auto result = run_experiment(iris(), small(Algorithm::AP));
    const auto blocker = scratch("blocker");
    std::ofstream(blocker) << "x";
    CHECK_THROWS_AS(export_results(result, {}, (blocker / "sub").string()), IoError);
    fs::remove_all(blocker);
}

TEST_CASE("parsers") {
    CHECK(parse_algorithm("iapna") == Algorithm::IAPNA);
    CHECK(parse_setting("ablation") == Setting::Ablation);
    CHECK_THROWS_AS(parse_algorithm("kmeans"), InvalidInput);
}
