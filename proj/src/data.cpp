#include "iap/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "iap/error.hpp"

namespace iap {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::vector<std::size_t> Dataset::category_sizes() const {
    std::vector<std::size_t> sizes(category_names.size(), 0);
    for (int g : gold) ++sizes.at(static_cast<std::size_t>(g));
    return sizes;
}

CsvSchema load_schema(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("schema " + path + ": " + e.what());
    }
    CsvSchema schema;
    schema.header = j.value("header", false);
    if (j.contains("categorical")) schema.categorical = j.at("categorical").get<std::vector<std::size_t>>();
    return schema;
}

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
    auto name = path;
    if (const auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
    if (const auto dot = name.find_last_of('.'); dot != std::string::npos) name = name.substr(0, dot);
    return parse_csv(read_file(path), schema, name);
}

Dataset parse_csv(const std::string& text, const CsvSchema& schema, const std::string& name) {
    const std::set<std::size_t> categorical(schema.categorical.begin(), schema.categorical.end());

    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_of_row;
    std::stringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool header_pending = schema.header;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        rows.push_back(split_row(line));
        line_of_row.push_back(lineno);
    }
    if (rows.empty()) throw ParseError("no data rows");

    const std::size_t width = rows.front().size();
    if (width < 2) throw ParseError("need at least one feature column and a label column", line_of_row.front());
    const std::size_t features = width - 1;
    for (std::size_t c : categorical)
        if (c >= features) throw ParseError("categorical column " + std::to_string(c) + " out of range");

    // levels of every categorical column, sorted
    std::map<std::size_t, std::vector<std::string>> levels;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != width)
            throw ParseError("expected " + std::to_string(width) + " columns, found " + std::to_string(rows[r].size()),
                             line_of_row[r]);
        for (std::size_t c : categorical) levels[c].push_back(rows[r][c]);
    }
    for (auto& [_, lv] : levels) {
        std::sort(lv.begin(), lv.end());
        lv.erase(std::unique(lv.begin(), lv.end()), lv.end());
    }

    Dataset ds;
    ds.name = name;
    std::map<std::string, int> label_ids;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        FeatureVector x;
        for (std::size_t c = 0; c < features; ++c) {
            const auto& cell = rows[r][c];
            if (categorical.count(c)) {
                const auto& lv = levels.at(c);
                const auto pos = std::lower_bound(lv.begin(), lv.end(), cell) - lv.begin();
                for (std::ptrdiff_t l = 0; l < static_cast<std::ptrdiff_t>(lv.size()); ++l)
                    x.push_back(l == pos ? 1.0 : 0.0);
                continue;
            }
            const auto v = parse_number(cell);
            if (!v)
                throw ParseError("non-numeric feature '" + cell + "' in column " + std::to_string(c),
                                 line_of_row[r]);
            x.push_back(*v);
        }
        const auto& label = rows[r].back();
        if (label.empty()) throw ParseError("empty label", line_of_row[r]);
        auto [it, inserted] = label_ids.emplace(label, static_cast<int>(ds.category_names.size()));
        if (inserted) ds.category_names.push_back(label);
        ds.objects.push_back(std::move(x));
        ds.gold.push_back(it->second);
    }
    return ds;
}

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw InvalidInput("Rng::below needs a positive bound");
    // rejection sampling keeps the draw unbiased and independent of the standard library
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do x = engine_();
    while (x >= limit);
    return x % bound;
}

Dataset subset_top_categories(const Dataset& ds, std::size_t top_k, std::size_t total_n, Rng& rng, bool balanced) {
    const auto sizes = ds.category_sizes();
    if (top_k == 0 || top_k > sizes.size())
        throw InvalidInput("dataset has " + std::to_string(sizes.size()) + " categories, asked for top " +
                           std::to_string(top_k));
    std::vector<int> order(sizes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return sizes[a] > sizes[b]; });
    order.resize(top_k);
    std::sort(order.begin(), order.end());

    std::vector<std::size_t> chosen;
    if (balanced) {
        if (total_n % top_k != 0) throw InvalidInput("balanced subset needs total_n divisible by top_k");
        const std::size_t per = total_n / top_k;
        for (int c : order) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < ds.size(); ++i)
                if (ds.gold[i] == c) members.push_back(i);
            if (members.size() < per)
                throw InvalidInput("category " + ds.category_names[c] + " has fewer than " + std::to_string(per) +
                                   " objects");
            rng.shuffle(members);
            chosen.insert(chosen.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(per));
        }
    } else {
        std::vector<std::size_t> pool;
        for (std::size_t i = 0; i < ds.size(); ++i)
            if (std::binary_search(order.begin(), order.end(), ds.gold[i])) pool.push_back(i);
        if (total_n > pool.size())
            throw InvalidInput("requested " + std::to_string(total_n) + " objects but only " +
                               std::to_string(pool.size()) + " are available");
        rng.shuffle(pool);
        chosen.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(total_n));
    }
    std::sort(chosen.begin(), chosen.end());

    Dataset out;
    out.name = ds.name;
    std::map<int, int> remap;
    for (int c : order) {
        remap[c] = static_cast<int>(out.category_names.size());
        out.category_names.push_back(ds.category_names[c]);
    }
    for (std::size_t i : chosen) {
        out.objects.push_back(ds.objects[i]);
        out.gold.push_back(remap.at(ds.gold[i]));
    }
    return out;
}

Normalization parse_normalization(const std::string& text) {
    if (text == "minmax") return Normalization::MinMax;
    if (text == "zscore") return Normalization::ZScore;
    if (text == "none") return Normalization::None;
    throw InvalidInput("normalization must be minmax, zscore or none");
}

std::string to_string(Normalization n) {
    switch (n) {
        case Normalization::MinMax: return "minmax";
        case Normalization::ZScore: return "zscore";
        case Normalization::None: return "none";
    }
    return "?";
}

FeatureVector FeatureScaler::apply(FeatureView x) const {
    if (x.size() != offset.size()) throw InvalidInput("scaler dimension mismatch");
    FeatureVector y(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) y[j] = (x[j] - offset[j]) * scale[j];
    return y;
}

std::vector<FeatureVector> FeatureScaler::apply(std::span<const FeatureVector> xs) const {
    std::vector<FeatureVector> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(apply(x));
    return out;
}

FeatureScaler fit_scaler(std::span<const FeatureVector> xs, Normalization method) {
    if (xs.empty()) throw InvalidInput("cannot fit a scaler on zero objects");
    check_feature_vectors(xs);
    const std::size_t d = xs.front().size();
    FeatureScaler f{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
    if (method == Normalization::None) return f;
    for (std::size_t j = 0; j < d; ++j) {
        if (method == Normalization::MinMax) {
            double lo = xs.front()[j], hi = lo;
            for (const auto& x : xs) {
                lo = std::min(lo, x[j]);
                hi = std::max(hi, x[j]);
            }
            f.offset[j] = lo;
            f.scale[j] = hi > lo ? 1.0 / (hi - lo) : 0.0;
        } else {
            double mean = 0.0;
            for (const auto& x : xs) mean += x[j];
            mean /= static_cast<double>(xs.size());
            double var = 0.0;
            for (const auto& x : xs) var += (x[j] - mean) * (x[j] - mean);
            var /= static_cast<double>(xs.size());
            f.offset[j] = mean;
            f.scale[j] = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
        }
    }
    return f;
}

std::vector<FeatureVector> normalize_cumulative(std::span<const FeatureVector> xs, Normalization method) {
    return fit_scaler(xs, method).apply(xs);
}

std::string to_string(Schema s) {
    switch (s) {
        case Schema::Growing: return "growing";
        case Schema::Shrinking: return "shrinking";
        case Schema::Stable: return "stable";
    }
    return "?";
}

Schema parse_schema(const std::string& s) {
    if (s == "growing") return Schema::Growing;
    if (s == "shrinking") return Schema::Shrinking;
    if (s == "stable") return Schema::Stable;
    throw ParseError("unknown schema '" + s + "'");
}

std::size_t ArrivalSchedule::total() const {
    std::size_t n = 0;
    for (const auto& b : batches) n += b.size();
    return n;
}

ArrivalSchedule uniform_schedule(std::size_t dataset_size, std::size_t first_n, std::size_t step_n, std::size_t steps,
                                 Rng& rng) {
    if (steps == 0) throw InvalidInput("steps must be positive");
    if (first_n == 0) throw InvalidInput("first batch must be non-empty");
    const std::size_t needed = first_n + (steps - 1) * step_n;
    if (needed > dataset_size)
        throw InvalidInput("schedule needs " + std::to_string(needed) + " objects, dataset has " +
                           std::to_string(dataset_size));
    std::vector<std::size_t> idx(dataset_size);
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);

    ArrivalSchedule s;
    auto it = idx.begin();
    for (std::size_t t = 0; t < steps; ++t) {
        const auto take = static_cast<std::ptrdiff_t>(t == 0 ? first_n : step_n);
        s.batches.emplace_back(it, it + take);
        it += take;
    }
    return s;
}

namespace {

// Arrival counts of one category over `steps`, or nothing when infeasible.
std::optional<std::vector<std::size_t>> category_counts(Schema schema, std::size_t n_c, std::size_t q,
                                                        std::size_t steps, Rng& rng) {
    const std::size_t min_count = std::max<std::size_t>(q, 1);
    std::vector<std::size_t> counts(steps, 0);
    if (schema == Schema::Stable || steps == 1) {
        const std::size_t per = n_c / steps;
        if (per < min_count) return std::nullopt;
        for (std::size_t t = 0; t < steps; ++t) counts[t] = per + (t < n_c % steps ? 1 : 0);
        return counts;
    }

    // arithmetic ramp base + j * step over a window of length L >= 2, remainder on the peak
    std::vector<std::size_t> lengths;
    for (std::size_t len = 2; len <= steps; ++len)
        if (min_count * len + len * (len - 1) / 2 <= n_c) lengths.push_back(len);
    if (lengths.empty()) return std::nullopt;
    const std::size_t len = lengths[rng.below(lengths.size())];
    const std::size_t tri = len * (len - 1) / 2;
    const std::size_t base_max = (n_c - tri) / len;
    const std::size_t base = min_count + rng.below(base_max - min_count + 1);
    const std::size_t inc = (n_c - base * len) / tri;

    std::vector<std::size_t> ramp(len);
    std::size_t used = 0;
    for (std::size_t j = 0; j < len; ++j) used += ramp[j] = base + j * inc;
    ramp.back() += n_c - used;

    if (schema == Schema::Growing) {
        std::copy(ramp.begin(), ramp.end(), counts.end() - static_cast<std::ptrdiff_t>(len));
    } else {
        std::reverse(ramp.begin(), ramp.end());
        std::copy(ramp.begin(), ramp.end(), counts.begin());
    }
    return counts;
}

}  // namespace

VariableSchedule variable_schedule(std::span<const int> gold, std::size_t q, std::size_t steps, Rng& rng,
                                   int max_retries) {
    if (steps == 0) throw InvalidInput("steps must be positive");
    if (gold.empty()) throw InvalidInput("empty dataset");

    std::map<int, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < gold.size(); ++i) members[gold[i]].push_back(i);
    if (members.size() < 2) throw InvalidInput("variable schedule needs at least two categories");
    if (q > 0)
        for (const auto& [c, m] : members)
            if (m.size() < 2 * q)
                throw InvalidInput("category " + std::to_string(c) + " has " + std::to_string(m.size()) +
                                   " objects, fewer than 2q = " + std::to_string(2 * q));

    for (int attempt = 1; attempt <= max_retries; ++attempt) {
        VariableSchedule out;
        out.attempts = attempt;
        out.schedule.batches.assign(steps, {});
        std::vector<std::size_t> categories_at(steps, 0);
        bool feasible = true;
        for (const auto& [c, m] : members) {
            const Schema schema = static_cast<Schema>(rng.below(3));
            const auto counts = category_counts(schema, m.size(), q, steps, rng);
            if (!counts) {
                feasible = false;
                break;
            }
            out.schemas[c] = schema;
            auto pool = m;
            rng.shuffle(pool);
            auto it = pool.begin();
            for (std::size_t t = 0; t < steps; ++t) {
                const auto take = static_cast<std::ptrdiff_t>((*counts)[t]);
                out.schedule.batches[t].insert(out.schedule.batches[t].end(), it, it + take);
                it += take;
                if (take > 0) ++categories_at[t];
            }
        }
        if (!feasible) continue;
        if (std::any_of(categories_at.begin(), categories_at.end(), [](std::size_t k) { return k < 2; })) continue;
        for (auto& batch : out.schedule.batches) rng.shuffle(batch);
        return out;
    }
    throw ScheduleError("no variable schedule satisfied the constraints after " + std::to_string(max_retries) +
                        " attempts (q=" + std::to_string(q) + ", steps=" + std::to_string(steps) + ")");
}

std::size_t default_q(std::size_t dataset_size, std::size_t categories) {
    if (categories == 0) throw InvalidInput("no categories");
    return static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(dataset_size) /
                                                 static_cast<double>(categories)));
}

std::vector<std::string> audit_schedule_basics(const ArrivalSchedule& s, std::size_t dataset_size) {
    std::vector<std::string> v;
    if (s.batches.empty() || s.batches.front().empty()) v.emplace_back("batch 0 is empty");
    std::vector<char> seen(dataset_size, 0);
    for (std::size_t t = 0; t < s.batches.size(); ++t) {
        for (std::size_t i : s.batches[t]) {
            if (i >= dataset_size) {
                v.push_back("step " + std::to_string(t) + ": index " + std::to_string(i) + " out of range");
                continue;
            }
            if (seen[i]++) v.push_back("step " + std::to_string(t) + ": index " + std::to_string(i) + " repeated");
        }
    }
    return v;
}

std::vector<std::string> audit_variable_schedule(const ArrivalSchedule& s, std::span<const int> gold,
                                                 const SchemaAssignment& schemas, std::size_t q) {
    auto v = audit_schedule_basics(s, gold.size());
    const std::size_t steps = s.batches.size();

    std::map<int, std::vector<std::size_t>> counts;
    for (std::size_t t = 0; t < steps; ++t) {
        std::set<int> present;
        for (std::size_t i : s.batches[t]) {
            if (i >= gold.size()) continue;
            auto& row = counts[gold[i]];
            row.resize(steps, 0);
            ++row[t];
            present.insert(gold[i]);
        }
        if (present.size() < 2)
            v.push_back("step " + std::to_string(t) + ": only " + std::to_string(present.size()) + " categories");
    }

    for (const auto& [c, row] : counts) {
        const std::string tag = "category " + std::to_string(c);
        const auto sch = schemas.find(c);
        if (sch == schemas.end()) {
            v.push_back(tag + ": no schema");
            continue;
        }
        std::vector<std::size_t> active;
        for (std::size_t t = 0; t < steps; ++t) {
            if (row[t] == 0) continue;
            active.push_back(t);
            if (q > 0 && row[t] < q)
                v.push_back(tag + " step " + std::to_string(t) + ": " + std::to_string(row[t]) + " < q");
        }
        for (std::size_t j = 1; j < active.size(); ++j)
            if (active[j] != active[j - 1] + 1) v.push_back(tag + ": active steps not contiguous");
        switch (sch->second) {
            case Schema::Growing:
                for (std::size_t j = 1; j < active.size(); ++j)
                    if (row[active[j]] <= row[active[j - 1]]) v.push_back(tag + ": growing counts not ascending");
                if (!active.empty() && active.back() != steps - 1) v.push_back(tag + ": growing window ends early");
                break;
            case Schema::Shrinking:
                for (std::size_t j = 1; j < active.size(); ++j)
                    if (row[active[j]] >= row[active[j - 1]]) v.push_back(tag + ": shrinking counts not descending");
                if (!active.empty() && active.front() != 0) v.push_back(tag + ": shrinking window starts late");
                break;
            case Schema::Stable: {
                if (active.size() != steps) v.push_back(tag + ": stable category missing from a step");
                const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
                if (*hi - *lo > 1) v.push_back(tag + ": stable counts differ by more than one");
                if (!std::is_sorted(row.rbegin(), row.rend())) v.push_back(tag + ": stable remainder not front-loaded");
                break;
            }
        }
    }
    return v;
}

nlohmann::json to_json(const ScheduleRecord& r) {
    nlohmann::json schemas = nlohmann::json::object();
    for (const auto& [c, s] : r.schemas) schemas[std::to_string(c)] = to_string(s);
    return {{"seed", r.seed}, {"setting", r.setting}, {"q", r.q}, {"batches", r.schedule.batches}, {"schemas", schemas}};
}

ScheduleRecord schedule_from_json(const nlohmann::json& j) {
    try {
        ScheduleRecord r;
        r.seed = j.at("seed").get<std::uint64_t>();
        r.setting = j.at("setting").get<std::string>();
        r.q = j.value("q", std::size_t{0});
        r.schedule.batches = j.at("batches").get<std::vector<std::vector<std::size_t>>>();
        if (j.contains("schemas"))
            for (const auto& [k, val] : j.at("schemas").items())
                r.schemas[std::stoi(k)] = parse_schema(val.get<std::string>());
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("schedule record: ") + e.what());
    }
}

std::vector<ScheduleRecord> load_schedules(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<ScheduleRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            out.push_back(schedule_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(e.what(), lineno);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    return out;
}

}  // namespace iap
