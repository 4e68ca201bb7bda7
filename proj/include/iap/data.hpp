#ifndef IAP_DATA_HPP
#define IAP_DATA_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "iap/geometry.hpp"

namespace iap {

struct Dataset {
    std::string name;
    std::vector<FeatureVector> objects;
    std::vector<int> gold;                   // category id per object
    std::vector<std::string> category_names; // indexed by category id

    std::size_t size() const noexcept { return objects.size(); }
    std::size_t dimension() const noexcept { return objects.empty() ? 0 : objects.front().size(); }
    std::size_t category_count() const noexcept { return category_names.size(); }
    std::vector<std::size_t> category_sizes() const;
};

/// Sidecar schema: {"header": bool, "categorical": [column, ...]} (0-based feature columns).
struct CsvSchema {
    bool header = false;
    std::vector<std::size_t> categorical;
};

CsvSchema load_schema(const std::string& path);

/// Rows of feature columns followed by one label column. Categorical columns are
/// one-hot expanded in place, levels sorted lexicographically.
Dataset load_csv(const std::string& path, const CsvSchema& schema = {});
Dataset parse_csv(const std::string& text, const CsvSchema& schema = {}, const std::string& name = "");

/// Seeded generator with library-independent bounded draws and shuffles.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 engine_;
};

/// Keeps the `top_k` most populous categories (ties: lower id) and samples `total_n`
/// objects from them without replacement. `balanced` draws total_n / top_k per category.
Dataset subset_top_categories(const Dataset& ds, std::size_t top_k, std::size_t total_n, Rng& rng,
                              bool balanced = false);

enum class Normalization { MinMax, ZScore, None };
Normalization parse_normalization(const std::string& text);
std::string to_string(Normalization n);

/// Per-feature affine map x -> (x - offset) * scale.
struct FeatureScaler {
    std::vector<double> offset;
    std::vector<double> scale;

    FeatureVector apply(FeatureView x) const;
    std::vector<FeatureVector> apply(std::span<const FeatureVector> xs) const;
};

/// Fits on exactly the given objects. Constant features map to 0.
FeatureScaler fit_scaler(std::span<const FeatureVector> xs, Normalization method = Normalization::MinMax);

/// Normalizes the objects available at one time-step over themselves.
std::vector<FeatureVector> normalize_cumulative(std::span<const FeatureVector> xs,
                                                Normalization method = Normalization::MinMax);

enum class Schema { Growing, Shrinking, Stable };
std::string to_string(Schema s);
Schema parse_schema(const std::string& s);

using SchemaAssignment = std::map<int, Schema>;

struct ArrivalSchedule {
    std::vector<std::vector<std::size_t>> batches;  // dataset indices per time-step

    std::size_t steps() const noexcept { return batches.size(); }
    std::size_t total() const;
};

ArrivalSchedule uniform_schedule(std::size_t dataset_size, std::size_t first_n, std::size_t step_n,
                                 std::size_t steps, Rng& rng);

struct VariableSchedule {
    ArrivalSchedule schedule;
    SchemaAssignment schemas;
    int attempts = 0;
};

/// Growing / shrinking / stable arrivals per category. q == 0 disables the per-step minimum.
VariableSchedule variable_schedule(std::span<const int> gold, std::size_t q, std::size_t steps, Rng& rng,
                                   int max_retries = 1000);

/// Rounded 10% of the dataset size per category.
std::size_t default_q(std::size_t dataset_size, std::size_t categories);

/// Independent constraint checks; each returned string describes one violation.
std::vector<std::string> audit_schedule_basics(const ArrivalSchedule& s, std::size_t dataset_size);
std::vector<std::string> audit_variable_schedule(const ArrivalSchedule& s, std::span<const int> gold,
                                                 const SchemaAssignment& schemas, std::size_t q);

/// One serialized schedule: what was generated for one seed.
struct ScheduleRecord {
    std::uint64_t seed = 0;
    std::string setting;  // uniform | variable | ablation
    std::size_t q = 0;
    ArrivalSchedule schedule;
    SchemaAssignment schemas;
};

nlohmann::json to_json(const ScheduleRecord& r);
ScheduleRecord schedule_from_json(const nlohmann::json& j);
std::vector<ScheduleRecord> load_schedules(const std::string& path);  // JSON lines

}  // namespace iap

#endif  // IAP_DATA_HPP
