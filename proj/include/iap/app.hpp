#ifndef IAP_APP_HPP
#define IAP_APP_HPP

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "iap/ap_core.hpp"
#include "iap/data.hpp"
#include "iap/geometry.hpp"

namespace iap {

using ObjectId = std::int64_t;
using ClusterId = std::int64_t;

inline constexpr double kNoPruning = std::numeric_limits<double>::infinity();

struct Cluster {
    ClusterId id = 0;
    std::vector<ObjectId> members;
    FeatureVector centroid;  // mean of the members' stored (unscaled) vectors
    int gamma = 0;           // last step the cluster was created, enriched or merged
    int created_at = 0;
};

enum class EventKind { Creation, Enrichment, Merge, Prune };
std::string to_string(EventKind k);
EventKind parse_event_kind(const std::string& s);

struct StratificationEvent {
    int time = 0;
    EventKind kind = EventKind::Creation;
    std::vector<ClusterId> sources;   // empty for creation
    std::optional<ClusterId> target;  // absent for prune
    std::size_t new_members = 0;
    std::size_t member_count = 0;     // size of the target (or of the pruned cluster)

    bool operator==(const StratificationEvent&) const = default;
};

nlohmann::json to_json(const StratificationEvent& e);
StratificationEvent event_from_json(const nlohmann::json& j);

/// One (id, centroid) per cluster, in cluster order. `objects` resolves member ids.
std::vector<std::pair<ClusterId, FeatureVector>> pack(std::span<const Cluster> clusters,
                                                      const std::map<ObjectId, FeatureVector>& objects);

/// Mean of the given vectors; InvalidInput when empty.
FeatureVector mean_vector(std::span<const FeatureVector> xs);

/// Positional split of labels over [centroids..., new objects...].
std::pair<std::vector<int>, std::vector<int>> split(std::span<const int> combined, std::size_t n_centroids);

/// Every member of clusters[c] receives centroid_labels[c].
std::map<ObjectId, int> unpack_and_update(std::span<const int> centroid_labels, std::span<const Cluster> clusters);

/// Events implied by the temporary labels over [centroids of prior_ids..., new objects...],
/// one per label in ascending order. Creation and merge targets are minted from next_id.
/// member_count is left 0; it depends on the cluster sizes and is filled when applied.
std::vector<StratificationEvent> classify_stratification(std::span<const ClusterId> prior_ids,
                                                         std::span<const int> combined_labels, int time,
                                                         ClusterId& next_id);

/// A-posteriori incremental clustering session. Prior clusters are consolidated into
/// their centroids, clustered together with each new batch, and the result is unpacked
/// so earlier objects only ever move through whole-cluster merges.
class AppSession {
public:
    explicit AppSession(APConfig config = {}, double th_gamma = kNoPruning,
                        SimilarityMetric metric = SimilarityMetric::neg_euclidean());

    struct StepOutcome {
        int time = 0;
        std::size_t ap_input_size = 0;  // matrix dimension the AP run saw
        ClusteringResult ap_result;
        std::vector<StratificationEvent> events;
    };

    /// Processes the batch arriving at the current time-step, then advances time.
    /// `scaler` (if any) maps stored vectors into the space used for similarities.
    StepOutcome step(std::span<const ObjectId> ids, std::span<const FeatureVector> vectors,
                     const FeatureScaler* scaler = nullptr);

    /// Removes clusters with now - gamma > th_gamma and their objects; returns prune events.
    std::vector<StratificationEvent> prune(int now);

    int time() const noexcept { return t_; }
    double th_gamma() const noexcept { return th_gamma_; }
    const std::vector<Cluster>& clusters() const noexcept { return clusters_; }
    const std::map<ObjectId, FeatureVector>& objects() const noexcept { return objects_; }
    const std::vector<StratificationEvent>& history() const noexcept { return history_; }
    const Cluster* find(ClusterId id) const;

    /// (object id, cluster id) for every retained object, ascending by object id.
    std::vector<std::pair<ObjectId, ClusterId>> assignment() const;

    nlohmann::json snapshot() const;
    static AppSession restore(const nlohmann::json& snapshot, APConfig config = {},
                              SimilarityMetric metric = SimilarityMetric::neg_euclidean());

private:
    void recompute_centroid(Cluster& c) const;

    APConfig config_;
    double th_gamma_;
    SimilarityMetric metric_;
    int t_ = 0;
    ClusterId next_id_ = 0;
    std::vector<Cluster> clusters_;  // ascending id
    std::map<ObjectId, FeatureVector> objects_;
    std::vector<StratificationEvent> history_;
};

}  // namespace iap

#endif  // IAP_APP_HPP
