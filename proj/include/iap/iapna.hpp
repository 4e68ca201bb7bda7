#ifndef IAP_IAPNA_HPP
#define IAP_IAPNA_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "iap/ap_core.hpp"
#include "iap/data.hpp"
#include "iap/geometry.hpp"

namespace iap {

/// Index of the most similar (closest) vector in `existing`; lowest index on ties.
std::size_t nearest_neighbor(FeatureView x, std::span<const FeatureVector> existing,
                             const SimilarityMetric& metric = SimilarityMetric::neg_euclidean());

/// Grows `messages` (n x n) to (n + m) x (n + m). New object j copies the rows and
/// columns of its nearest pre-existing neighbor neighbors[j]; the j<->neighbor pair and
/// j's self-messages take the neighbor's self-messages; a pair of new objects copies
/// the messages between their neighbors, or 0 when both share one neighbor.
MessageState extend_messages(const MessageState& messages, std::span<const std::size_t> neighbors);

/// Incremental AP with nearest-neighbour message initialization. Objects are kept
/// raw; each step may pass a scaler fitted on the current population.
class IapnaSession {
public:
    explicit IapnaSession(APConfig config = {}, SimilarityMetric metric = SimilarityMetric::neg_euclidean());

    /// Adds a non-empty batch and reruns message passing from the warm state.
    /// Returns the assignment over every object seen so far.
    const ClusteringResult& step(std::span<const FeatureVector> batch, const FeatureScaler* scaler = nullptr);

    std::size_t size() const noexcept { return objects_.size(); }
    const std::vector<FeatureVector>& objects() const noexcept { return objects_; }
    const MessageState& messages() const noexcept { return messages_; }
    const SimilarityMatrix& similarities() const noexcept { return similarities_; }
    const ClusteringResult& last_result() const noexcept { return last_; }
    /// Nearest neighbours chosen for the most recent batch.
    const std::vector<std::size_t>& last_neighbors() const noexcept { return last_neighbors_; }

private:
    APConfig config_;
    SimilarityMetric metric_;
    std::vector<FeatureVector> objects_;
    SimilarityMatrix similarities_;
    MessageState messages_;
    ClusteringResult last_;
    std::vector<std::size_t> last_neighbors_;
};

}  // namespace iap

#endif  // IAP_IAPNA_HPP
