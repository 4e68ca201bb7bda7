#include "iap/iapna.hpp"

#include <limits>

#include "iap/error.hpp"

namespace iap {

std::size_t nearest_neighbor(FeatureView x, std::span<const FeatureVector> existing, const SimilarityMetric& metric) {
    if (existing.empty()) throw InvalidInput("nearest_neighbor needs at least one existing object");
    std::size_t best = 0;
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < existing.size(); ++k) {
        const double s = metric.fn(x, existing[k]);
        if (s > top) {
            top = s;
            best = k;
        }
    }
    return best;
}

MessageState extend_messages(const MessageState& messages, std::span<const std::size_t> neighbors) {
    const std::size_t n = messages.n;
    const std::size_t m = neighbors.size();
    for (std::size_t q : neighbors)
        if (q >= n) throw InvalidInput("neighbor index out of range");

    // source index in the old matrices for each row/column of the extended ones
    std::vector<std::size_t> src(n + m);
    for (std::size_t i = 0; i < n; ++i) src[i] = i;
    for (std::size_t j = 0; j < m; ++j) src[n + j] = neighbors[j];

    MessageState out(n + m);
    for (std::size_t i = 0; i < n + m; ++i) {
        for (std::size_t k = 0; k < n + m; ++k) {
            if (i < n && k < n) {
                out.resp(i, k) = messages.resp(i, k);
                out.avail(i, k) = messages.avail(i, k);
                continue;
            }
            const std::size_t si = src[i];
            const std::size_t sk = src[k];
            if (i >= n && k >= n && i != k && si == sk) continue;  // new pair sharing a neighbor: 0
            // otherwise si == sk only for a self-message or the new<->neighbor pair: both copy q's self-messages
            out.resp(i, k) = messages.resp(si, sk);
            out.avail(i, k) = messages.avail(si, sk);
        }
    }
    return out;
}

IapnaSession::IapnaSession(APConfig config, SimilarityMetric metric)
    : config_(std::move(config)), metric_(std::move(metric)) {
    config_.validate();
}

const ClusteringResult& IapnaSession::step(std::span<const FeatureVector> batch, const FeatureScaler* scaler) {
    if (batch.empty()) throw InvalidInput("IAPNA step needs at least one new object");
    check_feature_vectors(batch);
    if (!objects_.empty() && batch.front().size() != objects_.front().size())
        throw InvalidInput("batch dimension differs from earlier objects");

    const std::size_t old_n = objects_.size();
    objects_.insert(objects_.end(), batch.begin(), batch.end());
    const auto view = scaler ? scaler->apply(objects_) : objects_;

    similarities_ = build_similarity_matrix(view, config_.preference, metric_);
    last_neighbors_.clear();
    if (old_n == 0) {
        last_ = run_ap(similarities_, config_, messages_);
        return last_;
    }

    const std::span<const FeatureVector> existing(view.data(), old_n);
    for (std::size_t j = old_n; j < view.size(); ++j)
        last_neighbors_.push_back(nearest_neighbor(view[j], existing, metric_));
    messages_ = extend_messages(messages_, last_neighbors_);
    last_ = run_messages(similarities_, messages_, config_);
    return last_;
}

}  // namespace iap
