#ifndef IAP_AP_CORE_HPP
#define IAP_AP_CORE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "iap/geometry.hpp"

namespace iap {

struct APConfig {
    int max_iterations = 200;
    double damping = 0.9;
    int convergence_window = 15;
    PreferencePolicy preference = PreferencePolicy::median();
    // Adds seeded sub-ulp noise to S before message passing; off by default.
    std::optional<std::uint64_t> jitter_seed;

    /// Throws InvalidInput when damping is outside [0.5, 1) or the window is not < max_iterations.
    void validate() const;
};

/// Responsibilities R and availabilities A, both n x n row-major.
struct MessageState {
    std::size_t n = 0;
    std::vector<double> r;
    std::vector<double> a;

    MessageState() = default;
    explicit MessageState(std::size_t size) : n(size), r(size * size, 0.0), a(size * size, 0.0) {}

    double& resp(std::size_t i, std::size_t k) { return r[i * n + k]; }
    double resp(std::size_t i, std::size_t k) const { return r[i * n + k]; }
    double& avail(std::size_t i, std::size_t k) { return a[i * n + k]; }
    double avail(std::size_t i, std::size_t k) const { return a[i * n + k]; }
};

struct ClusteringResult {
    // labels[i] is a cluster id in [0, exemplars.size()); exemplars[labels[i]] is i's exemplar.
    std::vector<int> labels;
    std::vector<std::size_t> exemplars;  // ascending object indices
    int iterations_run = 0;
    bool converged = false;

    std::size_t cluster_count() const noexcept { return exemplars.size(); }
};

// Message kernels. `damping` in [0, 1): new = damping * old + (1 - damping) * update.
namespace kernels {

namespace serial {
void update_responsibilities(const SimilarityMatrix& s, MessageState& m, double damping);
void update_availabilities(MessageState& m, double damping);
}  // namespace serial

namespace parallel {
void update_responsibilities(const SimilarityMatrix& s, MessageState& m, double damping);
void update_availabilities(MessageState& m, double damping);
}  // namespace parallel

}  // namespace kernels

// Default kernels (OpenMP when available); both throw InvalidInput on size mismatch.
void update_responsibilities(const SimilarityMatrix& s, MessageState& m, double damping);
void update_availabilities(MessageState& m, double damping);

/// Candidate exemplar per object: argmax_k a(i,k) + r(i,k), lowest index on ties.
std::vector<std::size_t> candidate_exemplars(const MessageState& m);

/// Sorted exemplar set {k : argmax row k == k}; empty when none self-selects.
std::vector<std::size_t> exemplar_set(const MessageState& m);

/// Decodes the message state into a full assignment. Non-exemplars join the exemplar
/// with the largest s(i, .). An empty exemplar set promotes argmax_k a(k,k) + r(k,k).
ClusteringResult extract_assignment(const SimilarityMatrix& s, const MessageState& m);

/// Runs message passing starting from `m` (which may be warm) until the exemplar set
/// is stable for `convergence_window` iterations or max_iterations is reached.
ClusteringResult run_messages(const SimilarityMatrix& s, MessageState& m, const APConfig& config);

/// Conventional AP from all-zero messages. A single object short-circuits to itself.
ClusteringResult run_ap(const SimilarityMatrix& s, const APConfig& config = {});

/// Same as run_ap but also returns the final messages.
ClusteringResult run_ap(const SimilarityMatrix& s, const APConfig& config, MessageState& messages_out);

}  // namespace iap

#endif  // IAP_AP_CORE_HPP
