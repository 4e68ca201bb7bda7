#ifndef IAP_METRICS_HPP
#define IAP_METRICS_HPP

#include <cstddef>
#include <span>

namespace iap::metrics {

// Both spans must have equal, non-zero length; InvalidInput otherwise.

/// Fraction of objects carrying their cluster's majority category.
double purity(std::span<const int> predicted, std::span<const int> gold);

/// Mutual information over the arithmetic mean of the two entropies (natural log).
/// 1 when both entropies vanish; 0 when the mutual information is 0.
double nmi(std::span<const int> predicted, std::span<const int> gold);

std::size_t cluster_count(std::span<const int> predicted);

}  // namespace iap::metrics

#endif  // IAP_METRICS_HPP
