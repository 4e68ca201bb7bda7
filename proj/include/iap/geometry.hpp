#ifndef IAP_GEOMETRY_HPP
#define IAP_GEOMETRY_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace iap {

using FeatureVector = std::vector<double>;
using FeatureView = std::span<const double>;

/// Throws InvalidInput unless every vector is non-empty, finite and of one dimension.
void check_feature_vectors(std::span<const FeatureVector> xs);

double negative_euclidean(FeatureView a, FeatureView b);
double negative_squared_euclidean(FeatureView a, FeatureView b);

/// Pairwise similarity. `symmetric` lets matrix construction fill both triangles at once.
struct SimilarityMetric {
    std::string name;
    std::function<double(FeatureView, FeatureView)> fn;
    bool symmetric = true;

    static SimilarityMetric neg_euclidean();
    static SimilarityMetric neg_squared_euclidean();
};

enum class PreferenceKind { Median, Minimum, Fixed };

struct PreferencePolicy {
    PreferenceKind kind = PreferenceKind::Median;
    double value = 0.0;  // only used by Fixed

    static PreferencePolicy median() { return {PreferenceKind::Median, 0.0}; }
    static PreferencePolicy minimum() { return {PreferenceKind::Minimum, 0.0}; }
    static PreferencePolicy fixed(double p) { return {PreferenceKind::Fixed, p}; }
};

/// Parses "median", "minimum"/"min" or a number (fixed preference).
PreferencePolicy parse_preference_policy(const std::string& text);
std::string to_string(const PreferencePolicy& policy);

/// Dense row-major n x n similarity matrix, preference on the diagonal.
class SimilarityMatrix {
public:
    SimilarityMatrix() = default;
    explicit SimilarityMatrix(std::size_t n) : n_(n), s_(n * n, 0.0) {}

    std::size_t size() const noexcept { return n_; }
    double preference() const noexcept { return preference_; }

    double operator()(std::size_t i, std::size_t k) const { return s_[i * n_ + k]; }
    double& operator()(std::size_t i, std::size_t k) { return s_[i * n_ + k]; }

    std::span<const double> row(std::size_t i) const { return {s_.data() + i * n_, n_}; }
    std::span<const double> data() const noexcept { return s_; }
    std::span<double> data() noexcept { return s_; }

    /// Writes `p` on every diagonal entry.
    void set_preference(double p);

    /// Preference the policy would pick for the current off-diagonal entries.
    double preference_for(const PreferencePolicy& policy) const;

private:
    std::size_t n_ = 0;
    std::vector<double> s_;
    double preference_ = 0.0;
};

/// Median of all n(n-1) off-diagonal entries; even count -> mean of the central pair.
double off_diagonal_median(const SimilarityMatrix& s);
double off_diagonal_minimum(const SimilarityMatrix& s);

/// Fills off-diagonal entries with `metric`, then applies the preference policy.
/// Rows are filled in parallel when OpenMP is available.
SimilarityMatrix build_similarity_matrix(std::span<const FeatureVector> xs,
                                         const PreferencePolicy& policy = PreferencePolicy::median(),
                                         const SimilarityMetric& metric = SimilarityMetric::neg_euclidean());

namespace serial {
/// Single-threaded reference for build_similarity_matrix.
SimilarityMatrix build_similarity_matrix(std::span<const FeatureVector> xs,
                                         const PreferencePolicy& policy = PreferencePolicy::median(),
                                         const SimilarityMetric& metric = SimilarityMetric::neg_euclidean());
}  // namespace serial

}  // namespace iap

#endif  // IAP_GEOMETRY_HPP
