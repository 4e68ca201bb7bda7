#include "iap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "iap/error.hpp"

namespace iap {

namespace {

void check_pair(FeatureView a, FeatureView b) {
    if (a.size() != b.size())
        throw InvalidInput("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                           std::to_string(b.size()));
}

double squared_distance(FeatureView a, FeatureView b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        acc += d * d;
    }
    return acc;
}

double kth_off_diagonal(std::vector<double>& values, std::size_t k) {
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
    return values[k];
}

std::vector<double> off_diagonal_values(const SimilarityMatrix& s) {
    const std::size_t n = s.size();
    std::vector<double> values;
    values.reserve(n * (n - 1));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            if (i != k) values.push_back(s(i, k));
    return values;
}

void finish_matrix(SimilarityMatrix& s, const PreferencePolicy& policy) {
    s.set_preference(s.preference_for(policy));
}

}  // namespace

void check_feature_vectors(std::span<const FeatureVector> xs) {
    if (xs.empty()) return;
    const std::size_t d = xs.front().size();
    if (d == 0) throw InvalidInput("feature vectors must have dimension > 0");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i].size() != d)
            throw InvalidInput("vector " + std::to_string(i) + " has dimension " +
                               std::to_string(xs[i].size()) + ", expected " + std::to_string(d));
        for (double v : xs[i])
            if (!std::isfinite(v)) throw InvalidInput("vector " + std::to_string(i) + " has a non-finite entry");
    }
}

double negative_euclidean(FeatureView a, FeatureView b) {
    check_pair(a, b);
    return -std::sqrt(squared_distance(a, b));
}

double negative_squared_euclidean(FeatureView a, FeatureView b) {
    check_pair(a, b);
    return -squared_distance(a, b);
}

SimilarityMetric SimilarityMetric::neg_euclidean() {
    return {"neg-euclidean", [](FeatureView a, FeatureView b) { return negative_euclidean(a, b); }, true};
}

SimilarityMetric SimilarityMetric::neg_squared_euclidean() {
    return {"neg-sq-euclidean", [](FeatureView a, FeatureView b) { return negative_squared_euclidean(a, b); },
            true};
}

PreferencePolicy parse_preference_policy(const std::string& text) {
    if (text == "median") return PreferencePolicy::median();
    if (text == "minimum" || text == "min") return PreferencePolicy::minimum();
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v))
        throw InvalidInput("preference policy must be 'median', 'minimum' or a number, got '" + text + "'");
    return PreferencePolicy::fixed(v);
}

std::string to_string(const PreferencePolicy& policy) {
    switch (policy.kind) {
        case PreferenceKind::Median: return "median";
        case PreferenceKind::Minimum: return "minimum";
        case PreferenceKind::Fixed: break;
    }
    return std::to_string(policy.value);
}

void SimilarityMatrix::set_preference(double p) {
    preference_ = p;
    for (std::size_t i = 0; i < n_; ++i) s_[i * n_ + i] = p;
}

double SimilarityMatrix::preference_for(const PreferencePolicy& policy) const {
    switch (policy.kind) {
        case PreferenceKind::Fixed: return policy.value;
        case PreferenceKind::Median: return n_ < 2 ? 0.0 : off_diagonal_median(*this);
        case PreferenceKind::Minimum: return n_ < 2 ? 0.0 : off_diagonal_minimum(*this);
    }
    return 0.0;
}

double off_diagonal_median(const SimilarityMatrix& s) {
    if (s.size() < 2) throw InvalidInput("median needs at least two objects");
    auto values = off_diagonal_values(s);
    const std::size_t m = values.size();
    const double upper = kth_off_diagonal(values, m / 2);
    if (m % 2 == 1) return upper;
    // after nth_element everything left of m/2 is <= upper; its max is the lower central value
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(m / 2));
    return 0.5 * (lower + upper);
}

double off_diagonal_minimum(const SimilarityMatrix& s) {
    if (s.size() < 2) throw InvalidInput("minimum needs at least two objects");
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = s.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            if (i != k) best = std::min(best, s(i, k));
    return best;
}

SimilarityMatrix build_similarity_matrix(std::span<const FeatureVector> xs, const PreferencePolicy& policy,
                                         const SimilarityMetric& metric) {
    if (xs.empty()) throw InvalidInput("cannot build a similarity matrix over zero objects");
    check_feature_vectors(xs);
    const auto n = static_cast<std::ptrdiff_t>(xs.size());
    SimilarityMatrix s(xs.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        for (std::ptrdiff_t k = 0; k < n; ++k) {
            if (i == k) continue;
            s(i, k) = metric.fn(xs[i], xs[k]);
        }
    }
    finish_matrix(s, policy);
    return s;
}

namespace serial {

SimilarityMatrix build_similarity_matrix(std::span<const FeatureVector> xs, const PreferencePolicy& policy,
                                         const SimilarityMetric& metric) {
    if (xs.empty()) throw InvalidInput("cannot build a similarity matrix over zero objects");
    check_feature_vectors(xs);
    const std::size_t n = xs.size();
    SimilarityMatrix s(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = metric.symmetric ? i + 1 : 0; k < n; ++k) {
            if (i == k) continue;
            s(i, k) = metric.fn(xs[i], xs[k]);
            if (metric.symmetric) s(k, i) = s(i, k);
        }
    }
    finish_matrix(s, policy);
    return s;
}

}  // namespace serial

}  // namespace iap
