// Message-passing kernels. The parallel versions keep the per-column summation order
// of the serial reference (rows ascending), so both produce bitwise-identical messages
// for any thread count.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "iap/ap_core.hpp"
#include "iap/error.hpp"

namespace iap::kernels {

namespace {

// max over an empty candidate set (n == 1)
constexpr double kEmptyMax = -1e300;

void check_sizes(const SimilarityMatrix& s, const MessageState& m) {
    if (s.size() != m.n || m.r.size() != m.n * m.n || m.a.size() != m.n * m.n)
        throw InvalidInput("similarity matrix is " + std::to_string(s.size()) + "x" + std::to_string(s.size()) +
                           " but message state is " + std::to_string(m.n) + "x" + std::to_string(m.n));
}

void check_sizes(const MessageState& m) {
    if (m.r.size() != m.n * m.n || m.a.size() != m.n * m.n) throw InvalidInput("inconsistent message state");
}

void check_damping(double damping) {
    if (!(damping >= 0.0 && damping < 1.0)) throw InvalidInput("damping must lie in [0, 1)");
}

inline void responsibility_row(const SimilarityMatrix& s, MessageState& m, std::size_t i, double damping) {
    const std::size_t n = m.n;
    const double* srow = s.row(i).data();
    const double* arow = m.a.data() + i * n;
    double* rrow = m.r.data() + i * n;

    double best = kEmptyMax;
    double second = kEmptyMax;
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double v = arow[k] + srow[k];
        if (v > best) {
            second = best;
            best = v;
            best_k = k;
        } else if (v > second) {
            second = v;
        }
    }
    if (n == 1) best = second = kEmptyMax;
    for (std::size_t k = 0; k < n; ++k) {
        const double update = srow[k] - (k == best_k ? second : best);
        rrow[k] = damping * rrow[k] + (1.0 - damping) * update;
    }
}

inline void accumulate_columns(const MessageState& m, std::size_t k_begin, std::size_t k_end,
                               std::vector<double>& colsum) {
    const std::size_t n = m.n;
    for (std::size_t i = 0; i < n; ++i) {
        const double* rrow = m.r.data() + i * n;
        for (std::size_t k = k_begin; k < k_end; ++k)
            colsum[k] += (i == k) ? rrow[k] : std::max(0.0, rrow[k]);
    }
}

inline void availability_columns(MessageState& m, std::size_t k_begin, std::size_t k_end,
                                 const std::vector<double>& colsum, double damping) {
    const std::size_t n = m.n;
    for (std::size_t i = 0; i < n; ++i) {
        const double* rrow = m.r.data() + i * n;
        double* arow = m.a.data() + i * n;
        for (std::size_t k = k_begin; k < k_end; ++k) {
            double update;
            if (i == k)
                update = colsum[k] - rrow[k];
            else
                update = std::min(0.0, colsum[k] - std::max(0.0, rrow[k]));
            arow[k] = damping * arow[k] + (1.0 - damping) * update;
        }
    }
}

constexpr std::size_t kColumnBlock = 64;

}  // namespace

namespace serial {

void update_responsibilities(const SimilarityMatrix& s, MessageState& m, double damping) {
    check_sizes(s, m);
    check_damping(damping);
    for (std::size_t i = 0; i < m.n; ++i) responsibility_row(s, m, i, damping);
}

void update_availabilities(MessageState& m, double damping) {
    check_sizes(m);
    check_damping(damping);
    std::vector<double> colsum(m.n, 0.0);
    accumulate_columns(m, 0, m.n, colsum);
    availability_columns(m, 0, m.n, colsum, damping);
}

}  // namespace serial

namespace parallel {

void update_responsibilities(const SimilarityMatrix& s, MessageState& m, double damping) {
    check_sizes(s, m);
    check_damping(damping);
    const auto n = static_cast<std::ptrdiff_t>(m.n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) responsibility_row(s, m, static_cast<std::size_t>(i), damping);
}

void update_availabilities(MessageState& m, double damping) {
    check_sizes(m);
    check_damping(damping);
    std::vector<double> colsum(m.n, 0.0);
    const auto blocks = static_cast<std::ptrdiff_t>((m.n + kColumnBlock - 1) / kColumnBlock);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < blocks; ++b) {
        const std::size_t begin = static_cast<std::size_t>(b) * kColumnBlock;
        const std::size_t end = std::min(m.n, begin + kColumnBlock);
        accumulate_columns(m, begin, end, colsum);
        availability_columns(m, begin, end, colsum, damping);
    }
}

}  // namespace parallel

}  // namespace iap::kernels
