#include "iap/ap_core.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "iap/error.hpp"

namespace iap {

void APConfig::validate() const {
    if (!(damping >= 0.5 && damping < 1.0))
        throw InvalidInput("damping must satisfy 0.5 <= d < 1, got " + std::to_string(damping));
    if (max_iterations <= 0) throw InvalidInput("max_iterations must be positive");
    if (convergence_window <= 0) throw InvalidInput("convergence_window must be positive");
    if (convergence_window >= max_iterations)
        throw InvalidInput("convergence_window must be smaller than max_iterations");
}

void update_responsibilities(const SimilarityMatrix& s, MessageState& m, double damping) {
    kernels::parallel::update_responsibilities(s, m, damping);
}

void update_availabilities(MessageState& m, double damping) { kernels::parallel::update_availabilities(m, damping); }

std::vector<std::size_t> candidate_exemplars(const MessageState& m) {
    std::vector<std::size_t> best(m.n, 0);
    for (std::size_t i = 0; i < m.n; ++i) {
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < m.n; ++k) {
            const double v = m.avail(i, k) + m.resp(i, k);
            if (v > top) {
                top = v;
                best[i] = k;
            }
        }
    }
    return best;
}

std::vector<std::size_t> exemplar_set(const MessageState& m) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < m.n; ++k) {
        const double self = m.avail(k, k) + m.resp(k, k);
        bool wins = true;
        // k wins its own row iff nothing before it reaches `self` and nothing after exceeds it
        for (std::size_t j = 0; j < m.n && wins; ++j) {
            if (j == k) continue;
            const double v = m.avail(k, j) + m.resp(k, j);
            wins = j < k ? v < self : v <= self;
        }
        if (wins) out.push_back(k);
    }
    return out;
}

ClusteringResult extract_assignment(const SimilarityMatrix& s, const MessageState& m) {
    if (s.size() != m.n) throw InvalidInput("similarity/message size mismatch");
    ClusteringResult res;
    if (m.n == 0) return res;

    res.exemplars = exemplar_set(m);
    if (res.exemplars.empty()) {
        std::size_t pick = 0;
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < m.n; ++k) {
            const double v = m.avail(k, k) + m.resp(k, k);
            if (v > top) {
                top = v;
                pick = k;
            }
        }
        res.exemplars.push_back(pick);
    }

    res.labels.assign(m.n, -1);
    for (std::size_t c = 0; c < res.exemplars.size(); ++c) res.labels[res.exemplars[c]] = static_cast<int>(c);
    for (std::size_t i = 0; i < m.n; ++i) {
        if (res.labels[i] >= 0) continue;
        int best = 0;
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < res.exemplars.size(); ++c) {
            const double v = s(i, res.exemplars[c]);
            if (v > top) {
                top = v;
                best = static_cast<int>(c);
            }
        }
        res.labels[i] = best;
    }
    return res;
}

namespace {

SimilarityMatrix jittered(const SimilarityMatrix& s, std::uint64_t seed) {
    SimilarityMatrix out = s;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr double tiny = std::numeric_limits<double>::min() * 100.0;
    for (double& v : out.data()) v += (eps * v + tiny) * noise(rng);
    return out;
}

ClusteringResult message_loop(const SimilarityMatrix& s, MessageState& m, const APConfig& config) {
    std::vector<std::size_t> previous;
    int stable = 0;
    int it = 0;
    bool converged = false;
    while (it < config.max_iterations) {
        ++it;
        update_responsibilities(s, m, config.damping);
        update_availabilities(m, config.damping);
        auto current = exemplar_set(m);
        stable = (it > 1 && current == previous) ? stable + 1 : 1;
        previous = std::move(current);
        if (!previous.empty() && stable >= config.convergence_window) {
            converged = true;
            break;
        }
    }
    ClusteringResult res = extract_assignment(s, m);
    res.iterations_run = it;
    res.converged = converged;
    return res;
}

}  // namespace

ClusteringResult run_messages(const SimilarityMatrix& s, MessageState& m, const APConfig& config) {
    config.validate();
    if (s.size() != m.n) throw InvalidInput("similarity/message size mismatch");
    if (s.size() == 0) throw InvalidInput("cannot cluster zero objects");
    if (s.size() == 1) {
        ClusteringResult res;
        res.labels = {0};
        res.exemplars = {0};
        res.converged = true;
        return res;
    }
    if (config.jitter_seed) return message_loop(jittered(s, *config.jitter_seed), m, config);
    return message_loop(s, m, config);
}

ClusteringResult run_ap(const SimilarityMatrix& s, const APConfig& config, MessageState& messages_out) {
    messages_out = MessageState(s.size());
    return run_messages(s, messages_out, config);
}

ClusteringResult run_ap(const SimilarityMatrix& s, const APConfig& config) {
    MessageState m;
    return run_ap(s, config, m);
}

}  // namespace iap
