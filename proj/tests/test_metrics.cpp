#include <map>
#include <random>

#include "doctest.h"
#include "iap/error.hpp"
#include "iap/metrics.hpp"
#include "metric_oracle.hpp"

using namespace iap;

namespace {

std::vector<int> v(std::initializer_list<int> xs) { return xs; }

std::vector<int> random_labels(std::size_t n, int k, std::mt19937_64& rng) {
    std::vector<int> out(n);
    for (int& x : out) x = static_cast<int>(rng() % static_cast<std::uint64_t>(k));
    return out;
}

}  // namespace

TEST_CASE("purity hand examples") {
    CHECK(metrics::purity(v({0, 0, 0, 1, 1}), v({0, 0, 1, 1, 1})) == 0.8);
    CHECK(metrics::purity(v({7, 7, 3, 3}), v({1, 1, 0, 0})) == 1.0);
    CHECK(metrics::purity(v({0, 1, 2, 3, 4}), v({0, 0, 1, 1, 1})) == 1.0);
}

TEST_CASE("nmi hand examples") {
    CHECK(metrics::nmi(v({5, 5, 9, 9, 2}), v({0, 0, 1, 1, 2})) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(metrics::nmi(v({0, 0, 0, 0}), v({0, 1, 0, 1})) == 0.0);
    CHECK(metrics::nmi(v({0, 0, 1, 1}), v({0, 1, 0, 1})) == 0.0);
    CHECK(metrics::nmi(v({3, 3, 3}), v({1, 1, 1})) == 1.0);
}

TEST_CASE("cluster count") {
    CHECK(metrics::cluster_count(v({0, 0, 1})) == 2);
    CHECK(metrics::cluster_count(v({5})) == 1);
    CHECK(metrics::cluster_count(v({0, 1, 2, 3})) == 4);
}

TEST_CASE("invalid partitions") {
    CHECK_THROWS_AS(metrics::purity(v({}), v({})), InvalidInput);
    CHECK_THROWS_AS(metrics::nmi(v({0, 1}), v({0})), InvalidInput);
}

TEST_CASE("metrics agree with the dense contingency oracle") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng() % 50;
        const auto pred = random_labels(n, 1 + static_cast<int>(rng() % 8), rng);
        const auto gold = random_labels(n, 1 + static_cast<int>(rng() % 5), rng);
        CHECK(metrics::purity(pred, gold) == doctest::Approx(oracle::purity(pred, gold)).epsilon(1e-12));
        CHECK(std::abs(metrics::nmi(pred, gold) - oracle::nmi(pred, gold)) <= 1e-9);
    }
}

TEST_CASE("relabeling invariance, symmetry and bounds") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng() % 40;
        const auto pred = random_labels(n, 6, rng);
        const auto gold = random_labels(n, 3, rng);
        // bijective renaming: x -> 100 - 3x
        std::vector<int> pred2, gold2;
        for (int x : pred) pred2.push_back(100 - 3 * x);
        for (int x : gold) gold2.push_back(x + 17);
        const double p = metrics::purity(pred, gold), m = metrics::nmi(pred, gold);
        CHECK(metrics::purity(pred2, gold2) == p);
        CHECK(metrics::nmi(pred2, gold2) == doctest::Approx(m).epsilon(1e-12));
        CHECK(metrics::nmi(gold, pred) == doctest::Approx(m).epsilon(1e-12));
        CHECK((m >= 0.0 && m <= 1.0));
        std::map<int, int> sizes;
        for (int g : gold) ++sizes[g];
        int largest = 0;
        for (auto [_, c] : sizes) largest = std::max(largest, c);
        CHECK(p >= static_cast<double>(largest) / static_cast<double>(n) - 1e-15);
    }
}
