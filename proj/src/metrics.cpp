#include "iap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "iap/error.hpp"

namespace iap::metrics {

namespace {

struct Contingency {
    std::map<std::pair<int, int>, std::size_t> joint;
    std::map<int, std::size_t> rows;  // predicted
    std::map<int, std::size_t> cols;  // gold
    std::size_t total = 0;
};

Contingency tabulate(std::span<const int> predicted, std::span<const int> gold) {
    if (predicted.size() != gold.size()) throw InvalidInput("predicted and gold label counts differ");
    if (predicted.empty()) throw InvalidInput("labelled partition is empty");
    Contingency t;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        ++t.joint[{predicted[i], gold[i]}];
        ++t.rows[predicted[i]];
        ++t.cols[gold[i]];
    }
    t.total = predicted.size();
    return t;
}

double entropy(const std::map<int, std::size_t>& counts, double total) {
    double h = 0.0;
    for (const auto& [_, c] : counts) {
        const double p = static_cast<double>(c) / total;
        h -= p * std::log(p);
    }
    return h;
}

}  // namespace

double purity(std::span<const int> predicted, std::span<const int> gold) {
    const auto t = tabulate(predicted, gold);
    std::map<int, std::size_t> majority;
    for (const auto& [cell, c] : t.joint) majority[cell.first] = std::max(majority[cell.first], c);
    std::size_t hits = 0;
    for (const auto& [_, c] : majority) hits += c;
    return static_cast<double>(hits) / static_cast<double>(t.total);
}

double nmi(std::span<const int> predicted, std::span<const int> gold) {
    const auto t = tabulate(predicted, gold);
    const double n = static_cast<double>(t.total);
    const double h_pred = entropy(t.rows, n);
    const double h_gold = entropy(t.cols, n);
    if (t.rows.size() == 1 && t.cols.size() == 1) return 1.0;

    double mi = 0.0;
    for (const auto& [cell, c] : t.joint) {
        const double pij = static_cast<double>(c) / n;
        const double pi = static_cast<double>(t.rows.at(cell.first)) / n;
        const double pj = static_cast<double>(t.cols.at(cell.second)) / n;
        mi += pij * std::log(pij / (pi * pj));
    }
    const double denom = 0.5 * (h_pred + h_gold);
    if (mi <= 0.0 || denom <= 0.0) return 0.0;
    return std::clamp(mi / denom, 0.0, 1.0);
}

std::size_t cluster_count(std::span<const int> predicted) {
    return std::unordered_set<int>(predicted.begin(), predicted.end()).size();
}

}  // namespace iap::metrics
