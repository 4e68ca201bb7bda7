// Dense contingency-table reference for purity and NMI.
#ifndef IAP_TESTS_METRIC_ORACLE_HPP
#define IAP_TESTS_METRIC_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

struct Table {
    std::vector<std::vector<double>> cells;  // [cluster][category]
    double n = 0;
};

inline Table contingency(const std::vector<int>& pred, const std::vector<int>& gold) {
    std::vector<int> ps = pred, gs = gold;
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
    std::sort(gs.begin(), gs.end());
    gs.erase(std::unique(gs.begin(), gs.end()), gs.end());
    Table t;
    t.cells.assign(ps.size(), std::vector<double>(gs.size(), 0.0));
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const auto r = std::lower_bound(ps.begin(), ps.end(), pred[i]) - ps.begin();
        const auto c = std::lower_bound(gs.begin(), gs.end(), gold[i]) - gs.begin();
        t.cells[r][c] += 1;
    }
    t.n = static_cast<double>(pred.size());
    return t;
}

inline double purity(const std::vector<int>& pred, const std::vector<int>& gold) {
    const auto t = contingency(pred, gold);
    double hits = 0;
    for (const auto& row : t.cells) hits += *std::max_element(row.begin(), row.end());
    return hits / t.n;
}

inline double nmi(const std::vector<int>& pred, const std::vector<int>& gold) {
    const auto t = contingency(pred, gold);
    const std::size_t R = t.cells.size(), C = t.cells[0].size();
    std::vector<double> rs(R, 0), cs(C, 0);
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t c = 0; c < C; ++c) {
            rs[r] += t.cells[r][c];
            cs[c] += t.cells[r][c];
        }
    double hr = 0, hc = 0, mi = 0;
    for (double v : rs) hr -= v / t.n * std::log2(v / t.n);
    for (double v : cs) hc -= v / t.n * std::log2(v / t.n);
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t c = 0; c < C; ++c)
            if (t.cells[r][c] > 0) mi += t.cells[r][c] / t.n * std::log2(t.cells[r][c] * t.n / (rs[r] * cs[c]));
    if (R == 1 && C == 1) return 1.0;
    if (mi <= 0) return 0.0;
    return mi / ((hr + hc) / 2);
}

}  // namespace oracle

#endif
