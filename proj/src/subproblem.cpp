#include "esm/subproblem.h"

#include <algorithm>

namespace esm {

double projection_min(std::span<const double> costs) {
    if (costs.empty()) return kInf;
    double m = costs[0];
    for (double c : costs) m = std::min(m, c);
    return m;
}

double projection_min_marginal(std::span<const double> costs, std::size_t i) {
    if (i >= costs.size()) throw error("projection min-marginal: index outside support");
    if (costs.size() == 1) return -kInf;  // only feasible assignment selects i
    double best_other = kInf;
    for (std::size_t k = 0; k < costs.size(); ++k) {
        if (k != i) best_other = std::min(best_other, costs[k]);
    }
    return costs[i] - best_other;
}

double boundary_min(std::vector<double> plus, std::vector<double> minus, int rhs) {
    if (rhs < 0) return boundary_min(std::move(minus), std::move(plus), -rhs);
    if (rhs > static_cast<int>(plus.size())) return kInf;
    std::sort(plus.begin(), plus.end());
    std::sort(minus.begin(), minus.end());
    double total = 0;
    for (int j = 0; j < rhs; ++j) total += plus[j];
    std::size_t p = rhs, n = 0;
    while (p < plus.size() && n < minus.size()) {
        double inc = plus[p] + minus[n];
        if (inc >= 0) break;
        total += inc;
        ++p;
        ++n;
    }
    return total;
}

double boundary_min_marginal(const std::vector<double>& plus, const std::vector<double>& minus,
                             int rhs, bool i_is_plus, std::size_t i) {
    std::vector<double> p = plus, n = minus;
    double ci;
    int rhs_with;
    if (i_is_plus) {
        if (i >= p.size()) throw error("boundary min-marginal: index outside support");
        ci = p[i];
        p.erase(p.begin() + static_cast<std::ptrdiff_t>(i));
        rhs_with = rhs - 1;
    } else {
        if (i >= n.size()) throw error("boundary min-marginal: index outside support");
        ci = n[i];
        n.erase(n.begin() + static_cast<std::ptrdiff_t>(i));
        rhs_with = rhs + 1;
    }
    double with_i = boundary_min(p, n, rhs_with);
    double without_i = boundary_min(p, n, rhs);
    if (with_i == kInf && without_i == kInf)
        throw infeasible_error("boundary subproblem infeasible for both branches");
    if (with_i == kInf) return kInf;    // i cannot be 1
    if (without_i == kInf) return -kInf;  // i is forced to 1
    return ci + with_i - without_i;
}

}  // namespace esm
