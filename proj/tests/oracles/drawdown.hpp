#pragma once

#include <vector>

namespace oracle {

/// O(n^2) maximum drawdown: max over i < j of 1 - P_j / P_i, floored at 0.
inline double max_drawdown_all_pairs(const std::vector<double>& p) {
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = i + 1; j < p.size(); ++j) {
            const double loss = 1.0 - p[j] / p[i];
            if (loss > worst) worst = loss;
        }
    return worst;
}

}  // namespace oracle
