#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <vector>

#include "veason/errors.hpp"
#include "veason/rewards.hpp"

namespace veason {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Equality up to rounding noise; genuine ties in stored fixtures are exact,
// random continuous costs are never this close across distinct assignments.
bool near_equal(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

// Minimum cost of assigning `need` of the free rows to free columns.
// Rows are the masked dimension and must number <= 16 among free ones.
double dp_min_cost(const Matrix& cost, const std::vector<bool>& row_free,
                   const std::vector<bool>& col_free, int need) {
    std::vector<int> rows;
    for (int r = 0; r < cost.rows; ++r)
        if (row_free[r]) rows.push_back(r);
    int m = static_cast<int>(rows.size());
    std::vector<double> dp(static_cast<std::size_t>(1) << m, kInf);
    dp[0] = 0.0;
    for (int c = 0; c < cost.cols; ++c) {
        if (!col_free[c]) continue;
        // iterate masks descending so each column is used at most once
        for (int mask = (1 << m) - 1; mask >= 0; --mask) {
            if (dp[mask] == kInf) continue;
            for (int k = 0; k < m; ++k) {
                if (mask & (1 << k)) continue;
                int next = mask | (1 << k);
                double cand = dp[mask] + cost.at(rows[k], c);
                if (cand < dp[next]) dp[next] = cand;
            }
        }
    }
    double best = kInf;
    for (int mask = 0; mask < (1 << m); ++mask) {
        if (std::popcount(static_cast<unsigned>(mask)) == need && dp[mask] < best)
            best = dp[mask];
    }
    return best;
}

}  // namespace

namespace detail {

std::vector<std::pair<int, int>> assign_small_exact(const Matrix& cost) {
    int need = std::min(cost.rows, cost.cols);

    // The DP masks the view's rows; transpose when the columns are fewer so
    // the masked dimension is always min(rows, cols).
    bool transposed = cost.rows > cost.cols;
    Matrix view = cost;
    if (transposed) {
        view = Matrix(cost.cols, cost.rows);
        for (int r = 0; r < cost.rows; ++r)
            for (int c = 0; c < cost.cols; ++c) view.at(c, r) = cost.at(r, c);
    }
    std::vector<bool> vrow_free(view.rows, true), vcol_free(view.cols, true);
    auto& orig_row_free = transposed ? vcol_free : vrow_free;
    auto& orig_col_free = transposed ? vrow_free : vcol_free;

    double target = dp_min_cost(view, vrow_free, vcol_free, need);

    // Greedy lexicographic reconstruction over original rows: pair the row
    // with the smallest column that preserves optimality, else exclude it.
    std::vector<std::pair<int, int>> pairs;
    double fixed_cost = 0.0;
    int remaining = need;
    for (int r = 0; r < cost.rows && remaining > 0; ++r) {
        bool placed = false;
        for (int c = 0; c < cost.cols && !placed; ++c) {
            if (!orig_col_free[c]) continue;
            orig_row_free[r] = false;
            orig_col_free[c] = false;
            double edge = cost.at(r, c);
            double rest =
                remaining == 1 ? 0.0 : dp_min_cost(view, vrow_free, vcol_free, remaining - 1);
            if (near_equal(fixed_cost + edge + rest, target)) {
                pairs.emplace_back(r, c);
                fixed_cost += edge;
                --remaining;
                placed = true;
            } else {
                orig_row_free[r] = true;
                orig_col_free[c] = true;
            }
        }
        if (!placed) orig_row_free[r] = false;  // no optimal completion uses row r
    }
    // Adversarial near-ties inside the tolerance could starve the greedy pass;
    // the potentials path still honors the size and optimality contract.
    if (static_cast<int>(pairs.size()) != need) return assign_potentials(cost);
    return pairs;
}

std::vector<std::pair<int, int>> assign_potentials(const Matrix& cost) {
    // Potentials formulation; rows must not outnumber columns, transpose otherwise.
    bool transposed = cost.rows > cost.cols;
    int n = transposed ? cost.cols : cost.rows;
    int m = transposed ? cost.rows : cost.cols;
    auto a = [&](int i, int j) {  // 1-indexed
        return transposed ? cost.at(j - 1, i - 1) : cost.at(i - 1, j - 1);
    };

    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                double cur = a(i0, j) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }

    std::vector<std::pair<int, int>> pairs;
    for (int j = 1; j <= m; ++j) {
        if (p[j] == 0) continue;
        int row = transposed ? j - 1 : p[j] - 1;
        int col = transposed ? p[j] - 1 : j - 1;
        pairs.emplace_back(row, col);
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

}  // namespace detail

double Assignment::total_cost() const {
    double sum = 0.0;
    for (auto [r, c] : matched_pairs) sum += cost_matrix.at(r, c);
    return sum;
}

Assignment hungarian(const Matrix& cost) {
    if (static_cast<std::size_t>(cost.rows) * cost.cols != cost.values.size())
        throw ValidationError("hungarian: matrix shape does not match value count");
    for (double v : cost.values) {
        if (!std::isfinite(v) || v < 0)
            throw ValidationError("hungarian: cost entries must be finite and non-negative");
    }
    Assignment out;
    out.cost_matrix = cost;
    if (cost.rows == 0 || cost.cols == 0) return out;
    if (std::min(cost.rows, cost.cols) <= 10 && std::max(cost.rows, cost.cols) <= 32)
        out.matched_pairs = detail::assign_small_exact(cost);
    else
        out.matched_pairs = detail::assign_potentials(cost);
    return out;
}

}  // namespace veason
