#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdsched {

enum class Relation { eq, le };

// min objective . x  subject to  rows (= or <=) and x >= 0.
struct LinearProgram {
    int variable_count = 0;
    std::vector<double> objective;
    struct Row {
        std::vector<double> coeffs;
        Relation rel = Relation::eq;
        double rhs = 0.0;
    };
    std::vector<Row> rows;
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpSolution {
    LpStatus status = LpStatus::optimal;
    double objective = 0.0;
    std::vector<double> x;       // primal values, one per variable
    std::vector<double> dual;    // one per row; objective == sum dual[i]*rhs[i] at optimum
    double duality_gap = 0.0;
    double max_primal_residual = 0.0;
    double max_dual_violation = 0.0;
    long long iterations = 0;
};

namespace detail {

// Gaussian elimination with partial pivoting; false when the matrix is
// numerically singular.
inline bool solve_dense(std::vector<std::vector<double>> a, std::vector<double> b,
                        std::vector<double>& out) {
    int n = static_cast<int>(a.size());
    double scale = 0.0;
    for (const auto& row : a)
        for (double v : row) scale = std::max(scale, std::abs(v));
    if (n == 0 || scale == 0.0) return false;
    for (int c = 0; c < n; ++c) {
        int p = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        if (std::abs(a[p][c]) < 1e-12 * scale) return false;
        std::swap(a[p], a[c]);
        std::swap(b[p], b[c]);
        for (int r = c + 1; r < n; ++r) {
            double f = a[r][c] / a[c][c];
            if (f == 0.0) continue;
            for (int k = c + 1; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    out.assign(n, 0.0);
    for (int c = n - 1; c >= 0; --c) {
        double v = b[c];
        for (int k = c + 1; k < n; ++k) v -= a[c][k] * out[k];
        out[c] = v / a[c][c];
    }
    return true;
}

}  // namespace detail

// Dense two-phase tableau simplex. Entering column by steepest reduced
// cost, switching to lowest-index selection after a run of degenerate
// pivots so cycling cannot occur. Every row carries an artificial column
// through both phases; those columns never re-enter the basis and their
// final reduced costs hand back the dual vector. The leaving-row scan
// only accepts pivots above a column-relative floor, rows reduced to
// roundoff noise in phase one are wiped, and the final basis is
// re-solved from the original data so the reported solution does not
// carry accumulated tableau drift.
inline LpSolution solve_simplex(const LinearProgram& lp, double tol = 1e-9) {
    int n = lp.variable_count;
    int m = static_cast<int>(lp.rows.size());
    if (static_cast<int>(lp.objective.size()) != n)
        throw std::invalid_argument("objective length != variable_count");
    for (const auto& row : lp.rows)
        if (static_cast<int>(row.coeffs.size()) != n)
            throw std::invalid_argument("row length != variable_count");

    int n_slack = 0;
    for (const auto& row : lp.rows)
        if (row.rel == Relation::le) ++n_slack;
    int slack_base = n;
    int art_base = n + n_slack;
    int total = art_base + m;
    int rhs_col = total;

    std::vector<std::vector<double>> T(m, std::vector<double>(total + 1, 0.0));
    std::vector<double> sign(m, 1.0);
    std::vector<int> basis(m, -1);
    std::vector<int> slack_row(n_slack, -1);
    {
        int next_slack = slack_base;
        for (int i = 0; i < m; ++i) {
            const auto& row = lp.rows[i];
            double s = row.rhs < 0.0 ? -1.0 : 1.0;
            sign[i] = s;
            for (int j = 0; j < n; ++j) T[i][j] = s * row.coeffs[j];
            T[i][rhs_col] = s * row.rhs;
            if (row.rel == Relation::le) {
                T[i][next_slack] = s;
                slack_row[next_slack - slack_base] = i;
                if (s > 0.0) basis[i] = next_slack;
                ++next_slack;
            }
            T[i][art_base + i] = 1.0;
            if (basis[i] < 0) basis[i] = art_base + i;
        }
    }

    LpSolution sol;
    long long iteration_cap = 10000 + 20LL * (m + total);

    auto pivot = [&](int r, int j) {
        double piv = T[r][j];
        for (int k = 0; k <= rhs_col; ++k) T[r][k] /= piv;
        T[r][j] = 1.0;
        for (int i = 0; i < m; ++i) {
            if (i == r || T[i][j] == 0.0) continue;
            double f = T[i][j];
            for (int k = 0; k <= rhs_col; ++k) T[i][k] -= f * T[r][k];
            T[i][j] = 0.0;
        }
        basis[r] = j;
    };

    // Runs pivots until cost (a row of reduced costs with the running
    // objective value negated in its rhs slot) has no entry below -tol.
    // Returns optimal, unbounded, or iteration_limit.
    auto iterate = [&](std::vector<double>& cost) -> LpStatus {
        int degenerate_streak = 0;
        while (true) {
            if (sol.iterations >= iteration_cap) return LpStatus::iteration_limit;
            bool bland = degenerate_streak >= 48;
            int enter = -1;
            double best = -tol;
            for (int j = 0; j < art_base; ++j) {
                if (cost[j] < best) {
                    best = cost[j];
                    enter = j;
                    if (bland) break;
                }
            }
            if (enter < 0) return LpStatus::optimal;

            double col_max = 0.0;
            for (int i = 0; i < m; ++i) col_max = std::max(col_max, std::abs(T[i][enter]));
            double pivot_floor = std::max(tol, 1e-7 * col_max);
            int leave = -1;
            double best_ratio = 0.0;
            for (int i = 0; i < m; ++i) {
                if (T[i][enter] <= pivot_floor) continue;
                double ratio = std::max(T[i][rhs_col], 0.0) / T[i][enter];
                if (leave < 0 || ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 && basis[i] < basis[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave < 0) return LpStatus::unbounded;
            degenerate_streak = best_ratio < 1e-10 ? degenerate_streak + 1 : 0;

            pivot(leave, enter);
            double f = cost[enter];
            if (f != 0.0) {
                for (int k = 0; k <= rhs_col; ++k) cost[k] -= f * T[leave][k];
                cost[enter] = 0.0;
            }
            ++sol.iterations;
        }
    };

    bool any_artificial_basic = false;
    for (int i = 0; i < m; ++i)
        if (basis[i] >= art_base) any_artificial_basic = true;
    if (any_artificial_basic) {
        std::vector<double> cost(total + 1, 0.0);
        for (int j = art_base; j < total; ++j) cost[j] = 1.0;
        for (int i = 0; i < m; ++i)
            if (basis[i] >= art_base)
                for (int k = 0; k <= rhs_col; ++k) cost[k] -= T[i][k];
        LpStatus st = iterate(cost);
        if (st == LpStatus::iteration_limit) {
            sol.status = st;
            return sol;
        }
        double infeasibility = -cost[rhs_col];
        if (infeasibility > 1e-7) {
            sol.status = LpStatus::infeasible;
            return sol;
        }
        for (int i = 0; i < m; ++i) {
            if (basis[i] < art_base) continue;
            int j_found = -1;
            for (int j = 0; j < art_base; ++j)
                if (std::abs(T[i][j]) > 1e-7) { j_found = j; break; }
            if (j_found >= 0) {
                pivot(i, j_found);
                continue;
            }
            // dependent combination: wipe the residue so later ratio tests
            // cannot pivot on it; the artificial stays basic at zero
            for (int k = 0; k <= rhs_col; ++k) T[i][k] = 0.0;
            T[i][basis[i]] = 1.0;
        }
    }

    std::vector<double> cost(total + 1, 0.0);
    for (int j = 0; j < n; ++j) cost[j] = lp.objective[j];
    for (int i = 0; i < m; ++i) {
        double f = cost[basis[i]];
        if (f == 0.0) continue;
        for (int k = 0; k <= rhs_col; ++k) cost[k] -= f * T[i][k];
        cost[basis[i]] = 0.0;
    }
    sol.status = iterate(cost);
    if (sol.status != LpStatus::optimal) return sol;

    std::vector<double> x_full(total, 0.0);
    for (int i = 0; i < m; ++i) {
        double v = T[i][rhs_col];
        x_full[basis[i]] = v < 0.0 ? 0.0 : v;
    }
    sol.dual.assign(m, 0.0);
    for (int i = 0; i < m; ++i) sol.dual[i] = sign[i] * -cost[art_base + i];

    // Re-solve the final basis against the original rows; the tableau
    // values only steer pivoting and are not reported.
    if (m > 0) {
        std::vector<std::vector<double>> bmat(m, std::vector<double>(m, 0.0));
        std::vector<std::vector<double>> bmat_t(m, std::vector<double>(m, 0.0));
        std::vector<double> rhs0(m, 0.0), cb(m, 0.0);
        for (int i = 0; i < m; ++i) rhs0[i] = lp.rows[i].rhs;
        for (int col = 0; col < m; ++col) {
            int b = basis[col];
            if (b < n) {
                for (int i = 0; i < m; ++i) bmat[i][col] = lp.rows[i].coeffs[b];
                cb[col] = lp.objective[b];
            } else if (b < art_base) {
                bmat[slack_row[b - slack_base]][col] = 1.0;
            } else {
                bmat[b - art_base][col] = sign[b - art_base];
            }
        }
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) bmat_t[j][i] = bmat[i][j];
        std::vector<double> xb, y;
        if (detail::solve_dense(bmat, rhs0, xb) && detail::solve_dense(bmat_t, cb, y)) {
            for (int i = 0; i < m; ++i) x_full[basis[i]] = xb[i] < 0.0 ? 0.0 : xb[i];
            sol.dual = y;
        }
    }
    sol.x.assign(x_full.begin(), x_full.begin() + n);

    sol.objective = 0.0;
    for (int j = 0; j < n; ++j) sol.objective += lp.objective[j] * sol.x[j];

    double dual_value = 0.0;
    for (int i = 0; i < m; ++i) dual_value += sol.dual[i] * lp.rows[i].rhs;
    sol.duality_gap = std::abs(sol.objective - dual_value);

    for (int i = 0; i < m; ++i) {
        const auto& row = lp.rows[i];
        double v = -row.rhs;
        for (int j = 0; j < n; ++j) v += row.coeffs[j] * sol.x[j];
        double r = row.rel == Relation::eq ? std::abs(v) : std::max(0.0, v);
        sol.max_primal_residual = std::max(sol.max_primal_residual, r);
        if (row.rel == Relation::le)
            sol.max_dual_violation = std::max(sol.max_dual_violation, sol.dual[i]);
    }
    for (int j = 0; j < n; ++j) {
        double v = -lp.objective[j];
        for (int i = 0; i < m; ++i) v += sol.dual[i] * lp.rows[i].coeffs[j];
        sol.max_dual_violation = std::max(sol.max_dual_violation, v);
    }
    return sol;
}

}  // namespace fdsched
