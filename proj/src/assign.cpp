#include "lrpopt/assign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lrpopt {

namespace {

/// Shortest augmenting path Hungarian method on a square matrix. Returns the
/// row assigned to each column plus feasible dual potentials.
struct SquareSolution {
    std::vector<std::size_t> row_of_col;
    std::vector<double> u;
    std::vector<double> v;
};

SquareSolution solve_square(const Eigen::MatrixXd& a)
{
    const auto n = static_cast<std::size_t>(a.rows());
    constexpr double inf = std::numeric_limits<double>::infinity();
    // 1-based with a virtual column 0, following the classic formulation.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) {
                    continue;
                }
                const double cur = a(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
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
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    SquareSolution s;
    s.row_of_col.resize(n);
    s.u.resize(n);
    s.v.resize(n);
    for (std::size_t j = 1; j <= n; ++j) {
        s.row_of_col[j - 1] = p[j] - 1;
        s.v[j - 1] = v[j];
    }
    for (std::size_t i = 1; i <= n; ++i) {
        s.u[i - 1] = u[i];
    }
    return s;
}

}  // namespace

std::vector<std::size_t> hungarian(const Eigen::MatrixXd& cost)
{
    const auto rows = static_cast<std::size_t>(cost.rows());
    const auto cols = static_cast<std::size_t>(cost.cols());
    if (rows == 0 || cols == 0) {
        throw Error("assignment needs a non-empty cost matrix");
    }
    if (rows > cols) {
        throw Error("assignment needs at most as many rows as columns");
    }
    if (!cost.allFinite()) {
        throw Error("assignment costs must be finite");
    }

    // Zero-cost dummy rows make the problem square.
    const std::size_t n = cols;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    a.topRows(static_cast<Eigen::Index>(rows)) = cost;
    const auto sol = solve_square(a);

    std::vector<std::size_t> col_of_row(n);
    std::vector<std::size_t> row_of_col = sol.row_of_col;
    for (std::size_t j = 0; j < n; ++j) {
        col_of_row[row_of_col[j]] = j;
    }

    // Every perfect matching on tight edges is optimal. Fix rows in order to
    // their smallest tight column that still admits a completion.
    const double tol = 1e-9 * (1.0 + a.cwiseAbs().maxCoeff());
    auto tight = [&](std::size_t i, std::size_t j) {
        return a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - sol.u[i] - sol.v[j] <= tol;
    };
    std::vector<char> fixed_col(n, 0);
    std::vector<char> visited(n);
    std::vector<std::size_t> path_cols;

    // Depth-first alternating path from `row` to `target` avoiding fixed and
    // forbidden columns; on success the path is recorded in path_cols.
    auto find_path = [&](auto&& self, std::size_t row, std::size_t target, std::size_t forbidden) -> bool {
        for (std::size_t j = 0; j < n; ++j) {
            if (visited[j] || fixed_col[j] || j == forbidden || !tight(row, j)) {
                continue;
            }
            visited[j] = 1;
            path_cols.push_back(j);
            if (j == target || self(self, row_of_col[j], target, forbidden)) {
                return true;
            }
            path_cols.pop_back();
        }
        return false;
    };

    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (fixed_col[j] || !tight(i, j)) {
                continue;
            }
            if (col_of_row[i] == j) {
                break;
            }
            // Give j to row i; its former owner must reach i's old column.
            const std::size_t owner = row_of_col[j];
            const std::size_t freed = col_of_row[i];
            std::fill(visited.begin(), visited.end(), 0);
            path_cols.clear();
            if (!find_path(find_path, owner, freed, j)) {
                continue;
            }
            std::size_t r = owner;
            for (const auto c : path_cols) {
                const std::size_t next_r = row_of_col[c];
                row_of_col[c] = r;
                col_of_row[r] = c;
                r = next_r;
            }
            row_of_col[j] = i;
            col_of_row[i] = j;
            break;
        }
        fixed_col[col_of_row[i]] = 1;
    }

    return {col_of_row.begin(), col_of_row.begin() + static_cast<std::ptrdiff_t>(rows)};
}

double assignment_cost(const Eigen::MatrixXd& cost, const std::vector<std::size_t>& assignment)
{
    double total = 0.0;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        total += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(assignment[i]));
    }
    return total;
}

std::vector<Vec2> align_leader(const Placement& particle, const Placement& leader, bool type_constrained)
{
    std::vector<Vec2> aligned(particle.size());
    for (std::size_t i = 0; i < particle.size(); ++i) {
        aligned[i] = particle[i].position.xy();
    }
    const std::vector<int> labels = type_constrained ? std::vector<int>{0, 1} : std::vector<int>{-1};
    for (const int label : labels) {
        std::vector<std::size_t> prow;
        std::vector<std::size_t> lcol;
        for (std::size_t i = 0; i < particle.size(); ++i) {
            if (label < 0 || particle[i].type.label == label) prow.push_back(i);
        }
        for (std::size_t k = 0; k < leader.size(); ++k) {
            if (label < 0 || leader[k].type.label == label) lcol.push_back(k);
        }
        if (prow.empty() || lcol.empty()) {
            continue;
        }
        const bool wide = prow.size() <= lcol.size();
        const auto& rows = wide ? prow : lcol;
        const auto& cols = wide ? lcol : prow;
        const Placement& row_pl = wide ? particle : leader;
        const Placement& col_pl = wide ? leader : particle;
        Eigen::MatrixXd cost(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (std::size_t c = 0; c < cols.size(); ++c) {
                cost(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    (row_pl[rows[r]].position.xy() - col_pl[cols[c]].position.xy()).squared_norm();
            }
        }
        const auto match = hungarian(cost);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const std::size_t p = wide ? rows[r] : cols[match[r]];
            const std::size_t l = wide ? cols[match[r]] : rows[r];
            aligned[p] = leader[l].position.xy();
        }
    }
    return aligned;
}

}  // namespace lrpopt
