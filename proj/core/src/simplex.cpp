// SPDX-License-Identifier: Apache-2.0
#include "nnbarrier/simplex.hpp"

#include <cmath>
#include <limits>

#include "nnbarrier/error.hpp"

namespace nnb {

const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        default: return "unbounded";
    }
}

namespace {

constexpr double kEps = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Tableau simplex for: maximize c^T z subject to A z <= b, z >= 0.
// Returns the objective, -inf if infeasible, +inf if unbounded.
struct Tableau {
    int m, n;
    std::vector<int> N, B;
    std::vector<std::vector<double>> D;

    Tableau(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
            const std::vector<double>& c)
        : m(static_cast<int>(b.size())), n(static_cast<int>(c.size())), N(n + 1), B(m),
          D(m + 2, std::vector<double>(n + 2)) {
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) D[i][j] = A[i][j];
            B[i] = n + i;
            D[i][n] = -1.0;
            D[i][n + 1] = b[i];
        }
        for (int j = 0; j < n; ++j) {
            N[j] = j;
            D[m][j] = -c[j];
        }
        N[n] = -1;
        D[m + 1][n] = 1.0;
    }

    void pivot(int r, int s) {
        double* a = D[r].data();
        const double inv = 1.0 / a[s];
        for (int i = 0; i < m + 2; ++i) {
            if (i != r && std::abs(D[i][s]) > kEps) {
                double* bi = D[i].data();
                const double inv2 = bi[s] * inv;
                for (int j = 0; j < n + 2; ++j) bi[j] -= a[j] * inv2;
                bi[s] = a[s] * inv2;
            }
        }
        for (int j = 0; j < n + 2; ++j)
            if (j != s) D[r][j] *= inv;
        for (int i = 0; i < m + 2; ++i)
            if (i != r) D[i][s] *= -inv;
        D[r][s] = inv;
        std::swap(B[r], N[s]);
    }

    bool run(int phase) {
        const int x = m + phase - 1;
        for (;;) {
            int s = -1;
            for (int j = 0; j < n + 1; ++j) {
                if (N[j] == -phase) continue;
                if (s == -1 || std::make_pair(D[x][j], N[j]) < std::make_pair(D[x][s], N[s])) s = j;
            }
            if (D[x][s] >= -kEps) return true;
            int r = -1;
            for (int i = 0; i < m; ++i) {
                if (D[i][s] <= kEps) continue;
                if (r == -1 || std::make_pair(D[i][n + 1] / D[i][s], B[i]) <
                                   std::make_pair(D[r][n + 1] / D[r][s], B[r]))
                    r = i;
            }
            if (r == -1) return false;
            pivot(r, s);
        }
    }

    double solve(std::vector<double>& x) {
        int r = 0;
        for (int i = 1; i < m; ++i)
            if (D[i][n + 1] < D[r][n + 1]) r = i;
        if (D[r][n + 1] < -kEps) {
            pivot(r, n);
            if (!run(2) || D[m + 1][n + 1] < -kEps) return -kInf;
            for (int i = 0; i < m; ++i) {
                if (B[i] != -1) continue;
                int s = 0;
                for (int j = 1; j <= n; ++j)
                    if (std::make_pair(D[i][j], N[j]) < std::make_pair(D[i][s], N[s])) s = j;
                pivot(i, s);
            }
        }
        const bool ok = run(1);
        x.assign(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < m; ++i)
            if (B[i] < n) x[static_cast<std::size_t>(B[i])] = D[i][n + 1];
        return ok ? D[m][n + 1] : kInf;
    }
};

}  // namespace

int LinearProgram::add_variable(double lo, double hi) {
    if (lo > hi) throw ValidationError("lp_variable", "bounds reversed");
    lo_.push_back(lo);
    hi_.push_back(hi);
    return static_cast<int>(lo_.size()) - 1;
}

void LinearProgram::add_constraint(const Terms& terms, LpRelation rel, double rhs) {
    for (const auto& [v, c] : terms)
        if (v < 0 || v >= num_variables()) throw DimensionError("lp constraint references unknown variable");
    rows_.push_back({terms, rel, rhs});
}

void LinearProgram::set_objective(const Terms& terms) {
    for (const auto& [v, c] : terms)
        if (v < 0 || v >= num_variables()) throw DimensionError("lp objective references unknown variable");
    objective_ = terms;
}

LpResult LinearProgram::solve() const {
    const int nv = num_variables();
    // Lowering: finite lower bound shifts (x = lo + z, z >= 0); a free-below
    // variable splits into z+ - z-. Finite upper bounds become rows.
    std::vector<int> pos_col(static_cast<std::size_t>(nv)), neg_col(static_cast<std::size_t>(nv), -1);
    std::vector<double> shift(static_cast<std::size_t>(nv), 0.0);
    int cols = 0;
    for (int v = 0; v < nv; ++v) {
        if (std::isfinite(lo_[static_cast<std::size_t>(v)])) {
            shift[static_cast<std::size_t>(v)] = lo_[static_cast<std::size_t>(v)];
            pos_col[static_cast<std::size_t>(v)] = cols++;
        } else {
            pos_col[static_cast<std::size_t>(v)] = cols++;
            neg_col[static_cast<std::size_t>(v)] = cols++;
        }
    }

    std::vector<std::vector<double>> A;
    std::vector<double> b;
    auto add_le_row = [&](const Terms& terms, double rhs) {
        std::vector<double> row(static_cast<std::size_t>(cols), 0.0);
        double r = rhs;
        for (const auto& [v, c] : terms) {
            row[static_cast<std::size_t>(pos_col[static_cast<std::size_t>(v)])] += c;
            if (neg_col[static_cast<std::size_t>(v)] >= 0)
                row[static_cast<std::size_t>(neg_col[static_cast<std::size_t>(v)])] -= c;
            r -= c * shift[static_cast<std::size_t>(v)];
        }
        A.push_back(std::move(row));
        b.push_back(r);
    };

    for (const auto& row : rows_) {
        if (row.rel != LpRelation::Ge) add_le_row(row.terms, row.rhs);
        if (row.rel != LpRelation::Le) {
            Terms neg = row.terms;
            for (auto& [v, c] : neg) c = -c;
            add_le_row(neg, -row.rhs);
        }
    }
    for (int v = 0; v < nv; ++v) {
        if (!std::isfinite(hi_[static_cast<std::size_t>(v)])) continue;
        add_le_row({{v, 1.0}}, hi_[static_cast<std::size_t>(v)]);
    }

    std::vector<double> c(static_cast<std::size_t>(cols), 0.0);
    double obj_shift = 0.0;
    for (const auto& [v, w] : objective_) {
        // minimize w*x == maximize -w*z (per component)
        c[static_cast<std::size_t>(pos_col[static_cast<std::size_t>(v)])] -= w;
        if (neg_col[static_cast<std::size_t>(v)] >= 0)
            c[static_cast<std::size_t>(neg_col[static_cast<std::size_t>(v)])] += w;
        obj_shift += w * shift[static_cast<std::size_t>(v)];
    }

    Tableau tab(A, b, c);
    std::vector<double> z;
    const double val = tab.solve(z);

    LpResult out;
    if (val == -kInf) {
        out.status = LpStatus::Infeasible;
        return out;
    }
    if (val == kInf) {
        out.status = LpStatus::Unbounded;
        return out;
    }
    out.status = LpStatus::Optimal;
    out.x.resize(nv);
    for (int v = 0; v < nv; ++v) {
        double xv = shift[static_cast<std::size_t>(v)] +
                    z[static_cast<std::size_t>(pos_col[static_cast<std::size_t>(v)])];
        if (neg_col[static_cast<std::size_t>(v)] >= 0)
            xv -= z[static_cast<std::size_t>(neg_col[static_cast<std::size_t>(v)])];
        // Clip roundoff against the declared box.
        xv = std::min(std::max(xv, lo_[static_cast<std::size_t>(v)]), hi_[static_cast<std::size_t>(v)]);
        out.x[v] = xv;
    }
    out.objective = -val + obj_shift;
    return out;
}

}  // namespace nnb
