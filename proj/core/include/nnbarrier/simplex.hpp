// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace nnb {

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus s);

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Eigen::VectorXd x;
    double objective = 0.0;  // in the caller's (minimization) sense
};

enum class LpRelation { Le, Ge, Eq };

// Small dense LP: minimize c^T x with box-bounded variables and linear
// constraints. Internally lowered to "maximize c'^T z, A z <= b, z >= 0"
// and solved by a two-phase tableau simplex with pair-wise (Bland-style)
// tie-breaking. Intended for problems with tens of variables.
class LinearProgram {
public:
    using Terms = std::vector<std::pair<int, double>>;

    // Bounds may be -+infinity.
    int add_variable(double lo, double hi);
    void add_constraint(const Terms& terms, LpRelation rel, double rhs);
    void set_objective(const Terms& terms);  // minimized

    int num_variables() const { return static_cast<int>(lo_.size()); }

    LpResult solve() const;

private:
    std::vector<double> lo_, hi_;
    struct Row {
        Terms terms;
        LpRelation rel;
        double rhs;
    };
    std::vector<Row> rows_;
    Terms objective_;
};

}  // namespace nnb
