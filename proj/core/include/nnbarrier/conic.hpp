// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nnb {

// Linear SDP in equality form over a product of PSD blocks:
//
//   minimize    <C, X>
//   subject to  <A_i, X> = b_i   (i = 0..rows-1)
//               X block-diagonal, each block PSD.
//
// Entries address the upper triangle (r <= c); an entry (r, c, v) stands for
// the symmetric pair, so its contribution to <A, X> is v*X(r,c) when r == c
// and 2*v*X(r,c) otherwise.
struct ConicEntry {
    int block;
    int r;
    int c;
    double v;
};

struct ConicRow {
    std::vector<ConicEntry> entries;
    double rhs = 0.0;
};

struct ConicProblem {
    std::vector<int> block_sizes;
    std::vector<ConicEntry> objective;
    std::vector<ConicRow> rows;

    int num_blocks() const { return static_cast<int>(block_sizes.size()); }
    int num_rows() const { return static_cast<int>(rows.size()); }

    // Documented sparse text form (see dump_format_notes in conic.cpp);
    // deterministic, byte-identical for identical problems.
    std::string dump() const;
};

enum class ConicStatus { Optimal, Infeasible, NumericalFailure };

const char* to_string(ConicStatus s);

struct ConicResult {
    ConicStatus status = ConicStatus::NumericalFailure;
    std::vector<Eigen::MatrixXd> X;  // primal blocks (valid when Optimal)
    Eigen::VectorXd y;               // equality duals
    double objective = 0.0;          // <C, X>
    int iterations = 0;
    double primal_residual = 0.0;    // max_i |<A_i,X> - b_i|
    double dual_residual = 0.0;
    double gap = 0.0;
    std::string message;
};

struct ConicSolveOptions {
    double tol_feas = 1e-8;
    double tol_gap = 1e-8;
    int max_iterations = 120;
    bool verbose = false;
};

class ConicSolverBackend {
public:
    virtual ~ConicSolverBackend() = default;
    virtual const char* name() const = 0;
    // Whether solve() itself spawns worker threads.
    virtual bool internally_parallel() const { return false; }
    virtual ConicResult solve(const ConicProblem& problem, const ConicSolveOptions& options) = 0;
};

// Reference backend: homogeneous self-dual interior-point method with HKM
// search directions and a Mehrotra predictor-corrector. Self-contained; no
// external solver needed.
class InteriorPointSolver final : public ConicSolverBackend {
public:
    const char* name() const override { return "reference-ipm"; }
    ConicResult solve(const ConicProblem& problem, const ConicSolveOptions& options) override;
};

}  // namespace nnb
