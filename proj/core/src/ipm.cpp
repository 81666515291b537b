// SPDX-License-Identifier: Apache-2.0
//
// Homogeneous self-dual interior-point method for block-diagonal SDPs.
//
// The embedding tracks (X, y, S, tau, kappa) with residuals
//   r_P = b tau - A(X),  R_D = C tau - A^T(y) - S,  r_G = <C,X> - b^T y + kappa,
// driving X S -> mu I and tau kappa -> mu with HKM directions and a Mehrotra
// predictor-corrector. At convergence either tau >> kappa (optimal point
// X/tau) or kappa >> tau (certificate: b^T y > 0 means primal infeasible,
// <C, X> < 0 means dual infeasible / unbounded).
//
// Each Newton step reduces to the Schur system
//   M dy - u dtau = g1,   (u - 2b)^T dy - d dtau = g2
// with M_ij = tr(A_i S^-1 A_j X), u = A(S^-1 C X) + b,
// d = <C, S^-1 C X> + kappa/tau; M is factored once per iteration and shared
// by the predictor and corrector solves.

#include "nnbarrier/conic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace nnb {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

using Blocks = std::vector<MatrixXd>;

// <A, (M + M^T)/2> for symmetric sparse A over one block.
double entry_dot_block(const std::vector<ConicEntry>& entries, const MatrixXd& M) {
    double s = 0.0;
    for (const auto& e : entries)
        s += e.r == e.c ? e.v * M(e.r, e.r) : e.v * (M(e.r, e.c) + M(e.c, e.r));
    return s;
}

// A_local * X for symmetric sparse A (dense result, not symmetric in general).
void sparse_sym_times_dense(const std::vector<ConicEntry>& entries, const MatrixXd& X,
                            MatrixXd& out) {
    out.setZero();
    for (const auto& e : entries) {
        out.row(e.r) += e.v * X.row(e.c);
        if (e.r != e.c) out.row(e.c) += e.v * X.row(e.r);
    }
}

// Largest alpha in (0, cap] keeping P + alpha dP PSD; P must be PD.
double psd_step_limit(const MatrixXd& P, const MatrixXd& dP, double cap) {
    if (P.rows() == 1) {
        const double d = dP(0, 0);
        if (d >= 0.0) return cap;
        return std::min(cap, -P(0, 0) / d);
    }
    Eigen::LLT<MatrixXd> llt(P);
    if (llt.info() != Eigen::Success) return 0.0;
    const MatrixXd L = llt.matrixL();
    MatrixXd G = L.triangularView<Eigen::Lower>().solve(dP);
    G = L.triangularView<Eigen::Lower>().solve(G.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (G + G.transpose()), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin >= 0.0) return cap;
    return std::min(cap, -1.0 / lmin);
}

// Projects X onto the affine subspace {<A_i, X> = b_i} by solving the
// (constant, usually well-conditioned) normal system G lambda = residual with
// G_ij = <A_i, A_j> and stepping along A*(lambda). The interior-point endgame
// leaves a residual floor set by the Schur conditioning; this removes it
// while perturbing eigenvalues by at most the residual scale.
void polish_primal(const ConicProblem& problem, std::vector<MatrixXd>& X) {
    const int p = problem.num_rows();
    if (p == 0) return;
    auto row_value = [&](int i) {
        double v = 0.0;
        for (const auto& e : problem.rows[static_cast<std::size_t>(i)].entries) {
            const MatrixXd& B = X[static_cast<std::size_t>(e.block)];
            v += e.r == e.c ? e.v * B(e.r, e.r) : 2.0 * e.v * B(e.r, e.c);
        }
        return v;
    };
    VectorXd r(p);
    for (int i = 0; i < p; ++i) r[i] = problem.rows[static_cast<std::size_t>(i)].rhs - row_value(i);
    const double before = r.cwiseAbs().maxCoeff();
    if (before == 0.0) return;

    MatrixXd G = MatrixXd::Zero(p, p);
    {
        // Group rows per block to keep the pairwise dots local.
        std::vector<std::vector<int>> rows_in_block(problem.block_sizes.size());
        std::vector<std::vector<std::vector<ConicEntry>>> entries_in_block(problem.block_sizes.size());
        for (int i = 0; i < p; ++i) {
            std::vector<std::vector<ConicEntry>> split(problem.block_sizes.size());
            for (const auto& e : problem.rows[static_cast<std::size_t>(i)].entries)
                split[static_cast<std::size_t>(e.block)].push_back(e);
            for (std::size_t k = 0; k < problem.block_sizes.size(); ++k) {
                if (split[k].empty()) continue;
                rows_in_block[k].push_back(i);
                entries_in_block[k].push_back(std::move(split[k]));
            }
        }
        for (std::size_t k = 0; k < problem.block_sizes.size(); ++k) {
            const int sz = problem.block_sizes[k];
            MatrixXd scratch = MatrixXd::Zero(sz, sz);
            for (std::size_t a = 0; a < rows_in_block[k].size(); ++a) {
                for (const auto& e : entries_in_block[k][a]) {
                    scratch(e.r, e.c) += e.v;
                    if (e.r != e.c) scratch(e.c, e.r) += e.v;
                }
                for (std::size_t b = 0; b <= a; ++b) {
                    double v = 0.0;
                    for (const auto& e : entries_in_block[k][b])
                        v += e.r == e.c ? e.v * scratch(e.r, e.r)
                                        : e.v * (scratch(e.r, e.c) + scratch(e.c, e.r));
                    G(rows_in_block[k][a], rows_in_block[k][b]) += v;
                    if (a != b) G(rows_in_block[k][b], rows_in_block[k][a]) += v;
                }
                for (const auto& e : entries_in_block[k][a]) {
                    scratch(e.r, e.c) = 0.0;
                    if (e.r != e.c) scratch(e.c, e.r) = 0.0;
                }
            }
        }
    }
    Eigen::LLT<MatrixXd> llt(G);
    if (llt.info() != Eigen::Success) {
        G.diagonal().array() += 1e-12 * std::max(1.0, G.diagonal().maxCoeff());
        llt.compute(G);
        if (llt.info() != Eigen::Success) return;
    }
    VectorXd lambda = llt.solve(r);
    lambda += llt.solve(r - G.selfadjointView<Eigen::Lower>() * lambda);

    std::vector<MatrixXd> Xnew = X;
    for (int i = 0; i < p; ++i) {
        if (lambda[i] == 0.0) continue;
        for (const auto& e : problem.rows[static_cast<std::size_t>(i)].entries) {
            MatrixXd& B = Xnew[static_cast<std::size_t>(e.block)];
            B(e.r, e.c) += lambda[i] * e.v;
            if (e.r != e.c) B(e.c, e.r) += lambda[i] * e.v;
        }
    }
    double after = 0.0;
    {
        std::vector<MatrixXd> saved = X;
        X = Xnew;
        for (int i = 0; i < p; ++i)
            after = std::max(after, std::abs(problem.rows[static_cast<std::size_t>(i)].rhs - row_value(i)));
        if (after >= before) X = saved;
    }
}

struct ScaledProblem {
    std::vector<int> block_sizes;
    std::vector<std::vector<ConicEntry>> rows;  // normalized by max |coeff|
    VectorXd b;                                 // normalized rhs, then b_scale applied
    std::vector<ConicEntry> objective;          // c_scale applied
    std::vector<int> live_rows;                 // original row index per kept row
    std::vector<double> row_scale;
    double b_scale = 1.0;
    double c_scale = 1.0;
};

struct NewtonDirection {
    Blocks dX, dS;
    VectorXd dy;
    double dtau = 0.0, dkappa = 0.0;
};

}  // namespace

ConicResult InteriorPointSolver::solve(const ConicProblem& problem, const ConicSolveOptions& opt) {
    const int K = problem.num_blocks();
    ConicResult result;
    result.y = VectorXd::Zero(problem.num_rows());

    // Row normalization; empty rows are dropped (contradictory ones decided here).
    ScaledProblem sp;
    sp.block_sizes = problem.block_sizes;
    for (int i = 0; i < problem.num_rows(); ++i) {
        const auto& row = problem.rows[static_cast<std::size_t>(i)];
        double mx = 0.0;
        for (const auto& e : row.entries) mx = std::max(mx, std::abs(e.v));
        if (mx == 0.0) {
            if (row.rhs != 0.0) {
                result.status = ConicStatus::Infeasible;
                result.message = "row " + std::to_string(i) + " has no coefficients but nonzero rhs";
                return result;
            }
            continue;
        }
        auto entries = row.entries;
        for (auto& e : entries) e.v /= mx;
        sp.rows.push_back(std::move(entries));
        sp.live_rows.push_back(i);
        sp.row_scale.push_back(mx);
        sp.b.conservativeResize(sp.b.size() + 1);
        sp.b[sp.b.size() - 1] = row.rhs / mx;
    }
    const int p = static_cast<int>(sp.rows.size());

    double c_norm = 0.0;
    for (const auto& e : problem.objective) c_norm = std::max(c_norm, std::abs(e.v));
    sp.c_scale = 1.0 / std::max(1.0, c_norm);
    sp.objective = problem.objective;
    for (auto& e : sp.objective) e.v *= sp.c_scale;

    sp.b_scale = 1.0 / std::max(1.0, p > 0 ? sp.b.cwiseAbs().maxCoeff() : 0.0);
    sp.b *= sp.b_scale;

    // Per-block lists: rows touching the block and objective entries in it.
    struct BlockRows {
        std::vector<int> row_index;
        std::vector<std::vector<ConicEntry>> entries;
    };
    std::vector<BlockRows> block_rows(static_cast<std::size_t>(K));
    std::vector<std::vector<ConicEntry>> block_obj(static_cast<std::size_t>(K));
    for (int i = 0; i < p; ++i) {
        std::vector<std::vector<ConicEntry>> split(static_cast<std::size_t>(K));
        for (const auto& e : sp.rows[static_cast<std::size_t>(i)])
            split[static_cast<std::size_t>(e.block)].push_back(e);
        for (int k = 0; k < K; ++k) {
            if (split[static_cast<std::size_t>(k)].empty()) continue;
            block_rows[static_cast<std::size_t>(k)].row_index.push_back(i);
            block_rows[static_cast<std::size_t>(k)].entries.push_back(
                std::move(split[static_cast<std::size_t>(k)]));
        }
    }
    for (const auto& e : sp.objective) block_obj[static_cast<std::size_t>(e.block)].push_back(e);

    // Iterates: identity start is perfectly centered for the embedding.
    Blocks X, S;
    double nu = 0.0;
    for (int k = 0; k < K; ++k) {
        const int sz = sp.block_sizes[static_cast<std::size_t>(k)];
        X.push_back(MatrixXd::Identity(sz, sz));
        S.push_back(MatrixXd::Identity(sz, sz));
        nu += sz;
    }
    VectorXd y = VectorXd::Zero(p);
    double tau = 1.0, kappa = 1.0;

    auto apply_A = [&](const Blocks& Mb) {
        VectorXd out = VectorXd::Zero(p);
        for (int k = 0; k < K; ++k) {
            const auto& br = block_rows[static_cast<std::size_t>(k)];
            for (std::size_t a = 0; a < br.row_index.size(); ++a)
                out[br.row_index[a]] += entry_dot_block(br.entries[a], Mb[static_cast<std::size_t>(k)]);
        }
        return out;
    };
    auto entry_dot_all = [&](const std::vector<ConicEntry>& entries, const Blocks& Mb) {
        double s = 0.0;
        for (const auto& e : entries) {
            const MatrixXd& B = Mb[static_cast<std::size_t>(e.block)];
            s += e.r == e.c ? e.v * B(e.r, e.r) : e.v * (B(e.r, e.c) + B(e.c, e.r));
        }
        return s;
    };
    auto zero_blocks = [&] {
        Blocks out;
        out.reserve(static_cast<std::size_t>(K));
        for (int k = 0; k < K; ++k) {
            const int sz = sp.block_sizes[static_cast<std::size_t>(k)];
            out.push_back(MatrixXd::Zero(sz, sz));
        }
        return out;
    };
    auto accumulate_AT = [&](const VectorXd& v, Blocks& out) {
        for (int k = 0; k < K; ++k) {
            const auto& br = block_rows[static_cast<std::size_t>(k)];
            MatrixXd& B = out[static_cast<std::size_t>(k)];
            for (std::size_t a = 0; a < br.row_index.size(); ++a) {
                const double w = v[br.row_index[a]];
                if (w == 0.0) continue;
                for (const auto& e : br.entries[a]) {
                    B(e.r, e.c) += w * e.v;
                    if (e.r != e.c) B(e.c, e.r) += w * e.v;
                }
            }
        }
    };
    auto inner_blocks = [&](const Blocks& A, const Blocks& B) {
        double s = 0.0;
        for (int k = 0; k < K; ++k)
            s += (A[static_cast<std::size_t>(k)].array() * B[static_cast<std::size_t>(k)].array()).sum();
        return s;
    };

    Blocks Sinv = zero_blocks(), RD = zero_blocks(), W = zero_blocks(), V = zero_blocks();
    MatrixXd M(p, p);
    Eigen::LLT<MatrixXd> M_llt;
    VectorXd r_P(p), u(p);
    double d_schur = 0.0, r_G = 0.0, cx = 0.0;

    // Best iterate seen, by worst optimality measure; the endgame can turn
    // numerically unstable, in which case we fall back to this snapshot.
    struct Snapshot {
        Blocks X, S;
        VectorXd y;
        double tau = 1.0, kappa = 1.0;
        double score = std::numeric_limits<double>::infinity();
        double dres = 0.0, gap = 0.0;
    } best;

    // The Schur complement is squared-conditioned; refinement with the
    // residual accumulated in extended precision recovers several digits in
    // the endgame.
    auto refine_residual = [&](const VectorXd& rhs, const VectorXd& sol) {
        const int n = static_cast<int>(rhs.size());
        VectorXd r(n);
        for (int i = 0; i < n; ++i) {
            long double acc = rhs[i];
            const double* Mi = M.data() + static_cast<std::ptrdiff_t>(i) * n;
            for (int j = 0; j < n; ++j) acc -= static_cast<long double>(Mi[j]) * sol[j];
            r[i] = static_cast<double>(acc);
        }
        return r;
    };
    auto solve_schur = [&](const VectorXd& rhs) {
        VectorXd sol = M_llt.solve(rhs);
        for (int pass = 0; pass < 3; ++pass) {
            const VectorXd r = refine_residual(rhs, sol);
            if (!r.allFinite() || r.cwiseAbs().maxCoeff() <= 1e-16 * (1.0 + rhs.cwiseAbs().maxCoeff()))
                break;
            sol += M_llt.solve(r);
        }
        return sol;
    };

    auto solve_newton = [&](double sigma_mu, const Blocks* corrX, double corr_tau,
                            NewtonDirection& dir) {
        for (int k = 0; k < K; ++k) {
            V[static_cast<std::size_t>(k)] =
                sigma_mu * Sinv[static_cast<std::size_t>(k)] - X[static_cast<std::size_t>(k)];
            if (corrX)
                V[static_cast<std::size_t>(k)].noalias() -=
                    Sinv[static_cast<std::size_t>(k)] * (*corrX)[static_cast<std::size_t>(k)];
        }
        const VectorXd g1 = r_P - apply_A(V) + apply_A(W);
        const double g2 = -r_G - entry_dot_all(sp.objective, V) + entry_dot_all(sp.objective, W) -
                          (sigma_mu - tau * kappa - corr_tau) / tau;
        VectorXd h1(p), h2(p);
        if (p > 0) {
            h1 = solve_schur(g1);
            h2 = solve_schur(u);
        }
        const VectorXd u2b = u - 2.0 * sp.b;
        const double denom = (p > 0 ? u2b.dot(h2) : 0.0) - d_schur;
        dir.dtau = (g2 - (p > 0 ? u2b.dot(h1) : 0.0)) / denom;
        dir.dy = p > 0 ? VectorXd(h1 + h2 * dir.dtau) : VectorXd();
        dir.dS = zero_blocks();
        for (const auto& e : sp.objective) {
            MatrixXd& B = dir.dS[static_cast<std::size_t>(e.block)];
            B(e.r, e.c) += dir.dtau * e.v;
            if (e.r != e.c) B(e.c, e.r) += dir.dtau * e.v;
        }
        accumulate_AT(-dir.dy, dir.dS);
        for (int k = 0; k < K; ++k) dir.dS[static_cast<std::size_t>(k)] += RD[static_cast<std::size_t>(k)];
        dir.dX = zero_blocks();
        for (int k = 0; k < K; ++k) {
            MatrixXd t = V[static_cast<std::size_t>(k)] -
                         Sinv[static_cast<std::size_t>(k)] *
                             (dir.dS[static_cast<std::size_t>(k)] * X[static_cast<std::size_t>(k)]);
            dir.dX[static_cast<std::size_t>(k)] = 0.5 * (t + t.transpose());
        }
        dir.dkappa = (sigma_mu - tau * kappa - corr_tau) / tau - (kappa / tau) * dir.dtau;
    };

    auto step_limit = [&](const NewtonDirection& dir) {
        double a = 1.0;
        for (int k = 0; k < K; ++k) {
            a = psd_step_limit(X[static_cast<std::size_t>(k)], dir.dX[static_cast<std::size_t>(k)], a);
            a = psd_step_limit(S[static_cast<std::size_t>(k)], dir.dS[static_cast<std::size_t>(k)], a);
        }
        if (dir.dtau < 0.0) a = std::min(a, -tau / dir.dtau);
        if (dir.dkappa < 0.0) a = std::min(a, -kappa / dir.dkappa);
        return a;
    };

    auto finalize_optimal = [&](const Blocks& Xf, const VectorXd& yf, double tauf, double dres,
                                double relgap) {
        result.X.clear();
        for (int k = 0; k < K; ++k)
            result.X.push_back(Xf[static_cast<std::size_t>(k)] / (tauf * sp.b_scale));
        result.y = VectorXd::Zero(problem.num_rows());
        for (int i = 0; i < p; ++i)
            result.y[sp.live_rows[static_cast<std::size_t>(i)]] =
                yf[i] / (tauf * sp.c_scale * sp.row_scale[static_cast<std::size_t>(i)]);
        polish_primal(problem, result.X);
        double obj = 0.0, pres = 0.0;
        for (const auto& e : problem.objective) {
            const MatrixXd& B = result.X[static_cast<std::size_t>(e.block)];
            obj += e.r == e.c ? e.v * B(e.r, e.r) : 2.0 * e.v * B(e.r, e.c);
        }
        for (const auto& row : problem.rows) {
            double v = -row.rhs;
            for (const auto& e : row.entries) {
                const MatrixXd& B = result.X[static_cast<std::size_t>(e.block)];
                v += e.r == e.c ? e.v * B(e.r, e.r) : 2.0 * e.v * B(e.r, e.c);
            }
            pres = std::max(pres, std::abs(v));
        }
        result.objective = obj;
        result.primal_residual = pres;
        result.dual_residual = dres;
        result.gap = relgap;
        result.status = ConicStatus::Optimal;
    };

    const double bnorm = p > 0 ? sp.b.cwiseAbs().maxCoeff() : 0.0;

    for (int iter = 0; iter <= opt.max_iterations; ++iter) {
        result.iterations = iter;
        const double mu = (inner_blocks(X, S) + tau * kappa) / (nu + 1.0);

        r_P = sp.b * tau - apply_A(X);
        RD = zero_blocks();
        for (const auto& e : sp.objective) {
            MatrixXd& B = RD[static_cast<std::size_t>(e.block)];
            B(e.r, e.c) += tau * e.v;
            if (e.r != e.c) B(e.c, e.r) += tau * e.v;
        }
        accumulate_AT(-y, RD);
        for (int k = 0; k < K; ++k) RD[static_cast<std::size_t>(k)] -= S[static_cast<std::size_t>(k)];
        cx = entry_dot_all(sp.objective, X);
        r_G = cx - sp.b.dot(y) + kappa;

        const double pobj = cx / tau;
        const double dobj = sp.b.dot(y) / tau;
        double pres = p > 0 ? (r_P / tau).cwiseAbs().maxCoeff() / (1.0 + bnorm) : 0.0;
        double dres = 0.0;
        for (int k = 0; k < K; ++k)
            dres = std::max(dres, RD[static_cast<std::size_t>(k)].cwiseAbs().maxCoeff() / tau);
        const double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

        if (opt.verbose)
            std::printf("ipm %3d mu=%9.2e tau=%8.2e kappa=%8.2e pres=%8.2e dres=%8.2e gap=%8.2e\n",
                        iter, mu, tau, kappa, pres, dres, relgap);

        if (pres <= opt.tol_feas && dres <= opt.tol_feas && relgap <= opt.tol_gap) {
            finalize_optimal(X, y, tau, dres, relgap);
            return result;
        }

        // The gap is down-weighted: primal feasibility is what the polish
        // step cannot recover beyond eigenvalue-safe perturbations.
        const double score = std::max({pres, dres, 0.1 * relgap});
        const bool plausibly_optimal = tau > 1e-4 * kappa;
        if (plausibly_optimal && score < best.score) {
            best.X = X;
            best.S = S;
            best.y = y;
            best.tau = tau;
            best.kappa = kappa;
            best.score = score;
            best.dres = dres;
            best.gap = relgap;
        }
        // Endgame instability: residuals climbing again while the best
        // iterate was already near-optimal. Return the snapshot.
        if (best.score < 1e-6 && score > 100.0 * best.score) {
            finalize_optimal(best.X, best.y, best.tau, best.dres, best.gap);
            result.message = "stopped at best iterate (endgame instability)";
            return result;
        }

        auto fallback = [&](const std::string& why) {
            if (best.score < 1e-5) {
                finalize_optimal(best.X, best.y, best.tau, best.dres, best.gap);
                result.message = why + "; returned best iterate";
                return true;
            }
            return false;
        };

        // With the iterate renormalized to tau = 1, infeasibility shows up as
        // kappa exploding relative to tau; (y, S)/kappa then carries the ray.
        if (tau <= 1e-12 || kappa >= 1e9 * tau) {
            const double by = sp.b.dot(y) / kappa;
            const double yscale = std::max(1.0, p > 0 ? y.cwiseAbs().maxCoeff() / kappa : 0.0);
            if (by > 1e-9 * yscale) {
                result.status = ConicStatus::Infeasible;
                result.message = "primal infeasible (dual ray with b'y > 0)";
            } else if (cx / kappa < -1e-9) {
                result.status = ConicStatus::NumericalFailure;
                result.message = "dual infeasible / primal unbounded ray";
            } else {
                if (fallback("tau/kappa collapsed without a clean certificate")) return result;
                result.status = ConicStatus::NumericalFailure;
                result.message = "tau/kappa collapsed without a clean certificate";
            }
            return result;
        }
        if (iter == opt.max_iterations) break;

        // Factor S blocks.
        bool ok = true;
        for (int k = 0; k < K; ++k) {
            MatrixXd& Sk = S[static_cast<std::size_t>(k)];
            if (Sk.rows() == 1) {
                if (Sk(0, 0) <= 0.0) { ok = false; break; }
                Sinv[static_cast<std::size_t>(k)] = MatrixXd::Constant(1, 1, 1.0 / Sk(0, 0));
                continue;
            }
            Eigen::LLT<MatrixXd> llt(Sk);
            if (llt.info() != Eigen::Success) { ok = false; break; }
            Sinv[static_cast<std::size_t>(k)] = llt.solve(MatrixXd::Identity(Sk.rows(), Sk.cols()));
        }
        if (!ok) {
            if (fallback("S lost positive definiteness")) return result;
            result.status = ConicStatus::NumericalFailure;
            result.message = "S lost positive definiteness";
            return result;
        }

        // Schur data: M, u = A(S^-1 C X) + b, d = <C, S^-1 C X> + kappa/tau,
        // and W = S^-1 R_D X reused by both Newton solves.
        if (p > 0) M.setZero(p, p);
        u = sp.b;
        d_schur = kappa / tau;
        MatrixXd tmp, Tj, TC;
        for (int k = 0; k < K; ++k) {
            const auto& br = block_rows[static_cast<std::size_t>(k)];
            const int sz = sp.block_sizes[static_cast<std::size_t>(k)];
            const MatrixXd& Xk = X[static_cast<std::size_t>(k)];
            const MatrixXd& Sik = Sinv[static_cast<std::size_t>(k)];
            tmp.resize(sz, sz);
            W[static_cast<std::size_t>(k)].noalias() =
                Sik * (RD[static_cast<std::size_t>(k)] * Xk);
            const bool has_obj = !block_obj[static_cast<std::size_t>(k)].empty();
            if (has_obj) {
                sparse_sym_times_dense(block_obj[static_cast<std::size_t>(k)], Xk, tmp);
                TC.noalias() = Sik * tmp;
                d_schur += entry_dot_block(block_obj[static_cast<std::size_t>(k)], TC);
            }
            for (std::size_t a = 0; a < br.row_index.size(); ++a) {
                sparse_sym_times_dense(br.entries[a], Xk, tmp);
                Tj.noalias() = Sik * tmp;
                const int i = br.row_index[a];
                for (std::size_t bb = 0; bb <= a; ++bb) {
                    const double v = entry_dot_block(br.entries[bb], Tj);
                    M(br.row_index[bb], i) += v;
                    if (br.row_index[bb] != i) M(i, br.row_index[bb]) += v;
                }
                if (has_obj) u[i] += entry_dot_block(br.entries[a], TC);
            }
        }
        if (p > 0) {
            M_llt.compute(M);
            if (M_llt.info() != Eigen::Success) {
                // Diagonal ridge: proportional to the largest diagonal entry.
                const double ridge = 1e-12 * std::max(1.0, M.diagonal().maxCoeff());
                M.diagonal().array() += ridge;
                M_llt.compute(M);
                if (M_llt.info() != Eigen::Success) {
                    if (fallback("Schur complement not positive definite")) return result;
                    result.status = ConicStatus::NumericalFailure;
                    result.message = "Schur complement not positive definite";
                    return result;
                }
            }
        }

        // Mehrotra predictor-corrector.
        NewtonDirection aff;
        solve_newton(0.0, nullptr, 0.0, aff);
        const double alpha_aff = step_limit(aff);
        double mu_aff = 0.0;
        for (int k = 0; k < K; ++k)
            mu_aff += ((X[static_cast<std::size_t>(k)] + alpha_aff * aff.dX[static_cast<std::size_t>(k)]).array() *
                       (S[static_cast<std::size_t>(k)] + alpha_aff * aff.dS[static_cast<std::size_t>(k)]).array())
                          .sum();
        mu_aff += (tau + alpha_aff * aff.dtau) * (kappa + alpha_aff * aff.dkappa);
        mu_aff /= (nu + 1.0);
        double sigma = std::pow(std::max(0.0, mu_aff / mu), 3.0);
        sigma = std::clamp(sigma, 1e-10, 1.0);

        // Second-order term of the S-side linearization: (S+dS)(X+dX) keeps
        // the dS * dX product.
        Blocks corrX = zero_blocks();
        for (int k = 0; k < K; ++k)
            corrX[static_cast<std::size_t>(k)].noalias() =
                aff.dS[static_cast<std::size_t>(k)] * aff.dX[static_cast<std::size_t>(k)];
        NewtonDirection dir;
        solve_newton(sigma * mu, &corrX, aff.dtau * aff.dkappa, dir);

        if (opt.verbose) {
            // Direction diagnostics: residuals of the linear Newton equations.
            const VectorXd peq = apply_A(dir.dX) - sp.b * dir.dtau - r_P;
            double deq = 0.0;
            Blocks dtest = zero_blocks();
            for (const auto& e : sp.objective) {
                MatrixXd& Bm = dtest[static_cast<std::size_t>(e.block)];
                Bm(e.r, e.c) += dir.dtau * e.v;
                if (e.r != e.c) Bm(e.c, e.r) += dir.dtau * e.v;
            }
            accumulate_AT(-dir.dy, dtest);
            for (int k = 0; k < K; ++k) {
                dtest[static_cast<std::size_t>(k)] -= dir.dS[static_cast<std::size_t>(k)];
                dtest[static_cast<std::size_t>(k)] += RD[static_cast<std::size_t>(k)];
                deq = std::max(deq, dtest[static_cast<std::size_t>(k)].cwiseAbs().maxCoeff());
            }
            std::printf("      dir: |A(dX)-b dtau + rP|=%8.2e |dual eq|=%8.2e\n",
                        peq.size() ? peq.cwiseAbs().maxCoeff() : 0.0, deq);
        }

        double alpha = 0.98 * step_limit(dir);
        alpha = std::min(alpha, 1.0);
        if (!(alpha > 1e-14)) {
            if (fallback("step length collapsed")) return result;
            result.status = ConicStatus::NumericalFailure;
            result.message = "step length collapsed";
            return result;
        }

        for (int k = 0; k < K; ++k) {
            X[static_cast<std::size_t>(k)] += alpha * dir.dX[static_cast<std::size_t>(k)];
            S[static_cast<std::size_t>(k)] += alpha * dir.dS[static_cast<std::size_t>(k)];
        }
        y += alpha * dir.dy;
        tau += alpha * dir.dtau;
        kappa += alpha * dir.dkappa;

        // The embedding is homogeneous of degree 1, so the iterate can be
        // renormalized to tau = 1. This keeps the complementarity scale
        // aligned with the optimality measures and avoids a deep endgame.
        if (tau > 0.0 && std::abs(tau - 1.0) > 1e-12) {
            const double s = 1.0 / tau;
            for (int k = 0; k < K; ++k) {
                X[static_cast<std::size_t>(k)] *= s;
                S[static_cast<std::size_t>(k)] *= s;
            }
            y *= s;
            kappa *= s;
            tau = 1.0;
        }
    }

    if (best.score < 1e-5) {
        finalize_optimal(best.X, best.y, best.tau, best.dres, best.gap);
        result.message = "iteration limit reached; returned best iterate";
        return result;
    }
    result.status = ConicStatus::NumericalFailure;
    result.message = "iteration limit reached";
    return result;
}

}  // namespace nnb
