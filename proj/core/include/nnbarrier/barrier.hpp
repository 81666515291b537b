// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>

#include "nnbarrier/network.hpp"
#include "nnbarrier/relax.hpp"
#include "nnbarrier/sos.hpp"

namespace nnb {

// Certified artifact: nonnegative polynomial B with
//   B <= eta on the initial set, B >= 1 on the unsafe complement,
//   E[B(next)|x] <= B(x) + beta on every region,
// yielding P_s >= 1 - (eta + beta N).
struct BarrierCertificate {
    Polynomial B{0};
    double eta = 1.0;
    double beta = 1.0;
    double alpha = 1.0;  // fixed
    std::map<std::size_t, double> per_region_beta;
    int horizon = 0;
    double p_s = 0.0;
    BoundMode mode = BoundMode::Linear;

    // Solver diagnostics. solver_beta/solver_eta are the values of the
    // monolithic SOS solve, before any per-region re-evaluation tightens beta.
    double solver_eta = 1.0;
    double solver_beta = 1.0;
    int sos_iterations = 0;
    double eq_residual = 0.0;
    double min_gram_eig = 0.0;
    double sample_audit_min = 0.0;  // min sampled value over asserted constraints

    void recompute_probability() ;
};

// Rejects barrier degrees < 2 and odd degrees: a linear candidate satisfies
// the conditions only as the constant 1, which certifies nothing.
void lemma1_guard(int degree);

// clamp(1 - (eta + beta*N), 0, 1).
double safety_probability(double eta, double beta, int horizon);

// Regions with beta_q above (1 - delta_s - eta)/N need a controller;
// a negative threshold flags every region.
double beta_threshold(double delta_s, double eta, int horizon);

struct SynthesisOptions {
    // Algorithm-1 path: bounds eta above and switches the objective to
    // minimizing beta alone.
    std::optional<double> eta_cap;
    // Additionally certifies w^T Hess(B)(x) w SOS over (x, w), making the
    // barrier convex by construction (the controller's minimizer argument
    // then holds globally). Off by default: SOS membership alone does not
    // imply convexity, and the minimizer search does not assume it.
    bool enforce_sos_convexity = false;
    SosSolveOptions sos;
    int audit_samples = 128;  // per constraint, 0 disables
    unsigned long long audit_seed = 0;
};

// Builds and solves the monolithic SOS program coupling all regions through
// shared B, eta, beta. Throws SolveError on infeasible/failed solves.
BarrierCertificate synthesize(const ProblemSpec& spec, const Partition& partition,
                              const std::vector<LinearEnvelope>& envelopes, BoundMode mode,
                              ConicSolverBackend& backend, const SynthesisOptions& opt = {});

// Smallest beta_q satisfying the region-q martingale constraint with B
// fixed (only multipliers and beta_q free). control_shift = g*u offsets the
// envelope. Infeasible solves return the conservative cap 1.0 and set
// *infeasible when provided.
double eval_beta_region(const Polynomial& B, const Box& region, const LinearEnvelope& envelope,
                        const GaussianNoise& noise, BoundMode mode, ConicSolverBackend& backend,
                        const std::optional<Eigen::VectorXd>& control_shift = std::nullopt,
                        const SosSolveOptions& opt = {}, bool* infeasible = nullptr);

// Smallest eta with B <= eta certified on the initial set, B fixed.
// Returns 1.0 when the solve fails.
double eval_eta_initial(const Polynomial& B, const Box& initial_set,
                        ConicSolverBackend& backend, const SosSolveOptions& opt = {});

// Tightens the certificate with B fixed: re-solves eta on the initial set,
// fills per_region_beta (each capped by the monolithic beta, which is a
// valid per-region compensation), sets beta = max_q beta_q and refreshes
// p_s. The monolithic solve returns an interior point whose scalars carry
// the remaining duality gap; these small re-solves remove it. Region
// evaluations are independent; threads > 1 fans them out.
void populate_region_betas(BarrierCertificate& cert, const ProblemSpec& spec,
                           const Partition& partition,
                           const std::vector<LinearEnvelope>& envelopes,
                           ConicSolverBackend& backend, int threads = 1,
                           const SosSolveOptions& opt = {});

// Sampling audit of the barrier conditions (not of the SOS certificates):
// B >= -tol on the state space, B <= eta + tol on the initial set,
// B >= 1 - tol on every unsafe slab within an inflated shell, and
// E[B(y+v)] - B(x) <= beta + tol on region samples with y inside the
// envelope band at x.
struct AuditReport {
    bool pass = false;
    double min_B_state = 0.0;
    double max_init_excess = 0.0;   // max B - eta on X_0
    double min_unsafe_value = 0.0;  // min B over slab shell
    double max_martingale_excess = 0.0;  // max E[B]-B-beta over regions
    std::string detail;
};

struct AuditOptions {
    int state_samples = 100000;
    int region_pairs = 1000;
    double tolerance = 1e-6;
    double shell_inflation = 1.0;  // widens the state box per axis (absolute)
    unsigned long long seed = 0;
};

AuditReport audit_certificate(const BarrierCertificate& cert, const ProblemSpec& spec,
                              const Partition& partition,
                              const std::vector<LinearEnvelope>& envelopes,
                              const std::map<std::size_t, Eigen::VectorXd>* control_shifts = nullptr,
                              const AuditOptions& opt = {});

}  // namespace nnb
