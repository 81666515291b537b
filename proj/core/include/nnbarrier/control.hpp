// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>

#include "nnbarrier/barrier.hpp"
#include "nnbarrier/simplex.hpp"

namespace nnb {

// Per-region constant controls; regions without an entry apply zero control.
// Exactly-zero optimal controls are not stored, so entries == Q_pi.
struct ControlPolicy {
    std::map<std::size_t, Eigen::VectorXd> entries;

    std::optional<Eigen::VectorXd> lookup(std::size_t region) const {
        auto it = entries.find(region);
        if (it == entries.end()) return std::nullopt;
        return it->second;
    }
};

struct BarrierMin {
    Eigen::VectorXd x_star;
    double value = 0.0;
    int restarts_agreeing = 0;
};

struct BarrierMinOptions {
    int restarts = 32;
    int max_iterations = 500;
    double grad_tolerance = 1e-10;
    double agree_tolerance = 1e-6;
    unsigned long long seed = 0;
};

// Multi-start projected gradient descent with backtracking line search;
// starts are a corner subsample plus Latin-hypercube interior points.
BarrierMin find_barrier_min(const Polynomial& B, const Box& domain,
                            const BarrierMinOptions& opt = {});

enum class ControlLpMode {
    // z is an existential decision variable inside the region.
    Existential,
    // Worst case over the region's vertices (robust variant).
    RobustVertices,
};

// L1-closest reachable point to x_star:
//   min sum theta  s.t.  |y - x_star| <= theta,
//                        f_low(z) + g u <= y <= f_up(z) + g u,
//                        z in q, u in U.
// The returned control is polished by a second LP minimizing ||u||_1 among
// optimal solutions, then clipped to U.
struct ControlLpResult {
    Eigen::VectorXd u;
    double objective = 0.0;
};

ControlLpResult synthesize_control_lp(const Eigen::VectorXd& x_star, const Box& region,
                                      const LinearEnvelope& envelope, const Eigen::MatrixXd& g,
                                      const Eigen::VectorXd& u_lower, const Eigen::VectorXd& u_upper,
                                      ControlLpMode mode = ControlLpMode::Existential);

struct SynthesisRun {
    ControlPolicy policy;
    BarrierCertificate certificate;
    double p_s_before = 0.0;
    double p_s_after = 0.0;
    int iterations = 0;       // re-synthesis rounds actually executed
    int lp_solves = 0;
    bool threshold_reached = false;
    double sos_seconds = 0.0;       // monolithic synthesis solves
    double beta_eval_seconds = 0.0; // per-region beta re-evaluations
    double lp_seconds = 0.0;        // control LPs and minimizer searches
};

struct Algorithm1Options {
    SynthesisOptions synthesis;
    SosSolveOptions region_sos;
    ControlLpMode lp_mode = ControlLpMode::Existential;
    BarrierMinOptions barrier_min;
    int threads = 1;
};

// Iterative controller synthesis: certify; while below threshold, tighten
// the cap on eta, re-synthesize minimizing beta, install LP controls on
// regions whose beta_q exceeds the threshold, and re-evaluate their beta_q
// under the control shift. The eta cap starts at 1 - delta_s and shrinks by
// eta_step per round, so the loop runs at most
// ceil((1 - delta_s)/eta_step) + 1 times.
SynthesisRun run_algorithm1(const ProblemSpec& spec, const Partition& partition,
                            const std::vector<LinearEnvelope>& envelopes, BoundMode mode,
                            ConicSolverBackend& backend, const Algorithm1Options& opt = {});

// |Q_pi| / |Q|.
double controlled_fraction(const ControlPolicy& policy, const Partition& partition);

}  // namespace nnb
