// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "nnbarrier/control.hpp"
#include "nnbarrier/network.hpp"

namespace nnb {

struct SafetyEstimate {
    double p_hat = 0.0;
    long long samples = 0;
    double ci_half_width = 0.0;  // Wilson 99%, at the worst initial grid point
    double per_init_min = 0.0;   // worst grid point's safety rate
};

struct Trajectory {
    std::vector<Eigen::VectorXd> states;  // N+1 entries
    std::vector<Eigen::VectorXd> controls;  // N entries (empty vectors without policy)
    bool safe = false;
};

// Policy lookup needs the safe-set partition; zero control outside it.
struct PolicyContext {
    const ControlPolicy* policy = nullptr;
    const Partition* partition = nullptr;
};

// Rolls the closed loop N steps from x0; safe iff all N+1 states stay in the
// safe set. Deterministic per rng state.
Trajectory simulate(const ProblemSpec& spec, const PolicyContext& ctx, const Eigen::VectorXd& x0,
                    CounterRng rng);

struct EstimateOptions {
    long long samples = 10000;   // total trajectory budget M
    int init_grid = 3;           // grid points per axis over X_0 (corners included)
    int threads = 1;
    unsigned long long seed = 0;
};

// Runs M/|grid| trajectories from each initial grid point; the certificate
// lower-bounds the worst case, so auditing uses per_init_min. Trajectory t
// draws from substream t, making estimates independent of threading.
SafetyEstimate estimate_safety(const ProblemSpec& spec, const PolicyContext& ctx,
                               const EstimateOptions& opt);

// Wilson score interval half-width.
double wilson_half_width(double p_hat, long long n, double z = 2.5758293035489004);

struct SoundnessVerdict {
    bool pass = false;
    double margin = 0.0;  // per_init_min + 3*ci - P_s
};

// Certificates lower-bound the worst-case empirical rate up to noise:
// pass iff P_s <= per_init_min + 3 * ci_half_width.
SoundnessVerdict check_certificate_soundness(const BarrierCertificate& cert,
                                             const SafetyEstimate& estimate);

// Initial grid points of X_0: per-axis linspace including corners
// (grid = 1 degenerates to the center).
std::vector<Eigen::VectorXd> initial_grid(const Box& initial_set, int grid);

}  // namespace nnb
