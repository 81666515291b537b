// SPDX-License-Identifier: Apache-2.0
#include "nnbarrier/sim.hpp"

#include <cmath>
#include <thread>

namespace nnb {

Trajectory simulate(const ProblemSpec& spec, const PolicyContext& ctx, const Eigen::VectorXd& x0,
                    CounterRng rng) {
    if (!spec.initial_set.contains(x0))
        throw ValidationError("x0", "initial state outside the initial set");
    Trajectory traj;
    traj.states.push_back(x0);
    traj.safe = spec.safe_set.contains(x0);
    Eigen::VectorXd x = x0;
    for (int k = 0; k < spec.horizon; ++k) {
        std::optional<Eigen::VectorXd> u;
        if (ctx.policy && ctx.partition && spec.control) {
            const auto region = ctx.partition->locate(x);
            if (region) {
                if (auto uq = ctx.policy->lookup(*region)) u = *uq;
            }
            // Outside the partitioned safe set the trajectory is already
            // unsafe; zero control is applied.
        }
        x = step_sample(spec, x, u, rng);
        traj.states.push_back(x);
        traj.controls.push_back(u ? *u : Eigen::VectorXd());
        if (!spec.safe_set.contains(x)) traj.safe = false;
    }
    return traj;
}

std::vector<Eigen::VectorXd> initial_grid(const Box& initial_set, int grid) {
    const int n = initial_set.dim();
    if (grid < 1) throw ValidationError("init_grid", "must be >= 1");
    std::vector<std::vector<double>> axes(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& axis = axes[static_cast<std::size_t>(i)];
        if (grid == 1 || initial_set.upper[i] == initial_set.lower[i]) {
            axis.push_back(0.5 * (initial_set.lower[i] + initial_set.upper[i]));
        } else {
            for (int k = 0; k < grid; ++k)
                axis.push_back(initial_set.lower[i] +
                               (initial_set.upper[i] - initial_set.lower[i]) * k / (grid - 1));
        }
    }
    std::vector<Eigen::VectorXd> points;
    std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
    for (;;) {
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x[i] = axes[static_cast<std::size_t>(i)][idx[static_cast<std::size_t>(i)]];
        points.push_back(std::move(x));
        int axis = n - 1;
        for (; axis >= 0; --axis) {
            if (++idx[static_cast<std::size_t>(axis)] < axes[static_cast<std::size_t>(axis)].size()) break;
            idx[static_cast<std::size_t>(axis)] = 0;
        }
        if (axis < 0) break;
    }
    return points;
}

double wilson_half_width(double p_hat, long long n, double z) {
    if (n <= 0) return 1.0;
    const double nn = static_cast<double>(n);
    const double denom = 1.0 + z * z / nn;
    return (z / denom) * std::sqrt(p_hat * (1.0 - p_hat) / nn + z * z / (4.0 * nn * nn));
}

SafetyEstimate estimate_safety(const ProblemSpec& spec, const PolicyContext& ctx,
                               const EstimateOptions& opt) {
    if (opt.samples < 100) throw ValidationError("samples", "at least 100 trajectories required");
    const auto grid = initial_grid(spec.initial_set, opt.init_grid);
    const long long per_point = std::max<long long>(1, opt.samples / static_cast<long long>(grid.size()));
    const long long total = per_point * static_cast<long long>(grid.size());

    std::vector<long long> safe_counts(grid.size(), 0);
    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t gi = begin; gi < grid.size(); gi += stride) {
            long long safe = 0;
            for (long long t = 0; t < per_point; ++t) {
                const std::uint64_t stream =
                    static_cast<std::uint64_t>(gi) * static_cast<std::uint64_t>(per_point) +
                    static_cast<std::uint64_t>(t);
                const Trajectory traj =
                    simulate(spec, ctx, grid[gi], CounterRng(opt.seed, stream));
                if (traj.safe) ++safe;
            }
            safe_counts[gi] = safe;
        }
    };
    if (opt.threads <= 1 || grid.size() < 2) {
        work(0, 1);
    } else {
        const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(opt.threads), grid.size());
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
        for (auto& t : pool) t.join();
    }

    SafetyEstimate est;
    est.samples = total;
    long long total_safe = 0;
    double worst = 1.0;
    for (long long cnt : safe_counts) {
        total_safe += cnt;
        worst = std::min(worst, static_cast<double>(cnt) / static_cast<double>(per_point));
    }
    est.p_hat = static_cast<double>(total_safe) / static_cast<double>(total);
    est.per_init_min = worst;
    est.ci_half_width = wilson_half_width(worst, per_point);
    return est;
}

SoundnessVerdict check_certificate_soundness(const BarrierCertificate& cert,
                                             const SafetyEstimate& estimate) {
    SoundnessVerdict v;
    v.margin = estimate.per_init_min + 3.0 * estimate.ci_half_width - cert.p_s;
    v.pass = v.margin >= 0.0;
    return v;
}

}  // namespace nnb
