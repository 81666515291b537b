// SPDX-License-Identifier: Apache-2.0
#include "nnbarrier/control.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

namespace nnb {

namespace {

Eigen::VectorXd eval_gradient(const std::vector<Polynomial>& grads, const Eigen::VectorXd& x) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = grads[static_cast<std::size_t>(i)].eval(x);
    return g;
}

Eigen::VectorXd clamp_to_box(const Eigen::VectorXd& x, const Box& box) {
    return x.cwiseMax(box.lower).cwiseMin(box.upper);
}

}  // namespace

BarrierMin find_barrier_min(const Polynomial& B, const Box& domain, const BarrierMinOptions& opt) {
    const int n = domain.dim();
    if (B.arity() != n) throw DimensionError("barrier arity != domain dimension");
    const auto grads = B.gradient();
    CounterRng rng(opt.seed, 0xb411);

    // Starts: corner subsample, box center, Latin-hypercube interior fill.
    std::vector<Eigen::VectorXd> starts;
    const int corner_budget = opt.restarts / 2;
    if (n < 60 && (1LL << n) <= corner_budget) {
        for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) starts.push_back(domain.vertex(mask));
    } else {
        for (int c = 0; c < corner_budget; ++c) starts.push_back(domain.vertex(rng.next_u64()));
    }
    starts.push_back(domain.center());
    const int lhs_count = std::max(0, opt.restarts - static_cast<int>(starts.size()));
    if (lhs_count > 0) {
        // Per-axis stratified permutation.
        std::vector<std::vector<int>> strata(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            auto& perm = strata[static_cast<std::size_t>(i)];
            perm.resize(static_cast<std::size_t>(lhs_count));
            for (int s = 0; s < lhs_count; ++s) perm[static_cast<std::size_t>(s)] = s;
            for (int s = lhs_count - 1; s > 0; --s)
                std::swap(perm[static_cast<std::size_t>(s)],
                          perm[rng.next_u64() % static_cast<std::uint64_t>(s + 1)]);
        }
        for (int s = 0; s < lhs_count; ++s) {
            Eigen::VectorXd x(n);
            for (int i = 0; i < n; ++i) {
                const double cell = (strata[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)] +
                                     rng.next_unit()) /
                                    lhs_count;
                x[i] = domain.lower[i] + cell * (domain.upper[i] - domain.lower[i]);
            }
            starts.push_back(std::move(x));
        }
    }

    BarrierMin best;
    best.value = std::numeric_limits<double>::infinity();
    std::vector<double> results;
    results.reserve(starts.size());
    for (const auto& start : starts) {
        Eigen::VectorXd x = start;
        double fx = B.eval(x);
        double step = 1.0;
        for (int it = 0; it < opt.max_iterations; ++it) {
            const Eigen::VectorXd g = eval_gradient(grads, x);
            // Projected gradient: kill components pushing out of the box.
            Eigen::VectorXd pg = g;
            for (int i = 0; i < n; ++i) {
                if (x[i] <= domain.lower[i] && g[i] > 0.0) pg[i] = 0.0;
                if (x[i] >= domain.upper[i] && g[i] < 0.0) pg[i] = 0.0;
            }
            if (pg.norm() <= opt.grad_tolerance) break;
            bool moved = false;
            step = std::min(step * 2.0, 1e3);
            for (int bt = 0; bt < 60; ++bt) {
                const Eigen::VectorXd cand = clamp_to_box(x - step * g, domain);
                const double fc = B.eval(cand);
                if (fc <= fx - 1e-4 * (x - cand).squaredNorm() / std::max(step, 1e-300)) {
                    x = cand;
                    fx = fc;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        results.push_back(fx);
        if (fx < best.value) {
            best.value = fx;
            best.x_star = x;
        }
    }
    for (double v : results)
        if (v <= best.value + opt.agree_tolerance) ++best.restarts_agreeing;
    return best;
}

namespace {

ControlLpResult solve_control_lp(const Eigen::VectorXd& x_star, const Box& region,
                                 const LinearEnvelope& envelope, const Eigen::MatrixXd& g,
                                 const Eigen::VectorXd& u_lower, const Eigen::VectorXd& u_upper,
                                 ControlLpMode mode, bool polish) {
    const int n = region.dim();
    const int c = static_cast<int>(g.cols());
    const double inf = std::numeric_limits<double>::infinity();

    LinearProgram lp;
    std::vector<int> theta(static_cast<std::size_t>(n)), u(static_cast<std::size_t>(c));
    for (int i = 0; i < n; ++i) theta[static_cast<std::size_t>(i)] = lp.add_variable(0.0, inf);
    for (int j = 0; j < c; ++j) u[static_cast<std::size_t>(j)] = lp.add_variable(u_lower[j], u_upper[j]);

    if (mode == ControlLpMode::Existential) {
        // Free y and z in the region; the textbook z = z' - z'' split is what
        // the standard-form lowering performs internally.
        std::vector<int> y(static_cast<std::size_t>(n)), z(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = lp.add_variable(-inf, inf);
        for (int i = 0; i < n; ++i)
            z[static_cast<std::size_t>(i)] = lp.add_variable(region.lower[i], region.upper[i]);
        for (int i = 0; i < n; ++i) {
            lp.add_constraint({{y[static_cast<std::size_t>(i)], 1.0}, {theta[static_cast<std::size_t>(i)], -1.0}},
                              LpRelation::Le, x_star[i]);
            lp.add_constraint({{y[static_cast<std::size_t>(i)], 1.0}, {theta[static_cast<std::size_t>(i)], 1.0}},
                              LpRelation::Ge, x_star[i]);
            // y_i >= A_low z + b_low + (g u)_i  and  y_i <= A_up z + b_up + (g u)_i
            LinearProgram::Terms lo_terms{{y[static_cast<std::size_t>(i)], 1.0}};
            LinearProgram::Terms hi_terms{{y[static_cast<std::size_t>(i)], 1.0}};
            for (int k = 0; k < n; ++k) {
                if (envelope.A_low(i, k) != 0.0)
                    lo_terms.push_back({z[static_cast<std::size_t>(k)], -envelope.A_low(i, k)});
                if (envelope.A_up(i, k) != 0.0)
                    hi_terms.push_back({z[static_cast<std::size_t>(k)], -envelope.A_up(i, k)});
            }
            for (int j = 0; j < c; ++j) {
                if (g(i, j) != 0.0) {
                    lo_terms.push_back({u[static_cast<std::size_t>(j)], -g(i, j)});
                    hi_terms.push_back({u[static_cast<std::size_t>(j)], -g(i, j)});
                }
            }
            lp.add_constraint(lo_terms, LpRelation::Ge, envelope.b_low[i]);
            lp.add_constraint(hi_terms, LpRelation::Le, envelope.b_up[i]);
        }
    } else {
        // Robust: theta bounds the reachable band at every region vertex.
        const std::uint64_t vertex_count = 1ULL << n;
        for (std::uint64_t mask = 0; mask < vertex_count; ++mask) {
            const Eigen::VectorXd v = region.vertex(mask);
            const Eigen::VectorXd up = envelope.upper_at(v);
            const Eigen::VectorXd lo = envelope.lower_at(v);
            for (int i = 0; i < n; ++i) {
                LinearProgram::Terms hi_terms{{theta[static_cast<std::size_t>(i)], -1.0}};
                LinearProgram::Terms lo_terms{{theta[static_cast<std::size_t>(i)], 1.0}};
                for (int j = 0; j < c; ++j) {
                    if (g(i, j) != 0.0) {
                        hi_terms.push_back({u[static_cast<std::size_t>(j)], g(i, j)});
                        lo_terms.push_back({u[static_cast<std::size_t>(j)], g(i, j)});
                    }
                }
                lp.add_constraint(hi_terms, LpRelation::Le, x_star[i] - up[i]);
                lp.add_constraint(lo_terms, LpRelation::Ge, x_star[i] - lo[i]);
            }
        }
    }

    LinearProgram::Terms obj;
    for (int i = 0; i < n; ++i) obj.push_back({theta[static_cast<std::size_t>(i)], 1.0});
    lp.set_objective(obj);
    const LpResult first = lp.solve();
    if (first.status != LpStatus::Optimal)
        throw SolveError(std::string("control LP ") + to_string(first.status) +
                         " (consistent envelopes should always admit a solution)");

    if (!polish) {
        ControlLpResult out;
        out.u = first.x.segment(n, c).cwiseMax(u_lower).cwiseMin(u_upper);
        out.objective = first.objective;
        return out;
    }

    // Second stage: among optimal solutions, the smallest ||u||_1 (ties then
    // resolved deterministically by the pivot order).
    LinearProgram::Terms theta_sum;
    for (int i = 0; i < n; ++i) theta_sum.push_back({theta[static_cast<std::size_t>(i)], 1.0});
    lp.add_constraint(theta_sum, LpRelation::Le, first.objective + 1e-9);
    std::vector<int> s(static_cast<std::size_t>(c));
    LinearProgram::Terms obj2;
    for (int j = 0; j < c; ++j) {
        s[static_cast<std::size_t>(j)] = lp.add_variable(0.0, inf);
        lp.add_constraint({{u[static_cast<std::size_t>(j)], 1.0}, {s[static_cast<std::size_t>(j)], -1.0}},
                          LpRelation::Le, 0.0);
        lp.add_constraint({{u[static_cast<std::size_t>(j)], 1.0}, {s[static_cast<std::size_t>(j)], 1.0}},
                          LpRelation::Ge, 0.0);
        obj2.push_back({s[static_cast<std::size_t>(j)], 1.0});
    }
    lp.set_objective(obj2);
    const LpResult second = lp.solve();

    ControlLpResult out;
    const LpResult& pick = second.status == LpStatus::Optimal ? second : first;
    out.u = pick.x.segment(n, c).cwiseMax(u_lower).cwiseMin(u_upper);
    // Snap round-off noise so "no intervention" is exactly zero.
    for (int j = 0; j < c; ++j)
        if (std::abs(out.u[j]) < 1e-9) out.u[j] = 0.0;
    out.objective = first.objective;
    return out;
}

}  // namespace

ControlLpResult synthesize_control_lp(const Eigen::VectorXd& x_star, const Box& region,
                                      const LinearEnvelope& envelope, const Eigen::MatrixXd& g,
                                      const Eigen::VectorXd& u_lower, const Eigen::VectorXd& u_upper,
                                      ControlLpMode mode) {
    if (x_star.size() != region.dim()) throw DimensionError("x_star dimension mismatch");
    if (g.rows() != region.dim()) throw DimensionError("g row count != state dimension");
    return solve_control_lp(x_star, region, envelope, g, u_lower, u_upper, mode, true);
}

double controlled_fraction(const ControlPolicy& policy, const Partition& partition) {
    if (partition.size() == 0) return 0.0;
    return static_cast<double>(policy.entries.size()) / static_cast<double>(partition.size());
}

SynthesisRun run_algorithm1(const ProblemSpec& spec, const Partition& partition,
                            const std::vector<LinearEnvelope>& envelopes, BoundMode mode,
                            ConicSolverBackend& backend, const Algorithm1Options& opt) {
    if (!spec.control) throw ValidationError("control", "control structure required");
    const ControlStructure& ctrl = *spec.control;
    const double delta_s = spec.threshold;
    const int N = spec.horizon;

    SynthesisRun run;
    const auto now = [] { return std::chrono::steady_clock::now(); };
    const auto secs = [](auto t0) {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    auto t0 = now();
    BarrierCertificate cert =
        synthesize(spec, partition, envelopes, mode, backend, opt.synthesis);
    run.sos_seconds += secs(t0);
    t0 = now();
    populate_region_betas(cert, spec, partition, envelopes, backend, opt.threads, opt.region_sos);
    run.beta_eval_seconds += secs(t0);
    run.p_s_before = cert.p_s;
    run.certificate = cert;

    if (cert.p_s >= delta_s) {
        run.p_s_after = cert.p_s;
        run.threshold_reached = true;
        return run;
    }

    const int max_rounds =
        static_cast<int>(std::ceil((1.0 - delta_s) / spec.eta_step - 1e-9)) + 1;
    int k = 0;
    double prev_cap = 1.0;
    double prev_max_beta = -1.0;
    while (run.certificate.p_s < delta_s && k < max_rounds) {
        // Cap schedule: start at the full budget 1 - delta_s and shrink by
        // eta_step per round. When the previous round just missed, the cap
        // that budgets for its observed post-control beta is used instead of
        // over-tightening; the hard round bound keeps termination.
        const double scheduled = 1.0 - delta_s - static_cast<double>(k) * spec.eta_step;
        double eta_bar = scheduled;
        if (prev_max_beta >= 0.0) {
            const double adaptive =
                1.0 - delta_s - 1.05 * static_cast<double>(N) * prev_max_beta - 1e-5;
            eta_bar = std::max(eta_bar, adaptive);
        }
        eta_bar = std::min(eta_bar, prev_cap - 1e-9);
        ++k;
        if (eta_bar <= 0.0) break;
        prev_cap = eta_bar;

        SynthesisOptions syn = opt.synthesis;
        syn.eta_cap = std::min(1.0, eta_bar);
        BarrierCertificate cand;
        t0 = now();
        try {
            cand = synthesize(spec, partition, envelopes, mode, backend, syn);
        } catch (const SolveError&) {
            run.sos_seconds += secs(t0);
            break;  // cap too tight; keep the best certificate so far
        }
        run.sos_seconds += secs(t0);
        t0 = now();
        populate_region_betas(cand, spec, partition, envelopes, backend, opt.threads,
                              opt.region_sos);
        run.beta_eval_seconds += secs(t0);
        ++run.iterations;

        t0 = now();
        const BarrierMin bmin = find_barrier_min(cand.B, spec.safe_set, opt.barrier_min);
        const double thr = beta_threshold(delta_s, cand.eta, N);

        ControlPolicy policy;
        std::vector<std::size_t> flagged;
        for (const auto& [q, bq] : cand.per_region_beta)
            if (bq > thr) flagged.push_back(q);

        std::vector<std::optional<Eigen::VectorXd>> controls(partition.size());
        for (std::size_t q : flagged) {
            const ControlLpResult lp =
                synthesize_control_lp(bmin.x_star, partition.regions[q], envelopes[q], ctrl.g,
                                      ctrl.u_lower, ctrl.u_upper, opt.lp_mode);
            ++run.lp_solves;
            if (lp.u.cwiseAbs().maxCoeff() > 0.0) controls[q] = lp.u;
        }
        run.lp_seconds += secs(t0);
        t0 = now();

        // Re-evaluate beta_q under the installed shifts (independent solves).
        std::vector<double> new_beta(partition.size(), -1.0);
        auto work = [&](std::size_t begin, std::size_t stride) {
            for (std::size_t idx = begin; idx < flagged.size(); idx += stride) {
                const std::size_t q = flagged[idx];
                if (!controls[q]) continue;
                const Eigen::VectorXd shift = ctrl.g * (*controls[q]);
                new_beta[q] = eval_beta_region(cand.B, partition.regions[q], envelopes[q],
                                               spec.noise, mode, backend, shift, opt.region_sos);
            }
        };
        if (opt.threads <= 1 || flagged.size() < 2) {
            work(0, 1);
        } else {
            const std::size_t workers =
                std::min<std::size_t>(static_cast<std::size_t>(opt.threads), flagged.size());
            std::vector<std::thread> pool;
            for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
            for (auto& t : pool) t.join();
        }
        run.beta_eval_seconds += secs(t0);
        for (std::size_t q : flagged) {
            if (!controls[q]) continue;
            // Install only if the control does not hurt this region.
            if (new_beta[q] >= 0.0 && new_beta[q] <= cand.per_region_beta[q] + 1e-12) {
                policy.entries[q] = *controls[q];
                cand.per_region_beta[q] = new_beta[q];
            }
        }

        double max_beta = 0.0;
        for (const auto& [q, bq] : cand.per_region_beta) max_beta = std::max(max_beta, bq);
        cand.beta = max_beta;
        cand.recompute_probability();
        prev_max_beta = max_beta;

        if (cand.p_s > run.certificate.p_s) {
            run.certificate = cand;
            run.policy = policy;
        }
    }

    run.p_s_after = run.certificate.p_s;
    run.threshold_reached = run.certificate.p_s >= delta_s;
    return run;
}

}  // namespace nnb
