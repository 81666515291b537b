// SPDX-License-Identifier: Apache-2.0
#include "nnbarrier/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace nnb {

void BarrierCertificate::recompute_probability() {
    p_s = safety_probability(eta, beta, horizon);
}

void lemma1_guard(int degree) {
    if (degree < 2)
        throw ValidationError("degree", "barrier degree must be >= 2: degree-" +
                                             std::to_string(degree) +
                                             " candidates only admit the constant 1, whose bound is 0");
    if (degree % 2 != 0)
        throw ValidationError("degree", "barrier degree must be even for an SOS parametrization");
}

double safety_probability(double eta, double beta, int horizon) {
    const double v = 1.0 - (eta + beta * static_cast<double>(horizon));
    return std::clamp(v, 0.0, 1.0);
}

double beta_threshold(double delta_s, double eta, int horizon) {
    return (1.0 - delta_s - eta) / static_cast<double>(horizon);
}

namespace {

// Embeddings between the state space (arity n) and the joint space (x, y).
Eigen::MatrixXd x_projection(int n) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, 2 * n);
    M.leftCols(n).setIdentity();
    return M;
}

Eigen::MatrixXd y_projection(int n) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, 2 * n);
    M.rightCols(n).setIdentity();
    return M;
}

Polynomial joint_variable(int n, int index) { return Polynomial::variable(2 * n, index); }

// Affine form a^T x + b embedded into the joint space (x-part).
Polynomial affine_in_x(int n, const Eigen::VectorXd& a, double b) {
    Polynomial p = Polynomial::constant(2 * n, b);
    for (int i = 0; i < n; ++i)
        if (a[i] != 0.0) p += a[i] * joint_variable(n, i);
    return p;
}

// Region box constraints (x_i - l)(u - x_i) >= 0 in the joint space.
SemiAlgebraicSet region_constraints_joint(const Box& region) {
    const int n = region.dim();
    SemiAlgebraicSet out;
    for (int i = 0; i < n; ++i) {
        Polynomial xi = joint_variable(n, i);
        Polynomial h = (xi - Polynomial::constant(2 * n, region.lower[i])) *
                       (Polynomial::constant(2 * n, region.upper[i]) - xi);
        out.constraints.push_back(std::move(h));
    }
    return out;
}

// The martingale constraint for one region, over joint variables (x, y):
//   -E[B(y+v)] + B(x) + beta - L_x h_q(x) - L_y (fup(x)-y)(y-flow(x))
//   [- L_z (hi-y)(y-lo) in linear mode, tying y to the interval extremes]
// with fresh SOS multipliers. Sound because every product term is
// nonnegative whenever x lies in q and y inside the envelope band.
PolyExpr martingale_expr(SosProgram& prog, const PolyExpr& B_expr, const LinExpr& beta,
                         const Box& region, const LinearEnvelope& env, const GaussianNoise& noise,
                         BoundMode mode, const std::optional<Eigen::VectorXd>& control_shift,
                         int barrier_degree) {
    const int n = region.dim();
    const int md = SosProgram::default_multiplier_degree(barrier_degree, 2);

    Eigen::VectorXd b_low = env.b_low, b_up = env.b_up;
    if (control_shift) {
        b_low += *control_shift;
        b_up += *control_shift;
    }

    PolyExpr expr = B_expr.expect_shifted(noise.variances).substitute_affine(
        y_projection(n), Eigen::VectorXd::Zero(n));
    expr = expr.scaled(-1.0);
    expr += B_expr.substitute_affine(x_projection(n), Eigen::VectorXd::Zero(n));
    {
        PolyExpr beta_term(2 * n);
        beta_term.add(Exponents(static_cast<std::size_t>(2 * n), 0), beta);
        expr += beta_term;
    }

    for (const auto& h : region_constraints_joint(region).constraints) {
        const SosVar& lam = prog.new_sos_var(2 * n, md);
        expr -= prog.gram_poly(lam) * h;
    }

    // Envelope sandwich per output component.
    LinearEnvelope shifted = env;
    shifted.b_low = b_low;
    shifted.b_up = b_up;
    const IntervalEnvelope ext = envelope_extremes(shifted);
    for (int i = 0; i < n; ++i) {
        Polynomial yi = joint_variable(n, n + i);
        if (mode == BoundMode::Linear) {
            Polynomial up = affine_in_x(n, env.A_up.row(i), b_up[i]);
            Polynomial low = affine_in_x(n, env.A_low.row(i), b_low[i]);
            const SosVar& lam = prog.new_sos_var(2 * n, md);
            expr -= prog.gram_poly(lam) * ((up - yi) * (yi - low));
        }
        // Interval band from the envelope extremes. In interval mode this is
        // the only sandwich (A = 0 makes the two coincide); in linear mode it
        // is added alongside, so the feasible set contains the interval-mode
        // one and the certified bound can only improve on it.
        Polynomial hi = Polynomial::constant(2 * n, ext.hi[i]);
        Polynomial lo = Polynomial::constant(2 * n, ext.lo[i]);
        const SosVar& lam = prog.new_sos_var(2 * n, md);
        expr -= prog.gram_poly(lam) * ((hi - yi) * (yi - lo));
    }
    return expr;
}

// w^T Hess(B)(x) w as a polynomial expression over (x, w) in R^{2n};
// second derivatives act linearly on B's decision coefficients.
PolyExpr hessian_quadratic_form(const PolyExpr& B_expr, int n) {
    PolyExpr out(2 * n);
    for (const auto& [e, c] : B_expr.terms()) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const auto ei = static_cast<std::size_t>(i);
                const auto ej = static_cast<std::size_t>(j);
                double factor;
                Exponents d(e.begin(), e.end());
                if (i == j) {
                    if (e[ei] < 2) continue;
                    factor = static_cast<double>(e[ei]) * (e[ei] - 1);
                    d[ei] -= 2;
                } else {
                    if (e[ei] < 1 || e[ej] < 1) continue;
                    factor = static_cast<double>(e[ei]) * e[ej];
                    d[ei] -= 1;
                    d[ej] -= 1;
                }
                Exponents joint(static_cast<std::size_t>(2 * n), 0);
                for (int k = 0; k < n; ++k) joint[static_cast<std::size_t>(k)] = d[static_cast<std::size_t>(k)];
                joint[static_cast<std::size_t>(n + i)] += 1;
                joint[static_cast<std::size_t>(n + j)] += 1;
                LinExpr lc = c;
                lc *= factor;
                out.add(joint, lc);
            }
        }
    }
    return out;
}

// Sampling box for a joint-space constraint: x in the region, y spanning the
// envelope band (slightly inflated).
Box joint_domain(const Box& region, const LinearEnvelope& env) {
    const int n = region.dim();
    const IntervalEnvelope ext = envelope_extremes(env);
    Eigen::VectorXd lo(2 * n), hi(2 * n);
    lo.head(n) = region.lower;
    hi.head(n) = region.upper;
    for (int i = 0; i < n; ++i) {
        const double pad = 1e-6 + 0.05 * (ext.hi[i] - ext.lo[i]);
        lo[n + i] = ext.lo[i] - pad;
        hi[n + i] = ext.hi[i] + pad;
    }
    return Box(lo, hi);
}

}  // namespace

BarrierCertificate synthesize(const ProblemSpec& spec, const Partition& partition,
                              const std::vector<LinearEnvelope>& envelopes, BoundMode mode,
                              ConicSolverBackend& backend, const SynthesisOptions& opt) {
    lemma1_guard(spec.barrier_degree);
    if (envelopes.size() != partition.size())
        throw DimensionError("one envelope per region required");
    if (opt.eta_cap && !(*opt.eta_cap >= 0.0 && *opt.eta_cap <= 1.0))
        throw ValidationError("eta_cap", "must lie in [0, 1]");

    const int n = spec.dim();
    const int m = spec.barrier_degree;

    SosProgram prog;
    const SosVar& B_var = prog.new_sos_var(n, m);
    const PolyExpr B_expr = prog.gram_poly(B_var);
    const VarId eta = prog.add_scalar("eta", 0.0, opt.eta_cap ? *opt.eta_cap : 1.0);
    const VarId beta = prog.add_scalar("beta", 0.0, 1.0);

    std::vector<Box> domains;

    // B <= eta on the initial set.
    {
        PolyExpr expr = B_expr.scaled(-1.0);
        PolyExpr eta_term(n);
        eta_term.add(Exponents(static_cast<std::size_t>(n), 0), LinExpr::var(eta));
        expr += eta_term;
        expr = prog.putinar_block(expr, box_to_polynomials(spec.initial_set),
                                  SosProgram::default_multiplier_degree(m, 2));
        prog.assert_sos(std::move(expr), "initial", m);
        domains.push_back(spec.initial_set);
    }

    // B >= 1 on each unsafe half-space slab.
    {
        const auto slabs = unsafe_decomposition(spec.state_space, spec.safe_set);
        Eigen::VectorXd inflate = (spec.state_space.upper - spec.state_space.lower);
        for (std::size_t s = 0; s < slabs.size(); ++s) {
            PolyExpr expr = B_expr;
            expr += PolyExpr::from(Polynomial::constant(n, -1.0));
            expr = prog.putinar_block(expr, slabs[s],
                                      SosProgram::default_multiplier_degree(m, 1));
            prog.assert_sos(std::move(expr), "unsafe slab " + std::to_string(s), m);
            // Sample over a shell extending past the violated face.
            const int axis = static_cast<int>(s) / 2;
            const bool upper_side = (s % 2) == 0;
            Eigen::VectorXd lo = spec.state_space.lower - inflate, hi = spec.state_space.upper + inflate;
            if (upper_side)
                lo[axis] = spec.safe_set.upper[axis];
            else
                hi[axis] = spec.safe_set.lower[axis];
            domains.emplace_back(lo, hi);
        }
    }

    if (opt.enforce_sos_convexity) {
        PolyExpr hess = hessian_quadratic_form(B_expr, n);
        prog.assert_sos(std::move(hess), "sos-convexity", m);
        Eigen::VectorXd lo(2 * n), hi(2 * n);
        lo.head(n) = spec.state_space.lower;
        hi.head(n) = spec.state_space.upper;
        lo.tail(n).setConstant(-1.0);
        hi.tail(n).setConstant(1.0);
        domains.emplace_back(lo, hi);
    }

    // Martingale constraint per region.
    for (std::size_t q = 0; q < partition.size(); ++q) {
        PolyExpr expr = martingale_expr(prog, B_expr, LinExpr::var(beta), partition.regions[q],
                                        envelopes[q], spec.noise, mode, std::nullopt, m);
        prog.assert_sos(std::move(expr), "region " + std::to_string(q), m);
        domains.push_back(joint_domain(partition.regions[q], envelopes[q]));
    }

    {
        LinExpr objective;
        if (opt.eta_cap) {
            objective += LinExpr::var(beta);
        } else {
            objective += LinExpr::var(eta);
            objective += LinExpr::var(beta, static_cast<double>(spec.horizon));
        }
        prog.minimize(objective);
    }

    const SosSolution sol = prog.solve(backend, opt.sos);
    if (sol.status == SosStatus::Infeasible)
        throw SolveError("barrier synthesis infeasible: " + sol.message);
    if (sol.status != SosStatus::Optimal)
        throw SolveError("barrier synthesis failed: " + sol.message);

    BarrierCertificate cert;
    cert.B = B_expr.value(sol.var_values);
    cert.eta = sol.scalar_values[0];
    cert.beta = sol.scalar_values[1];
    cert.solver_eta = cert.eta;
    cert.solver_beta = cert.beta;
    cert.horizon = spec.horizon;
    cert.mode = mode;
    cert.sos_iterations = sol.iterations;
    cert.eq_residual = sol.max_eq_residual;
    cert.min_gram_eig = sol.min_gram_eig;
    cert.recompute_probability();

    if (opt.audit_samples > 0) {
        CounterRng rng(opt.audit_seed, 0x5151);
        const auto check = prog.check_certificate(sol, domains, opt.audit_samples, rng);
        cert.sample_audit_min = check.min_sample_value;
    }
    return cert;
}

double eval_beta_region(const Polynomial& B, const Box& region, const LinearEnvelope& envelope,
                        const GaussianNoise& noise, BoundMode mode, ConicSolverBackend& backend,
                        const std::optional<Eigen::VectorXd>& control_shift,
                        const SosSolveOptions& opt, bool* infeasible) {
    if (infeasible) *infeasible = false;
    const int m = B.degree() + (B.degree() % 2);
    SosProgram prog;
    const VarId beta_q = prog.add_scalar("beta_q", 0.0, 1.0);
    PolyExpr expr = martingale_expr(prog, PolyExpr::from(B), LinExpr::var(beta_q), region,
                                    envelope, noise, mode, control_shift, std::max(2, m));
    prog.assert_sos(std::move(expr), "region");
    prog.minimize(LinExpr::var(beta_q));

    const SosSolution sol = prog.solve(backend, opt);
    if (sol.status == SosStatus::Optimal) return std::clamp(sol.scalar_values[0], 0.0, 1.0);
    if (infeasible) *infeasible = true;
    return 1.0;  // conservative cap
}

double eval_eta_initial(const Polynomial& B, const Box& initial_set,
                        ConicSolverBackend& backend, const SosSolveOptions& opt) {
    const int n = B.arity();
    const int m = std::max(2, B.degree() + (B.degree() % 2));
    SosProgram prog;
    const VarId eta = prog.add_scalar("eta", 0.0, 1.0);
    PolyExpr expr = PolyExpr::from(-1.0 * B);
    PolyExpr eta_term(n);
    eta_term.add(Exponents(static_cast<std::size_t>(n), 0), LinExpr::var(eta));
    expr += eta_term;
    expr = prog.putinar_block(expr, box_to_polynomials(initial_set),
                              SosProgram::default_multiplier_degree(m, 2));
    prog.assert_sos(std::move(expr), "initial", m);
    prog.minimize(LinExpr::var(eta));
    const SosSolution sol = prog.solve(backend, opt);
    if (sol.status != SosStatus::Optimal) return 1.0;
    return std::clamp(sol.scalar_values[0], 0.0, 1.0);
}

void populate_region_betas(BarrierCertificate& cert, const ProblemSpec& spec,
                           const Partition& partition,
                           const std::vector<LinearEnvelope>& envelopes,
                           ConicSolverBackend& backend, int threads, const SosSolveOptions& opt) {
    const std::size_t count = partition.size();
    std::vector<double> betas(count, 1.0);
    std::vector<char> fallback(count, 0);
    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t q = begin; q < count; q += stride) {
            bool infeasible = false;
            betas[q] = eval_beta_region(cert.B, partition.regions[q], envelopes[q], spec.noise,
                                        cert.mode, backend, std::nullopt, opt, &infeasible);
            fallback[q] = infeasible ? 1 : 0;
        }
    };
    if (threads <= 1 || count < 2) {
        work(0, 1);
    } else {
        const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
        for (auto& t : pool) t.join();
    }
    std::size_t capped = 0;
    for (std::size_t q = 0; q < count; ++q) capped += fallback[q] ? 1 : 0;
    if (capped > 0)
        std::fprintf(stderr,
                     "warning: %zu region beta evaluations were infeasible; "
                     "using the conservative cap min(1, monolithic beta)\n",
                     capped);

    cert.eta = std::min(cert.eta, eval_eta_initial(cert.B, spec.initial_set, backend, opt));
    cert.per_region_beta.clear();
    double mx = 0.0;
    for (std::size_t q = 0; q < count; ++q) {
        // The monolithic beta is itself a certified compensation for every
        // region, so it caps the per-region value.
        const double bq = std::min(betas[q], cert.solver_beta);
        cert.per_region_beta[q] = bq;
        mx = std::max(mx, bq);
    }
    cert.beta = mx;
    cert.recompute_probability();
}

AuditReport audit_certificate(const BarrierCertificate& cert, const ProblemSpec& spec,
                              const Partition& partition,
                              const std::vector<LinearEnvelope>& envelopes,
                              const std::map<std::size_t, Eigen::VectorXd>* control_shifts,
                              const AuditOptions& opt) {
    AuditReport report;
    CounterRng rng(opt.seed, 0xa0d1);
    const int n = spec.dim();

    auto sample_box = [&](const Box& box, Eigen::VectorXd& x) {
        for (int i = 0; i < n; ++i)
            x[i] = box.lower[i] + (box.upper[i] - box.lower[i]) * rng.next_unit();
    };

    Eigen::VectorXd x(n);
    double min_state = std::numeric_limits<double>::infinity();
    for (int s = 0; s < opt.state_samples; ++s) {
        sample_box(spec.state_space, x);
        min_state = std::min(min_state, cert.B.eval(x));
    }
    report.min_B_state = min_state;

    double max_init = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < opt.state_samples / 10 + 1; ++s) {
        sample_box(spec.initial_set, x);
        max_init = std::max(max_init, cert.B.eval(x) - cert.eta);
    }
    report.max_init_excess = max_init;

    // Unsafe slabs sampled inside an inflated shell around the state box.
    double min_unsafe = std::numeric_limits<double>::infinity();
    const int per_slab = opt.state_samples / std::max(1, 2 * n) / 2 + 1;
    for (int axis = 0; axis < n; ++axis) {
        for (int side = 0; side < 2; ++side) {
            Box shell = spec.state_space;
            shell.lower.array() -= opt.shell_inflation;
            shell.upper.array() += opt.shell_inflation;
            if (side == 0)
                shell.lower[axis] = spec.safe_set.upper[axis];
            else
                shell.upper[axis] = spec.safe_set.lower[axis];
            for (int s = 0; s < per_slab; ++s) {
                sample_box(shell, x);
                min_unsafe = std::min(min_unsafe, cert.B.eval(x));
            }
        }
    }
    report.min_unsafe_value = min_unsafe;

    // Martingale gap on sampled (x, y) pairs, expectation taken exactly.
    const Polynomial EB = expect_shifted(cert.B, spec.noise.variances);
    double max_gap = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd y(n);
    for (std::size_t q = 0; q < partition.size(); ++q) {
        const Box& region = partition.regions[q];
        LinearEnvelope env = envelopes[q];
        if (control_shifts) {
            auto it = control_shifts->find(q);
            if (it != control_shifts->end()) {
                env.b_low += it->second;
                env.b_up += it->second;
            }
        }
        for (int s = 0; s < opt.region_pairs; ++s) {
            sample_box(region, x);
            const Eigen::VectorXd lo = env.lower_at(x), hi = env.upper_at(x);
            for (int i = 0; i < n; ++i) y[i] = lo[i] + (hi[i] - lo[i]) * rng.next_unit();
            max_gap = std::max(max_gap, EB.eval(y) - cert.B.eval(x) - cert.beta);
        }
    }
    report.max_martingale_excess = max_gap;

    report.pass = report.min_B_state >= -opt.tolerance && report.max_init_excess <= opt.tolerance &&
                  report.min_unsafe_value >= 1.0 - opt.tolerance &&
                  report.max_martingale_excess <= opt.tolerance;
    std::ostringstream os;
    os << "min B(state)=" << report.min_B_state << ", max B-eta(init)=" << report.max_init_excess
       << ", min B(unsafe)=" << report.min_unsafe_value
       << ", max martingale excess=" << report.max_martingale_excess;
    report.detail = os.str();
    return report;
}

}  // namespace nnb
