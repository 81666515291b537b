// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: certify, synthesize, simulate, betamap, bounds.
// Exit codes: 0 success/certified, 2 certified below threshold, 1 error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "nnbarrier/report.hpp"

namespace fs = std::filesystem;
using namespace nnb;

namespace {

struct CommonFlags {
    unsigned long long seed = 0;
    bool sos_convex = false;
    int threads = 1;
    std::string bounds = "linear";
    int degree = 0;  // 0 = take from the problem file
    std::string out_dir = ".";
    double tol_feas = 1e-8;
    double tol_gap = 1e-8;
    double tol_cert = 1e-6;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_bounds = true) {
    cmd->add_option("--seed", f.seed, "Seed for all randomized phases (default 0)");
    cmd->add_option("--threads", f.threads, "Worker thread cap (default 1)");
    if (with_bounds)
        cmd->add_option("--bounds", f.bounds, "Bound mode: interval|linear (default linear)")
            ->check(CLI::IsMember({"interval", "linear"}));
    cmd->add_option("--degree", f.degree, "Barrier degree override (even, >= 2)");
    cmd->add_option("--out", f.out_dir, "Output directory (default .)");
    cmd->add_option("--tol-feas", f.tol_feas, "Interior-point feasibility tolerance");
    cmd->add_option("--tol-gap", f.tol_gap, "Interior-point gap tolerance");
    cmd->add_option("--tol-cert", f.tol_cert, "Certificate sampling tolerance");
    cmd->add_flag("--sos-convex", f.sos_convex,
                  "Also certify the barrier's Hessian form SOS (convex by construction)");
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Pipeline {
    ProblemSpec spec;
    Partition partition;
    std::vector<LinearEnvelope> envelopes;
    BoundMode mode;
    PhaseTimings timings;
};

Pipeline prepare(const std::string& spec_path, const CommonFlags& f) {
    Pipeline p;
    p.spec = load_problem(spec_path);
    if (f.degree > 0) {
        p.spec.barrier_degree = f.degree;
        p.spec.validate();
    }
    p.mode = bound_mode_from_string(f.bounds);
    auto t0 = std::chrono::steady_clock::now();
    p.partition = partition_uniform(p.spec.safe_set, p.spec.partition_widths);
    p.timings.partition_sec = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    p.envelopes = bound_partition(p.spec.network, p.partition, p.mode, f.threads);
    p.timings.bounds_sec = seconds_since(t0);
    return p;
}

RunReport base_report(const std::string& command, const std::string& spec_path,
                      const CommonFlags& f, const Pipeline& p) {
    RunReport r;
    r.command = command;
    r.spec_path = spec_path;
    r.spec_hash = file_hash_hex(spec_path);
    r.seed = f.seed;
    r.threads = f.threads;
    r.mode = p.mode;
    r.degree = p.spec.barrier_degree;
    r.horizon = p.spec.horizon;
    r.threshold = p.spec.threshold;
    r.num_regions = p.partition.size();
    return r;
}

void fill_certificate(RunReport& r, const BarrierCertificate& cert, const Pipeline& p,
                      const ControlPolicy* policy) {
    r.eta = cert.eta;
    r.beta = cert.beta;
    r.p_s = cert.p_s;
    r.barrier = cert.B;
    r.solver_iterations = cert.sos_iterations;
    r.eq_residual = cert.eq_residual;
    r.solver_status = "optimal";
    r.regions.clear();
    for (std::size_t q = 0; q < p.partition.size(); ++q) {
        RunReport::RegionRow row;
        row.id = q;
        row.lower = p.partition.regions[q].lower;
        row.upper = p.partition.regions[q].upper;
        const auto it = cert.per_region_beta.find(q);
        row.beta_q = it == cert.per_region_beta.end() ? cert.beta : it->second;
        if (policy) {
            if (auto u = policy->lookup(q)) row.u = *u;
        }
        r.regions.push_back(std::move(row));
    }
}

int cmd_certify(const std::string& spec_path, const CommonFlags& f) {
    const auto t_total = std::chrono::steady_clock::now();
    Pipeline p = prepare(spec_path, f);

    InteriorPointSolver backend;
    SynthesisOptions syn;
    syn.sos.tol_feas = f.tol_feas;
    syn.sos.tol_gap = f.tol_gap;
    syn.audit_seed = f.seed;
    syn.enforce_sos_convexity = f.sos_convex;

    auto t0 = std::chrono::steady_clock::now();
    BarrierCertificate cert = synthesize(p.spec, p.partition, p.envelopes, p.mode, backend, syn);
    p.timings.sos_sec = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    populate_region_betas(cert, p.spec, p.partition, p.envelopes, backend, f.threads, syn.sos);
    p.timings.beta_eval_sec = seconds_since(t0);
    p.timings.total_sec = seconds_since(t_total);

    RunReport report = base_report("certify", spec_path, f, p);
    fill_certificate(report, cert, p, nullptr);
    report.timings = p.timings;

    fs::create_directories(f.out_dir);
    const std::string out_path = (fs::path(f.out_dir) / "certify_report.json").string();
    write_report(report, out_path);
    std::printf("certified P_s = %.6f (eta = %.6g, beta = %.6g, |Q| = %zu, mode = %s)\n",
                cert.p_s, cert.eta, cert.beta, p.partition.size(), to_string(p.mode));
    std::printf("report: %s\n", out_path.c_str());
    return cert.p_s >= p.spec.threshold ? 0 : 2;
}

int cmd_bounds(const std::string& spec_path, const CommonFlags& f) {
    Pipeline p = prepare(spec_path, f);
    fs::create_directories(f.out_dir);
    const std::string bounds_path = (fs::path(f.out_dir) / "bounds.csv").string();
    const std::string part_path = (fs::path(f.out_dir) / "partition.csv").string();
    write_bounds_csv(p.partition, p.envelopes, p.mode, bounds_path);
    write_partition_csv(p.partition, part_path);
    std::printf("wrote %s and %s (%zu regions)\n", bounds_path.c_str(), part_path.c_str(),
                p.partition.size());
    return 0;
}

int cmd_synthesize(const std::string& spec_path, const CommonFlags& f, const std::string& lp_mode) {
    const auto t_total = std::chrono::steady_clock::now();
    Pipeline p = prepare(spec_path, f);
    if (!p.spec.control) {
        std::fprintf(stderr, "error: control structure required for synthesize\n");
        return 1;
    }

    InteriorPointSolver backend;
    Algorithm1Options opt;
    opt.synthesis.sos.tol_feas = f.tol_feas;
    opt.synthesis.sos.tol_gap = f.tol_gap;
    opt.synthesis.audit_seed = f.seed;
    opt.synthesis.enforce_sos_convexity = f.sos_convex;
    opt.region_sos = opt.synthesis.sos;
    opt.threads = f.threads;
    opt.barrier_min.seed = f.seed;
    opt.lp_mode = lp_mode == "robust" ? ControlLpMode::RobustVertices : ControlLpMode::Existential;

    SynthesisRun run = run_algorithm1(p.spec, p.partition, p.envelopes, p.mode, backend, opt);
    p.timings.sos_sec = run.sos_seconds;
    p.timings.beta_eval_sec = run.beta_eval_seconds;
    p.timings.lp_sec = run.lp_seconds;
    p.timings.total_sec = seconds_since(t_total);

    RunReport report = base_report("synthesize", spec_path, f, p);
    fill_certificate(report, run.certificate, p, &run.policy);
    report.p_s_before = run.p_s_before;
    report.p_s_after = run.p_s_after;
    report.controlled_fraction = controlled_fraction(run.policy, p.partition);
    report.iterations = run.iterations;
    report.timings = p.timings;

    fs::create_directories(f.out_dir);
    const std::string report_path = (fs::path(f.out_dir) / "synthesize_report.json").string();
    const std::string policy_path = (fs::path(f.out_dir) / "policy.csv").string();
    const std::string summary_path = (fs::path(f.out_dir) / "synthesize_summary.json").string();
    write_report(report, report_path);
    write_policy_csv(run.policy, p.spec.control->dim(), policy_path);
    {
        std::ofstream out(summary_path);
        out << "{\n  \"P_s_before\": " << run.p_s_before << ",\n  \"P_s_after\": " << run.p_s_after
            << ",\n  \"controlled_fraction\": " << *report.controlled_fraction
            << ",\n  \"iterations\": " << run.iterations << "\n}\n";
    }
    std::printf("P_s %.6f -> %.6f, controlled fraction %.4f, iterations %d\n", run.p_s_before,
                run.p_s_after, *report.controlled_fraction, run.iterations);
    std::printf("report: %s, policy: %s\n", report_path.c_str(), policy_path.c_str());
    return run.threshold_reached ? 0 : 2;
}

int cmd_simulate(const std::string& spec_path, const CommonFlags& f, const std::string& policy_path,
                 long long samples, int init_grid, int traj_dump,
                 const std::string& report_path_in) {
    Pipeline p = prepare(spec_path, f);
    ControlPolicy policy;
    PolicyContext ctx;
    if (!policy_path.empty()) {
        if (!p.spec.control) {
            std::fprintf(stderr, "error: policy given but spec has no control structure\n");
            return 1;
        }
        policy = load_policy_csv(policy_path, p.spec.control->dim());
        ctx.policy = &policy;
        ctx.partition = &p.partition;
    }

    EstimateOptions opt;
    opt.samples = samples;
    opt.init_grid = init_grid;
    opt.threads = f.threads;
    opt.seed = f.seed;
    const SafetyEstimate est = estimate_safety(p.spec, ctx, opt);

    std::optional<double> certified;
    if (!report_path_in.empty()) certified = load_report(report_path_in).p_s;

    fs::create_directories(f.out_dir);
    const std::string est_path = (fs::path(f.out_dir) / "simulate_report.json").string();
    {
        std::ofstream out(est_path);
        out << estimate_to_json(est, f.seed, file_hash_hex(spec_path), certified);
    }
    if (traj_dump > 0) {
        std::vector<Trajectory> trajs;
        const auto grid = initial_grid(p.spec.initial_set, init_grid);
        for (int t = 0; t < traj_dump; ++t)
            trajs.push_back(simulate(p.spec, ctx, grid[static_cast<std::size_t>(t) % grid.size()],
                                     CounterRng(f.seed, static_cast<std::uint64_t>(t))));
        write_trajectories_csv(trajs, (fs::path(f.out_dir) / "trajectories.csv").string());
    }
    std::printf("p_hat = %.6f, per_init_min = %.6f, ci99 = %.6f (M = %lld)\n", est.p_hat,
                est.per_init_min, est.ci_half_width, est.samples);
    if (certified)
        std::printf("certified P_s = %.6f, soundness margin = %.6f\n", *certified,
                    est.per_init_min + 3 * est.ci_half_width - *certified);
    std::printf("report: %s\n", est_path.c_str());
    return 0;
}

int cmd_betamap(const std::string& report_path, const std::string& out_dir) {
    const RunReport report = load_report(report_path);
    fs::create_directories(out_dir);
    const std::string csv_path = (fs::path(out_dir) / "betamap.csv").string();
    write_betamap_csv(report, csv_path);
    std::printf("wrote %s\n", csv_path.c_str());
    const int n = report.regions.empty() ? 0 : static_cast<int>(report.regions.front().lower.size());
    if (n == 2) {
        const std::string svg_path = (fs::path(out_dir) / "betamap.svg").string();
        std::ofstream out(svg_path);
        out << betamap_svg(report);
        std::printf("wrote %s\n", svg_path.c_str());
    } else {
        std::printf("heatmap skipped: partition is %d-D (only 2-D partitions are drawn)\n", n);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic barrier certification and minimally-invasive control synthesis "
                 "for neural-network dynamic models"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    std::string spec_path, policy_path, report_path, lp_mode = "existential";
    long long samples = 10000;
    int init_grid = 3, traj_dump = 0;
    CommonFlags certify_f, synth_f, sim_f, bounds_f;
    std::string betamap_report, betamap_out = ".";

    auto* certify = app.add_subcommand("certify", "Synthesize a barrier certificate");
    certify->add_option("spec", spec_path, "Problem file")->required();
    add_common(certify, certify_f);

    auto* synthesize = app.add_subcommand("synthesize", "Certify, then synthesize controllers if needed");
    synthesize->add_option("spec", spec_path, "Problem file")->required();
    add_common(synthesize, synth_f);
    synthesize->add_option("--lp-mode", lp_mode, "Control LP variant: existential|robust")
        ->check(CLI::IsMember({"existential", "robust"}));

    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo safety estimate");
    simulate->add_option("spec", spec_path, "Problem file")->required();
    add_common(simulate, sim_f);
    simulate->add_option("--policy", policy_path, "Policy CSV from synthesize");
    simulate->add_option("-M,--samples", samples, "Total trajectories (default 10000)");
    simulate->add_option("--init-grid", init_grid, "Initial grid points per axis (default 3)");
    simulate->add_option("--traj", traj_dump, "Also dump this many trajectories as CSV");
    simulate->add_option("--report", report_path, "Certify/synthesize report for a soundness check");

    auto* betamap = app.add_subcommand("betamap", "Per-region beta table and heatmap from a report");
    betamap->add_option("report", betamap_report, "Report JSON")->required();
    betamap->add_option("--out", betamap_out, "Output directory (default .)");

    auto* bounds = app.add_subcommand("bounds", "Dump per-region envelopes as CSV");
    bounds->add_option("spec", spec_path, "Problem file")->required();
    add_common(bounds, bounds_f);

    CLI11_PARSE(app, argc, argv);

    try {
        if (certify->parsed()) return cmd_certify(spec_path, certify_f);
        if (synthesize->parsed()) return cmd_synthesize(spec_path, synth_f, lp_mode);
        if (simulate->parsed())
            return cmd_simulate(spec_path, sim_f, policy_path, samples, init_grid, traj_dump,
                                report_path);
        if (betamap->parsed()) return cmd_betamap(betamap_report, betamap_out);
        if (bounds->parsed()) return cmd_bounds(spec_path, bounds_f);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
