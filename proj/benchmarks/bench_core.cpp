// SPDX-License-Identifier: Apache-2.0
//
// Microbenchmarks for the hot paths: polynomial algebra, per-region bound
// propagation, region-level SOS solves, the control LP, and trajectory
// sampling.

#include <benchmark/benchmark.h>

#include "nnbarrier/barrier.hpp"
#include "nnbarrier/control.hpp"
#include "nnbarrier/sim.hpp"

using namespace nnb;

namespace {

Polynomial random_poly(int arity, int degree, CounterRng& rng, int terms) {
    Polynomial p(arity);
    for (int t = 0; t < terms; ++t) {
        Exponents e(static_cast<std::size_t>(arity), 0);
        int budget = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(degree + 1));
        for (int i = 0; i < arity && budget > 0; ++i) {
            const int k = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(budget + 1));
            e[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(k);
            budget -= k;
        }
        p.add_term(e, 2.0 * rng.next_unit() - 1.0);
    }
    return p;
}

NeuralNetwork bench_network(int n, int layers, int width, CounterRng& rng) {
    NeuralNetwork net;
    int in = n;
    for (int l = 0; l <= layers; ++l) {
        const int out = l == layers ? n : width;
        Layer layer;
        layer.weight.resize(out, in);
        layer.bias = Eigen::VectorXd::Zero(out);
        for (int i = 0; i < layer.weight.size(); ++i)
            layer.weight(i / in, i % in) =
                (2.0 * rng.next_unit() - 1.0) / std::sqrt(static_cast<double>(in));
        layer.activation = l == layers ? Activation::Identity : Activation::Relu;
        net.layers.push_back(std::move(layer));
        in = out;
    }
    return net;
}

void BM_polynomial_multiply(benchmark::State& state) {
    CounterRng rng(1, 0);
    const Polynomial a = random_poly(4, 4, rng, 20);
    const Polynomial b = random_poly(4, 4, rng, 20);
    for (auto _ : state) benchmark::DoNotOptimize(a * b);
}
BENCHMARK(BM_polynomial_multiply);

void BM_expect_shifted(benchmark::State& state) {
    CounterRng rng(2, 0);
    const Polynomial B = random_poly(2, static_cast<int>(state.range(0)), rng, 15);
    const Eigen::VectorXd var = Eigen::VectorXd::Constant(2, 1e-4);
    for (auto _ : state) benchmark::DoNotOptimize(expect_shifted(B, var));
}
BENCHMARK(BM_expect_shifted)->Arg(4)->Arg(6);

void BM_crown_region(benchmark::State& state) {
    CounterRng rng(3, 0);
    const NeuralNetwork net = bench_network(2, static_cast<int>(state.range(0)), 64, rng);
    const Box region(Eigen::VectorXd::Constant(2, -0.1), Eigen::VectorXd::Constant(2, 0.1));
    for (auto _ : state) benchmark::DoNotOptimize(bound_region(net, region, BoundMode::Linear));
}
BENCHMARK(BM_crown_region)->Arg(1)->Arg(3);

void BM_eval_beta_region(benchmark::State& state) {
    const Polynomial B = Polynomial::parse("1*x1^2 + 1*x2^2", 2);
    const Box region(Eigen::VectorXd::Constant(2, 0.0), Eigen::VectorXd::Constant(2, 0.5));
    LinearEnvelope env;
    env.region = region;
    env.A_low = env.A_up = 0.5 * Eigen::MatrixXd::Identity(2, 2);
    env.b_low = env.b_up = Eigen::VectorXd::Zero(2);
    GaussianNoise noise{Eigen::VectorXd::Constant(2, 1e-4)};
    InteriorPointSolver backend;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            eval_beta_region(B, region, env, noise, BoundMode::Linear, backend));
}
BENCHMARK(BM_eval_beta_region);

void BM_control_lp(benchmark::State& state) {
    const Box region(Eigen::VectorXd::Constant(1, 0.4), Eigen::VectorXd::Constant(1, 0.6));
    LinearEnvelope env;
    env.region = region;
    env.A_low = env.A_up = 0.5 * Eigen::MatrixXd::Identity(1, 1);
    env.b_low = env.b_up = Eigen::VectorXd::Zero(1);
    const Eigen::MatrixXd g = Eigen::MatrixXd::Identity(1, 1);
    const Eigen::VectorXd lo = -Eigen::VectorXd::Ones(1), hi = Eigen::VectorXd::Ones(1);
    const Eigen::VectorXd x_star = Eigen::VectorXd::Zero(1);
    for (auto _ : state)
        benchmark::DoNotOptimize(synthesize_control_lp(x_star, region, env, g, lo, hi));
}
BENCHMARK(BM_control_lp);

void BM_trajectory(benchmark::State& state) {
    ProblemSpec spec;
    CounterRng rng(4, 0);
    spec.network = bench_network(2, 1, 32, rng);
    spec.noise.variances = Eigen::VectorXd::Constant(2, 1e-4);
    spec.state_space = Box(Eigen::VectorXd::Constant(2, -2.0), Eigen::VectorXd::Constant(2, 2.0));
    spec.safe_set = Box(Eigen::VectorXd::Constant(2, -1.0), Eigen::VectorXd::Constant(2, 1.0));
    spec.initial_set =
        Box(Eigen::VectorXd::Constant(2, -0.1), Eigen::VectorXd::Constant(2, 0.1));
    spec.horizon = 10;
    spec.threshold = 0.9;
    spec.barrier_degree = 2;
    spec.eta_step = 0.05;
    spec.partition_widths = Eigen::VectorXd::Constant(2, 0.5);
    spec.validate();
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2);
    std::uint64_t stream = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate(spec, {}, x0, CounterRng(0, stream++)));
}
BENCHMARK(BM_trajectory);

}  // namespace

BENCHMARK_MAIN();
