// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <vector>

#include "nnbarrier/network.hpp"
#include "nnbarrier/polynomial.hpp"
#include "nnbarrier/rng.hpp"

namespace nnbtest {

using namespace nnb;

inline Eigen::VectorXd uniform_in(const Box& box, CounterRng& rng) {
    Eigen::VectorXd x(box.dim());
    for (int i = 0; i < box.dim(); ++i)
        x[i] = box.lower[i] + (box.upper[i] - box.lower[i]) * rng.next_unit();
    return x;
}

inline Polynomial random_polynomial(int arity, int degree, CounterRng& rng, int terms = 12) {
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

// Random relu network R^n -> R^n; weight scale < 1/width keeps it stable.
inline NeuralNetwork random_network(int n, int hidden_layers, int width, CounterRng& rng,
                                    double gain = 1.0) {
    NeuralNetwork net;
    int in = n;
    for (int l = 0; l < hidden_layers; ++l) {
        Layer layer;
        layer.weight.resize(width, in);
        layer.bias.resize(width);
        const double scale = gain / std::sqrt(static_cast<double>(in));
        for (int r = 0; r < width; ++r) {
            for (int c = 0; c < in; ++c) layer.weight(r, c) = scale * (2.0 * rng.next_unit() - 1.0);
            layer.bias[r] = 0.1 * (2.0 * rng.next_unit() - 1.0);
        }
        layer.activation = Activation::Relu;
        net.layers.push_back(std::move(layer));
        in = width;
    }
    Layer out;
    out.weight.resize(n, in);
    out.bias.resize(n);
    const double scale = gain / std::sqrt(static_cast<double>(in));
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < in; ++c) out.weight(r, c) = scale * (2.0 * rng.next_unit() - 1.0);
        out.bias[r] = 0.05 * (2.0 * rng.next_unit() - 1.0);
    }
    out.activation = Activation::Identity;
    net.layers.push_back(std::move(out));
    return net;
}

// f(x) = scale * x realized exactly by a relu pair per coordinate.
inline NeuralNetwork scaling_network(int n, double scale) {
    NeuralNetwork net;
    Layer l1;
    l1.weight = Eigen::MatrixXd::Zero(2 * n, n);
    for (int i = 0; i < n; ++i) {
        l1.weight(i, i) = 1.0;
        l1.weight(n + i, i) = -1.0;
    }
    l1.bias = Eigen::VectorXd::Zero(2 * n);
    l1.activation = Activation::Relu;
    Layer l2;
    l2.weight = Eigen::MatrixXd::Zero(n, 2 * n);
    for (int i = 0; i < n; ++i) {
        l2.weight(i, i) = scale;
        l2.weight(i, n + i) = -scale;
    }
    l2.bias = Eigen::VectorXd::Zero(n);
    l2.activation = Activation::Identity;
    net.layers.push_back(std::move(l1));
    net.layers.push_back(std::move(l2));
    return net;
}

// f(x) = x + c via relu pair (exact for all x).
inline NeuralNetwork drift_network_1d(double c) {
    NeuralNetwork net;
    Layer l1;
    l1.weight.resize(2, 1);
    l1.weight << 1.0, -1.0;
    l1.bias.resize(2);
    l1.bias << c, -c;
    l1.activation = Activation::Relu;
    Layer l2;
    l2.weight.resize(1, 2);
    l2.weight << 1.0, -1.0;
    l2.bias = Eigen::VectorXd::Zero(1);
    l2.activation = Activation::Identity;
    net.layers.push_back(std::move(l1));
    net.layers.push_back(std::move(l2));
    return net;
}

inline Box box1d(double lo, double hi) {
    Eigen::VectorXd l(1), u(1);
    l << lo;
    u << hi;
    return Box(l, u);
}

inline Box box2d(double l1, double l2, double u1, double u2) {
    Eigen::VectorXd lo(2), hi(2);
    lo << l1, l2;
    hi << u1, u2;
    return Box(lo, hi);
}

}  // namespace nnbtest
