// SPDX-License-Identifier: Apache-2.0
#include "nnbarrier/relax.hpp"

#include <thread>

#include "nnbarrier/error.hpp"

namespace nnb {

const char* to_string(BoundMode m) {
    return m == BoundMode::Interval ? "interval" : "linear";
}

BoundMode bound_mode_from_string(const std::string& s) {
    if (s == "interval") return BoundMode::Interval;
    if (s == "linear") return BoundMode::Linear;
    throw ValidationError("bounds", "unknown bound mode '" + s + "'");
}

namespace {

struct Interval {
    Eigen::VectorXd lo, hi;
};

// Affine image of an interval, splitting W into positive and negative parts.
Interval affine_interval(const Eigen::MatrixXd& W, const Eigen::VectorXd& b, const Interval& in) {
    const Eigen::MatrixXd Wp = W.cwiseMax(0.0);
    const Eigen::MatrixXd Wn = W.cwiseMin(0.0);
    return {Wp * in.lo + Wn * in.hi + b, Wp * in.hi + Wn * in.lo + b};
}

// Pre-activation interval of every layer (before its activation).
std::vector<Interval> preactivation_intervals(const NeuralNetwork& net, const Box& region) {
    std::vector<Interval> pre;
    pre.reserve(net.layers.size());
    Interval a{region.lower, region.upper};
    for (const auto& l : net.layers) {
        Interval z = affine_interval(l.weight, l.bias, a);
        pre.push_back(z);
        a = z;
        if (l.activation == Activation::Relu) {
            a.lo = a.lo.cwiseMax(0.0);
            a.hi = a.hi.cwiseMax(0.0);
        }
    }
    return pre;
}

}  // namespace

IntervalEnvelope ibp(const NeuralNetwork& net, const Box& region) {
    if (region.dim() != net.dim_in()) throw DimensionError("region dimension != network input");
    auto pre = preactivation_intervals(net, region);
    Interval out = pre.back();
    if (net.layers.back().activation == Activation::Relu) {
        out.lo = out.lo.cwiseMax(0.0);
        out.hi = out.hi.cwiseMax(0.0);
    }
    return {out.lo, out.hi, region};
}

LinearEnvelope crown(const NeuralNetwork& net, const Box& region) {
    if (region.dim() != net.dim_in()) throw DimensionError("region dimension != network input");
    const auto pre = preactivation_intervals(net, region);
    const int n_out = net.dim_out();

    // Current bounds on the network output as affine functions of layer k's
    // post-activation, maintained while walking layers backward.
    Eigen::MatrixXd Au = Eigen::MatrixXd::Identity(n_out, n_out);
    Eigen::MatrixXd Al = Au;
    Eigen::VectorXd bu = Eigen::VectorXd::Zero(n_out);
    Eigen::VectorXd bl = bu;

    for (int k = static_cast<int>(net.layers.size()) - 1; k >= 0; --k) {
        const auto& layer = net.layers[k];
        if (layer.activation == Activation::Relu) {
            const Interval& z = pre[static_cast<std::size_t>(k)];
            const Eigen::Index width = z.lo.size();
            // Per-neuron relaxation a(z): upper chord (su, cu), lower line (sl, 0).
            Eigen::VectorXd su(width), cu(width), sl(width);
            for (Eigen::Index j = 0; j < width; ++j) {
                const double l = z.lo[j], u = z.hi[j];
                if (l >= 0.0) {
                    su[j] = 1.0; cu[j] = 0.0; sl[j] = 1.0;
                } else if (u <= 0.0) {
                    su[j] = 0.0; cu[j] = 0.0; sl[j] = 0.0;
                } else {
                    const double s = u / (u - l);
                    su[j] = s;
                    cu[j] = -s * l;
                    sl[j] = (u >= -l) ? 1.0 : 0.0;
                }
            }
            // Positive coefficients take the bounding line on their own side,
            // negative ones take the opposite side.
            Eigen::MatrixXd nAu(n_out, width), nAl(n_out, width);
            for (Eigen::Index i = 0; i < n_out; ++i) {
                for (Eigen::Index j = 0; j < width; ++j) {
                    const double au = Au(i, j), al = Al(i, j);
                    if (au >= 0.0) {
                        nAu(i, j) = au * su[j];
                        bu[i] += au * cu[j];
                    } else {
                        nAu(i, j) = au * sl[j];
                    }
                    if (al >= 0.0) {
                        nAl(i, j) = al * sl[j];
                    } else {
                        nAl(i, j) = al * su[j];
                        bl[i] += al * cu[j];
                    }
                }
            }
            Au = std::move(nAu);
            Al = std::move(nAl);
        }
        bu += Au * layer.bias;
        bl += Al * layer.bias;
        Au = (Au * layer.weight).eval();
        Al = (Al * layer.weight).eval();
    }
    return {Al, bl, Au, bu, region};
}

IntervalEnvelope envelope_extremes(const LinearEnvelope& env) {
    const auto& lo = env.region.lower;
    const auto& hi = env.region.upper;
    const Eigen::Index n_out = env.b_up.size();
    Eigen::VectorXd out_lo(n_out), out_hi(n_out);
    for (Eigen::Index i = 0; i < n_out; ++i) {
        double mn = env.b_low[i], mx = env.b_up[i];
        for (Eigen::Index j = 0; j < lo.size(); ++j) {
            mn += env.A_low(i, j) * (env.A_low(i, j) >= 0.0 ? lo[j] : hi[j]);
            mx += env.A_up(i, j) * (env.A_up(i, j) >= 0.0 ? hi[j] : lo[j]);
        }
        out_lo[i] = mn;
        out_hi[i] = mx;
    }
    return {out_lo, out_hi, env.region};
}

LinearEnvelope bound_region(const NeuralNetwork& net, const Box& region, BoundMode mode) {
    const IntervalEnvelope iv = ibp(net, region);
    const Eigen::Index n_out = iv.lo.size();
    if (mode == BoundMode::Interval) {
        return {Eigen::MatrixXd::Zero(n_out, region.dim()), iv.lo,
                Eigen::MatrixXd::Zero(n_out, region.dim()), iv.hi, region};
    }
    LinearEnvelope env = crown(net, region);
    const IntervalEnvelope ext = envelope_extremes(env);
    for (Eigen::Index i = 0; i < n_out; ++i) {
        if (ext.hi[i] > iv.hi[i]) {
            env.A_up.row(i).setZero();
            env.b_up[i] = iv.hi[i];
        }
        if (ext.lo[i] < iv.lo[i]) {
            env.A_low.row(i).setZero();
            env.b_low[i] = iv.lo[i];
        }
    }
    return env;
}

std::vector<LinearEnvelope> bound_partition(const NeuralNetwork& net, const Partition& partition,
                                            BoundMode mode, int threads) {
    std::vector<LinearEnvelope> out(partition.size());
    const std::size_t count = partition.size();
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) out[i] = bound_region(net, partition.regions[i], mode);
        return out;
    }
    std::vector<std::thread> workers;
    std::size_t num_workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    for (std::size_t w = 0; w < num_workers; ++w) {
        workers.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += num_workers)
                out[i] = bound_region(net, partition.regions[i], mode);
        });
    }
    for (auto& t : workers) t.join();
    return out;
}

}  // namespace nnb
