// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include <Eigen/Dense>

#include "nnbarrier/geometry.hpp"
#include "nnbarrier/network.hpp"

namespace nnb {

enum class BoundMode { Interval, Linear };

const char* to_string(BoundMode m);
BoundMode bound_mode_from_string(const std::string& s);

// Constant output bounds over a region: lo <= f(x) <= hi for all x in region.
struct IntervalEnvelope {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
    Box region;
};

// Affine output bounds over a region:
//   A_low x + b_low <= f(x) <= A_up x + b_up   for all x in region.
struct LinearEnvelope {
    Eigen::MatrixXd A_low;
    Eigen::VectorXd b_low;
    Eigen::MatrixXd A_up;
    Eigen::VectorXd b_up;
    Box region;

    Eigen::VectorXd lower_at(const Eigen::VectorXd& x) const { return A_low * x + b_low; }
    Eigen::VectorXd upper_at(const Eigen::VectorXd& x) const { return A_up * x + b_up; }
};

// Forward interval arithmetic through every layer; sound by construction.
IntervalEnvelope ibp(const NeuralNetwork& net, const Box& region);

// Backward linear relaxation. Pre-activation intervals come from ibp on
// truncated subnets; unstable relus are relaxed above by the chord
// u/(u-l) (x - l) and below by alpha * x with alpha = 1 if u >= |l| else 0.
LinearEnvelope crown(const NeuralNetwork& net, const Box& region);

// Extreme values of the affine bounds over the region (attained at box
// vertices, resolved by coefficient signs).
IntervalEnvelope envelope_extremes(const LinearEnvelope& env);

// mode = Interval: constant envelope (A = 0) from ibp.
// mode = Linear: crown output, with any component whose extreme value is
// looser than the ibp interval replaced by the constant ibp bound, so the
// result is element-wise at least as tight as ibp.
LinearEnvelope bound_region(const NeuralNetwork& net, const Box& region, BoundMode mode);

std::vector<LinearEnvelope> bound_partition(const NeuralNetwork& net, const Partition& partition,
                                            BoundMode mode, int threads = 1);

}  // namespace nnb
