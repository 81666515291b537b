// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "nnbarrier/polynomial.hpp"

namespace nnb {

// Axis-aligned box, lower <= upper element-wise.
struct Box {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    Box() = default;
    Box(Eigen::VectorXd lo, Eigen::VectorXd hi);

    int dim() const { return static_cast<int>(lower.size()); }
    bool contains(const Eigen::VectorXd& x) const;
    bool contains(const Box& inner) const;
    Eigen::VectorXd center() const { return 0.5 * (lower + upper); }
    Eigen::VectorXd widths() const { return upper - lower; }
    // Vertex selected by bit i of mask: 0 -> lower_i, 1 -> upper_i.
    Eigen::VectorXd vertex(std::uint64_t mask) const;
};

// {x : h_i(x) >= 0 for all i}.
struct SemiAlgebraicSet {
    std::vector<Polynomial> constraints;

    int arity() const { return constraints.empty() ? 0 : constraints.front().arity(); }
    bool contains(const Eigen::VectorXd& x) const;
};

// Uniform axis-aligned grid over source_box. Cells are ordered
// lexicographically by their per-axis indices (axis 0 most significant);
// the last cell on each axis is truncated to the box boundary.
struct Partition {
    std::vector<Box> regions;
    Eigen::VectorXd widths;
    Box source_box;
    // Cell count per axis.
    std::vector<int> counts;

    std::size_t size() const { return regions.size(); }

    // Index of the half-open cell [l, u) containing x (closed at the global
    // upper face), or nullopt outside the source box. This makes membership
    // a function even on interior cell faces.
    std::optional<std::size_t> locate(const Eigen::VectorXd& x) const;
};

Partition partition_uniform(const Box& box, const Eigen::VectorXd& widths);

// One quadratic constraint (x_i - l_i)(u_i - x_i) >= 0 per axis.
SemiAlgebraicSet box_to_polynomials(const Box& box);

// Complement of the safe box as 2n half-space slabs
// {x_i >= safe.upper_i} and {x_i <= safe.lower_i}, each a single linear
// polynomial >= 0. Their union covers R^n \ safe.
std::vector<SemiAlgebraicSet> unsafe_decomposition(const Box& state_space, const Box& safe);

}  // namespace nnb
