// SPDX-License-Identifier: Apache-2.0
#include "nnbarrier/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace nnb {

Box::Box(Eigen::VectorXd lo, Eigen::VectorXd hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size()) throw DimensionError("box bound lengths differ");
    if (lower.size() == 0) throw ValidationError("box", "empty dimension");
    for (Eigen::Index i = 0; i < lower.size(); ++i)
        if (!(lower[i] <= upper[i]))
            throw ValidationError("box", "lower > upper on axis " + std::to_string(i));
}

bool Box::contains(const Eigen::VectorXd& x) const {
    if (x.size() != lower.size()) throw DimensionError("point dimension != box dimension");
    return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

bool Box::contains(const Box& inner) const {
    return (inner.lower.array() >= lower.array()).all() &&
           (inner.upper.array() <= upper.array()).all();
}

Eigen::VectorXd Box::vertex(std::uint64_t mask) const {
    Eigen::VectorXd v(lower.size());
    for (Eigen::Index i = 0; i < lower.size(); ++i)
        v[i] = (mask >> i) & 1 ? upper[i] : lower[i];
    return v;
}

bool SemiAlgebraicSet::contains(const Eigen::VectorXd& x) const {
    for (const auto& h : constraints) {
        if (h.arity() != x.size()) throw DimensionError("point dimension != constraint arity");
        if (h.eval(x) < 0.0) return false;
    }
    return true;
}

Partition partition_uniform(const Box& box, const Eigen::VectorXd& widths) {
    const int n = box.dim();
    if (widths.size() != n) throw DimensionError("widths length != box dimension");
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(widths[i] > 0.0)) throw ValidationError("partition_widths", "must be strictly positive");

    Partition part;
    part.widths = widths;
    part.source_box = box;
    part.counts.resize(n);
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) {
        const double span = box.upper[i] - box.lower[i];
        // Tolerate roundoff when the width divides the span exactly (widths
        // copied from papers are often truncated decimals).
        const double ratio = span / widths[i];
        int count = std::max(1, static_cast<int>(std::ceil(ratio - 1e-6 * std::max(1.0, ratio))));
        part.counts[i] = count;
        total *= static_cast<std::size_t>(count);
    }

    part.regions.reserve(total);
    std::vector<int> idx(n, 0);
    for (std::size_t r = 0; r < total; ++r) {
        Eigen::VectorXd lo(n), hi(n);
        for (int i = 0; i < n; ++i) {
            lo[i] = box.lower[i] + idx[i] * widths[i];
            // The last cell per axis ends exactly at the box boundary.
            hi[i] = idx[i] + 1 == part.counts[i]
                        ? box.upper[i]
                        : std::min(box.upper[i], box.lower[i] + (idx[i] + 1) * widths[i]);
        }
        part.regions.emplace_back(lo, hi);
        for (int i = n - 1; i >= 0; --i) {
            if (++idx[i] < part.counts[i]) break;
            idx[i] = 0;
        }
    }
    return part;
}

std::optional<std::size_t> Partition::locate(const Eigen::VectorXd& x) const {
    const int n = source_box.dim();
    if (x.size() != n) throw DimensionError("point dimension != partition dimension");
    if (!source_box.contains(x)) return std::nullopt;
    std::size_t index = 0;
    for (int i = 0; i < n; ++i) {
        int k = static_cast<int>(std::floor((x[i] - source_box.lower[i]) / widths[i]));
        k = std::clamp(k, 0, counts[i] - 1);
        // Half-open cells: a point on an interior upper face belongs to the
        // next cell, except on the global upper face.
        if (k + 1 < counts[i] && x[i] >= source_box.lower[i] + (k + 1) * widths[i]) ++k;
        index = index * static_cast<std::size_t>(counts[i]) + static_cast<std::size_t>(k);
    }
    return index;
}

SemiAlgebraicSet box_to_polynomials(const Box& box) {
    const int n = box.dim();
    SemiAlgebraicSet set;
    set.constraints.reserve(n);
    for (int i = 0; i < n; ++i) {
        // (x_i - l)(u - x_i) = -x_i^2 + (l+u) x_i - l*u
        Polynomial h(n);
        Exponents sq(n, 0), lin(n, 0), one(n, 0);
        sq[i] = 2;
        lin[i] = 1;
        h.add_term(sq, -1.0);
        h.add_term(lin, box.lower[i] + box.upper[i]);
        h.add_term(one, -box.lower[i] * box.upper[i]);
        set.constraints.push_back(std::move(h));
    }
    return set;
}

std::vector<SemiAlgebraicSet> unsafe_decomposition(const Box& state_space, const Box& safe) {
    if (!state_space.contains(safe)) throw ValidationError("safe_set", "not contained in state space");
    const int n = safe.dim();
    std::vector<SemiAlgebraicSet> slabs;
    slabs.reserve(2 * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Exponents lin(n, 0), one(n, 0);
        lin[i] = 1;
        {
            // x_i - upper_i >= 0
            Polynomial h(n);
            h.add_term(lin, 1.0);
            h.add_term(one, -safe.upper[i]);
            slabs.push_back(SemiAlgebraicSet{{std::move(h)}});
        }
        {
            // lower_i - x_i >= 0
            Polynomial h(n);
            h.add_term(lin, -1.0);
            h.add_term(one, safe.lower[i]);
            slabs.push_back(SemiAlgebraicSet{{std::move(h)}});
        }
    }
    return slabs;
}

}  // namespace nnb
