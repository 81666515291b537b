// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "helpers.hpp"

using namespace nnb;
using nnbtest::box1d;
using nnbtest::box2d;
using nnbtest::uniform_in;

TEST_CASE("partition_uniform") {
    SUBCASE("2x2 grid") {
        Eigen::VectorXd w(2);
        w << 0.5, 0.5;
        const Partition p = partition_uniform(box2d(0, 0, 1, 1), w);
        CHECK(p.size() == 4);
        CHECK(p.counts == std::vector<int>{2, 2});
    }
    SUBCASE("truncated last cell") {
        Eigen::VectorXd w(1);
        w << 0.3;
        const Partition p = partition_uniform(box1d(0, 1), w);
        REQUIRE(p.size() == 4);
        CHECK(p.regions[3].lower[0] == doctest::Approx(0.9));
        CHECK(p.regions[3].upper[0] == doctest::Approx(1.0));
        double total = 0.0;
        for (const auto& r : p.regions) total += r.upper[0] - r.lower[0];
        CHECK(total == doctest::Approx(1.0));
    }
    SUBCASE("count formula") {
        Eigen::VectorXd w(2);
        w << 0.25, 0.5;
        const Partition p = partition_uniform(box2d(-1, -1, 1, 1), w);
        CHECK(p.size() == 32);
    }
    SUBCASE("regions tile the box and lex order is deterministic") {
        Eigen::VectorXd w(2);
        w << 0.5, 1.0;
        const Partition p = partition_uniform(box2d(-1, -1, 1, 1), w);
        REQUIRE(p.size() == 8);
        // Axis 0 most significant.
        CHECK(p.regions[0].lower[0] == doctest::Approx(-1.0));
        CHECK(p.regions[0].lower[1] == doctest::Approx(-1.0));
        CHECK(p.regions[1].lower[1] == doctest::Approx(0.0));
        CHECK(p.regions[2].lower[0] == doctest::Approx(-0.5));
    }
    SUBCASE("invalid widths") {
        Eigen::VectorXd w(1);
        w << 0.0;
        CHECK_THROWS_AS(partition_uniform(box1d(0, 1), w), ValidationError);
    }
}

TEST_CASE("locate is a function and covers the box") {
    Eigen::VectorXd w(2);
    w << 0.3, 0.5;
    const Partition p = partition_uniform(box2d(0, 0, 1, 1), w);
    CounterRng rng(31, 0);

    for (int s = 0; s < 10000; ++s) {
        const Eigen::VectorXd x = uniform_in(p.source_box, rng);
        const auto idx = p.locate(x);
        REQUIRE(idx.has_value());
        // The closed region contains the point.
        CHECK(p.regions[*idx].contains(x));
        // Half-open membership: no earlier region claims it.
        for (std::size_t q = 0; q < *idx; ++q) {
            const Box& r = p.regions[q];
            bool strictly_inside = true;
            for (int i = 0; i < 2; ++i)
                strictly_inside = strictly_inside && x[i] >= r.lower[i] &&
                                  (x[i] < r.upper[i] || r.upper[i] == p.source_box.upper[i]);
            CHECK_FALSE(strictly_inside);
        }
    }

    // Global upper face is closed.
    Eigen::VectorXd corner(2);
    corner << 1.0, 1.0;
    CHECK(p.locate(corner).has_value());
    corner << 1.0 + 1e-9, 1.0;
    CHECK_FALSE(p.locate(corner).has_value());
}

TEST_CASE("box_to_polynomials") {
    SUBCASE("unit interval") {
        const auto set = box_to_polynomials(box1d(0, 1));
        REQUIRE(set.constraints.size() == 1);
        Eigen::VectorXd x(1);
        x << 0.5;
        CHECK(set.constraints[0].eval(x) == doctest::Approx(0.25));  // x(1-x)
    }
    SUBCASE("symmetric square") {
        const auto set = box_to_polynomials(box2d(-1, -1, 1, 1));
        REQUIRE(set.constraints.size() == 2);
        Eigen::VectorXd x(2);
        x << 0.0, 0.0;
        CHECK(set.constraints[0].eval(x) == doctest::Approx(1.0));
        CHECK(set.constraints[1].eval(x) == doctest::Approx(1.0));
    }
    SUBCASE("member and non-member values") {
        const auto set = box_to_polynomials(box1d(0.4, 0.6));
        Eigen::VectorXd x(1);
        x << 0.5;
        CHECK(set.constraints[0].eval(x) == doctest::Approx(0.01));
        x << 0.3;
        CHECK(set.constraints[0].eval(x) == doctest::Approx(-0.03));
    }
    SUBCASE("quadratic encoding agrees with interval membership") {
        const Box b = box2d(-0.5, 0.1, 0.25, 0.7);
        const auto set = box_to_polynomials(b);
        CounterRng rng(37, 1);
        const Box wide = box2d(-1, -1, 1, 1);
        for (int s = 0; s < 10000; ++s) {
            const Eigen::VectorXd x = uniform_in(wide, rng);
            CHECK(set.contains(x) == b.contains(x));
        }
    }
}

TEST_CASE("unsafe_decomposition") {
    SUBCASE("interval complement") {
        const auto slabs = unsafe_decomposition(box1d(-2, 2), box1d(-1, 1));
        REQUIRE(slabs.size() == 2);
        Eigen::VectorXd x(1);
        x << 1.5;
        CHECK(slabs[0].contains(x));   // x - 1 >= 0
        CHECK_FALSE(slabs[1].contains(x));
        x << -1.5;
        CHECK(slabs[1].contains(x));
    }
    SUBCASE("per-axis construction in 2-D") {
        const auto slabs = unsafe_decomposition(box2d(-2, -2, 2, 2), box2d(-1, -1, 1, 1));
        CHECK(slabs.size() == 4);
        Eigen::VectorXd pt(2);
        pt << 1.5, 0.0;
        int member_count = 0;
        for (const auto& s : slabs) member_count += s.contains(pt) ? 1 : 0;
        CHECK(member_count == 1);  // only the x1-upper slab
        CHECK(slabs[0].contains(pt));
    }
    SUBCASE("slabs and safe box cover the state space") {
        const Box state = box2d(-2, -2, 2, 2);
        const Box safe = box2d(-1, -0.5, 1, 0.75);
        const auto slabs = unsafe_decomposition(state, safe);
        CounterRng rng(41, 2);
        for (int s = 0; s < 10000; ++s) {
            const Eigen::VectorXd x = uniform_in(state, rng);
            bool covered = safe.contains(x);
            for (const auto& slab : slabs) covered = covered || slab.contains(x);
            CHECK(covered);
        }
    }
    SUBCASE("safe set must be inside the state space") {
        CHECK_THROWS_AS(unsafe_decomposition(box1d(-1, 1), box1d(-2, 2)), ValidationError);
    }
}

TEST_CASE("contains with closed boundaries") {
    const Box b = box1d(0, 1);
    Eigen::VectorXd x(1);
    x << 0.0;
    CHECK(b.contains(x));
    x << -1e-12;
    CHECK_FALSE(b.contains(x));
    x << 1.0;
    CHECK(b.contains(x));
}
