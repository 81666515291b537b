// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "helpers.hpp"
#include "nnbarrier/sos.hpp"

using namespace nnb;
using nnbtest::box1d;

namespace {

Polynomial poly1(const std::string& text) { return Polynomial::parse(text, 1); }

}  // namespace

TEST_CASE("new_sos_var basis shapes") {
    SosProgram prog;
    const SosVar& a = prog.new_sos_var(1, 2);
    CHECK(a.gram_dim == 2);  // {1, x}
    const SosVar& b = prog.new_sos_var(2, 4);
    CHECK(b.gram_dim == 6);  // monomials of degree <= 2 in two variables
    const SosVar& c = prog.new_sos_var(5, 0);
    CHECK(c.gram_dim == 1);  // a single nonnegative scalar
    CHECK_THROWS_AS(prog.new_sos_var(1, 3), ValidationError);
}

TEST_CASE("default multiplier degree") {
    CHECK(SosProgram::default_multiplier_degree(4, 2) == 2);
    CHECK(SosProgram::default_multiplier_degree(4, 1) == 2);
    CHECK(SosProgram::default_multiplier_degree(2, 2) == 0);
    CHECK(SosProgram::default_multiplier_degree(2, 3) == 0);
}

TEST_CASE("assert_sos feasibility matches polynomial nonnegativity") {
    InteriorPointSolver backend;
    SUBCASE("(x+1)^2 is certified with the expected Gram") {
        SosProgram prog;
        prog.assert_sos(PolyExpr::from(poly1("1*x1^2 + 2*x1 + 1")), "square");
        const SosSolution sol = prog.solve(backend);
        REQUIRE(sol.status == SosStatus::Optimal);
        const Eigen::MatrixXd& Q = sol.gram[0];
        CHECK(Q(0, 0) == doctest::Approx(1.0).epsilon(1e-5));
        CHECK(Q(0, 1) == doctest::Approx(1.0).epsilon(1e-5));
        CHECK(Q(1, 1) == doctest::Approx(1.0).epsilon(1e-5));
    }
    SUBCASE("x is not SOS") {
        SosProgram prog;
        prog.assert_sos(PolyExpr::from(poly1("1*x1")), "odd");
        CHECK(prog.solve(backend).status == SosStatus::Infeasible);
    }
    SUBCASE("x^2 - 3x + 2 is negative at 1.5 and rejected") {
        const Polynomial p = poly1("1*x1^2 - 3*x1 + 2");
        Eigen::VectorXd witness(1);
        witness << 1.5;
        CHECK(p.eval(witness) < 0.0);
        SosProgram prog;
        prog.assert_sos(PolyExpr::from(p), "negative");
        CHECK(prog.solve(backend).status == SosStatus::Infeasible);
    }
    SUBCASE("explicit certificate degree rejects oversized monomials") {
        SosProgram prog;
        CHECK_THROWS_AS(prog.assert_sos(PolyExpr::from(poly1("1*x1^4")), "too-big", 2),
                        ValidationError);
    }
}

TEST_CASE("putinar_block certifies nonnegativity on sets") {
    InteriorPointSolver backend;
    SUBCASE("gamma = 1 on any set") {
        SosProgram prog;
        PolyExpr expr = prog.putinar_block(PolyExpr::from(Polynomial::constant(1, 1.0)),
                                           box_to_polynomials(box1d(0, 1)), 0);
        prog.assert_sos(std::move(expr), "one");
        CHECK(prog.solve(backend).status == SosStatus::Optimal);
    }
    SUBCASE("gamma = x on {x >= 0} with degree-0 multiplier") {
        SosProgram prog;
        SemiAlgebraicSet set;
        set.constraints.push_back(poly1("1*x1"));
        PolyExpr expr = prog.putinar_block(PolyExpr::from(poly1("1*x1")), set, 0);
        prog.assert_sos(std::move(expr), "x-on-halfline");
        const SosSolution sol = prog.solve(backend);
        REQUIRE(sol.status == SosStatus::Optimal);
        // lambda = 1 reproduces x = 0 + 1*x.
        CHECK(sol.gram[0](0, 0) == doctest::Approx(1.0).epsilon(1e-4));
    }
    SUBCASE("0.25 - (x-0.5)^2 on [0,1] via h = x(1-x)") {
        SosProgram prog;
        PolyExpr expr = prog.putinar_block(PolyExpr::from(poly1("-1*x1^2 + 1*x1")),
                                           box_to_polynomials(box1d(0, 1)), 0);
        prog.assert_sos(std::move(expr), "parabola");
        const SosSolution sol = prog.solve(backend);
        REQUIRE(sol.status == SosStatus::Optimal);
        CHECK(sol.gram[0](0, 0) == doctest::Approx(1.0).epsilon(1e-4));
    }
    SUBCASE("x not nonnegative on [-1,1]") {
        SosProgram prog;
        PolyExpr expr =
            prog.putinar_block(PolyExpr::from(poly1("1*x1")), box_to_polynomials(box1d(-1, 1)), 0);
        prog.assert_sos(std::move(expr), "sign-changing");
        CHECK(prog.solve(backend).status == SosStatus::Infeasible);
    }
}

TEST_CASE("compile shapes") {
    SUBCASE("one free SOS variable, no constraints") {
        SosProgram prog;
        prog.new_sos_var(1, 2);
        const CompiledProgram cp = prog.compile();
        CHECK(cp.conic.block_sizes == std::vector<int>{2});
        CHECK(cp.conic.rows.empty());
    }
    SUBCASE("assert_sos(x^2+2x+1) produces one row per spanned monomial") {
        SosProgram prog;
        prog.assert_sos(PolyExpr::from(poly1("1*x1^2 + 2*x1 + 1")), "sq");
        const CompiledProgram cp = prog.compile();
        CHECK(cp.conic.rows.size() == 3);  // coefficients of 1, x, x^2
    }
    SUBCASE("a scalar shared between two constraints appears in both row groups") {
        SosProgram prog;
        const VarId beta = prog.add_scalar("beta", 0.0, 1.0);
        for (int c = 0; c < 2; ++c) {
            PolyExpr expr = PolyExpr::from(Polynomial::constant(1, 1.0));
            PolyExpr bterm(1);
            bterm.add({0}, LinExpr::var(beta));
            expr += bterm;
            prog.assert_sos(std::move(expr), "c" + std::to_string(c));
        }
        const CompiledProgram cp = prog.compile();
        // Find beta's block: two certificate Grams then the scalar block.
        const int beta_block = 2;
        int appearances = 0;
        for (std::size_t i = 0; i < cp.conic.rows.size(); ++i)
            for (const auto& e : cp.conic.rows[i].entries)
                if (e.block == beta_block && cp.row_labels[i].rfind("bound", 0) != 0) ++appearances;
        CHECK(appearances == 2);
    }
    SUBCASE("compilation is deterministic byte-for-byte") {
        auto build = [] {
            SosProgram prog;
            const VarId s = prog.add_scalar("s", 0.0, 2.0);
            PolyExpr expr = PolyExpr::from(poly1("1*x1^2 + 0.25"));
            PolyExpr term(1);
            term.add({0}, LinExpr::var(s, -1.0));
            expr += term;
            prog.assert_sos(std::move(expr), "c");
            prog.minimize(LinExpr::var(s));
            return prog.compile().conic.dump();
        };
        CHECK(build() == build());
    }
}

TEST_CASE("solve") {
    InteriorPointSolver backend;
    SUBCASE("minimize a bounded scalar subject to membership") {
        SosProgram prog;
        const VarId beta = prog.add_scalar("beta", 0.0, 1.0);
        PolyExpr expr(1);
        expr.add({0}, LinExpr::var(beta));
        prog.assert_sos(std::move(expr), "beta-nonneg");
        prog.minimize(LinExpr::var(beta));
        const SosSolution sol = prog.solve(backend);
        REQUIRE(sol.status == SosStatus::Optimal);
        CHECK(sol.scalar_values[0] == doctest::Approx(0.0).epsilon(1e-6));
    }
    SUBCASE("certify x^2+1 with Gram near the identity") {
        SosProgram prog;
        prog.assert_sos(PolyExpr::from(poly1("1*x1^2 + 1")), "shifted");
        const SosSolution sol = prog.solve(backend);
        REQUIRE(sol.status == SosStatus::Optimal);
        CHECK(sol.gram[0](0, 0) == doctest::Approx(1.0).epsilon(1e-5));
        CHECK(sol.gram[0](1, 1) == doctest::Approx(1.0).epsilon(1e-5));
        CHECK(sol.gram[0](0, 1) == doctest::Approx(0.0).epsilon(1e-5));
        CHECK(sol.max_eq_residual <= 1e-6);
        CHECK(sol.min_gram_eig >= -1e-7);
    }
    SUBCASE("round-trip: random PSD Gram polynomials are recovered") {
        CounterRng rng(47, 0);
        for (int trial = 0; trial < 10; ++trial) {
            const int arity = 1 + static_cast<int>(rng.next_u64() % 2);
            const int degree = 2 + 2 * static_cast<int>(rng.next_u64() % 2);
            SosProgram shape;
            const SosVar& v = shape.new_sos_var(arity, degree);
            Eigen::MatrixXd L(v.gram_dim, v.gram_dim);
            for (int i = 0; i < L.size(); ++i)
                L(i / v.gram_dim, i % v.gram_dim) = 2.0 * rng.next_unit() - 1.0;
            const Eigen::MatrixXd Q = L * L.transpose();
            Polynomial target(arity);
            for (int i = 0; i < v.gram_dim; ++i)
                for (int j = 0; j < v.gram_dim; ++j) {
                    Exponents e(static_cast<std::size_t>(arity));
                    for (int k = 0; k < arity; ++k)
                        e[static_cast<std::size_t>(k)] =
                            v.basis[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] +
                            v.basis[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
                    target.add_term(e, Q(i, j));
                }
            SosProgram prog;
            prog.assert_sos(PolyExpr::from(target), "roundtrip", degree);
            const SosSolution sol = prog.solve(backend);
            REQUIRE(sol.status == SosStatus::Optimal);
            // Recovered coefficients match the inputs within 1e-6.
            Polynomial recovered(arity);
            const SosVar& cert = prog.sos_vars()[0];
            for (int i = 0; i < cert.gram_dim; ++i)
                for (int j = 0; j < cert.gram_dim; ++j) {
                    Exponents e(static_cast<std::size_t>(arity));
                    for (int k = 0; k < arity; ++k)
                        e[static_cast<std::size_t>(k)] =
                            cert.basis[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] +
                            cert.basis[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
                    recovered.add_term(e, sol.gram[0](i, j));
                }
            for (const auto& [e, c] : target.terms())
                CHECK(recovered.coefficient(e) == doctest::Approx(c).epsilon(1e-6));
        }
    }
}

TEST_CASE("check_certificate") {
    InteriorPointSolver backend;
    CounterRng rng(1, 1);
    SUBCASE("valid certificate has no flags") {
        SosProgram prog;
        prog.assert_sos(PolyExpr::from(poly1("1*x1^2 + 1")), "ok");
        const SosSolution sol = prog.solve(backend);
        REQUIRE(sol.status == SosStatus::Optimal);
        const auto report = prog.check_certificate(sol, {box1d(-2, 2)}, 500, rng);
        CHECK(report.ok());
        CHECK(report.min_sample_value >= -1e-6);
    }
    SUBCASE("perturbing a boundary Gram raises an eigenvalue flag") {
        // (x+1)^2 has the rank-one Gram [[1,1],[1,1]]; a -1e-3 diagonal
        // perturbation pushes an eigenvalue negative.
        SosProgram prog;
        prog.assert_sos(PolyExpr::from(poly1("1*x1^2 + 2*x1 + 1")), "boundary");
        SosSolution sol = prog.solve(backend);
        REQUIRE(sol.status == SosStatus::Optimal);
        sol.gram[0](0, 0) -= 1e-3;
        sol.gram[0](1, 1) -= 1e-3;
        const auto report = prog.check_certificate(sol, {box1d(-2, 2)}, 500, rng);
        CHECK_FALSE(report.ok());
        bool eig_flag = false;
        for (const auto& f : report.flags) eig_flag = eig_flag || f.what == "negative eigenvalue";
        CHECK(eig_flag);
    }
}

TEST_CASE("conic dump format") {
    SosProgram prog;
    prog.add_scalar("s", 0.0, 1.0);
    const CompiledProgram cp = prog.compile();
    const std::string dump = cp.conic.dump();
    CHECK(dump.rfind("conic-sdp 1\n", 0) == 0);
    CHECK(dump.find("blocks 2 : 1 1") != std::string::npos);  // scalar + slack
    CHECK(dump.find("rows 1") != std::string::npos);          // upper bound row
}
