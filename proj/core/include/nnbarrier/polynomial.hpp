// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nnbarrier/error.hpp"

namespace nnb {

// Exponent vector of a monomial; length equals the polynomial arity.
using Exponents = std::vector<std::uint32_t>;

inline int total_degree(const Exponents& e) {
    int d = 0;
    for (auto k : e) d += static_cast<int>(k);
    return d;
}

// Graded lexicographic order: lower total degree first, then lexicographic.
struct GradedLexLess {
    bool operator()(const Exponents& a, const Exponents& b) const {
        int da = total_degree(a), db = total_degree(b);
        if (da != db) return da < db;
        return a < b;
    }
};

using TermMap = std::map<Exponents, double, GradedLexLess>;

// Sparse multivariate polynomial with real coefficients.
//
// Terms with |coefficient| < kCoeffEpsilon are dropped after every arithmetic
// operation; the threshold is far below any certified tolerance in this
// project (those are >= 1e-7).
class Polynomial {
public:
    static constexpr double kCoeffEpsilon = 1e-14;

    explicit Polynomial(int arity) : arity_(arity) {
        if (arity < 0) throw DimensionError("polynomial arity must be nonnegative");
    }

    static Polynomial zero(int arity) { return Polynomial(arity); }
    static Polynomial constant(int arity, double c);
    // x_index, 0-based.
    static Polynomial variable(int arity, int index);
    static Polynomial monomial(Exponents exponents, double coeff);

    int arity() const { return arity_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    // Total degree; the zero polynomial has degree 0.
    int degree() const;

    double coefficient(const Exponents& e) const;
    // Accumulates c onto the monomial, pruning near-zero results.
    void add_term(const Exponents& e, double c);

    Polynomial& operator+=(const Polynomial& rhs);
    Polynomial& operator-=(const Polynomial& rhs);
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(double c, const Polynomial& p) { return p.scaled(c); }
    friend Polynomial operator*(const Polynomial& p, double c) { return p.scaled(c); }
    friend Polynomial operator-(const Polynomial& p) { return p.scaled(-1.0); }
    Polynomial scaled(double c) const;

    double eval(const Eigen::VectorXd& x) const;

    // Partial derivatives, one polynomial per variable.
    std::vector<Polynomial> gradient() const;

    // p(M z + c): substitutes every variable by an affine form of the new
    // variables z. M is arity x new_arity, c has length arity.
    Polynomial substitute_affine(const Eigen::MatrixXd& M, const Eigen::VectorXd& c) const;

    // Sorted-term text form, e.g. "1*x1^2*x2 - 0.5". Round-trips exactly
    // through parse() for finite coefficients.
    std::string to_string() const;
    static Polynomial parse(const std::string& text, int arity);

    bool operator==(const Polynomial& rhs) const {
        return arity_ == rhs.arity_ && terms_ == rhs.terms_;
    }

private:
    void check_arity(const Polynomial& other) const {
        if (arity_ != other.arity_)
            throw DimensionError("polynomial arity mismatch");
    }

    int arity_;
    TermMap terms_;
};

// E[v^d] for v ~ N(0, sigma2): 0 for odd d, sigma^d (d-1)!! for even d.
// Degrees above 32 are rejected (double-factorial overflow guard).
double gaussian_moment(int d, double sigma2);

// Central moments E[v_i^d], d = 0..max_degree, per dimension of a
// diagonal Gaussian.
struct MomentTable {
    // moments[i][d] = E[v_i^d]
    std::vector<std::vector<double>> moments;

    static MomentTable build(const Eigen::VectorXd& variances, int max_degree);
};

// E[B(y + v)] as a polynomial in y, for v ~ N(0, diag(variances)).
// Exact binomial expansion per independent coordinate.
Polynomial expect_shifted(const Polynomial& B, const Eigen::VectorXd& variances);

// All monomials of total degree <= max_degree in graded-lex order.
std::vector<Exponents> monomials_up_to_degree(int arity, int max_degree);

}  // namespace nnb
