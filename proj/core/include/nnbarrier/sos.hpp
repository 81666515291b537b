// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "nnbarrier/conic.hpp"
#include "nnbarrier/geometry.hpp"
#include "nnbarrier/polynomial.hpp"
#include "nnbarrier/rng.hpp"

namespace nnb {

// Flat index over all decision coefficients of a program: bounded scalars
// and Gram entries of SOS variables.
using VarId = int;

// Affine function of decision variables.
struct LinExpr {
    double constant = 0.0;
    std::map<VarId, double> coeffs;

    LinExpr() = default;
    /*implicit*/ LinExpr(double c) : constant(c) {}
    static LinExpr var(VarId v, double coeff = 1.0) {
        LinExpr e;
        e.coeffs[v] = coeff;
        return e;
    }
    LinExpr& operator+=(const LinExpr& rhs);
    LinExpr& operator*=(double s);
    double eval(const std::vector<double>& var_values) const;
    bool is_zero() const { return constant == 0.0 && coeffs.empty(); }
};

// Polynomial whose coefficients are affine in decision variables. Supports
// exactly the operations a linear SOS program needs; products of two
// decision-dependent polynomials are not representable by construction.
class PolyExpr {
public:
    explicit PolyExpr(int arity) : arity_(arity) {}
    static PolyExpr from(const Polynomial& p);

    int arity() const { return arity_; }
    const std::map<Exponents, LinExpr, GradedLexLess>& terms() const { return terms_; }
    int degree() const;

    void add(const Exponents& e, const LinExpr& c);
    PolyExpr& operator+=(const PolyExpr& rhs);
    PolyExpr& operator-=(const PolyExpr& rhs);
    PolyExpr scaled(double s) const;
    // (decision-affine polynomial) x (fixed polynomial)
    friend PolyExpr operator*(const PolyExpr& a, const Polynomial& b);

    // p(M z + c) over new variables z; coefficients carried through linearly.
    PolyExpr substitute_affine(const Eigen::MatrixXd& M, const Eigen::VectorXd& c) const;
    // E[p(y + v)] with v ~ N(0, diag(variances)).
    PolyExpr expect_shifted(const Eigen::VectorXd& variances) const;

    // Concrete polynomial after substituting solved variable values.
    Polynomial value(const std::vector<double>& var_values) const;

private:
    // Rewrites every monomial through a linear map and recombines.
    PolyExpr apply_monomial_map(int new_arity,
                                const std::function<Polynomial(const Exponents&)>& map) const;

    int arity_;
    std::map<Exponents, LinExpr, GradedLexLess> terms_;
};

// Gram-parametrized SOS polynomial z(x)^T Q z(x) over the full monomial
// basis of degree <= degree/2, graded-lex ordered.
struct SosVar {
    int index = 0;   // position among the program's SOS variables
    int arity = 0;
    int degree = 0;  // even
    std::vector<Exponents> basis;
    int gram_dim = 0;
    VarId first_var = 0;  // Gram upper triangle, column-major (i <= j)
};

struct ScalarInfo {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;  // +inf allowed
    VarId var = 0;
};

enum class SosStatus { Optimal, Infeasible, NumericalFailure };
const char* to_string(SosStatus s);

struct SosSolution {
    SosStatus status = SosStatus::NumericalFailure;
    std::vector<double> var_values;    // indexed by VarId
    std::vector<double> scalar_values; // by scalar creation order
    std::vector<Eigen::MatrixXd> gram; // by SOS variable index
    double objective = 0.0;
    double max_eq_residual = 0.0;
    double min_gram_eig = 0.0;
    int iterations = 0;
    std::string message;
};

struct SosSolveOptions {
    double tol_feas = 1e-8;       // interior-point stopping tolerance
    double tol_gap = 1e-8;
    double tol_eq_residual = 1e-6;  // acceptance threshold on recovered solution
    double tol_gram_eig = -1e-7;
    int max_iterations = 120;
    bool verbose = false;
};

// Compiled conic form plus the bookkeeping to map a conic solution back.
struct CompiledProgram {
    ConicProblem conic;
    std::vector<std::string> row_labels;
    double objective_offset = 0.0;
};

// Linear SOS program: bounded scalars, SOS polynomial variables, and
// constraints "expr in Lambda" with expr affine in the decision variables.
class SosProgram {
public:
    // Bounded scalar decision variable; hi may be +infinity.
    VarId add_scalar(const std::string& name, double lo, double hi);
    const SosVar& new_sos_var(int arity, int degree);

    // Gram form of an SOS variable as a decision-affine polynomial.
    PolyExpr gram_poly(const SosVar& v) const;

    // Largest even degree <= target_degree - constraint_degree (>= 0).
    static int default_multiplier_degree(int target_degree, int constraint_degree);

    // gamma - sum_i lambda_i h_i with fresh SOS multipliers; the caller
    // asserts the result, which certifies gamma >= 0 on the set.
    PolyExpr putinar_block(const PolyExpr& gamma, const SemiAlgebraicSet& set,
                           int multiplier_degree);

    // Adds the membership constraint expr in Lambda with a fresh certificate
    // Gram. cert_degree = -1 rounds the expression degree up to even; an
    // explicit degree that cannot carry some monomial is an error naming it.
    void assert_sos(PolyExpr expr, std::string label, int cert_degree = -1);

    void minimize(LinExpr objective) { objective_ = std::move(objective); }

    CompiledProgram compile() const;
    SosSolution solve(ConicSolverBackend& backend, const SosSolveOptions& opt = {}) const;

    // Post-hoc audit: evaluates every asserted expression at sample points
    // drawn uniformly from its domain box and recomputes Gram eigenvalues.
    struct CheckReport {
        struct Flag {
            std::string label;
            std::string what;
            double value;
        };
        std::vector<Flag> flags;
        double min_sample_value = 0.0;
        double min_gram_eig = 0.0;
        bool ok() const { return flags.empty(); }
    };
    CheckReport check_certificate(const SosSolution& sol, const std::vector<Box>& domains,
                                  int samples_per_constraint, CounterRng& rng,
                                  double tol = 1e-6) const;

    int num_scalars() const { return static_cast<int>(scalars_.size()); }
    int num_vars() const { return next_var_; }
    const std::vector<ScalarInfo>& scalars() const { return scalars_; }
    const std::vector<SosVar>& sos_vars() const { return sos_vars_; }

    struct Constraint {
        PolyExpr expr;
        int cert_index;
        std::string label;
    };
    const std::vector<Constraint>& constraints() const { return constraints_; }

private:
    std::vector<ScalarInfo> scalars_;
    std::vector<SosVar> sos_vars_;
    std::vector<Constraint> constraints_;
    LinExpr objective_;
    VarId next_var_ = 0;
};

}  // namespace nnb
