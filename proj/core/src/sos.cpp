// SPDX-License-Identifier: Apache-2.0
#include "nnbarrier/sos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace nnb {

const char* to_string(SosStatus s) {
    switch (s) {
        case SosStatus::Optimal: return "optimal";
        case SosStatus::Infeasible: return "infeasible";
        default: return "numerical_failure";
    }
}

LinExpr& LinExpr::operator+=(const LinExpr& rhs) {
    constant += rhs.constant;
    for (const auto& [v, c] : rhs.coeffs) {
        double& slot = coeffs[v];
        slot += c;
        if (slot == 0.0) coeffs.erase(v);
    }
    return *this;
}

LinExpr& LinExpr::operator*=(double s) {
    constant *= s;
    if (s == 0.0) {
        coeffs.clear();
        return *this;
    }
    for (auto& [v, c] : coeffs) c *= s;
    return *this;
}

double LinExpr::eval(const std::vector<double>& var_values) const {
    double s = constant;
    for (const auto& [v, c] : coeffs) s += c * var_values[static_cast<std::size_t>(v)];
    return s;
}

PolyExpr PolyExpr::from(const Polynomial& p) {
    PolyExpr out(p.arity());
    for (const auto& [e, c] : p.terms()) out.terms_[e] = LinExpr(c);
    return out;
}

int PolyExpr::degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, total_degree(e));
    return d;
}

void PolyExpr::add(const Exponents& e, const LinExpr& c) {
    if (static_cast<int>(e.size()) != arity_) throw DimensionError("exponent length != arity");
    auto it = terms_.find(e);
    if (it == terms_.end()) {
        if (!c.is_zero()) terms_.emplace(e, c);
        return;
    }
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
}

PolyExpr& PolyExpr::operator+=(const PolyExpr& rhs) {
    if (arity_ != rhs.arity_) throw DimensionError("PolyExpr arity mismatch");
    for (const auto& [e, c] : rhs.terms_) add(e, c);
    return *this;
}

PolyExpr& PolyExpr::operator-=(const PolyExpr& rhs) {
    if (arity_ != rhs.arity_) throw DimensionError("PolyExpr arity mismatch");
    for (const auto& [e, c] : rhs.terms_) {
        LinExpr neg = c;
        neg *= -1.0;
        add(e, neg);
    }
    return *this;
}

PolyExpr PolyExpr::scaled(double s) const {
    PolyExpr out(arity_);
    for (const auto& [e, c] : terms_) {
        LinExpr sc = c;
        sc *= s;
        out.add(e, sc);
    }
    return out;
}

PolyExpr operator*(const PolyExpr& a, const Polynomial& b) {
    if (a.arity_ != b.arity()) throw DimensionError("PolyExpr * Polynomial arity mismatch");
    PolyExpr out(a.arity_);
    Exponents e(static_cast<std::size_t>(a.arity_));
    for (const auto& [ea, ca] : a.terms_) {
        for (const auto& [eb, cb] : b.terms()) {
            for (int i = 0; i < a.arity_; ++i)
                e[static_cast<std::size_t>(i)] = ea[static_cast<std::size_t>(i)] + eb[static_cast<std::size_t>(i)];
            LinExpr c = ca;
            c *= cb;
            out.add(e, c);
        }
    }
    return out;
}

PolyExpr PolyExpr::apply_monomial_map(
    int new_arity, const std::function<Polynomial(const Exponents&)>& map) const {
    PolyExpr out(new_arity);
    for (const auto& [e, c] : terms_) {
        const Polynomial image = map(e);
        for (const auto& [e2, c2] : image.terms()) {
            LinExpr lc = c;
            lc *= c2;
            out.add(e2, lc);
        }
    }
    return out;
}

PolyExpr PolyExpr::substitute_affine(const Eigen::MatrixXd& M, const Eigen::VectorXd& c) const {
    if (M.rows() != arity_ || c.size() != arity_)
        throw DimensionError("substitution shape mismatch");
    const int new_arity = static_cast<int>(M.cols());
    return apply_monomial_map(new_arity, [&](const Exponents& e) {
        return Polynomial::monomial(e, 1.0).substitute_affine(M, c);
    });
}

PolyExpr PolyExpr::expect_shifted(const Eigen::VectorXd& variances) const {
    if (variances.size() != arity_) throw DimensionError("noise dimension != arity");
    return apply_monomial_map(arity_, [&](const Exponents& e) {
        return nnb::expect_shifted(Polynomial::monomial(e, 1.0), variances);
    });
}

Polynomial PolyExpr::value(const std::vector<double>& var_values) const {
    Polynomial out(arity_);
    for (const auto& [e, c] : terms_) out.add_term(e, c.eval(var_values));
    return out;
}

VarId SosProgram::add_scalar(const std::string& name, double lo, double hi) {
    if (!(lo <= hi)) throw ValidationError(name, "scalar bounds reversed");
    if (!std::isfinite(lo)) throw ValidationError(name, "lower bound must be finite");
    ScalarInfo info{name, lo, hi, next_var_};
    scalars_.push_back(info);
    return next_var_++;
}

const SosVar& SosProgram::new_sos_var(int arity, int degree) {
    if (degree < 0 || degree % 2 != 0)
        throw ValidationError("sos_var", "degree must be even and >= 0");
    SosVar v;
    v.index = static_cast<int>(sos_vars_.size());
    v.arity = arity;
    v.degree = degree;
    v.basis = monomials_up_to_degree(arity, degree / 2);
    v.gram_dim = static_cast<int>(v.basis.size());
    v.first_var = next_var_;
    next_var_ += v.gram_dim * (v.gram_dim + 1) / 2;
    sos_vars_.push_back(std::move(v));
    return sos_vars_.back();
}

namespace {

// Column-major upper-triangle offset of (i, j), i <= j.
inline int tri_offset(int i, int j) { return j * (j + 1) / 2 + i; }

}  // namespace

PolyExpr SosProgram::gram_poly(const SosVar& v) const {
    PolyExpr out(v.arity);
    Exponents e(static_cast<std::size_t>(v.arity));
    for (int j = 0; j < v.gram_dim; ++j) {
        for (int i = 0; i <= j; ++i) {
            for (int k = 0; k < v.arity; ++k)
                e[static_cast<std::size_t>(k)] =
                    v.basis[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] +
                    v.basis[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
            out.add(e, LinExpr::var(v.first_var + tri_offset(i, j), i == j ? 1.0 : 2.0));
        }
    }
    return out;
}

int SosProgram::default_multiplier_degree(int target_degree, int constraint_degree) {
    int d = target_degree - constraint_degree;
    if (d < 0) d = 0;
    return d - (d % 2);
}

PolyExpr SosProgram::putinar_block(const PolyExpr& gamma, const SemiAlgebraicSet& set,
                                   int multiplier_degree) {
    if (multiplier_degree % 2 != 0)
        throw ValidationError("putinar_block", "multiplier degree must be even");
    PolyExpr out = gamma;
    for (const auto& h : set.constraints) {
        const SosVar& lam = new_sos_var(gamma.arity(), multiplier_degree);
        out -= gram_poly(lam) * h;
    }
    return out;
}

void SosProgram::assert_sos(PolyExpr expr, std::string label, int cert_degree) {
    const int d = expr.degree();
    if (cert_degree < 0) {
        cert_degree = d + (d % 2);
    } else {
        for (const auto& [e, c] : expr.terms()) {
            if (total_degree(e) > cert_degree)
                throw ValidationError(label, "monomial " +
                                                 Polynomial::monomial(e, 1.0).to_string() +
                                                 " exceeds certificate degree " +
                                                 std::to_string(cert_degree));
        }
    }
    const SosVar& cert = new_sos_var(expr.arity(), cert_degree);
    constraints_.push_back(Constraint{std::move(expr), cert.index, std::move(label)});
}

CompiledProgram SosProgram::compile() const {
    CompiledProgram out;
    ConicProblem& conic = out.conic;

    // Blocks: one per SOS variable (creation order), then one 1x1 block per
    // scalar, then one 1x1 slack per finitely-bounded scalar.
    std::vector<int> scalar_block(scalars_.size());
    for (const auto& v : sos_vars_) conic.block_sizes.push_back(v.gram_dim);
    for (std::size_t s = 0; s < scalars_.size(); ++s) {
        scalar_block[s] = static_cast<int>(conic.block_sizes.size());
        conic.block_sizes.push_back(1);
    }
    std::vector<int> slack_block(scalars_.size(), -1);
    for (std::size_t s = 0; s < scalars_.size(); ++s) {
        if (std::isfinite(scalars_[s].hi)) {
            slack_block[s] = static_cast<int>(conic.block_sizes.size());
            conic.block_sizes.push_back(1);
        }
    }

    // VarId -> block position; scalars live in their block as (value - lo).
    struct VarPos {
        int block = 0, i = 0, j = 0;
        double lo = 0.0;
    };
    std::vector<VarPos> pos(static_cast<std::size_t>(next_var_));
    for (std::size_t s = 0; s < scalars_.size(); ++s)
        pos[static_cast<std::size_t>(scalars_[s].var)] = {scalar_block[s], 0, 0, scalars_[s].lo};
    for (const auto& v : sos_vars_) {
        for (int j = 0; j < v.gram_dim; ++j)
            for (int i = 0; i <= j; ++i)
                pos[static_cast<std::size_t>(v.first_var + tri_offset(i, j))] = {v.index, i, j, 0.0};
    }

    // A coefficient c on variable v: off-diagonal Gram entries are halved
    // because a conic entry already stands for the symmetric pair; scalar
    // lower-bound offsets move to the rhs.
    auto emit = [&](const LinExpr& le, ConicRow& row) {
        for (const auto& [v, c] : le.coeffs) {
            const VarPos& p = pos[static_cast<std::size_t>(v)];
            row.entries.push_back({p.block, p.i, p.j, p.i == p.j ? c : c / 2.0});
            row.rhs -= c * p.lo;
        }
    };

    // expr - gram(cert) = 0, one row per monomial of the certificate span.
    for (const auto& con : constraints_) {
        const SosVar& cert = sos_vars_[static_cast<std::size_t>(con.cert_index)];
        std::map<Exponents, LinExpr, GradedLexLess> rows_for;
        for (const auto& m : monomials_up_to_degree(cert.arity, cert.degree)) rows_for[m];
        for (const auto& [e, c] : con.expr.terms()) {
            auto it = rows_for.find(e);
            if (it == rows_for.end())
                throw ValidationError(con.label, "monomial outside certificate span");
            it->second += c;
        }
        {
            PolyExpr gram = gram_poly(cert);
            for (const auto& [e, c] : gram.terms()) {
                LinExpr neg = c;
                neg *= -1.0;
                rows_for[e] += neg;
            }
        }
        for (const auto& [mono, le] : rows_for) {
            if (le.coeffs.empty() && le.constant == 0.0) continue;
            ConicRow row;
            row.rhs = -le.constant;
            LinExpr vars_only = le;
            vars_only.constant = 0.0;
            emit(vars_only, row);
            conic.rows.push_back(std::move(row));
            out.row_labels.push_back(con.label + " | " + Polynomial::monomial(mono, 1.0).to_string());
        }
    }

    // Scalar upper bounds: (s - lo) + slack = hi - lo.
    for (std::size_t s = 0; s < scalars_.size(); ++s) {
        if (slack_block[s] < 0) continue;
        ConicRow row;
        row.entries.push_back({scalar_block[s], 0, 0, 1.0});
        row.entries.push_back({slack_block[s], 0, 0, 1.0});
        row.rhs = scalars_[s].hi - scalars_[s].lo;
        conic.rows.push_back(std::move(row));
        out.row_labels.push_back("bound | " + scalars_[s].name);
    }

    out.objective_offset = objective_.constant;
    for (const auto& [v, c] : objective_.coeffs) {
        const VarPos& p = pos[static_cast<std::size_t>(v)];
        conic.objective.push_back({p.block, p.i, p.j, p.i == p.j ? c : c / 2.0});
        out.objective_offset += c * p.lo;
    }
    return out;
}

SosSolution SosProgram::solve(ConicSolverBackend& backend, const SosSolveOptions& opt) const {
    const CompiledProgram compiled = compile();
    ConicSolveOptions copt;
    copt.tol_feas = opt.tol_feas;
    copt.tol_gap = opt.tol_gap;
    copt.max_iterations = opt.max_iterations;
    copt.verbose = opt.verbose;
    const ConicResult res = backend.solve(compiled.conic, copt);

    SosSolution sol;
    sol.iterations = res.iterations;
    if (res.status == ConicStatus::Infeasible) {
        sol.status = SosStatus::Infeasible;
        // Point at the constraint family carrying the largest Farkas weight.
        std::map<std::string, double> weight;
        for (Eigen::Index i = 0; i < res.y.size(); ++i) {
            const std::string& label = compiled.row_labels[static_cast<std::size_t>(i)];
            weight[label.substr(0, label.find(" | "))] += std::abs(res.y[i]);
        }
        std::string top;
        double best = -1.0;
        for (const auto& [k, w] : weight)
            if (w > best) {
                best = w;
                top = k;
            }
        sol.message = res.message + (top.empty() ? "" : "; most active family: " + top);
        return sol;
    }
    if (res.status != ConicStatus::Optimal) {
        sol.status = SosStatus::NumericalFailure;
        sol.message = res.message;
        return sol;
    }

    sol.var_values.assign(static_cast<std::size_t>(next_var_), 0.0);
    sol.scalar_values.resize(scalars_.size());
    for (std::size_t s = 0; s < scalars_.size(); ++s) {
        const double raw = res.X[sos_vars_.size() + s](0, 0);
        double val = scalars_[s].lo + raw;
        if (std::isfinite(scalars_[s].hi)) val = std::min(val, scalars_[s].hi);
        sol.scalar_values[s] = val;
        sol.var_values[static_cast<std::size_t>(scalars_[s].var)] = val;
    }
    sol.gram.resize(sos_vars_.size());
    double min_eig = std::numeric_limits<double>::infinity();
    for (const auto& v : sos_vars_) {
        Eigen::MatrixXd Q = res.X[static_cast<std::size_t>(v.index)];
        Q = 0.5 * (Q + Q.transpose()).eval();
        sol.gram[static_cast<std::size_t>(v.index)] = Q;
        for (int j = 0; j < v.gram_dim; ++j)
            for (int i = 0; i <= j; ++i)
                sol.var_values[static_cast<std::size_t>(v.first_var + tri_offset(i, j))] = Q(i, j);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q, Eigen::EigenvaluesOnly);
        min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    }
    if (sos_vars_.empty()) min_eig = 0.0;
    sol.min_gram_eig = min_eig;
    sol.max_eq_residual = res.primal_residual;
    sol.objective = objective_.eval(sol.var_values);

    if (sol.max_eq_residual > opt.tol_eq_residual || sol.min_gram_eig < opt.tol_gram_eig) {
        sol.status = SosStatus::NumericalFailure;
        std::ostringstream os;
        os << "solution outside acceptance tolerances (eq residual " << sol.max_eq_residual
           << ", min Gram eigenvalue " << sol.min_gram_eig << ")";
        sol.message = os.str();
        return sol;
    }
    sol.status = SosStatus::Optimal;
    return sol;
}

SosProgram::CheckReport SosProgram::check_certificate(const SosSolution& sol,
                                                      const std::vector<Box>& domains,
                                                      int samples_per_constraint, CounterRng& rng,
                                                      double tol) const {
    CheckReport report;
    report.min_sample_value = std::numeric_limits<double>::infinity();
    report.min_gram_eig = std::numeric_limits<double>::infinity();
    if (domains.size() != constraints_.size())
        throw DimensionError("one sampling box per constraint required");

    for (std::size_t ci = 0; ci < constraints_.size(); ++ci) {
        const auto& con = constraints_[ci];
        const Polynomial p = con.expr.value(sol.var_values);
        const Box& box = domains[ci];
        if (box.dim() != p.arity()) throw DimensionError("sampling box arity mismatch");
        double mn = std::numeric_limits<double>::infinity();
        Eigen::VectorXd x(box.dim());
        for (int s = 0; s < samples_per_constraint; ++s) {
            for (int i = 0; i < box.dim(); ++i)
                x[i] = box.lower[i] + (box.upper[i] - box.lower[i]) * rng.next_unit();
            mn = std::min(mn, p.eval(x));
        }
        report.min_sample_value = std::min(report.min_sample_value, mn);
        if (mn < -tol) report.flags.push_back({con.label, "sampled value below -tolerance", mn});
    }
    for (const auto& v : sos_vars_) {
        const Eigen::MatrixXd& Q = sol.gram[static_cast<std::size_t>(v.index)];
        if (Q.size() == 0) continue;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q, Eigen::EigenvaluesOnly);
        const double e = es.eigenvalues().minCoeff();
        report.min_gram_eig = std::min(report.min_gram_eig, e);
        if (e < -tol)
            report.flags.push_back({"gram " + std::to_string(v.index), "negative eigenvalue", e});
    }
    return report;
}

}  // namespace nnb
