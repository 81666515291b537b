// SPDX-License-Identifier: Apache-2.0
#include "nnbarrier/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace nnb {

Polynomial Polynomial::constant(int arity, double c) {
    Polynomial p(arity);
    p.add_term(Exponents(arity, 0), c);
    return p;
}

Polynomial Polynomial::variable(int arity, int index) {
    if (index < 0 || index >= arity) throw DimensionError("variable index out of range");
    Exponents e(arity, 0);
    e[index] = 1;
    return monomial(std::move(e), 1.0);
}

Polynomial Polynomial::monomial(Exponents exponents, double coeff) {
    Polynomial p(static_cast<int>(exponents.size()));
    p.add_term(exponents, coeff);
    return p;
}

int Polynomial::degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, total_degree(e));
    return d;
}

double Polynomial::coefficient(const Exponents& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const Exponents& e, double c) {
    if (static_cast<int>(e.size()) != arity_)
        throw DimensionError("exponent vector length != arity");
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) it->second += c;
    if (std::abs(it->second) < kCoeffEpsilon) terms_.erase(it);
}

Polynomial& Polynomial::operator+=(const Polynomial& rhs) {
    check_arity(rhs);
    for (const auto& [e, c] : rhs.terms_) add_term(e, c);
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& rhs) {
    check_arity(rhs);
    for (const auto& [e, c] : rhs.terms_) add_term(e, -c);
    return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check_arity(b);
    Polynomial out(a.arity_);
    Exponents e(a.arity_);
    for (const auto& [ea, ca] : a.terms_) {
        for (const auto& [eb, cb] : b.terms_) {
            for (int i = 0; i < a.arity_; ++i) e[i] = ea[i] + eb[i];
            out.add_term(e, ca * cb);
        }
    }
    return out;
}

Polynomial Polynomial::scaled(double c) const {
    Polynomial out(arity_);
    for (const auto& [e, v] : terms_) out.add_term(e, v * c);
    return out;
}

double Polynomial::eval(const Eigen::VectorXd& x) const {
    if (x.size() != arity_) throw DimensionError("eval point arity mismatch");
    double sum = 0.0;
    for (const auto& [e, c] : terms_) {
        double t = c;
        for (int i = 0; i < arity_; ++i) {
            double xi = x[i];
            for (std::uint32_t k = 0; k < e[i]; ++k) t *= xi;
        }
        sum += t;
    }
    return sum;
}

std::vector<Polynomial> Polynomial::gradient() const {
    std::vector<Polynomial> g(arity_, Polynomial(arity_));
    for (const auto& [e, c] : terms_) {
        for (int i = 0; i < arity_; ++i) {
            if (e[i] == 0) continue;
            Exponents d = e;
            d[i] -= 1;
            g[i].add_term(d, c * static_cast<double>(e[i]));
        }
    }
    return g;
}

Polynomial Polynomial::substitute_affine(const Eigen::MatrixXd& M, const Eigen::VectorXd& c) const {
    if (M.rows() != arity_ || c.size() != arity_)
        throw DimensionError("substitution shape mismatch: need arity rows");
    const int new_arity = static_cast<int>(M.cols());

    // Affine form of each original variable in the new variables.
    std::vector<Polynomial> var_sub;
    var_sub.reserve(arity_);
    for (int i = 0; i < arity_; ++i) {
        Polynomial li = Polynomial::constant(new_arity, c[i]);
        for (int j = 0; j < new_arity; ++j) {
            if (M(i, j) != 0.0) li.add_term([&] {
                Exponents e(new_arity, 0);
                e[j] = 1;
                return e;
            }(), M(i, j));
        }
        var_sub.push_back(std::move(li));
    }

    Polynomial out(new_arity);
    for (const auto& [e, coeff] : terms_) {
        Polynomial term = Polynomial::constant(new_arity, coeff);
        for (int i = 0; i < arity_; ++i)
            for (std::uint32_t k = 0; k < e[i]; ++k) term = term * var_sub[i];
        out += term;
    }
    return out;
}

namespace {

std::string format_coeff(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string Polynomial::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    // Highest-degree terms first reads naturally.
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const auto& [e, c] = *it;
        double mag = std::abs(c);
        if (first) {
            if (c < 0) os << "-";
            first = false;
        } else {
            os << (c < 0 ? " - " : " + ");
        }
        os << format_coeff(mag);
        for (int i = 0; i < arity_; ++i) {
            if (e[i] == 0) continue;
            os << "*x" << (i + 1);
            if (e[i] > 1) os << "^" << e[i];
        }
    }
    return os.str();
}

Polynomial Polynomial::parse(const std::string& text, int arity) {
    Polynomial out(arity);
    std::size_t pos = 0;
    auto skip_ws = [&] { while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos; };

    skip_ws();
    if (pos == text.size()) throw ParseError("empty polynomial text");
    bool first = true;
    while (pos < text.size()) {
        skip_ws();
        double sign = 1.0;
        if (text[pos] == '+' || text[pos] == '-') {
            if (text[pos] == '-') sign = -1.0;
            ++pos;
            skip_ws();
        } else if (!first) {
            throw ParseError("expected '+' or '-' between terms");
        }
        first = false;

        // Optional numeric coefficient, then '*'-separated variable powers.
        double coeff = 1.0;
        bool saw_number = false;
        {
            const char* begin = text.c_str() + pos;
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end != begin && !(end[0] == 'x')) {  // avoid eating "x1" as hex-ish
                coeff = v;
                pos += static_cast<std::size_t>(end - begin);
                saw_number = true;
            }
        }
        Exponents e(arity, 0);
        bool saw_var = false;
        while (true) {
            skip_ws();
            if (pos < text.size() && text[pos] == '*') {
                ++pos;
                skip_ws();
            } else if (saw_number || saw_var) {
                break;
            }
            if (pos >= text.size() || text[pos] != 'x') {
                if (saw_number || saw_var) break;
                throw ParseError("expected coefficient or variable in term");
            }
            ++pos;
            int idx = 0;
            auto [p2, ec] = std::from_chars(text.c_str() + pos, text.c_str() + text.size(), idx);
            if (ec != std::errc() || idx < 1 || idx > arity)
                throw ParseError("bad variable index in polynomial text");
            pos = static_cast<std::size_t>(p2 - text.c_str());
            std::uint32_t power = 1;
            if (pos < text.size() && text[pos] == '^') {
                ++pos;
                auto [p3, ec3] = std::from_chars(text.c_str() + pos, text.c_str() + text.size(), power);
                if (ec3 != std::errc()) throw ParseError("bad exponent in polynomial text");
                pos = static_cast<std::size_t>(p3 - text.c_str());
            }
            e[idx - 1] += power;
            saw_var = true;
        }
        if (!saw_number && !saw_var) throw ParseError("empty term");
        if (!(saw_number && !saw_var && coeff == 0.0))  // "0" parses to the zero polynomial
            out.add_term(e, sign * coeff);
        skip_ws();
    }
    return out;
}

double gaussian_moment(int d, double sigma2) {
    if (d < 0) throw Error("negative moment degree");
    if (d > 32) throw Error("gaussian moment degree beyond 32 not supported");
    if (sigma2 < 0.0) throw Error("negative variance");
    if (d == 0) return 1.0;
    if (d % 2 == 1) return 0.0;
    // sigma^d (d-1)!! = sigma2^(d/2) * 1*3*...*(d-1)
    double dfac = 1.0;
    for (int k = d - 1; k >= 3; k -= 2) dfac *= static_cast<double>(k);
    return std::pow(sigma2, d / 2) * dfac;
}

MomentTable MomentTable::build(const Eigen::VectorXd& variances, int max_degree) {
    MomentTable t;
    t.moments.resize(static_cast<std::size_t>(variances.size()));
    for (Eigen::Index i = 0; i < variances.size(); ++i) {
        auto& row = t.moments[static_cast<std::size_t>(i)];
        row.resize(static_cast<std::size_t>(max_degree) + 1);
        for (int d = 0; d <= max_degree; ++d) row[static_cast<std::size_t>(d)] = gaussian_moment(d, variances[i]);
    }
    return t;
}

Polynomial expect_shifted(const Polynomial& B, const Eigen::VectorXd& variances) {
    const int n = B.arity();
    if (variances.size() != n) throw DimensionError("noise dimension != polynomial arity");
    const MomentTable table = MomentTable::build(variances, B.degree());

    // Binomial coefficients up to the maximum per-variable degree.
    const int dmax = B.degree();
    std::vector<std::vector<double>> binom(static_cast<std::size_t>(dmax) + 1);
    for (int d = 0; d <= dmax; ++d) {
        binom[d].resize(static_cast<std::size_t>(d) + 1);
        binom[d][0] = 1.0;
        for (int k = 1; k <= d; ++k)
            binom[d][k] = binom[d][k - 1] * static_cast<double>(d - k + 1) / static_cast<double>(k);
    }

    Polynomial out(n);
    for (const auto& [e, c] : B.terms()) {
        // E[prod (y_i + v_i)^{d_i}] = prod_i sum_k C(d_i,k) y_i^{d_i-k} E[v_i^k]
        Polynomial term = Polynomial::constant(n, c);
        for (int i = 0; i < n; ++i) {
            const int d = static_cast<int>(e[i]);
            if (d == 0) continue;
            Polynomial factor(n);
            for (int k = 0; k <= d; ++k) {
                const double mk = table.moments[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
                if (mk == 0.0) continue;
                Exponents me(n, 0);
                me[i] = static_cast<std::uint32_t>(d - k);
                factor.add_term(me, binom[d][k] * mk);
            }
            term = term * factor;
        }
        out += term;
    }
    return out;
}

namespace {

void enumerate_monomials(int arity, int max_degree, int var, Exponents& cur, int used,
                         std::vector<Exponents>& out) {
    if (var == arity) {
        out.push_back(cur);
        return;
    }
    for (int k = 0; k + used <= max_degree; ++k) {
        cur[var] = static_cast<std::uint32_t>(k);
        enumerate_monomials(arity, max_degree, var + 1, cur, used + k, out);
    }
    cur[var] = 0;
}

}  // namespace

std::vector<Exponents> monomials_up_to_degree(int arity, int max_degree) {
    std::vector<Exponents> out;
    Exponents cur(arity, 0);
    enumerate_monomials(arity, max_degree, 0, cur, 0, out);
    std::sort(out.begin(), out.end(), GradedLexLess{});
    return out;
}

}  // namespace nnb
