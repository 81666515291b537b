// SPDX-License-Identifier: Apache-2.0
#include "nnbarrier/network.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace nnb {

using nlohmann::json;

const char* to_string(Activation a) {
    return a == Activation::Relu ? "relu" : "identity";
}

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::Relu;
    if (s == "identity") return Activation::Identity;
    throw ValidationError("activation", "unknown activation '" + s + "'");
}

void NeuralNetwork::validate() const {
    if (layers.empty()) throw ValidationError("network.layers", "at least one layer required");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        if (l.bias.size() != l.weight.rows())
            throw ValidationError("network.layers[" + std::to_string(i) + "].bias",
                                  "length != weight row count");
        if (i > 0 && l.weight.cols() != layers[i - 1].weight.rows())
            throw ValidationError("network.layers[" + std::to_string(i) + "].weights",
                                  "input width != previous layer output width");
        if (!l.weight.allFinite() || !l.bias.allFinite())
            throw ValidationError("network.layers[" + std::to_string(i) + "]", "non-finite entry");
    }
}

Eigen::VectorXd NeuralNetwork::evaluate(const Eigen::VectorXd& x) const {
    if (x.size() != dim_in()) throw DimensionError("network input dimension mismatch");
    Eigen::VectorXd a = x;
    for (const auto& l : layers) {
        a = (l.weight * a + l.bias).eval();
        if (l.activation == Activation::Relu) a = a.cwiseMax(0.0);
    }
    return a;
}

Eigen::MatrixXd NeuralNetwork::evaluate_batch(const Eigen::MatrixXd& xs) const {
    if (xs.rows() != dim_in()) throw DimensionError("network input dimension mismatch");
    Eigen::MatrixXd a = xs;
    for (const auto& l : layers) {
        a = ((l.weight * a).colwise() + l.bias).eval();
        if (l.activation == Activation::Relu) a = a.cwiseMax(0.0);
    }
    return a;
}

std::vector<bool> NeuralNetwork::activation_pattern(const Eigen::VectorXd& x) const {
    std::vector<bool> pattern;
    Eigen::VectorXd a = x;
    for (const auto& l : layers) {
        a = (l.weight * a + l.bias).eval();
        if (l.activation == Activation::Relu) {
            for (Eigen::Index i = 0; i < a.size(); ++i) pattern.push_back(a[i] >= 0.0);
            a = a.cwiseMax(0.0);
        }
    }
    return pattern;
}

void GaussianNoise::validate() const {
    if (!variances.allFinite()) throw ValidationError("noise.variances", "non-finite entry");
    if ((variances.array() < 0.0).any()) throw ValidationError("noise.variances", "negative variance");
}

Eigen::VectorXd GaussianNoise::sample(CounterRng& rng) const {
    Eigen::VectorXd v(variances.size());
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v[i] = variances[i] > 0.0 ? std::sqrt(variances[i]) * rng.next_gaussian() : 0.0;
    return v;
}

void ControlStructure::validate(int n) const {
    if (g.rows() != n) throw ValidationError("control.g", "row count != state dimension");
    if (u_lower.size() != g.cols() || u_upper.size() != g.cols())
        throw ValidationError("control.u_lower/u_upper", "length != control dimension");
    if (!g.allFinite() || !u_lower.allFinite() || !u_upper.allFinite())
        throw ValidationError("control", "U must be bounded (finite entries)");
    if ((u_lower.array() > u_upper.array()).any())
        throw ValidationError("control.u_lower", "exceeds u_upper");
}

Eigen::VectorXd ControlStructure::clamp(const Eigen::VectorXd& u) const {
    return u.cwiseMax(u_lower).cwiseMin(u_upper);
}

void ProblemSpec::validate() const {
    network.validate();
    noise.validate();
    const int n = state_space.dim();
    if (network.dim_in() != n || network.dim_out() != n)
        throw ValidationError("network", "closed-loop network must map R^n -> R^n with n = state dimension");
    if (noise.variances.size() != n) throw ValidationError("noise.variances", "length != state dimension");
    if (safe_set.dim() != n || initial_set.dim() != n)
        throw ValidationError("sets", "dimension mismatch");
    if (!state_space.contains(safe_set))
        throw ValidationError("sets.safe", "not contained in state space");
    if (!safe_set.contains(initial_set))
        throw ValidationError("sets.initial", "not contained in safe set");
    if (horizon < 1) throw ValidationError("certify.horizon", "must be a positive integer");
    if (!(threshold >= 0.0 && threshold <= 1.0))
        throw ValidationError("certify.threshold", "must lie in [0, 1]");
    if (barrier_degree < 2 || barrier_degree % 2 != 0)
        throw ValidationError("certify.degree", "must be an even integer >= 2");
    if (!(eta_step > 0.0)) throw ValidationError("certify.eta_step", "must be positive");
    if (partition_widths.size() != n)
        throw ValidationError("certify.partition_widths", "length != state dimension");
    if ((partition_widths.array() <= 0.0).any())
        throw ValidationError("certify.partition_widths", "must be strictly positive");
    if (control) control->validate(n);
}

namespace {

Eigen::VectorXd vector_from_json(const json& j, const std::string& field) {
    if (!j.is_array()) throw ValidationError(field, "expected an array of reals");
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ValidationError(field, "expected an array of reals");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

// Row-major flat array; the row count comes from the bias length.
Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, const std::string& field) {
    Eigen::VectorXd flat = vector_from_json(j, field);
    if (rows <= 0 || flat.size() % rows != 0)
        throw ValidationError(field, "row-major array length not divisible by row count");
    const Eigen::Index cols = flat.size() / rows;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[r * cols + c];
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json j = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
    return j;
}

json matrix_to_json_row_major(const Eigen::MatrixXd& m) {
    json j = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) j.push_back(m(r, c));
    return j;
}

Box box_from_json(const json& j, const std::string& field) {
    if (!j.is_object() || !j.contains("lower") || !j.contains("upper"))
        throw ValidationError(field, "expected {lower, upper}");
    Eigen::VectorXd lo = vector_from_json(j["lower"], field + ".lower");
    Eigen::VectorXd hi = vector_from_json(j["upper"], field + ".upper");
    if (lo.size() != hi.size()) throw ValidationError(field, "lower/upper length mismatch");
    for (Eigen::Index i = 0; i < lo.size(); ++i)
        if (!(lo[i] <= hi[i]))
            throw ValidationError(field, "lower > upper on axis " + std::to_string(i));
    return Box(lo, hi);
}

json box_to_json(const Box& b) {
    return json{{"lower", vector_to_json(b.lower)}, {"upper", vector_to_json(b.upper)}};
}

const json& require(const json& j, const std::string& key, const std::string& context) {
    if (!j.contains(key)) throw ValidationError(context + "." + key, "missing field");
    return j[key];
}

}  // namespace

ProblemSpec parse_problem(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("problem file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("problem file must be a JSON object");
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
        throw ValidationError("schema_version", "expected 1");

    ProblemSpec spec;

    const json& jnet = require(j, "network", "");
    const json& jlayers = require(jnet, "layers", "network");
    if (!jlayers.is_array() || jlayers.empty())
        throw ValidationError("network.layers", "expected a nonempty array");
    for (std::size_t i = 0; i < jlayers.size(); ++i) {
        const std::string ctx = "network.layers[" + std::to_string(i) + "]";
        const json& jl = jlayers[i];
        Layer layer;
        layer.bias = vector_from_json(require(jl, "bias", ctx), ctx + ".bias");
        layer.weight = matrix_from_json(require(jl, "weights", ctx), layer.bias.size(), ctx + ".weights");
        layer.activation = activation_from_string(require(jl, "activation", ctx).get<std::string>());
        spec.network.layers.push_back(std::move(layer));
    }

    spec.noise.variances = vector_from_json(require(require(j, "noise", ""), "variances", "noise"),
                                            "noise.variances");

    const json& jsets = require(j, "sets", "");
    spec.state_space = box_from_json(require(jsets, "state", "sets"), "sets.state");
    spec.safe_set = box_from_json(require(jsets, "safe", "sets"), "sets.safe");
    spec.initial_set = box_from_json(require(jsets, "initial", "sets"), "sets.initial");

    const json& jc = require(j, "certify", "");
    spec.horizon = require(jc, "horizon", "certify").get<int>();
    spec.threshold = require(jc, "threshold", "certify").get<double>();
    spec.barrier_degree = require(jc, "degree", "certify").get<int>();
    spec.eta_step = require(jc, "eta_step", "certify").get<double>();
    spec.partition_widths =
        vector_from_json(require(jc, "partition_widths", "certify"), "certify.partition_widths");

    if (j.contains("control")) {
        const json& ju = j["control"];
        ControlStructure cs;
        cs.u_lower = vector_from_json(require(ju, "u_lower", "control"), "control.u_lower");
        cs.u_upper = vector_from_json(require(ju, "u_upper", "control"), "control.u_upper");
        cs.g = matrix_from_json(require(ju, "g", "control"), spec.state_space.dim(), "control.g");
        if (cs.g.cols() != cs.u_lower.size())
            throw ValidationError("control.g", "column count != control dimension");
        spec.control = std::move(cs);
    }

    spec.validate();
    return spec;
}

ProblemSpec load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open problem file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_problem(buf.str());
}

std::string problem_to_json(const ProblemSpec& spec) {
    json j;
    j["schema_version"] = 1;
    json jlayers = json::array();
    for (const auto& l : spec.network.layers) {
        jlayers.push_back(json{{"weights", matrix_to_json_row_major(l.weight)},
                               {"bias", vector_to_json(l.bias)},
                               {"activation", to_string(l.activation)}});
    }
    j["network"] = json{{"layers", jlayers}};
    j["noise"] = json{{"variances", vector_to_json(spec.noise.variances)}};
    j["sets"] = json{{"state", box_to_json(spec.state_space)},
                     {"safe", box_to_json(spec.safe_set)},
                     {"initial", box_to_json(spec.initial_set)}};
    j["certify"] = json{{"horizon", spec.horizon},
                        {"threshold", spec.threshold},
                        {"degree", spec.barrier_degree},
                        {"eta_step", spec.eta_step},
                        {"partition_widths", vector_to_json(spec.partition_widths)}};
    if (spec.control) {
        j["control"] = json{{"g", matrix_to_json_row_major(spec.control->g)},
                            {"u_lower", vector_to_json(spec.control->u_lower)},
                            {"u_upper", vector_to_json(spec.control->u_upper)}};
    }
    return j.dump(2) + "\n";
}

void save_problem(const ProblemSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write problem file: " + path);
    out << problem_to_json(spec);
}

Eigen::VectorXd step_sample(const ProblemSpec& spec, const Eigen::VectorXd& x,
                            const std::optional<Eigen::VectorXd>& u, CounterRng& rng) {
    Eigen::VectorXd next = spec.network.evaluate(x);
    if (u) {
        if (!spec.control) throw DimensionError("control input given but spec has no control structure");
        if (u->size() != spec.control->dim()) throw DimensionError("control input dimension mismatch");
        next += spec.control->g * (*u);
    }
    next += spec.noise.sample(rng);
    return next;
}

}  // namespace nnb
