// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nnbarrier/geometry.hpp"
#include "nnbarrier/rng.hpp"

namespace nnb {

enum class Activation { Relu, Identity };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct Layer {
    Eigen::MatrixXd weight;
    Eigen::VectorXd bias;
    Activation activation = Activation::Identity;
};

// Fully-connected feed-forward network; closed-loop dynamics map R^n -> R^n.
struct NeuralNetwork {
    std::vector<Layer> layers;

    int dim_in() const { return layers.empty() ? 0 : static_cast<int>(layers.front().weight.cols()); }
    int dim_out() const { return layers.empty() ? 0 : static_cast<int>(layers.back().weight.rows()); }

    void validate() const;

    Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const;
    // Column-wise forward pass; columns are independent inputs.
    Eigen::MatrixXd evaluate_batch(const Eigen::MatrixXd& xs) const;
    // Sign pattern (>= 0) of every relu pre-activation, for piecewise-linearity checks.
    std::vector<bool> activation_pattern(const Eigen::VectorXd& x) const;
};

// Zero-mean Gaussian with diagonal covariance diag(variances).
struct GaussianNoise {
    Eigen::VectorXd variances;

    void validate() const;
    Eigen::VectorXd sample(CounterRng& rng) const;
};

// Affine control channel x' = f(x) + g u + v with box-bounded u.
struct ControlStructure {
    Eigen::MatrixXd g;       // n x c
    Eigen::VectorXd u_lower; // length c
    Eigen::VectorXd u_upper;

    int dim() const { return static_cast<int>(g.cols()); }
    void validate(int n) const;
    Eigen::VectorXd clamp(const Eigen::VectorXd& u) const;
};

struct ProblemSpec {
    NeuralNetwork network;
    GaussianNoise noise;
    Box state_space;
    Box safe_set;
    Box initial_set;
    int horizon = 0;             // N
    double threshold = 0.0;      // delta_s
    int barrier_degree = 2;      // m, even >= 2
    double eta_step = 0.0;       // delta eta
    Eigen::VectorXd partition_widths;
    std::optional<ControlStructure> control;

    int dim() const { return state_space.dim(); }
    void validate() const;
};

ProblemSpec load_problem(const std::string& path);
ProblemSpec parse_problem(const std::string& json_text);
std::string problem_to_json(const ProblemSpec& spec);
void save_problem(const ProblemSpec& spec, const std::string& path);

// One step of the dynamics: f(x) + g u + v, v ~ N(0, diag(variances)).
// Deterministic for a fixed rng state.
Eigen::VectorXd step_sample(const ProblemSpec& spec, const Eigen::VectorXd& x,
                            const std::optional<Eigen::VectorXd>& u, CounterRng& rng);

}  // namespace nnb
