// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nnbarrier/barrier.hpp"
#include "nnbarrier/control.hpp"
#include "nnbarrier/sim.hpp"

namespace nnb {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportVersion = 1;

struct PhaseTimings {
    double partition_sec = 0.0;
    double bounds_sec = 0.0;
    double sos_sec = 0.0;
    double beta_eval_sec = 0.0;
    double lp_sec = 0.0;
    double mc_sec = 0.0;
    double total_sec = 0.0;
};

// Everything needed to reproduce and post-process a certify/synthesize run.
struct RunReport {
    std::string command;
    std::string spec_path;
    std::string spec_hash;  // fnv1a64 of the problem file bytes
    std::string tool_version = kToolVersion;
    unsigned long long seed = 0;
    int threads = 1;
    BoundMode mode = BoundMode::Linear;
    int degree = 0;
    int horizon = 0;
    double threshold = 0.0;
    std::size_t num_regions = 0;

    double eta = 1.0;
    double beta = 1.0;
    double p_s = 0.0;
    Polynomial barrier{0};

    struct RegionRow {
        std::size_t id = 0;
        Eigen::VectorXd lower, upper;
        double beta_q = 0.0;
        Eigen::VectorXd u;  // empty when the region is uncontrolled
    };
    std::vector<RegionRow> regions;

    // synthesize-only fields
    std::optional<double> p_s_before;
    std::optional<double> p_s_after;
    std::optional<double> controlled_fraction;
    std::optional<int> iterations;

    std::string solver_status;
    int solver_iterations = 0;
    double eq_residual = 0.0;

    PhaseTimings timings;
};

std::string report_to_json(const RunReport& report);
RunReport report_from_json(const std::string& text);
void write_report(const RunReport& report, const std::string& path);
RunReport load_report(const std::string& path);

std::string estimate_to_json(const SafetyEstimate& est, unsigned long long seed,
                             const std::string& spec_hash,
                             std::optional<double> certified_p_s = std::nullopt);

void write_partition_csv(const Partition& partition, const std::string& path);
void write_bounds_csv(const Partition& partition, const std::vector<LinearEnvelope>& envelopes,
                      BoundMode mode, const std::string& path);
void write_policy_csv(const ControlPolicy& policy, int control_dim, const std::string& path);
ControlPolicy load_policy_csv(const std::string& path, int control_dim);
void write_betamap_csv(const RunReport& report, const std::string& path);
// Grayscale heatmap (darker = larger beta_q); only 2-D partitions.
std::string betamap_svg(const RunReport& report);
void write_trajectories_csv(const std::vector<Trajectory>& trajectories, const std::string& path);

// fnv1a64 of a file's bytes, hex-encoded.
std::string file_hash_hex(const std::string& path);

}  // namespace nnb
