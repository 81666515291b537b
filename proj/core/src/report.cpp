// SPDX-License-Identifier: Apache-2.0
#include "nnbarrier/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace nnb {

using nlohmann::json;

namespace {

json vec_to_json(const Eigen::VectorXd& v) {
    json j = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
    return j;
}

Eigen::VectorXd vec_from_json(const json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
}

json poly_to_json(const Polynomial& p) {
    json terms = json::array();
    for (const auto& [e, c] : p.terms()) {
        json je = json::array();
        for (auto k : e) je.push_back(k);
        terms.push_back(json{{"exponents", je}, {"coeff", c}});
    }
    return json{{"arity", p.arity()}, {"terms", terms}, {"text", p.to_string()}};
}

Polynomial poly_from_json(const json& j) {
    Polynomial p(j.at("arity").get<int>());
    for (const auto& t : j.at("terms")) {
        Exponents e;
        for (const auto& k : t.at("exponents")) e.push_back(k.get<std::uint32_t>());
        p.add_term(e, t.at("coeff").get<double>());
    }
    return p;
}

std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string report_to_json(const RunReport& r) {
    json j;
    j["report_version"] = kReportVersion;
    j["command"] = r.command;
    j["spec_path"] = r.spec_path;
    j["spec_hash"] = r.spec_hash;
    j["tool_version"] = r.tool_version;
    j["seed"] = r.seed;
    j["threads"] = r.threads;
    j["mode"] = to_string(r.mode);
    j["degree"] = r.degree;
    j["horizon"] = r.horizon;
    j["threshold"] = r.threshold;
    j["num_regions"] = r.num_regions;
    j["eta"] = r.eta;
    j["beta"] = r.beta;
    j["p_s"] = r.p_s;
    j["barrier"] = poly_to_json(r.barrier);
    json regions = json::array();
    for (const auto& row : r.regions) {
        json jr{{"id", row.id},
                {"lower", vec_to_json(row.lower)},
                {"upper", vec_to_json(row.upper)},
                {"beta_q", row.beta_q}};
        if (row.u.size() > 0) jr["u"] = vec_to_json(row.u);
        regions.push_back(std::move(jr));
    }
    j["region_betas"] = std::move(regions);
    if (r.p_s_before) j["p_s_before"] = *r.p_s_before;
    if (r.p_s_after) j["p_s_after"] = *r.p_s_after;
    if (r.controlled_fraction) j["controlled_fraction"] = *r.controlled_fraction;
    if (r.iterations) j["iterations"] = *r.iterations;
    j["solver"] = json{{"status", r.solver_status},
                       {"iterations", r.solver_iterations},
                       {"eq_residual", r.eq_residual}};
    j["timings_sec"] = json{{"partition", r.timings.partition_sec}, {"bounds", r.timings.bounds_sec},
                            {"sos", r.timings.sos_sec},             {"beta_eval", r.timings.beta_eval_sec},
                            {"lp", r.timings.lp_sec},               {"mc", r.timings.mc_sec},
                            {"total", r.timings.total_sec}};
    return j.dump(2) + "\n";
}

RunReport report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("report is not valid JSON: ") + e.what());
    }
    if (j.value("report_version", 0) != kReportVersion)
        throw ValidationError("report_version", "unsupported report version");
    RunReport r;
    r.command = j.at("command").get<std::string>();
    r.spec_path = j.at("spec_path").get<std::string>();
    r.spec_hash = j.at("spec_hash").get<std::string>();
    r.tool_version = j.at("tool_version").get<std::string>();
    r.seed = j.at("seed").get<unsigned long long>();
    r.threads = j.at("threads").get<int>();
    r.mode = bound_mode_from_string(j.at("mode").get<std::string>());
    r.degree = j.at("degree").get<int>();
    r.horizon = j.at("horizon").get<int>();
    r.threshold = j.at("threshold").get<double>();
    r.num_regions = j.at("num_regions").get<std::size_t>();
    r.eta = j.at("eta").get<double>();
    r.beta = j.at("beta").get<double>();
    r.p_s = j.at("p_s").get<double>();
    r.barrier = poly_from_json(j.at("barrier"));
    for (const auto& jr : j.at("region_betas")) {
        RunReport::RegionRow row;
        row.id = jr.at("id").get<std::size_t>();
        row.lower = vec_from_json(jr.at("lower"));
        row.upper = vec_from_json(jr.at("upper"));
        row.beta_q = jr.at("beta_q").get<double>();
        if (jr.contains("u")) row.u = vec_from_json(jr.at("u"));
        r.regions.push_back(std::move(row));
    }
    if (j.contains("p_s_before")) r.p_s_before = j["p_s_before"].get<double>();
    if (j.contains("p_s_after")) r.p_s_after = j["p_s_after"].get<double>();
    if (j.contains("controlled_fraction")) r.controlled_fraction = j["controlled_fraction"].get<double>();
    if (j.contains("iterations")) r.iterations = j["iterations"].get<int>();
    r.solver_status = j.at("solver").at("status").get<std::string>();
    r.solver_iterations = j.at("solver").at("iterations").get<int>();
    r.eq_residual = j.at("solver").at("eq_residual").get<double>();
    const auto& t = j.at("timings_sec");
    r.timings = {t.at("partition").get<double>(), t.at("bounds").get<double>(),
                 t.at("sos").get<double>(),       t.at("beta_eval").get<double>(),
                 t.at("lp").get<double>(),        t.at("mc").get<double>(),
                 t.at("total").get<double>()};
    return r;
}

void write_report(const RunReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write report: " + path);
    out << report_to_json(report);
}

RunReport load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open report: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return report_from_json(buf.str());
}

std::string estimate_to_json(const SafetyEstimate& est, unsigned long long seed,
                             const std::string& spec_hash, std::optional<double> certified_p_s) {
    json j;
    j["report_version"] = kReportVersion;
    j["command"] = "simulate";
    j["spec_hash"] = spec_hash;
    j["seed"] = seed;
    j["p_hat"] = est.p_hat;
    j["samples"] = est.samples;
    j["ci_half_width"] = est.ci_half_width;
    j["per_init_min"] = est.per_init_min;
    if (certified_p_s) {
        j["certified_p_s"] = *certified_p_s;
        j["soundness_margin"] = est.per_init_min + 3.0 * est.ci_half_width - *certified_p_s;
    }
    return j.dump(2) + "\n";
}

void write_partition_csv(const Partition& partition, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write partition csv: " + path);
    const int n = partition.source_box.dim();
    out << "region_id";
    for (int i = 1; i <= n; ++i) out << ",l_" << i;
    for (int i = 1; i <= n; ++i) out << ",u_" << i;
    out << "\n";
    for (std::size_t q = 0; q < partition.size(); ++q) {
        out << q;
        const Box& b = partition.regions[q];
        for (int i = 0; i < n; ++i) out << ',' << csv_num(b.lower[i]);
        for (int i = 0; i < n; ++i) out << ',' << csv_num(b.upper[i]);
        out << "\n";
    }
}

void write_bounds_csv(const Partition& partition, const std::vector<LinearEnvelope>& envelopes,
                      BoundMode mode, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write bounds csv: " + path);
    out << "region_id,mode,A_low,b_low,A_up,b_up\n";
    for (std::size_t q = 0; q < envelopes.size(); ++q) {
        const auto& e = envelopes[q];
        auto mat = [&](const Eigen::MatrixXd& M) {
            std::string s;
            for (Eigen::Index r = 0; r < M.rows(); ++r)
                for (Eigen::Index c = 0; c < M.cols(); ++c) {
                    if (!s.empty()) s += ' ';
                    s += csv_num(M(r, c));
                }
            return s;
        };
        auto vec = [&](const Eigen::VectorXd& v) {
            std::string s;
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                if (!s.empty()) s += ' ';
                s += csv_num(v[i]);
            }
            return s;
        };
        out << q << ',' << to_string(mode) << ',' << mat(e.A_low) << ',' << vec(e.b_low) << ','
            << mat(e.A_up) << ',' << vec(e.b_up) << "\n";
    }
    (void)partition;
}

void write_policy_csv(const ControlPolicy& policy, int control_dim, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write policy csv: " + path);
    out << "region_id";
    for (int i = 1; i <= control_dim; ++i) out << ",u_" << i;
    out << "\n";
    for (const auto& [q, u] : policy.entries) {
        out << q;
        for (int i = 0; i < control_dim; ++i) out << ',' << csv_num(u[i]);
        out << "\n";
    }
}

ControlPolicy load_policy_csv(const std::string& path, int control_dim) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open policy csv: " + path);
    ControlPolicy policy;
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty policy csv");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        if (!std::getline(ls, cell, ',')) continue;
        const std::size_t q = std::stoull(cell);
        Eigen::VectorXd u(control_dim);
        for (int i = 0; i < control_dim; ++i) {
            if (!std::getline(ls, cell, ',')) throw ParseError("policy row with missing controls");
            u[i] = std::stod(cell);
        }
        policy.entries[q] = std::move(u);
    }
    return policy;
}

void write_betamap_csv(const RunReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write betamap csv: " + path);
    const int n = report.regions.empty() ? 0 : static_cast<int>(report.regions.front().lower.size());
    out << "region_id";
    for (int i = 1; i <= n; ++i) out << ",l_" << i;
    for (int i = 1; i <= n; ++i) out << ",u_" << i;
    out << ",beta_q\n";
    for (const auto& row : report.regions) {
        out << row.id;
        for (int i = 0; i < n; ++i) out << ',' << csv_num(row.lower[i]);
        for (int i = 0; i < n; ++i) out << ',' << csv_num(row.upper[i]);
        out << ',' << csv_num(row.beta_q) << "\n";
    }
}

std::string betamap_svg(const RunReport& report) {
    if (report.regions.empty()) throw ValidationError("report", "no region table");
    const int n = static_cast<int>(report.regions.front().lower.size());
    if (n != 2) throw ValidationError("report", "heatmap requires a 2-D partition");

    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300, bmax = 0.0;
    for (const auto& r : report.regions) {
        x0 = std::min(x0, r.lower[0]);
        x1 = std::max(x1, r.upper[0]);
        y0 = std::min(y0, r.lower[1]);
        y1 = std::max(y1, r.upper[1]);
        bmax = std::max(bmax, r.beta_q);
    }
    const double W = 640.0, H = 640.0, margin = 40.0;
    const double sx = (W - 2 * margin) / std::max(1e-300, x1 - x0);
    const double sy = (H - 2 * margin) / std::max(1e-300, y1 - y0);

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << static_cast<int>(W)
        << "\" height=\"" << static_cast<int>(H) << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const auto& r : report.regions) {
        const double shade = bmax > 0.0 ? r.beta_q / bmax : 0.0;
        const int gray = static_cast<int>(std::lround(255.0 * (1.0 - shade)));
        const double px = margin + (r.lower[0] - x0) * sx;
        const double pw = (r.upper[0] - r.lower[0]) * sx;
        // SVG y grows downward.
        const double py = margin + (y1 - r.upper[1]) * sy;
        const double ph = (r.upper[1] - r.lower[1]) * sy;
        char buf[256];
        std::snprintf(buf, sizeof(buf),
                      "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
                      "fill=\"rgb(%d,%d,%d)\" stroke=\"#888\" stroke-width=\"0.5\"/>\n",
                      px, py, pw, ph, gray, gray, gray);
        svg << buf;
    }
    char label[160];
    std::snprintf(label, sizeof(label),
                  "<text x=\"%.0f\" y=\"%.0f\" font-size=\"13\" font-family=\"monospace\">"
                  "beta_q: 0 (white) .. %.3g (black)</text>\n",
                  margin, H - 12.0, bmax);
    svg << label << "</svg>\n";
    return svg.str();
}

void write_trajectories_csv(const std::vector<Trajectory>& trajectories, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write trajectories csv: " + path);
    if (trajectories.empty()) {
        out << "trajectory,k,safe\n";
        return;
    }
    const int n = static_cast<int>(trajectories.front().states.front().size());
    int c = 0;
    for (const auto& t : trajectories)
        for (const auto& u : t.controls) c = std::max(c, static_cast<int>(u.size()));
    out << "trajectory,k";
    for (int i = 1; i <= n; ++i) out << ",x_" << i;
    for (int i = 1; i <= c; ++i) out << ",u_" << i;
    out << ",safe_flag\n";
    for (std::size_t ti = 0; ti < trajectories.size(); ++ti) {
        const auto& t = trajectories[ti];
        for (std::size_t k = 0; k < t.states.size(); ++k) {
            out << ti << ',' << k;
            for (int i = 0; i < n; ++i) out << ',' << csv_num(t.states[k][i]);
            for (int i = 0; i < c; ++i) {
                const bool have = k < t.controls.size() && t.controls[k].size() > i;
                out << ',' << (have ? csv_num(t.controls[k][i]) : "0");
            }
            out << ',' << (t.safe ? 1 : 0) << "\n";
        }
    }
}

std::string file_hash_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file for hashing: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string data = buf.str();
    char out[32];
    std::snprintf(out, sizeof(out), "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(data.data(), data.size())));
    return out;
}

}  // namespace nnb
