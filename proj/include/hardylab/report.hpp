#pragma once

// Run records and their serialization. A record carries the command, every
// input needed for a rerun (including seeds and rule descriptors), and the
// result payload. JSON field order is fixed by construction order; reruns
// with the same seed are byte-identical outside the timing fields
// (timestamp, wall_time_seconds).

#include "cone.hpp"
#include "decompose.hpp"
#include "functionals.hpp"
#include "quadrature.hpp"
#include "spectral.hpp"
#include "trial.hpp"
#include "version.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hardylab {

using ordered_json = nlohmann::ordered_json;

struct RunRecord {
    std::string command;
    ordered_json parameters = ordered_json::object();
    ordered_json payload = ordered_json::object();
    std::vector<std::string> warnings;
    double wall_time_seconds = 0.0;
    std::string timestamp;
};

inline std::string timestamp_utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

inline ordered_json rule_json(const QuadratureRule& rule) {
    ordered_json j;
    j["domain"] = domain_tag_name(rule.tag);
    j["dim"] = rule.dim;
    if (rule.n > 0) j["n"] = rule.n;
    if (rule.k > 0) j["k"] = rule.k;
    if (rule.tag == DomainTag::radial || rule.tag == DomainTag::cone_ball) j["radius"] = rule.radius;
    j["count"] = rule.count();
    j["stochastic"] = rule.stochastic;
    if (rule.stochastic) j["seed"] = rule.seed;
    j["symmetric_last_k"] = rule.symmetric_last_k;
    return j;
}

inline ordered_json trial_json(const TrialFunction& u) {
    ordered_json j;
    j["name"] = u.name;
    j["n"] = u.spec.n;
    j["k"] = u.spec.k;
    j["support_radius"] = u.support_radius;
    j["vanishing_order"] = u.vanishing_order;
    if (u.seed != 0) j["seed"] = u.seed;
    if (u.resample_count != 0) j["resamples"] = u.resample_count;
    return j;
}

inline ordered_json functional_report_json(const FunctionalReport& rep) {
    ordered_json j;
    j["check"] = rep.check;
    j["energy"] = rep.energy;
    j["hardy"] = rep.hardy;
    if (rep.weighted) j["weighted"] = *rep.weighted;
    if (!rep.remainder_terms.empty()) j["remainder_terms"] = rep.remainder_terms;
    j["constant"] = rep.constant_used;
    j["margin"] = rep.margin;
    j["margin_error"] = rep.margin_error;
    j["tolerance"] = rep.tolerance;
    j["stochastic"] = rep.stochastic;
    j["verdict"] = verdict_name(rep.verdict);
    return j;
}

inline ordered_json eigen_report_json(const SectionEigenReport& rep) {
    ordered_json j;
    j["k"] = rep.k;
    j["target"] = rep.target;
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < rep.results.size(); ++i) {
        ordered_json r;
        r["resolution"] = rep.resolutions[i];
        r["eigenvalue"] = rep.results[i].eigenvalue;
        r["iterations"] = rep.results[i].iterations;
        r["residual_norm"] = rep.results[i].residual_norm;
        r["single_signed"] = rep.results[i].single_signed;
        rows.push_back(std::move(r));
    }
    j["levels"] = std::move(rows);
    j["observed_order"] = rep.observed_order;
    j["extrapolated"] = rep.extrapolated;
    j["relative_error"] = rep.relative_error;
    j["pass"] = rep.pass;
    return j;
}

inline ordered_json vanishing_report_json(const VanishingReport& rep) {
    ordered_json j;
    j["max_degree"] = rep.max_degree;
    j["max_coefficient"] = rep.max_coefficient;
    j["sup_norm"] = rep.sup_norm;
    j["threshold"] = rep.threshold;
    j["symmetric_rule"] = rep.symmetric_rule;
    j["pass"] = rep.pass;
    if (!rep.warning.empty()) j["warning"] = rep.warning;
    return j;
}

inline ordered_json doubling_report_json(const DoublingReport& rep) {
    ordered_json j;
    j["cone_energy"] = rep.cone_energy;
    j["full_energy"] = rep.full_energy;
    j["cone_hardy"] = rep.cone_hardy;
    j["full_hardy"] = rep.full_hardy;
    j["expected_ratio"] = rep.expected_ratio;
    j["energy_ratio"] = rep.energy_ratio;
    j["hardy_ratio"] = rep.hardy_ratio;
    j["worst_relative_error"] = rep.worst_relative_error;
    j["degenerate"] = rep.degenerate;
    j["pass"] = rep.pass;
    return j;
}

inline ordered_json record_json(const RunRecord& rec) {
    ordered_json j;
    j["command"] = rec.command;
    j["artifact_version"] = artifact_version;
    j["parameters"] = rec.parameters;
    j["payload"] = rec.payload;
    j["warnings"] = rec.warnings;
    j["wall_time_seconds"] = rec.wall_time_seconds;
    j["timestamp"] = rec.timestamp;
    return j;
}

inline void write_records_json(const std::string& path, const std::vector<RunRecord>& records) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : records) arr.push_back(record_json(r));
    std::ofstream out(path);
    if (!out) throw std::runtime_error("report: cannot write " + path);
    out << arr.dump(2) << "\n";
    if (!out) throw std::runtime_error("report: write failed for " + path);
}

// fixed shortest-roundtrip formatting so CSV bytes are deterministic
inline std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("report: cannot write " + path);
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
        out << "\n";
    }
    if (!out) throw std::runtime_error("report: write failed for " + path);
}

} // namespace hardylab
