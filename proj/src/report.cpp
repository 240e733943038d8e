#include <cstdio>
#include <stdexcept>
#include <string>

#include "sqka/harness.hpp"

namespace sqka {

namespace {

// Hand-rolled rendering keeps the byte output a pure function of the report:
// fixed precision, fixed field order, no locale involvement.
std::string rate9(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    return buf;
}

std::string frac6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

std::string opt_rate9(const std::optional<double>& v) {
    return v ? rate9(*v) : std::string("null");
}

bool has_flips(const ExperimentConfig& config) {
    return config.bob.mode == BobMode::BitFlipAttack;
}

std::string json_report(const ExperimentReport& r) {
    const ExperimentConfig& c = r.config;
    std::string out;
    out += "{\n";
    out += "  \"config\": {\n";
    out += "    \"variant\": " + quoted(to_string(c.variant)) + ",\n";
    out += "    \"n\": " + std::to_string(c.n) + ",\n";
    out += "    \"trials\": " + std::to_string(c.trials) + ",\n";
    out += "    \"seed\": " + std::to_string(c.seed) + ",\n";
    out += "    \"threshold\": " + frac6(c.threshold) + ",\n";
    out += "    \"bob\": " + quoted(to_string(c.bob.mode)) + ",\n";
    out += "    \"target\": " + (c.bob.target.empty() ? "null" : quoted(c.bob.target)) + ",\n";
    out += "    \"flips\": " + (has_flips(c) ? std::to_string(c.bob.flips) : "null") + ",\n";
    out += "    \"eve\": " + quoted(eve_label(c.eve)) + "\n";
    out += "  },\n";
    out += "  \"results\": {\n";
    out += "    \"accepted\": " + std::to_string(r.accepted) + ",\n";
    out += "    \"aborted\": " + std::to_string(r.aborted) + ",\n";
    out += "    \"infeasible\": " + std::to_string(r.infeasible) + ",\n";
    out += "    \"abort_reasons\": {\n";
    out += "      \"error_rate_exceeded\": " + std::to_string(r.aborts_error_rate_exceeded) + ",\n";
    out += "      \"minus_sign_flag\": " + std::to_string(r.aborts_minus_sign_flag) + "\n";
    out += "    },\n";
    out += "    \"detection_rate\": " + rate9(r.detection_rate) + ",\n";
    out += "    \"wilson_ci_95\": {\n";
    out += "      \"lo\": " + rate9(r.detection_ci.lo) + ",\n";
    out += "      \"hi\": " + rate9(r.detection_ci.hi) + "\n";
    out += "    },\n";
    out += "    \"key_agreement_rate\": " + opt_rate9(r.key_agreement_rate) + ",\n";
    out += "    \"attacker_target_hit_rate\": " + opt_rate9(r.attacker_target_hit_rate) + ",\n";
    out += "    \"checked_pairs\": " + std::to_string(r.checked_pairs) + ",\n";
    out += "    \"checked_pair_errors\": " + std::to_string(r.checked_pair_errors) + "\n";
    out += "  }\n";
    out += "}\n";
    return out;
}

}  // namespace

std::string csv_header() {
    return "variant,n,trials,seed,threshold,bob,target,flips,eve,accepted,aborted,infeasible,"
           "aborts_error_rate_exceeded,aborts_minus_sign_flag,detection_rate,wilson_lo,"
           "wilson_hi,key_agreement_rate,attacker_target_hit_rate,checked_pairs,"
           "checked_pair_errors\n";
}

std::string csv_row(const ExperimentReport& r) {
    const ExperimentConfig& c = r.config;
    std::string out;
    out += to_string(c.variant);
    out += "," + std::to_string(c.n);
    out += "," + std::to_string(c.trials);
    out += "," + std::to_string(c.seed);
    out += "," + frac6(c.threshold);
    out += ",";
    out += to_string(c.bob.mode);
    out += "," + c.bob.target;
    out += "," + (has_flips(c) ? std::to_string(c.bob.flips) : std::string());
    out += "," + eve_label(c.eve);
    out += "," + std::to_string(r.accepted);
    out += "," + std::to_string(r.aborted);
    out += "," + std::to_string(r.infeasible);
    out += "," + std::to_string(r.aborts_error_rate_exceeded);
    out += "," + std::to_string(r.aborts_minus_sign_flag);
    out += "," + rate9(r.detection_rate);
    out += "," + rate9(r.detection_ci.lo);
    out += "," + rate9(r.detection_ci.hi);
    out += "," + (r.key_agreement_rate ? rate9(*r.key_agreement_rate) : std::string());
    out += "," + (r.attacker_target_hit_rate ? rate9(*r.attacker_target_hit_rate) : std::string());
    out += "," + std::to_string(r.checked_pairs);
    out += "," + std::to_string(r.checked_pair_errors);
    out += "\n";
    return out;
}

std::string emit_report(const ExperimentReport& report, const std::string& format) {
    if (format == "json") return json_report(report);
    if (format == "csv") return csv_header() + csv_row(report);
    throw std::invalid_argument("unknown report format: " + format);
}

}  // namespace sqka
