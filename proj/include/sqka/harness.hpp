#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sqka/adversary.hpp"
#include "sqka/protocol.hpp"

namespace sqka {

struct ExperimentConfig {
    Variant variant = Variant::Original;
    std::size_t n = 8;
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    BobBehavior bob;
    EveBehavior eve;
    double threshold = 0.0;
};

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

// 95% Wilson score interval; an empty sample yields the vacuous [0, 1].
Interval wilson_ci_95(std::uint64_t successes, std::uint64_t total);

struct TrialOutcome {
    RunStatus status = RunStatus::Accepted;
    std::optional<AbortReason> abort_reason;
    bool keys_agree = false;
    bool target_hit = false;
    std::size_t checked = 0;
    std::size_t errors = 0;
};

// One protocol run of the configured behaviors, seeded from the master seed
// and the trial index, so any aggregate row can be reproduced on its own.
TrialOutcome run_trial(const ExperimentConfig& config, std::uint64_t index);

struct ExperimentReport {
    ExperimentConfig config;
    std::uint64_t trials = 0;
    std::uint64_t accepted = 0;
    std::uint64_t aborted = 0;
    std::uint64_t infeasible = 0;
    std::uint64_t aborts_error_rate_exceeded = 0;
    std::uint64_t aborts_minus_sign_flag = 0;
    std::uint64_t agreements = 0;
    std::uint64_t target_hits = 0;
    std::uint64_t checked_pairs = 0;
    std::uint64_t checked_pair_errors = 0;
    double detection_rate = 0.0;
    Interval detection_ci;
    // Fractions among accepted runs; absent while nothing was accepted, and
    // the hit rate also absent while no target key is configured.
    std::optional<double> key_agreement_rate;
    std::optional<double> attacker_target_hit_rate;
};

// Runs config.trials independent trials (in parallel when OpenMP is enabled)
// and aggregates them in trial order, so the report is a pure function of the
// config.
ExperimentReport run_experiment(const ExperimentConfig& config);

// Single-threaded twin of run_experiment; must produce the identical report.
ExperimentReport run_experiment_serial(const ExperimentConfig& config);

struct ReplayVerdict {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Reruns the two published worked instances end to end: the fake-permutation
// instance (honest and attacked legs), the sacrificed-positions arithmetic,
// and the physical run of that second instance, which must trip the check at
// its two measured announced positions every time.
std::vector<ReplayVerdict> replay_worked_examples();

// Deterministic serialization; format is "json" or "csv".
std::string emit_report(const ExperimentReport& report, const std::string& format);

std::string csv_header();
std::string csv_row(const ExperimentReport& report);

}  // namespace sqka
