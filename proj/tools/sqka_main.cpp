#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sqka/harness.hpp"

namespace {

using namespace sqka;

struct CliConfig {
    std::string variant = "original";
    std::size_t n = 8;
    std::uint64_t trials = 1000;
    std::uint64_t seed = 0;
    double threshold = 0.0;
    std::string bob = "honest";
    std::string eve = "none";
    std::string target;
    std::size_t flips = 1;
    std::string format = "json";
    std::string out;
    std::string trace;
    std::string over;
    std::string values;
};

struct OptionRefs {
    CLI::Option* target = nullptr;
    CLI::Option* flips = nullptr;
};

OptionRefs add_protocol_flags(CLI::App* cmd, CliConfig& cli) {
    cmd->add_option("--variant", cli.variant, "protocol variant")
        ->check(CLI::IsMember({"original", "improved"}));
    cmd->add_option("--n", cli.n, "final key length in bits");
    cmd->add_option("--seed", cli.seed, "master seed");
    cmd->add_option("--threshold", cli.threshold, "tolerated check error fraction");
    cmd->add_option("--bob", cli.bob, "bob behavior")
        ->check(CLI::IsMember(
            {"honest", "permutation", "substitution", "swap-untouched", "bit-flip"}));
    cmd->add_option("--eve", cli.eve, "eavesdropper behavior")
        ->check(CLI::IsMember(
            {"none", "intercept-forward", "intercept-backward", "intercept-both"}));
    OptionRefs refs;
    refs.target = cmd->add_option("--target", cli.target,
                                  "attacker target key, a bit string of length n");
    refs.flips = cmd->add_option("--flips", cli.flips,
                                 "transposition count for the bit-flip behavior");
    return refs;
}

void add_report_flags(CLI::App* cmd, CliConfig& cli) {
    cmd->add_option("--trials", cli.trials, "trial count");
    cmd->add_option("--format", cli.format, "report format")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--out", cli.out, "also write the report to this file");
}

Variant parse_variant(const std::string& s) {
    if (s == "original") return Variant::Original;
    if (s == "improved") return Variant::Improved;
    throw std::invalid_argument("unknown variant: " + s);
}

BobBehavior parse_bob(const CliConfig& cli, const OptionRefs& refs) {
    const bool target_given = refs.target->count() > 0;
    const bool flips_given = refs.flips->count() > 0;
    if (cli.bob == "permutation" || cli.bob == "substitution") {
        if (!target_given) {
            throw std::invalid_argument("--bob " + cli.bob + " needs --target");
        }
        if (flips_given) throw std::invalid_argument("--flips applies to --bob bit-flip only");
        return cli.bob == "permutation" ? permutation_attack(cli.target)
                                        : substitution_attack(cli.target);
    }
    if (target_given) {
        throw std::invalid_argument("--target applies to --bob permutation or substitution only");
    }
    if (cli.bob == "bit-flip") return bit_flip_attack(cli.flips);
    if (flips_given) throw std::invalid_argument("--flips applies to --bob bit-flip only");
    if (cli.bob == "honest") return honest_bob();
    if (cli.bob == "swap-untouched") return swap_untouched_attack();
    throw std::invalid_argument("unknown bob behavior: " + cli.bob);
}

EveBehavior parse_eve(const std::string& s) {
    if (s == "none") return no_eve();
    if (s == "intercept-forward") return intercept_resend(EveDirection::Forward);
    if (s == "intercept-backward") return intercept_resend(EveDirection::Backward);
    if (s == "intercept-both") return intercept_resend(EveDirection::Both);
    throw std::invalid_argument("unknown eve behavior: " + s);
}

ExperimentConfig build_experiment(const CliConfig& cli, const OptionRefs& refs) {
    ExperimentConfig config;
    config.variant = parse_variant(cli.variant);
    config.n = cli.n;
    config.trials = cli.trials;
    config.seed = cli.seed;
    config.bob = parse_bob(cli, refs);
    config.eve = parse_eve(cli.eve);
    config.threshold = cli.threshold;
    return config;
}

std::uint64_t parse_count(const std::string& s) {
    std::size_t used = 0;
    std::uint64_t value = 0;
    try {
        value = std::stoull(s, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("not a count: " + s);
    }
    if (used != s.size()) throw std::invalid_argument("not a count: " + s);
    return value;
}

double parse_fraction(const std::string& s) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(s, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("not a number: " + s);
    }
    if (used != s.size()) throw std::invalid_argument("not a number: " + s);
    return value;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> parts;
    std::string current;
    for (char c : s) {
        if (c == ',') {
            parts.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    parts.push_back(current);
    return parts;
}

int write_file(const std::string& path, const std::string& bytes) {
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        std::cerr << "cannot open output file: " << path << "\n";
        return 1;
    }
    file << bytes;
    return 0;
}

std::string join_one_based(const std::vector<std::size_t>& values) {
    std::string out;
    for (std::size_t v : values) {
        if (!out.empty()) out += ",";
        out += std::to_string(v + 1);
    }
    return out.empty() ? "-" : out;
}

std::string event_line(const TranscriptEvent& event) {
    switch (event.type) {
        case TranscriptEvent::Type::QubitsSent:
            return std::string("qubits_sent ") + to_string(event.direction) + " " +
                   std::to_string(event.count);
        case TranscriptEvent::Type::RawKeyAnnouncement:
            return "raw_key_announcement " + event.bits;
        case TranscriptEvent::Type::CaseAAnnouncement:
            return "case_a_announcement positions " + join_one_based(event.positions);
        case TranscriptEvent::Type::KeyAnnouncement:
            return "key_announcement " + event.bits;
        case TranscriptEvent::Type::RemainingPermutationAnnouncement: {
            std::vector<std::size_t> slots;
            for (const RoutingEntry& entry : event.routing) slots.push_back(entry.slot);
            return "remaining_permutation_announcement slots " + join_one_based(slots);
        }
        case TranscriptEvent::Type::AbortNotice:
            return std::string("abort_notice ") + to_string(*event.reason);
    }
    return "?";
}

std::string echo_config_lines(const CliConfig& cli, const BobBehavior& bob) {
    std::string out;
    out += "variant: " + cli.variant + "\n";
    out += "n: " + std::to_string(cli.n) + "\n";
    out += "seed: " + std::to_string(cli.seed) + "\n";
    char threshold[32];
    std::snprintf(threshold, sizeof threshold, "%.6f", cli.threshold);
    out += std::string("threshold: ") + threshold + "\n";
    out += std::string("bob: ") + to_string(bob.mode) + "\n";
    out += "target: " + (bob.target.empty() ? std::string("-") : bob.target) + "\n";
    out += "flips: " +
           (bob.mode == BobMode::BitFlipAttack ? std::to_string(bob.flips) : std::string("-")) +
           "\n";
    out += "eve: " + cli.eve + "\n";
    return out;
}

int do_run(const CliConfig& cli, const OptionRefs& refs) {
    const BobBehavior bob = parse_bob(cli, refs);
    const EveBehavior eve = parse_eve(cli.eve);
    const RunSpec spec{parse_variant(cli.variant), cli.n, cli.threshold, cli.seed};
    validate_run_inputs(spec, bob);

    const RunResult result = run_protocol(spec, bob, eve);

    std::string out = echo_config_lines(cli, bob);
    out += std::string("status: ") + to_string(result.outcome.status) + "\n";
    out += "abort_reason: " +
           (result.outcome.abort_reason ? std::string(to_string(*result.outcome.abort_reason))
                                        : std::string("-")) +
           "\n";
    out += "alice_key: " +
           (result.outcome.alice_key.empty() ? std::string("-") : result.outcome.alice_key) + "\n";
    out += "bob_key: " +
           (result.outcome.bob_key.empty() ? std::string("-") : result.outcome.bob_key) + "\n";
    out += "checked_pairs: " + std::to_string(result.detection.checked) + "\n";
    out += "check_errors: " + std::to_string(result.detection.errors) + "\n";
    out += "transcript:\n";
    for (const TranscriptEvent& event : result.transcript.events()) {
        out += "  " + event_line(event) + "\n";
    }
    std::cout << out;

    if (!cli.trace.empty()) {
        const int rc = write_file(cli.trace, result.transcript.to_jsonl());
        if (rc != 0) return rc;
    }
    if (result.outcome.status == RunStatus::Infeasible) return 3;
    return 0;
}

int do_attack(const CliConfig& cli, const OptionRefs& refs) {
    const ExperimentConfig config = build_experiment(cli, refs);
    const ExperimentReport report = run_experiment(config);
    const std::string bytes = emit_report(report, cli.format);
    std::cout << bytes;
    if (!cli.out.empty()) return write_file(cli.out, bytes);
    return 0;
}

int do_sweep(const CliConfig& cli, const OptionRefs& refs) {
    const ExperimentConfig base = build_experiment(cli, refs);
    std::vector<ExperimentConfig> configs;
    for (const std::string& value : split_csv(cli.values)) {
        ExperimentConfig config = base;
        if (cli.over == "n") {
            config.n = parse_count(value);
        } else if (cli.over == "trials") {
            config.trials = parse_count(value);
        } else if (cli.over == "seed") {
            config.seed = parse_count(value);
        } else if (cli.over == "threshold") {
            config.threshold = parse_fraction(value);
        } else if (cli.over == "flips") {
            if (config.bob.mode != BobMode::BitFlipAttack) {
                throw std::invalid_argument("sweeping flips needs --bob bit-flip");
            }
            config.bob.flips = parse_count(value);
        } else {
            throw std::invalid_argument("cannot sweep over: " + cli.over);
        }
        if ((config.bob.mode == BobMode::PermutationAttack ||
             config.bob.mode == BobMode::SubstitutionAttack) &&
            config.bob.target.size() != config.n) {
            throw std::invalid_argument("target length must equal the key length");
        }
        validate_run_inputs({config.variant, config.n, config.threshold, config.seed},
                            config.bob);
        if (config.trials == 0) throw std::invalid_argument("need at least one trial");
        configs.push_back(config);
    }
    if (configs.empty()) throw std::invalid_argument("--values is empty");

    std::vector<ExperimentReport> reports;
    reports.reserve(configs.size());
    for (const ExperimentConfig& config : configs) reports.push_back(run_experiment(config));

    std::string bytes;
    if (cli.format == "csv") {
        bytes = csv_header();
        for (const ExperimentReport& report : reports) bytes += csv_row(report);
    } else {
        bytes = "[\n";
        for (std::size_t i = 0; i < reports.size(); ++i) {
            std::string one = emit_report(reports[i], "json");
            if (!one.empty() && one.back() == '\n') one.pop_back();
            bytes += one;
            bytes += i + 1 < reports.size() ? ",\n" : "\n";
        }
        bytes += "]\n";
    }
    std::cout << bytes;
    if (!cli.out.empty()) return write_file(cli.out, bytes);
    return 0;
}

int do_examples() {
    const std::vector<ReplayVerdict> verdicts = replay_worked_examples();
    std::string out;
    bool all_pass = true;
    for (const ReplayVerdict& v : verdicts) {
        out += std::string(v.pass ? "[PASS] " : "[FAIL] ") + v.name + ": " + v.detail + "\n";
        all_pass = all_pass && v.pass;
    }
    out += all_pass ? "all example assertions hold\n" : "example assertions failed\n";
    std::cout << out;
    return all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mutual semi-quantum key agreement simulator"};
    app.require_subcommand(1);
    CliConfig cli;

    CLI::App* run_cmd = app.add_subcommand("run", "execute one seeded protocol run");
    const OptionRefs run_refs = add_protocol_flags(run_cmd, cli);
    run_cmd->add_option("--trace", cli.trace, "write the transcript event log to this file");

    CLI::App* attack_cmd =
        app.add_subcommand("attack", "Monte Carlo experiment over seeded trials");
    const OptionRefs attack_refs = add_protocol_flags(attack_cmd, cli);
    add_report_flags(attack_cmd, cli);

    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "one experiment report per value of a swept flag");
    const OptionRefs sweep_refs = add_protocol_flags(sweep_cmd, cli);
    add_report_flags(sweep_cmd, cli);
    sweep_cmd->add_option("--over", cli.over, "swept flag")
        ->check(CLI::IsMember({"n", "trials", "threshold", "seed", "flips"}))
        ->required();
    sweep_cmd->add_option("--values", cli.values, "comma-separated values for the swept flag")
        ->required();

    CLI::App* examples_cmd =
        app.add_subcommand("paper-examples", "replay the published worked examples");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (run_cmd->parsed()) return do_run(cli, run_refs);
        if (attack_cmd->parsed()) return do_attack(cli, attack_refs);
        if (sweep_cmd->parsed()) return do_sweep(cli, sweep_refs);
        if (examples_cmd->parsed()) return do_examples();
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
