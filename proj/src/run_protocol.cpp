#include <algorithm>
#include <stdexcept>

#include "sqka/adversary.hpp"
#include "sqka/protocol.hpp"

namespace sqka {

namespace {

std::size_t count_bit(const std::string& bits, char c) {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), c));
}

RunResult infeasible_result(Variant variant) {
    RunResult result{{}, Transcript(variant), {}};
    result.outcome.status = RunStatus::Infeasible;
    return result;
}

RunResult aborted_result(ProtocolRun& run, AbortReason reason, const DetectionResult& det) {
    run.record_abort(reason);
    RunResult result{{}, run.transcript(), det};
    result.outcome.status = RunStatus::Aborted;
    result.outcome.abort_reason = reason;
    return result;
}

// Bob's key bits; strategies that need particular bit counts resample until
// the requirement holds.
std::string draw_bob_key(const RunSpec& spec, const BobBehavior& bob, Rand& rng) {
    std::string bits = rng.bit_string(spec.n);
    if (bob.mode == BobMode::SwapUntouchedAttack) {
        while (count_bit(bits, '0') < 2) bits = rng.bit_string(spec.n);
    } else if (bob.mode == BobMode::BitFlipAttack) {
        while (count_bit(bits, '0') < bob.flips || count_bit(bits, '1') < bob.flips) {
            bits = rng.bit_string(spec.n);
        }
    }
    return bits;
}

RunResult run_original(const RunSpec& spec, const BobBehavior& bob, const EveBehavior& eve,
                       Registry& reg, Rand& alice_rng, Rand& bob_rng) {
    ProtocolRun run(spec.variant, spec.n, reg);
    const bool substitution = bob.mode == BobMode::SubstitutionAttack;

    const std::string bob_bits = draw_bob_key(spec, bob, bob_rng);
    run.alice_prepare(alice_rng);
    if (eve.mode == EveMode::InterceptResendZ && eve.direction != EveDirection::Backward) {
        eve_intercept_resend(reg, run.travel_qubits());
    }

    // The substitution attacker reflects everything untouched and carries no
    // key bits of his own.
    const CaseAssignment cases =
        substitution
            ? CaseAssignment::from_cases(std::vector<Case>(run.pair_count(), Case::A), "")
            : CaseAssignment::random(run.pair_count(), bob_bits, bob_rng);
    run.bob_encode(cases, cases.key_bits());
    const Permutation perm = Permutation::random(run.pair_count(), bob_rng);
    run.bob_return(perm);
    if (eve.mode == EveMode::InterceptResendZ && eve.direction != EveDirection::Forward) {
        eve_intercept_resend(reg, run.slots());
    }

    const std::string raw_key = alice_rng.bit_string(run.pair_count());
    run.announce_raw_key(raw_key);

    std::vector<std::size_t> announced;
    if (substitution) {
        std::vector<Case> case_vector;
        for (const auto& c : cases.choices()) case_vector.push_back(c.choice);
        auto plan = plan_substitution({case_vector, cases.key_bits(), raw_key, bob.target});
        if (!plan) return infeasible_result(spec.variant);
        announced = *plan;
    } else {
        announced = cases.case_a_positions();
    }
    run.announce_case_a(announced, routing_for(perm, announced));

    const DetectionResult det = run.detection_check();
    if (!det.pass(spec.threshold)) {
        return aborted_result(run, AbortReason::ErrorRateExceeded, det);
    }

    const auto remaining = run.remaining_positions();
    std::vector<RoutingEntry> remaining_routing;
    if (bob.mode == BobMode::PermutationAttack) {
        PermutationPlanInput in;
        in.positions = remaining;
        const auto& encode = run.encode_record();
        for (std::size_t j = 0; j < remaining.size(); ++j) {
            const std::size_t p = remaining[j];
            in.measured.push_back(encode.measured_bits[j]);
            in.replacement.push_back(*encode.replacement_values[p]);
            in.initials.push_back(run.pairs()[p].initial);
        }
        in.alice_key = subset_bits(raw_key, remaining);
        in.target = bob.target;
        auto plan = plan_fake_permutation(in);
        if (!plan) return infeasible_result(spec.variant);
        for (std::size_t j = 0; j < remaining.size(); ++j) {
            remaining_routing.push_back({remaining[j], perm.apply(remaining[plan->apply(j)])});
        }
    } else {
        remaining_routing = routing_for(perm, remaining);
    }
    run.announce_remaining(remaining_routing);

    const DecodeResult dec = run.decode_bob_key();
    RunResult result{{}, run.transcript(), det};
    result.outcome.status = RunStatus::Accepted;
    result.outcome.alice_key = derive_final_key(spec.variant, raw_key, dec.bits, announced);
    switch (bob.mode) {
        case BobMode::Honest:
            result.outcome.bob_key =
                derive_final_key(spec.variant, raw_key, bob_bits, announced);
            break;
        case BobMode::PermutationAttack:
        case BobMode::SubstitutionAttack:
            result.outcome.bob_key = bob.target;
            break;
        default:
            break;
    }
    return result;
}

RunResult run_improved(const RunSpec& spec, const BobBehavior& bob, const EveBehavior& eve,
                       Registry& reg, Rand& alice_rng, Rand& bob_rng) {
    if (bob.mode == BobMode::BitFlipAttack && 2 * bob.flips > spec.n) {
        return infeasible_result(spec.variant);
    }
    if (bob.mode == BobMode::SwapUntouchedAttack && spec.n < 2) {
        return infeasible_result(spec.variant);
    }

    ProtocolRun run(spec.variant, spec.n, reg);
    const std::string bob_bits = draw_bob_key(spec, bob, bob_rng);
    run.alice_prepare(alice_rng);
    if (eve.mode == EveMode::InterceptResendZ && eve.direction != EveDirection::Backward) {
        eve_intercept_resend(reg, run.travel_qubits());
    }

    const CaseAssignment cases = CaseAssignment::random(run.pair_count(), bob_bits, bob_rng);
    run.bob_encode(cases, cases.key_bits());
    const Permutation perm = Permutation::random(run.pair_count(), bob_rng);
    run.bob_return(perm);
    if (eve.mode == EveMode::InterceptResendZ && eve.direction != EveDirection::Forward) {
        eve_intercept_resend(reg, run.slots());
    }

    const auto announced = cases.case_a_positions();
    run.announce_case_a(announced, routing_for(perm, announced));

    const DetectionResult det = run.detection_check();
    if (!det.pass(spec.threshold)) {
        return aborted_result(run, AbortReason::ErrorRateExceeded, det);
    }

    const std::string alice_bits = alice_rng.bit_string(spec.n);
    run.announce_key(alice_bits);

    const auto remaining = run.remaining_positions();
    auto routing = routing_for(perm, remaining);
    std::string flip_mask(spec.n, '0');
    if (bob.mode == BobMode::SwapUntouchedAttack) {
        const auto pair = plan_untouched_swap(bob_bits);
        std::swap(routing[pair->first].slot, routing[pair->second].slot);
    } else if (bob.mode == BobMode::BitFlipAttack) {
        const auto transpositions = plan_flip_transpositions(bob_bits, bob.flips);
        for (const auto& [zero, one] : *transpositions) {
            std::swap(routing[zero].slot, routing[one].slot);
            flip_mask[zero] = '1';
            flip_mask[one] = '1';
        }
    }
    run.announce_remaining(routing);

    const DecodeResult dec = run.decode_bob_key();
    if (dec.flagged) {
        return aborted_result(run, AbortReason::MinusSignFlag, det);
    }

    RunResult result{{}, run.transcript(), det};
    result.outcome.status = RunStatus::Accepted;
    result.outcome.alice_key = xor_bits(alice_bits, dec.bits);
    const std::string honest_key = xor_bits(alice_bits, bob_bits);
    switch (bob.mode) {
        case BobMode::Honest:
        case BobMode::SwapUntouchedAttack:
            result.outcome.bob_key = honest_key;
            break;
        case BobMode::SubstitutionAttack:
            result.outcome.bob_key = bob.target;
            break;
        case BobMode::BitFlipAttack:
            result.outcome.bob_key = xor_bits(honest_key, flip_mask);
            break;
        default:
            break;
    }
    return result;
}

}  // namespace

void validate_run_inputs(const RunSpec& spec, const BobBehavior& bob) {
    if (spec.n == 0) throw std::invalid_argument("need at least one key position");
    if (spec.threshold < 0.0 || spec.threshold > 1.0) {
        throw std::invalid_argument("threshold must lie in [0, 1]");
    }
    if (bob.mode == BobMode::PermutationAttack && spec.variant != Variant::Original) {
        throw std::invalid_argument("fake-permutation routing targets the original order only");
    }
    if ((bob.mode == BobMode::SwapUntouchedAttack || bob.mode == BobMode::BitFlipAttack) &&
        spec.variant != Variant::Improved) {
        throw std::invalid_argument("slot-swap strategies target the improved order only");
    }
    if ((bob.mode == BobMode::PermutationAttack || bob.mode == BobMode::SubstitutionAttack) &&
        bob.target.size() != spec.n) {
        throw std::invalid_argument("target length must equal the key length");
    }
    if (bob.mode == BobMode::BitFlipAttack && bob.flips == 0) {
        throw std::invalid_argument("need at least one flip");
    }
}

RunResult run_protocol(const RunSpec& spec, const BobBehavior& bob, const EveBehavior& eve) {
    validate_run_inputs(spec, bob);

    Registry reg(derive_seed(spec.seed, 0));
    Rand alice_rng(derive_seed(spec.seed, 1));
    Rand bob_rng(derive_seed(spec.seed, 2));

    if (spec.variant == Variant::Original) {
        return run_original(spec, bob, eve, reg, alice_rng, bob_rng);
    }
    return run_improved(spec, bob, eve, reg, alice_rng, bob_rng);
}

}  // namespace sqka
