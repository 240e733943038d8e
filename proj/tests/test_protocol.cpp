#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqka/adversary.hpp"
#include "sqka/protocol.hpp"

using namespace sqka;

namespace {

// Drives one run with a fixed case layout through the public steps and
// returns the decoded key bits.
DecodeResult drive_fixed_run(Variant variant, const std::vector<BellKind>& kinds,
                             const std::vector<Case>& cases, const std::string& key_bits,
                             std::uint64_t seed, Registry& reg) {
    const std::size_t n = kinds.size() / 2;
    ProtocolRun run(variant, n, reg);
    run.alice_prepare(kinds);
    run.bob_encode(CaseAssignment::from_cases(cases, key_bits), key_bits);
    const Permutation perm = Permutation::identity(kinds.size());
    run.bob_return(perm);

    std::vector<std::size_t> announced;
    for (std::size_t p = 0; p < cases.size(); ++p) {
        if (cases[p] == Case::A) announced.push_back(p);
    }
    Rand alice(seed);
    if (variant == Variant::Original) {
        run.announce_raw_key(alice.bit_string(kinds.size()));
        run.announce_case_a(announced, routing_for(perm, announced));
        run.detection_check();
    } else {
        run.announce_case_a(announced, routing_for(perm, announced));
        run.detection_check();
        run.announce_key(alice.bit_string(kinds.size() - announced.size()));
    }
    run.announce_remaining(routing_for(perm, run.remaining_positions()));
    return run.decode_bob_key();
}

}  // namespace

TEST_CASE("case assignments pair key bits with the chosen positions") {
    const auto cases = CaseAssignment::from_cases(
        {Case::A, Case::B, Case::A, Case::B}, "10");
    CHECK(cases.case_a_positions() == std::vector<std::size_t>{0, 2});
    CHECK(cases.case_b_positions() == std::vector<std::size_t>{1, 3});
    CHECK(cases.key_bits() == "10");
    CHECK(*cases.choices()[1].key_bit == 1);
    CHECK_FALSE(cases.choices()[0].key_bit.has_value());

    CHECK_THROWS_AS(CaseAssignment::from_cases({Case::A, Case::B}, "10"),
                    std::invalid_argument);
    CHECK_THROWS_AS(CaseAssignment::from_cases({Case::B, Case::B}, "1"),
                    std::invalid_argument);
    CHECK_THROWS_AS(CaseAssignment::from_cases({Case::B}, "x"), std::invalid_argument);

    Rand rng(7);
    for (int rep = 0; rep < 50; ++rep) {
        const auto random_cases = CaseAssignment::random(8, "1011", rng);
        CHECK(random_cases.case_b_positions().size() == 4);
        CHECK(random_cases.key_bits() == "1011");
    }
}

TEST_CASE("permutations invert and reject non-bijections") {
    const auto perm = Permutation::from_forward({2, 0, 3, 1});
    CHECK(perm.size() == 4);
    CHECK(perm.apply(0) == 2);
    CHECK(perm.invert(2) == 0);
    for (std::size_t i = 0; i < 4; ++i) CHECK(perm.invert(perm.apply(i)) == i);
    CHECK(perm.inverted().apply(2) == 0);
    CHECK(Permutation::identity(3).apply(1) == 1);

    CHECK_THROWS_AS(Permutation::from_forward({0, 0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(Permutation::from_forward({0, 3}), std::invalid_argument);
    CHECK_THROWS_AS(perm.apply(4), std::out_of_range);

    Rand rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        const auto random_perm = Permutation::random(6, rng);
        std::set<std::size_t> image;
        for (std::size_t i = 0; i < 6; ++i) image.insert(random_perm.apply(i));
        CHECK(image.size() == 6);
    }
}

TEST_CASE("bit helpers xor, restrict, and complement") {
    CHECK(xor_bits("1001", "0101") == "1100");
    CHECK(xor_bits("", "") == "");
    CHECK_THROWS_AS(xor_bits("10", "1"), std::invalid_argument);
    CHECK_THROWS_AS(xor_bits("1x", "10"), std::invalid_argument);

    CHECK(subset_bits("01010011", {0, 2, 4, 5}) == "0000");
    CHECK(subset_bits("01010011", {1, 3, 6, 7}) == "1111");
    CHECK_THROWS_AS(subset_bits("01", {2}), std::out_of_range);

    CHECK(complement_positions(5, {1, 3}) == std::vector<std::size_t>{0, 2, 4});
    CHECK(complement_positions(3, {}) == std::vector<std::size_t>{0, 1, 2});
    CHECK_THROWS_AS(complement_positions(2, {2}), std::out_of_range);
}

TEST_CASE("final keys combine the kept material with the decoded bits") {
    CHECK(derive_final_key(Variant::Original, "1001", "0101", {}) == "1100");
    CHECK(derive_final_key(Variant::Original, "10110100", "011010", {0, 2}) == "001110");
    CHECK(derive_final_key(Variant::Improved, "1001", "0101", {}) == "1100");
    CHECK(derive_final_key(Variant::Original, "1001", "0000", {}) == "1001");
    CHECK_THROWS_AS(derive_final_key(Variant::Original, "1001", "101", {}),
                    std::invalid_argument);
}

TEST_CASE("transcripts enforce the original announcement order") {
    Transcript t(Variant::Original);
    CHECK_THROWS_AS(t.record_raw_key_announcement("1100"), std::logic_error);
    t.record_qubits_sent(Direction::AliceToBob, 4);
    CHECK_THROWS_AS(t.record_qubits_sent(Direction::AliceToBob, 4), std::logic_error);
    t.record_qubits_sent(Direction::BobToAlice, 4);
    CHECK_THROWS_AS(t.record_case_a_announcement({0}, {{0, 0}}), std::logic_error);
    CHECK_THROWS_AS(t.record_key_announcement("11"), std::logic_error);
    t.record_raw_key_announcement("1100");
    CHECK_THROWS_AS(t.record_abort(AbortReason::ErrorRateExceeded), std::logic_error);
    t.record_case_a_announcement({0, 2}, {{0, 1}, {2, 3}});
    CHECK_FALSE(t.complete());
    t.record_remaining_permutation({{1, 0}, {3, 2}});
    CHECK(t.complete());
    CHECK_FALSE(t.aborted());
    CHECK_THROWS_AS(t.record_abort(AbortReason::MinusSignFlag), std::logic_error);
}

TEST_CASE("transcripts enforce the improved announcement order") {
    Transcript t(Variant::Improved);
    t.record_qubits_sent(Direction::AliceToBob, 4);
    t.record_qubits_sent(Direction::BobToAlice, 4);
    CHECK_THROWS_AS(t.record_key_announcement("11"), std::logic_error);
    CHECK_THROWS_AS(t.record_raw_key_announcement("1100"), std::logic_error);
    t.record_case_a_announcement({1, 3}, {{1, 1}, {3, 3}});
    t.record_key_announcement("10");
    t.record_remaining_permutation({{0, 0}, {2, 2}});
    CHECK(t.complete());
    t.record_abort(AbortReason::MinusSignFlag);
    CHECK(t.aborted());
    CHECK_FALSE(t.complete());
    CHECK_THROWS_AS(t.record_abort(AbortReason::MinusSignFlag), std::logic_error);
}

TEST_CASE("aborts attach only at their own checkpoints") {
    Transcript check_abort(Variant::Improved);
    check_abort.record_qubits_sent(Direction::AliceToBob, 2);
    check_abort.record_qubits_sent(Direction::BobToAlice, 2);
    check_abort.record_case_a_announcement({0}, {{0, 0}});
    CHECK_THROWS_AS(check_abort.record_abort(AbortReason::MinusSignFlag), std::logic_error);
    check_abort.record_abort(AbortReason::ErrorRateExceeded);
    CHECK(check_abort.aborted());
    CHECK_THROWS_AS(check_abort.record_key_announcement("1"), std::logic_error);

    Transcript original(Variant::Original);
    original.record_qubits_sent(Direction::AliceToBob, 2);
    original.record_qubits_sent(Direction::BobToAlice, 2);
    original.record_raw_key_announcement("10");
    original.record_case_a_announcement({0}, {{0, 0}});
    CHECK_THROWS_AS(original.record_abort(AbortReason::MinusSignFlag), std::logic_error);
    original.record_abort(AbortReason::ErrorRateExceeded);
    CHECK(original.aborted());
}

TEST_CASE("decoding returns the encoded key for every table row") {
    for (const Variant variant : {Variant::Original, Variant::Improved}) {
        for (const BellKind kind : {BellKind::PhiPlus, BellKind::PsiPlus}) {
            for (int k = 0; k < 2; ++k) {
                for (std::uint64_t seed = 0; seed < 20; ++seed) {
                    CAPTURE(static_cast<int>(variant));
                    CAPTURE(static_cast<int>(kind));
                    CAPTURE(k);
                    CAPTURE(seed);
                    Registry reg(seed);
                    const std::string key(1, static_cast<char>('0' + k));
                    const auto dec = drive_fixed_run(variant, {kind, BellKind::PhiPlus},
                                                     {Case::B, Case::A}, key, seed, reg);
                    REQUIRE_FALSE(dec.flagged);
                    CHECK(dec.bits == key);
                }
            }
        }
    }
}

TEST_CASE("the improved variant leaves zero-bit positions physically untouched") {
    Registry reg(5);
    ProtocolRun run(Variant::Improved, 2, reg);
    run.alice_prepare({BellKind::PhiPlus, BellKind::PsiPlus, BellKind::PhiPlus,
                       BellKind::PsiPlus});
    const QubitId before_zero = run.travel_qubits()[0];
    const QubitId before_one = run.travel_qubits()[1];
    run.bob_encode(CaseAssignment::from_cases({Case::B, Case::B, Case::A, Case::A}, "01"),
                   "01");
    CHECK(run.travel_qubits()[0] == before_zero);
    CHECK(run.travel_qubits()[1] != before_one);
    CHECK_FALSE(run.encode_record().replacement_values[0].has_value());
    CHECK(run.encode_record().replacement_values[1].has_value());
    CHECK(run.encode_record().measured_positions == std::vector<std::size_t>{1});
}

TEST_CASE("the original variant flips the replacement by the key bit") {
    for (std::uint64_t seed = 0; seed < 16; ++seed) {
        Registry reg(seed);
        ProtocolRun run(Variant::Original, 1, reg);
        run.alice_prepare({BellKind::PhiPlus, BellKind::PhiPlus});
        run.bob_encode(CaseAssignment::from_cases({Case::B, Case::B}, "01"), "01");
        const auto& record = run.encode_record();
        REQUIRE(record.measured_positions == std::vector<std::size_t>{0, 1});
        CHECK(*record.replacement_values[0] == record.measured_bits[0]);
        CHECK(*record.replacement_values[1] == (record.measured_bits[1] ^ 1));
        for (std::size_t p = 0; p < 2; ++p) {
            CHECK(reg.measure_z(run.travel_qubits()[p]) == *record.replacement_values[p]);
        }
    }
}

TEST_CASE("protocol steps reject misuse") {
    Registry reg(1);
    ProtocolRun run(Variant::Original, 2, reg);
    CHECK_THROWS_AS(run.bob_encode(CaseAssignment{}, ""), std::logic_error);
    run.alice_prepare({BellKind::PhiPlus, BellKind::PhiPlus, BellKind::PsiPlus,
                       BellKind::PsiPlus});
    Rand again(1);
    CHECK_THROWS_AS(run.alice_prepare(again), std::logic_error);
    CHECK_THROWS_AS(run.bob_encode(CaseAssignment::from_cases({Case::A, Case::A}, ""), ""),
                    std::invalid_argument);
    CHECK_THROWS_AS(run.detection_check(), std::logic_error);
    const auto cases =
        CaseAssignment::from_cases({Case::B, Case::A, Case::B, Case::A}, "10");
    CHECK_THROWS_AS(run.bob_encode(cases, "11"), std::invalid_argument);
    run.bob_encode(cases, "10");
    CHECK_THROWS_AS(run.bob_return(Permutation::identity(3)), std::invalid_argument);
    run.bob_return(Permutation::identity(4));
    CHECK_THROWS_AS(run.announce_raw_key("101"), std::invalid_argument);
    run.announce_raw_key("1011");
    CHECK_THROWS_AS(run.announce_case_a({3, 1}, {{3, 3}, {1, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(run.announce_case_a({1, 3}, {{1, 1}, {3, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(run.announce_case_a({1, 3}, {{1, 1}}), std::invalid_argument);
    run.announce_case_a({1, 3}, {{1, 1}, {3, 3}});
    CHECK_THROWS_AS(run.announce_remaining({{0, 0}, {2, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(run.announce_remaining({{0, 0}}), std::invalid_argument);
    run.announce_remaining({{0, 0}, {2, 2}});
    run.detection_check();
    CHECK_THROWS_AS(run.detection_check(), std::logic_error);
    run.decode_bob_key();
    CHECK_THROWS_AS(run.decode_bob_key(), std::logic_error);

    CHECK_THROWS_AS(ProtocolRun(Variant::Original, 0, reg), std::invalid_argument);
    Registry reg2(2);
    ProtocolRun bad_kind(Variant::Original, 1, reg2);
    CHECK_THROWS_AS(bad_kind.alice_prepare({BellKind::PhiMinus, BellKind::PhiPlus}),
                    std::invalid_argument);
}

TEST_CASE("honest runs accept with equal keys in both variants") {
    for (const Variant variant : {Variant::Original, Variant::Improved}) {
        for (std::size_t n = 1; n <= 16; ++n) {
            const std::uint64_t seeds = n <= 4 ? 100 : 20;
            for (std::uint64_t seed = 0; seed < seeds; ++seed) {
                CAPTURE(static_cast<int>(variant));
                CAPTURE(n);
                CAPTURE(seed);
                const auto result =
                    run_protocol({variant, n, 0.0, derive_seed(0xfeed, seed)},
                                 honest_bob(), no_eve());
                REQUIRE(result.outcome.status == RunStatus::Accepted);
                CHECK(result.outcome.alice_key == result.outcome.bob_key);
                CHECK(result.outcome.alice_key.size() == n);
                CHECK(result.detection.errors == 0);
                CHECK(result.detection.checked == n);
                CHECK(result.transcript.complete());
            }
        }
    }
}

TEST_CASE("honest improved runs never trip the minus-sign flag") {
    for (std::uint64_t seed = 0; seed < 2000; ++seed) {
        const auto result =
            run_protocol({Variant::Improved, 4, 0.0, derive_seed(0xcafe, seed)},
                         honest_bob(), no_eve());
        REQUIRE(result.outcome.status == RunStatus::Accepted);
    }
}

TEST_CASE("identical run specs reproduce identical transcripts") {
    const RunSpec spec{Variant::Improved, 6, 0.0, 424242};
    const auto a = run_protocol(spec, honest_bob(), no_eve());
    const auto b = run_protocol(spec, honest_bob(), no_eve());
    CHECK(a.outcome.alice_key == b.outcome.alice_key);
    CHECK(a.transcript.to_jsonl() == b.transcript.to_jsonl());

    const auto c = run_protocol({Variant::Improved, 6, 0.0, 424243}, honest_bob(), no_eve());
    CHECK(a.transcript.to_jsonl() != c.transcript.to_jsonl());
}

TEST_CASE("transcript logs render one event per line") {
    const auto result = run_protocol({Variant::Original, 2, 0.0, 99}, honest_bob(), no_eve());
    const std::string log = result.transcript.to_jsonl();
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < log.size()) {
        const std::size_t end = log.find('\n', start);
        lines.push_back(log.substr(start, end - start));
        start = end + 1;
    }
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == R"({"event":"qubits_sent","direction":"alice_to_bob","count":4})");
    CHECK(lines[1] == R"({"event":"qubits_sent","direction":"bob_to_alice","count":4})");
    CHECK(lines[2].starts_with(R"({"event":"raw_key_announcement","direction":"alice_to_bob","bits":")"));
    CHECK(lines[3].starts_with(R"({"event":"case_a_announcement","direction":"bob_to_alice","positions":[)"));
    CHECK(lines[4].starts_with(R"({"event":"remaining_permutation_announcement","direction":"bob_to_alice","routing":[)"));
}

TEST_CASE("an eavesdropper on the forward channel trips the check") {
    std::uint64_t aborted = 0;
    std::size_t checked = 0;
    std::size_t errors = 0;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        const auto result =
            run_protocol({Variant::Original, 4, 0.0, derive_seed(0xe5e, seed)},
                         honest_bob(), intercept_resend(EveDirection::Forward));
        checked += result.detection.checked;
        errors += result.detection.errors;
        if (result.outcome.status == RunStatus::Aborted) {
            aborted += 1;
            CHECK(*result.outcome.abort_reason == AbortReason::ErrorRateExceeded);
        }
    }
    const double pair_rate = static_cast<double>(errors) / static_cast<double>(checked);
    CHECK(pair_rate > 0.45);
    CHECK(pair_rate < 0.55);
    // Four checked pairs, each erring with probability 1/2.
    const double abort_rate = static_cast<double>(aborted) / 500.0;
    CHECK(abort_rate > 0.87);
    CHECK(abort_rate < 0.99);
}

TEST_CASE("a tolerant threshold keeps noisy runs alive") {
    std::uint64_t accepted = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto result =
            run_protocol({Variant::Original, 4, 1.0, derive_seed(0x7071, seed)},
                         honest_bob(), intercept_resend(EveDirection::Both));
        if (result.outcome.status == RunStatus::Accepted) accepted += 1;
    }
    CHECK(accepted == 100);
}

TEST_CASE("behavior and variant pairings are validated") {
    CHECK_THROWS_AS(run_protocol({Variant::Improved, 4, 0.0, 1},
                                 permutation_attack("1010"), no_eve()),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_protocol({Variant::Original, 4, 0.0, 1},
                                 swap_untouched_attack(), no_eve()),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_protocol({Variant::Original, 4, 0.0, 1},
                                 bit_flip_attack(1), no_eve()),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_protocol({Variant::Original, 4, 0.0, 1},
                                 permutation_attack("10"), no_eve()),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_protocol({Variant::Original, 0, 0.0, 1}, honest_bob(), no_eve()),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_protocol({Variant::Original, 4, 1.5, 1}, honest_bob(), no_eve()),
                    std::invalid_argument);
    CHECK_THROWS_AS(permutation_attack(""), std::invalid_argument);
    CHECK_THROWS_AS(bit_flip_attack(0), std::invalid_argument);
}
