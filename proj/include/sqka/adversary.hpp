#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sqka/protocol.hpp"
#include "sqka/qsim.hpp"

namespace sqka {

enum class BobMode {
    Honest,
    // Original variant: honest through the check, fake remaining routing.
    PermutationAttack,
    // Original variant: leave everything untouched, pick the announced check
    // positions after seeing the raw key. Improved variant: play honestly and
    // merely hope the final key lands on the target.
    SubstitutionAttack,
    // Improved variant: swap the claimed slots of two untouched key positions.
    SwapUntouchedAttack,
    // Improved variant: cross-route `flips` disjoint (untouched, replaced)
    // key-position pairs to flip decoded bits.
    BitFlipAttack,
};

const char* to_string(BobMode m);

struct BobBehavior {
    BobMode mode = BobMode::Honest;
    std::string target;
    std::size_t flips = 0;
};

BobBehavior honest_bob();
BobBehavior permutation_attack(std::string target);
BobBehavior substitution_attack(std::string target);
BobBehavior swap_untouched_attack();
BobBehavior bit_flip_attack(std::size_t flips);

enum class EveMode { NoEve, InterceptResendZ };
enum class EveDirection { Forward, Backward, Both };

const char* to_string(EveDirection d);

struct EveBehavior {
    EveMode mode = EveMode::NoEve;
    EveDirection direction = EveDirection::Forward;
};

EveBehavior no_eve();
EveBehavior intercept_resend(EveDirection direction);

std::string eve_label(const EveBehavior& eve);

struct PermutationPlanInput {
    std::vector<std::size_t> positions;
    std::vector<int> measured;
    std::vector<int> replacement;
    std::vector<BellKind> initials;
    std::string alice_key;
    std::string target;
};

// Fake routing plan for the remaining positions: entry j names the donor
// index (into `positions`) whose replacement the decoder should read at
// position j, so the decoded bits become alice_key xor target. Empty when the
// replacement values cannot supply the needed bit multiset.
std::optional<Permutation> plan_fake_permutation(const PermutationPlanInput& in);

struct SubstitutionPlanInput {
    std::vector<Case> cases;
    std::string case_b_bits;
    std::string announced_raw_key;
    std::string target;
};

// Check positions to sacrifice so the kept key reads `target`. Prefers the
// honest announcement when it already yields the target; otherwise keeps the
// earliest matching subsequence. Empty when no subsequence matches.
std::optional<std::vector<std::size_t>> plan_substitution(const SubstitutionPlanInput& in);

// First two untouched (bit 0) key positions, as indices into the key.
std::optional<std::pair<std::size_t, std::size_t>> plan_untouched_swap(
    const std::string& key_bits);

// `flips` disjoint (bit-0 index, bit-1 index) pairs into the key.
std::optional<std::vector<std::pair<std::size_t, std::size_t>>> plan_flip_transpositions(
    const std::string& key_bits, std::size_t flips);

// Measures every transiting qubit in Z and forwards a fresh qubit of the
// measured value in its place.
void eve_intercept_resend(Registry& registry, std::vector<QubitId>& in_transit);

}  // namespace sqka
