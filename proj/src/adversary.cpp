#include "sqka/adversary.hpp"

#include <stdexcept>

namespace sqka {

namespace {

void validate_bits(const std::string& bits) {
    for (char c : bits) {
        if (c != '0' && c != '1') throw std::invalid_argument("bit string must contain only 0/1");
    }
}

}  // namespace

const char* to_string(BobMode m) {
    switch (m) {
        case BobMode::Honest: return "honest";
        case BobMode::PermutationAttack: return "permutation";
        case BobMode::SubstitutionAttack: return "substitution";
        case BobMode::SwapUntouchedAttack: return "swap-untouched";
        case BobMode::BitFlipAttack: return "bit-flip";
    }
    return "?";
}

BobBehavior honest_bob() { return {}; }

BobBehavior permutation_attack(std::string target) {
    validate_bits(target);
    if (target.empty()) throw std::invalid_argument("attack needs a target key");
    return {BobMode::PermutationAttack, std::move(target), 0};
}

BobBehavior substitution_attack(std::string target) {
    validate_bits(target);
    if (target.empty()) throw std::invalid_argument("attack needs a target key");
    return {BobMode::SubstitutionAttack, std::move(target), 0};
}

BobBehavior swap_untouched_attack() { return {BobMode::SwapUntouchedAttack, "", 0}; }

BobBehavior bit_flip_attack(std::size_t flips) {
    if (flips == 0) throw std::invalid_argument("need at least one flip");
    return {BobMode::BitFlipAttack, "", flips};
}

const char* to_string(EveDirection d) {
    switch (d) {
        case EveDirection::Forward: return "forward";
        case EveDirection::Backward: return "backward";
        case EveDirection::Both: return "both";
    }
    return "?";
}

EveBehavior no_eve() { return {}; }

EveBehavior intercept_resend(EveDirection direction) {
    return {EveMode::InterceptResendZ, direction};
}

std::string eve_label(const EveBehavior& eve) {
    if (eve.mode == EveMode::NoEve) return "none";
    return std::string("intercept-") + to_string(eve.direction);
}

std::optional<Permutation> plan_fake_permutation(const PermutationPlanInput& in) {
    const std::size_t m = in.positions.size();
    if (in.measured.size() != m || in.replacement.size() != m || in.initials.size() != m ||
        in.alice_key.size() != m || in.target.size() != m) {
        throw std::invalid_argument("plan inputs must cover the same positions");
    }
    validate_bits(in.alice_key);
    validate_bits(in.target);

    // Donor value that makes position j decode to the needed bit, read off
    // the decode table: the home qubit holds r (Phi initial) or r xor 1 (Psi
    // initial), an equal donor lands in the Phi family, and the Phi family
    // decodes to 0 exactly for Phi initials.
    std::vector<int> needed(m);
    for (std::size_t j = 0; j < m; ++j) {
        const int needed_bit = (in.alice_key[j] != in.target[j]) ? 1 : 0;
        const int psi = in.initials[j] == BellKind::PsiPlus ? 1 : 0;
        const int home = in.measured[j] ^ psi;
        needed[j] = home ^ needed_bit ^ psi;
    }

    std::vector<std::size_t> forward(m);
    std::vector<bool> used(m, false);
    for (std::size_t j = 0; j < m; ++j) {
        bool found = false;
        for (std::size_t d = 0; d < m; ++d) {
            if (used[d] || in.replacement[d] != needed[j]) continue;
            forward[j] = d;
            used[d] = true;
            found = true;
            break;
        }
        if (!found) return std::nullopt;
    }
    return Permutation::from_forward(std::move(forward));
}

std::optional<std::vector<std::size_t>> plan_substitution(const SubstitutionPlanInput& in) {
    validate_bits(in.announced_raw_key);
    validate_bits(in.target);
    const std::size_t size = in.cases.size();
    if (in.announced_raw_key.size() != size) {
        throw std::invalid_argument("raw key must cover every position");
    }
    if (in.target.size() > size) throw std::invalid_argument("target longer than the run");

    std::string bob_view(size, '0');
    std::size_t next_bit = 0;
    std::vector<std::size_t> case_a;
    std::vector<std::size_t> case_b;
    for (std::size_t p = 0; p < size; ++p) {
        if (in.cases[p] == Case::B) {
            if (next_bit >= in.case_b_bits.size()) {
                throw std::invalid_argument("fewer key bits than Case B positions");
            }
            bob_view[p] = in.case_b_bits[next_bit++];
            case_b.push_back(p);
        } else {
            case_a.push_back(p);
        }
    }
    if (next_bit != in.case_b_bits.size()) {
        throw std::invalid_argument("more key bits than Case B positions");
    }
    const std::string combined = xor_bits(in.announced_raw_key, bob_view);

    if (case_b.size() == in.target.size() && subset_bits(combined, case_b) == in.target) {
        return case_a;
    }

    std::vector<std::size_t> kept;
    for (std::size_t p = 0; p < size && kept.size() < in.target.size(); ++p) {
        if (combined[p] == in.target[kept.size()]) {
            kept.push_back(p);
        }
    }
    if (kept.size() != in.target.size()) return std::nullopt;
    return complement_positions(size, kept);
}

std::optional<std::pair<std::size_t, std::size_t>> plan_untouched_swap(
    const std::string& key_bits) {
    validate_bits(key_bits);
    std::vector<std::size_t> zeros;
    for (std::size_t j = 0; j < key_bits.size() && zeros.size() < 2; ++j) {
        if (key_bits[j] == '0') zeros.push_back(j);
    }
    if (zeros.size() < 2) return std::nullopt;
    return std::make_pair(zeros[0], zeros[1]);
}

std::optional<std::vector<std::pair<std::size_t, std::size_t>>> plan_flip_transpositions(
    const std::string& key_bits, std::size_t flips) {
    validate_bits(key_bits);
    if (flips == 0) throw std::invalid_argument("need at least one flip");
    std::vector<std::size_t> zeros;
    std::vector<std::size_t> ones;
    for (std::size_t j = 0; j < key_bits.size(); ++j) {
        (key_bits[j] == '0' ? zeros : ones).push_back(j);
    }
    if (zeros.size() < flips || ones.size() < flips) return std::nullopt;
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(flips);
    for (std::size_t i = 0; i < flips; ++i) out.emplace_back(zeros[i], ones[i]);
    return out;
}

void eve_intercept_resend(Registry& registry, std::vector<QubitId>& in_transit) {
    for (auto& q : in_transit) {
        const int r = registry.measure_z(q);
        registry.discard(q);
        q = registry.new_qubit(r);
    }
}

}  // namespace sqka
