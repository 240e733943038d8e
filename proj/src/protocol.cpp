#include "sqka/protocol.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

namespace sqka {

namespace {

void validate_bits(const std::string& bits) {
    for (char c : bits) {
        if (c != '0' && c != '1') throw std::invalid_argument("bit string must contain only 0/1");
    }
}

bool is_phi(BellKind k) { return k == BellKind::PhiPlus || k == BellKind::PhiMinus; }

}  // namespace

const char* to_string(Direction d) {
    return d == Direction::AliceToBob ? "alice_to_bob" : "bob_to_alice";
}

const char* to_string(Variant v) {
    return v == Variant::Original ? "original" : "improved";
}

const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Accepted: return "accepted";
        case RunStatus::Aborted: return "aborted";
        case RunStatus::Infeasible: return "infeasible";
    }
    return "?";
}

const char* to_string(AbortReason r) {
    return r == AbortReason::ErrorRateExceeded ? "error_rate_exceeded" : "minus_sign_flag";
}

CaseAssignment CaseAssignment::from_cases(const std::vector<Case>& cases,
                                          const std::string& key_bits) {
    validate_bits(key_bits);
    CaseAssignment out;
    out.choices_.reserve(cases.size());
    std::size_t next_bit = 0;
    for (Case c : cases) {
        CaseChoice choice;
        choice.choice = c;
        if (c == Case::B) {
            if (next_bit >= key_bits.size()) {
                throw std::invalid_argument("fewer key bits than Case B positions");
            }
            choice.key_bit = key_bits[next_bit++] - '0';
        }
        out.choices_.push_back(choice);
    }
    if (next_bit != key_bits.size()) {
        throw std::invalid_argument("more key bits than Case B positions");
    }
    return out;
}

CaseAssignment CaseAssignment::random(std::size_t positions, const std::string& key_bits,
                                      Rand& rng) {
    if (key_bits.size() > positions) {
        throw std::invalid_argument("more key bits than positions");
    }
    std::vector<Case> cases(positions, Case::A);
    for (std::size_t p : rng.subset(positions, key_bits.size())) cases[p] = Case::B;
    return from_cases(cases, key_bits);
}

std::vector<std::size_t> CaseAssignment::case_a_positions() const {
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p < choices_.size(); ++p) {
        if (choices_[p].choice == Case::A) out.push_back(p);
    }
    return out;
}

std::vector<std::size_t> CaseAssignment::case_b_positions() const {
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p < choices_.size(); ++p) {
        if (choices_[p].choice == Case::B) out.push_back(p);
    }
    return out;
}

std::string CaseAssignment::key_bits() const {
    std::string out;
    for (const auto& c : choices_) {
        if (c.choice == Case::B) out.push_back(static_cast<char>('0' + *c.key_bit));
    }
    return out;
}

Permutation Permutation::identity(std::size_t size) {
    std::vector<std::size_t> forward(size);
    for (std::size_t i = 0; i < size; ++i) forward[i] = i;
    return from_forward(std::move(forward));
}

Permutation Permutation::random(std::size_t size, Rand& rng) {
    std::vector<std::size_t> forward(size);
    for (std::size_t i = 0; i < size; ++i) forward[i] = i;
    rng.shuffle(forward);
    return from_forward(std::move(forward));
}

Permutation Permutation::from_forward(std::vector<std::size_t> forward) {
    Permutation out;
    out.inverse_.assign(forward.size(), forward.size());
    for (std::size_t i = 0; i < forward.size(); ++i) {
        if (forward[i] >= forward.size() || out.inverse_[forward[i]] != forward.size()) {
            throw std::invalid_argument("forward map is not a bijection");
        }
        out.inverse_[forward[i]] = i;
    }
    out.forward_ = std::move(forward);
    return out;
}

std::size_t Permutation::apply(std::size_t position) const {
    if (position >= forward_.size()) throw std::out_of_range("position outside permutation");
    return forward_[position];
}

std::size_t Permutation::invert(std::size_t slot) const {
    if (slot >= inverse_.size()) throw std::out_of_range("slot outside permutation");
    return inverse_[slot];
}

Permutation Permutation::inverted() const {
    Permutation out;
    out.forward_ = inverse_;
    out.inverse_ = forward_;
    return out;
}

bool Transcript::complete() const { return stage_ == 5 && !aborted_; }

void Transcript::advance(TranscriptEvent::Type type, int from_stage) {
    if (aborted_) throw std::logic_error("transcript is aborted");
    if (stage_ != from_stage) throw std::logic_error("announcement out of order for this variant");
    (void)type;
    stage_ += 1;
}

void Transcript::record_qubits_sent(Direction direction, std::size_t count) {
    const int from = direction == Direction::AliceToBob ? 0 : 1;
    if (stage_ == 0 && direction != Direction::AliceToBob) {
        throw std::logic_error("first transfer must run toward Bob");
    }
    advance(TranscriptEvent::Type::QubitsSent, from);
    TranscriptEvent e;
    e.type = TranscriptEvent::Type::QubitsSent;
    e.direction = direction;
    e.count = count;
    events_.push_back(std::move(e));
}

void Transcript::record_raw_key_announcement(const std::string& bits) {
    if (variant_ != Variant::Original) {
        throw std::logic_error("full-length raw key announcement exists only in the original order");
    }
    advance(TranscriptEvent::Type::RawKeyAnnouncement, 2);
    TranscriptEvent e;
    e.type = TranscriptEvent::Type::RawKeyAnnouncement;
    e.direction = Direction::AliceToBob;
    e.bits = bits;
    events_.push_back(std::move(e));
}

void Transcript::record_case_a_announcement(const std::vector<std::size_t>& positions,
                                            const std::vector<RoutingEntry>& routing) {
    advance(TranscriptEvent::Type::CaseAAnnouncement, variant_ == Variant::Original ? 3 : 2);
    TranscriptEvent e;
    e.type = TranscriptEvent::Type::CaseAAnnouncement;
    e.direction = Direction::BobToAlice;
    e.positions = positions;
    e.routing = routing;
    events_.push_back(std::move(e));
}

void Transcript::record_key_announcement(const std::string& bits) {
    if (variant_ != Variant::Improved) {
        throw std::logic_error("post-check key announcement exists only in the improved order");
    }
    advance(TranscriptEvent::Type::KeyAnnouncement, 3);
    TranscriptEvent e;
    e.type = TranscriptEvent::Type::KeyAnnouncement;
    e.direction = Direction::AliceToBob;
    e.bits = bits;
    events_.push_back(std::move(e));
}

void Transcript::record_remaining_permutation(const std::vector<RoutingEntry>& routing) {
    advance(TranscriptEvent::Type::RemainingPermutationAnnouncement, 4);
    TranscriptEvent e;
    e.type = TranscriptEvent::Type::RemainingPermutationAnnouncement;
    e.direction = Direction::BobToAlice;
    e.routing = routing;
    events_.push_back(std::move(e));
}

void Transcript::record_abort(AbortReason reason) {
    if (aborted_) throw std::logic_error("transcript is already aborted");
    const bool check_abort =
        reason == AbortReason::ErrorRateExceeded &&
        stage_ == (variant_ == Variant::Original ? 4 : 3);
    const bool decode_abort =
        reason == AbortReason::MinusSignFlag && variant_ == Variant::Improved && stage_ == 5;
    if (!check_abort && !decode_abort) {
        throw std::logic_error("abort reason not available at this point of the run");
    }
    aborted_ = true;
    TranscriptEvent e;
    e.type = TranscriptEvent::Type::AbortNotice;
    e.direction = Direction::AliceToBob;
    e.reason = reason;
    events_.push_back(std::move(e));
}

std::string Transcript::to_jsonl() const {
    std::string out;
    for (const auto& e : events_) {
        nlohmann::ordered_json j;
        switch (e.type) {
            case TranscriptEvent::Type::QubitsSent:
                j["event"] = "qubits_sent";
                j["direction"] = to_string(e.direction);
                j["count"] = e.count;
                break;
            case TranscriptEvent::Type::RawKeyAnnouncement:
                j["event"] = "raw_key_announcement";
                j["direction"] = to_string(e.direction);
                j["bits"] = e.bits;
                break;
            case TranscriptEvent::Type::CaseAAnnouncement: {
                j["event"] = "case_a_announcement";
                j["direction"] = to_string(e.direction);
                auto positions = nlohmann::ordered_json::array();
                for (std::size_t p : e.positions) positions.push_back(p + 1);
                j["positions"] = std::move(positions);
                auto routing = nlohmann::ordered_json::array();
                for (const auto& r : e.routing) {
                    routing.push_back({{"position", r.position + 1}, {"slot", r.slot + 1}});
                }
                j["routing"] = std::move(routing);
                break;
            }
            case TranscriptEvent::Type::KeyAnnouncement:
                j["event"] = "key_announcement";
                j["direction"] = to_string(e.direction);
                j["bits"] = e.bits;
                break;
            case TranscriptEvent::Type::RemainingPermutationAnnouncement: {
                j["event"] = "remaining_permutation_announcement";
                j["direction"] = to_string(e.direction);
                auto routing = nlohmann::ordered_json::array();
                for (const auto& r : e.routing) {
                    routing.push_back({{"position", r.position + 1}, {"slot", r.slot + 1}});
                }
                j["routing"] = std::move(routing);
                break;
            }
            case TranscriptEvent::Type::AbortNotice:
                j["event"] = "abort_notice";
                j["direction"] = to_string(e.direction);
                j["reason"] = to_string(*e.reason);
                break;
        }
        out += j.dump();
        out += '\n';
    }
    return out;
}

double DetectionResult::error_fraction() const {
    if (checked == 0) return 0.0;
    return static_cast<double>(errors) / static_cast<double>(checked);
}

std::string xor_bits(const std::string& a, const std::string& b) {
    validate_bits(a);
    validate_bits(b);
    if (a.size() != b.size()) throw std::invalid_argument("bit strings differ in length");
    std::string out(a.size(), '0');
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] == b[i] ? '0' : '1';
    }
    return out;
}

std::string subset_bits(const std::string& bits, const std::vector<std::size_t>& positions) {
    std::string out;
    out.reserve(positions.size());
    for (std::size_t p : positions) {
        if (p >= bits.size()) throw std::out_of_range("position outside bit string");
        out.push_back(bits[p]);
    }
    return out;
}

std::vector<std::size_t> complement_positions(std::size_t size,
                                              const std::vector<std::size_t>& positions) {
    std::vector<bool> taken(size, false);
    for (std::size_t p : positions) {
        if (p >= size) throw std::out_of_range("position outside range");
        taken[p] = true;
    }
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p < size; ++p) {
        if (!taken[p]) out.push_back(p);
    }
    return out;
}

std::vector<RoutingEntry> routing_for(const Permutation& perm,
                                      const std::vector<std::size_t>& positions) {
    std::vector<RoutingEntry> out;
    out.reserve(positions.size());
    for (std::size_t p : positions) out.push_back({p, perm.apply(p)});
    return out;
}

std::string derive_final_key(Variant variant, const std::string& key_material,
                             const std::string& bob_bits,
                             const std::vector<std::size_t>& announced_positions) {
    if (variant == Variant::Original) {
        const auto kept = complement_positions(key_material.size(), announced_positions);
        return xor_bits(subset_bits(key_material, kept), bob_bits);
    }
    return xor_bits(key_material, bob_bits);
}

ProtocolRun::ProtocolRun(Variant variant, std::size_t n, Registry& registry)
    : variant_(variant), n_(n), registry_(registry), transcript_(variant) {
    if (n == 0) throw std::invalid_argument("need at least one key position");
}

void ProtocolRun::alice_prepare(Rand& rng) {
    std::vector<BellKind> kinds(pair_count());
    for (auto& k : kinds) k = rng.bit() ? BellKind::PsiPlus : BellKind::PhiPlus;
    alice_prepare(std::move(kinds));
}

void ProtocolRun::alice_prepare(std::vector<BellKind> kinds) {
    if (prepared_) throw std::logic_error("pairs already prepared");
    if (kinds.size() != pair_count()) throw std::invalid_argument("need one kind per pair");
    for (BellKind k : kinds) {
        if (k != BellKind::PhiPlus && k != BellKind::PsiPlus) {
            throw std::invalid_argument("initial kinds are restricted to the plus states");
        }
    }
    initials_ = std::move(kinds);
    pairs_.reserve(pair_count());
    travel_.reserve(pair_count());
    for (std::size_t p = 0; p < pair_count(); ++p) {
        auto [home, travel] = registry_.new_bell_pair(initials_[p]);
        pairs_.push_back({p, initials_[p], home, p});
        travel_.push_back(travel);
    }
    prepared_ = true;
    transcript_.record_qubits_sent(Direction::AliceToBob, pair_count());
}

const ProtocolRun::EncodeRecord& ProtocolRun::bob_encode(const CaseAssignment& cases,
                                                         const std::string& key_bits) {
    if (!prepared_) throw std::logic_error("nothing to encode before preparation");
    if (encoded_) throw std::logic_error("encoding already done");
    if (cases.size() != pair_count()) throw std::invalid_argument("need one case per position");
    if (cases.key_bits() != key_bits) {
        throw std::invalid_argument("key bits disagree with the case assignment");
    }
    cases_ = cases;
    encode_.replacement_values.assign(pair_count(), std::nullopt);
    for (std::size_t p = 0; p < pair_count(); ++p) {
        const auto& choice = cases.choices()[p];
        if (choice.choice == Case::A) continue;
        const int k = *choice.key_bit;
        if (variant_ == Variant::Improved && k == 0) continue;
        const int r = registry_.measure_z(travel_[p]);
        encode_.measured_positions.push_back(p);
        encode_.measured_bits.push_back(r);
        registry_.discard(travel_[p]);
        const int sent = variant_ == Variant::Original ? (r ^ k) : (r ^ 1);
        travel_[p] = registry_.new_qubit(sent);
        encode_.replacement_values[p] = sent;
    }
    encoded_ = true;
    return encode_;
}

void ProtocolRun::bob_return(const Permutation& perm) {
    if (!encoded_) throw std::logic_error("encode before returning");
    if (returned_) throw std::logic_error("qubits already returned");
    if (perm.size() != pair_count()) throw std::invalid_argument("permutation size mismatch");
    slots_.assign(pair_count(), QubitId{});
    for (std::size_t p = 0; p < pair_count(); ++p) {
        slots_[perm.apply(p)] = travel_[p];
        pairs_[p].bob_slot = perm.apply(p);
    }
    returned_ = true;
    transcript_.record_qubits_sent(Direction::BobToAlice, pair_count());
}

void ProtocolRun::announce_raw_key(const std::string& bits) {
    validate_bits(bits);
    if (bits.size() != pair_count()) throw std::invalid_argument("raw key must cover every pair");
    transcript_.record_raw_key_announcement(bits);
    raw_key_ = bits;
}

void ProtocolRun::announce_case_a(const std::vector<std::size_t>& positions,
                                  const std::vector<RoutingEntry>& routing) {
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (positions[i] >= pair_count()) throw std::invalid_argument("position out of range");
        if (i > 0 && positions[i - 1] >= positions[i]) {
            throw std::invalid_argument("announced positions must ascend");
        }
    }
    if (routing.size() != positions.size()) {
        throw std::invalid_argument("one routing entry per announced position");
    }
    std::vector<bool> slot_used(pair_count(), false);
    for (std::size_t i = 0; i < routing.size(); ++i) {
        if (routing[i].position != positions[i]) {
            throw std::invalid_argument("routing entries must follow the announced positions");
        }
        if (routing[i].slot >= pair_count() || slot_used[routing[i].slot]) {
            throw std::invalid_argument("claimed slots must be distinct and in range");
        }
        slot_used[routing[i].slot] = true;
    }
    transcript_.record_case_a_announcement(positions, routing);
    announced_positions_ = positions;
    announced_routing_ = routing;
    case_a_announced_ = true;
}

void ProtocolRun::announce_key(const std::string& bits) {
    validate_bits(bits);
    if (bits.size() != pair_count() - announced_positions_.size()) {
        throw std::invalid_argument("key must cover exactly the kept positions");
    }
    transcript_.record_key_announcement(bits);
    key_ = bits;
}

void ProtocolRun::announce_remaining(const std::vector<RoutingEntry>& routing) {
    const auto remaining = remaining_positions();
    if (routing.size() != remaining.size()) {
        throw std::invalid_argument("one routing entry per remaining position");
    }
    std::vector<bool> slot_used(pair_count(), false);
    for (const auto& r : announced_routing_) slot_used[r.slot] = true;
    for (std::size_t i = 0; i < routing.size(); ++i) {
        if (routing[i].position != remaining[i]) {
            throw std::invalid_argument("routing entries must cover the remaining positions in order");
        }
        if (routing[i].slot >= pair_count() || slot_used[routing[i].slot]) {
            throw std::invalid_argument("claimed slots must be distinct and in range");
        }
        slot_used[routing[i].slot] = true;
    }
    transcript_.record_remaining_permutation(routing);
    remaining_routing_ = routing;
}

std::vector<std::size_t> ProtocolRun::remaining_positions() const {
    if (!case_a_announced_) throw std::logic_error("no case announcement yet");
    return complement_positions(pair_count(), announced_positions_);
}

DetectionResult ProtocolRun::detection_check() {
    if (!case_a_announced_) throw std::logic_error("nothing announced to check");
    if (detection_done_) throw std::logic_error("check already ran");
    detection_done_ = true;
    DetectionResult result;
    for (const auto& r : announced_routing_) {
        const BellKind outcome = registry_.measure_bell(pairs_[r.position].alice_qubit,
                                                        slots_[r.slot]);
        result.checked += 1;
        if (outcome != initials_[r.position]) {
            result.errors += 1;
            result.error_positions.push_back(r.position);
        }
    }
    return result;
}

int ProtocolRun::decode_outcome(BellKind initial, BellKind outcome) const {
    const bool same_family = is_phi(initial) == is_phi(outcome);
    if (variant_ == Variant::Original) {
        return same_family ? 0 : 1;
    }
    if (outcome == initial) return 0;
    if (!same_family) return 1;
    return -1;
}

DecodeResult ProtocolRun::decode_bob_key() {
    if (remaining_routing_.empty() && !remaining_positions().empty()) {
        throw std::logic_error("remaining routing not announced yet");
    }
    if (decode_done_) throw std::logic_error("decode already ran");
    decode_done_ = true;
    DecodeResult result;
    for (const auto& r : remaining_routing_) {
        const BellKind outcome = registry_.measure_bell(pairs_[r.position].alice_qubit,
                                                        slots_[r.slot]);
        const int bit = decode_outcome(initials_[r.position], outcome);
        if (bit < 0) {
            result.flagged = true;
            result.flag_position = r.position;
            return result;
        }
        result.bits.push_back(static_cast<char>('0' + bit));
    }
    return result;
}

void ProtocolRun::record_abort(AbortReason reason) { transcript_.record_abort(reason); }

}  // namespace sqka
