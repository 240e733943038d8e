#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sqka/qsim.hpp"
#include "sqka/rng.hpp"

namespace sqka {

// Original: Alice announces the raw key before Bob commits his check
// positions. Improved: Bob commits first; Alice announces an n-bit key only
// after the check passes, and minus-sign decode outcomes abort the run.
enum class Variant { Original, Improved };

const char* to_string(Variant v);

enum class Case { A, B };

// Per-position choice: Case A reflects the qubit untouched and is announced
// for checking; Case B carries one key bit.
struct CaseChoice {
    Case choice = Case::A;
    std::optional<int> key_bit;
};

// Choices for all 2n positions. Key bits sit at the Case B positions in
// ascending position order.
class CaseAssignment {
public:
    CaseAssignment() = default;
    static CaseAssignment from_cases(const std::vector<Case>& cases, const std::string& key_bits);
    // Uniformly random n_case_b-subset of positions carries the key bits.
    static CaseAssignment random(std::size_t positions, const std::string& key_bits, Rand& rng);

    const std::vector<CaseChoice>& choices() const { return choices_; }
    std::size_t size() const { return choices_.size(); }
    std::vector<std::size_t> case_a_positions() const;
    std::vector<std::size_t> case_b_positions() const;
    std::string key_bits() const;

private:
    std::vector<CaseChoice> choices_;
};

// Bijection position -> slot on 0..size-1.
class Permutation {
public:
    Permutation() = default;
    static Permutation identity(std::size_t size);
    static Permutation random(std::size_t size, Rand& rng);
    static Permutation from_forward(std::vector<std::size_t> forward);

    std::size_t size() const { return forward_.size(); }
    std::size_t apply(std::size_t position) const;
    std::size_t invert(std::size_t slot) const;
    const std::vector<std::size_t>& forward() const { return forward_; }
    Permutation inverted() const;
    bool operator==(const Permutation&) const = default;

private:
    std::vector<std::size_t> forward_;
    std::vector<std::size_t> inverse_;
};

enum class Direction { AliceToBob, BobToAlice };
enum class RunStatus { Accepted, Aborted, Infeasible };
enum class AbortReason { ErrorRateExceeded, MinusSignFlag };

const char* to_string(RunStatus s);
const char* to_string(AbortReason r);
const char* to_string(Direction d);

// Claim that the qubit of `position` now sits at `slot`.
struct RoutingEntry {
    std::size_t position = 0;
    std::size_t slot = 0;
    bool operator==(const RoutingEntry&) const = default;
};

struct TranscriptEvent {
    enum class Type {
        QubitsSent,
        RawKeyAnnouncement,
        CaseAAnnouncement,
        KeyAnnouncement,
        RemainingPermutationAnnouncement,
        AbortNotice,
    };
    Type type = Type::QubitsSent;
    Direction direction = Direction::AliceToBob;
    std::size_t count = 0;
    std::string bits;
    std::vector<std::size_t> positions;
    std::vector<RoutingEntry> routing;
    std::optional<AbortReason> reason;
};

// Ordered announcement log enforcing the per-variant message order:
//   Original: sent, sent, raw key, case-A positions, remaining permutation;
//   Improved: sent, sent, case-A positions, key, remaining permutation.
// Aborts are terminal. The Original variant can abort only after the case-A
// announcement (failed check); the Improved variant can abort there or after
// the remaining permutation (minus-sign decode).
class Transcript {
public:
    explicit Transcript(Variant variant) : variant_(variant) {}

    Variant variant() const { return variant_; }
    const std::vector<TranscriptEvent>& events() const { return events_; }
    bool aborted() const { return aborted_; }
    bool complete() const;

    void record_qubits_sent(Direction direction, std::size_t count);
    void record_raw_key_announcement(const std::string& bits);
    void record_case_a_announcement(const std::vector<std::size_t>& positions,
                                    const std::vector<RoutingEntry>& routing);
    void record_key_announcement(const std::string& bits);
    void record_remaining_permutation(const std::vector<RoutingEntry>& routing);
    void record_abort(AbortReason reason);

    // One JSON object per line, in event order; positions and slots 1-based.
    std::string to_jsonl() const;

private:
    void advance(TranscriptEvent::Type type, int from_stage);

    Variant variant_;
    std::vector<TranscriptEvent> events_;
    int stage_ = 0;
    bool aborted_ = false;
};

struct DetectionResult {
    std::size_t checked = 0;
    std::size_t errors = 0;
    std::vector<std::size_t> error_positions;

    double error_fraction() const;
    bool pass(double threshold) const { return error_fraction() <= threshold; }
};

struct DecodeResult {
    bool flagged = false;
    std::size_t flag_position = 0;
    std::string bits;
};

struct RunOutcome {
    RunStatus status = RunStatus::Accepted;
    std::string alice_key;
    std::string bob_key;
    std::optional<AbortReason> abort_reason;
};

struct PairRecord {
    std::size_t index = 0;
    BellKind initial = BellKind::PhiPlus;
    QubitId alice_qubit;
    std::size_t bob_slot = 0;
};

std::string xor_bits(const std::string& a, const std::string& b);
std::string subset_bits(const std::string& bits, const std::vector<std::size_t>& positions);
std::vector<std::size_t> complement_positions(std::size_t size,
                                              const std::vector<std::size_t>& positions);
std::vector<RoutingEntry> routing_for(const Permutation& perm,
                                      const std::vector<std::size_t>& positions);

// Final key derivation. Original: key_material is the announced 2n-bit raw
// key, reduced to the non-announced positions in ascending order before the
// XOR. Improved: key_material is the announced n-bit key, already aligned to
// the non-announced positions in ascending order.
std::string derive_final_key(Variant variant, const std::string& key_material,
                             const std::string& bob_bits,
                             const std::vector<std::size_t>& announced_positions);

// One protocol execution: Alice's 2n pairs, Bob's encoding and routing, the
// announcements, the check, and the decode, against a caller-owned registry.
// Methods must be called in the variant's step order; the transcript enforces
// announcement order and misuse throws std::logic_error.
class ProtocolRun {
public:
    struct EncodeRecord {
        std::vector<std::size_t> measured_positions;
        std::vector<int> measured_bits;
        std::vector<std::optional<int>> replacement_values;
    };

    ProtocolRun(Variant variant, std::size_t n, Registry& registry);

    Variant variant() const { return variant_; }
    std::size_t n() const { return n_; }
    std::size_t pair_count() const { return 2 * n_; }
    Registry& registry() { return registry_; }
    Transcript& transcript() { return transcript_; }
    const Transcript& transcript() const { return transcript_; }
    const std::vector<PairRecord>& pairs() const { return pairs_; }

    // Prepares the 2n pairs and marks the travel halves sent to Bob.
    void alice_prepare(Rand& rng);
    void alice_prepare(std::vector<BellKind> kinds);
    std::vector<QubitId>& travel_qubits() { return travel_; }

    // Bob's encoding. Case B semantics differ per variant: Original measures
    // every Case B position and sends |r xor k|; Improved leaves k=0
    // untouched and sends the flipped value only for k=1.
    const EncodeRecord& bob_encode(const CaseAssignment& cases, const std::string& key_bits);
    const CaseAssignment& case_assignment() const { return cases_; }
    const EncodeRecord& encode_record() const { return encode_; }

    // Routes all positions through the permutation and sends them back.
    void bob_return(const Permutation& perm);
    std::vector<QubitId>& slots() { return slots_; }

    void announce_raw_key(const std::string& bits);
    void announce_case_a(const std::vector<std::size_t>& positions,
                         const std::vector<RoutingEntry>& routing);
    void announce_key(const std::string& bits);
    void announce_remaining(const std::vector<RoutingEntry>& routing);
    void record_abort(AbortReason reason);

    const std::string& announced_raw_key() const { return raw_key_; }
    const std::string& announced_key() const { return key_; }
    const std::vector<std::size_t>& announced_positions() const { return announced_positions_; }
    std::vector<std::size_t> remaining_positions() const;

    // Alice checks every announced position against its initial state.
    DetectionResult detection_check();
    // Alice decodes the remaining positions in ascending order. Stops at the
    // first minus-sign outcome in the Improved variant.
    DecodeResult decode_bob_key();

private:
    int decode_outcome(BellKind initial, BellKind outcome) const;

    Variant variant_;
    std::size_t n_;
    Registry& registry_;
    Transcript transcript_;
    std::vector<PairRecord> pairs_;
    std::vector<BellKind> initials_;
    std::vector<QubitId> travel_;
    std::vector<QubitId> slots_;
    CaseAssignment cases_;
    EncodeRecord encode_;
    bool prepared_ = false;
    bool encoded_ = false;
    bool returned_ = false;
    bool case_a_announced_ = false;
    bool detection_done_ = false;
    bool decode_done_ = false;
    std::string raw_key_;
    std::string key_;
    std::vector<std::size_t> announced_positions_;
    std::vector<RoutingEntry> announced_routing_;
    std::vector<RoutingEntry> remaining_routing_;
};

struct BobBehavior;
struct EveBehavior;

struct RunSpec {
    Variant variant = Variant::Original;
    std::size_t n = 8;
    double threshold = 0.0;
    std::uint64_t seed = 0;
};

struct RunResult {
    RunOutcome outcome;
    Transcript transcript;
    DetectionResult detection;
};

// Rejects ill-formed specs and behavior/variant pairings with
// std::invalid_argument; infeasibility is not an error and passes here.
void validate_run_inputs(const RunSpec& spec, const BobBehavior& bob);

// Full seeded execution with pluggable Bob and Eve. Per-role randomness comes
// from streams derived from the seed: registry 0, Alice 1, Bob 2, Eve 3.
RunResult run_protocol(const RunSpec& spec, const BobBehavior& bob, const EveBehavior& eve);

}  // namespace sqka
