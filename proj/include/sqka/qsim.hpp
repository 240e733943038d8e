#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "sqka/rng.hpp"

namespace sqka {

// The four Bell states. The enum value doubles as the index into
// probability/outcome arrays, in the order Phi+, Phi-, Psi+, Psi-.
enum class BellKind { PhiPlus = 0, PhiMinus = 1, PsiPlus = 2, PsiMinus = 3 };

const char* to_string(BellKind k);

// Amplitudes of |kind> over basis |00>,|01>,|10>,|11>, first qubit = high bit.
std::array<std::complex<double>, 4> bell_amplitudes(BellKind k);

// Handle for one live qubit. Unique within a registry, never reused.
struct QubitId {
    std::uint64_t value = 0;
    friend bool operator==(QubitId a, QubitId b) { return a.value == b.value; }
    friend bool operator!=(QubitId a, QubitId b) { return a.value != b.value; }
};

// Exact state of a small collection of qubits, tracked as a partition into
// entanglement groups. Each group holds an ordered member list and a dense
// amplitude vector of length 2^|members|; the first member is the high bit.
// Measurement factors measured qubits out into their own groups, so group
// sizes stay at the minimum the entanglement structure requires.
class Registry {
public:
    explicit Registry(std::uint64_t seed) : rng_(seed) {}

    // |value> as a fresh singleton group.
    QubitId new_qubit(int value);

    // Two-qubit group in the given Bell state. The first returned id is the
    // first tensor factor.
    std::pair<QubitId, QubitId> new_bell_pair(BellKind kind);

    // Z-basis measurement of q, Born-rule sampled. q's group is projected
    // onto the outcome and q is split off into a singleton; collapse is
    // visible to later measurements of its former group partners.
    int measure_z(QubitId q);

    // Bell-basis measurement of (q1, q2). Groups are merged first if needed;
    // the pair collapses into its own group in the outcome state and any
    // remaining partners keep the renormalized residual state. Measuring one
    // half of each of two independent Bell pairs entangle-swaps the partners.
    BellKind measure_bell(QubitId q1, QubitId q2);

    // P(Phi+), P(Phi-), P(Psi+), P(Psi-) for a Bell measurement of (q1, q2).
    // Does not mutate state.
    std::array<double, 4> bell_probabilities(QubitId q1, QubitId q2) const;

    // Remove an unentangled qubit. Rejects qubits in multi-member groups:
    // discarding an entangled qubit signals a protocol-logic bug.
    void discard(QubitId q);

    bool is_live(QubitId q) const;
    std::size_t live_count() const;
    std::size_t group_size(QubitId q) const;
    std::vector<QubitId> group_members(QubitId q) const;

    // Verifies the partition and normalization invariants; throws on breach.
    void check_consistency() const;

private:
    struct Group {
        std::vector<QubitId> members;
        std::vector<std::complex<double>> amps;
    };

    struct Location {
        std::size_t group;
        std::size_t pos;
    };

    Location locate(QubitId q) const;
    QubitId fresh_id();

    // Residual amplitudes over the group's other members after projecting
    // members p1, p2 onto |kind>. Not normalized; squared norm = probability.
    static std::vector<std::complex<double>> project_pair(
        const Group& g, std::size_t p1, std::size_t p2, BellKind kind);

    std::vector<Group> groups_;
    Rand rng_;
    std::uint64_t next_id_ = 1;
};

}  // namespace sqka
