#include "sqka/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sqka {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kNormTol = 1e-9;

}  // namespace

const char* to_string(BellKind k) {
    switch (k) {
        case BellKind::PhiPlus: return "phi+";
        case BellKind::PhiMinus: return "phi-";
        case BellKind::PsiPlus: return "psi+";
        case BellKind::PsiMinus: return "psi-";
    }
    return "?";
}

std::array<std::complex<double>, 4> bell_amplitudes(BellKind k) {
    switch (k) {
        case BellKind::PhiPlus: return {kInvSqrt2, 0.0, 0.0, kInvSqrt2};
        case BellKind::PhiMinus: return {kInvSqrt2, 0.0, 0.0, -kInvSqrt2};
        case BellKind::PsiPlus: return {0.0, kInvSqrt2, kInvSqrt2, 0.0};
        case BellKind::PsiMinus: return {0.0, kInvSqrt2, -kInvSqrt2, 0.0};
    }
    throw std::invalid_argument("bad BellKind");
}

QubitId Registry::fresh_id() { return QubitId{next_id_++}; }

Registry::Location Registry::locate(QubitId q) const {
    for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
        const auto& members = groups_[gi].members;
        for (std::size_t p = 0; p < members.size(); ++p) {
            if (members[p] == q) return {gi, p};
        }
    }
    throw std::out_of_range("unknown or discarded qubit id");
}

QubitId Registry::new_qubit(int value) {
    if (value != 0 && value != 1) throw std::invalid_argument("qubit value must be 0 or 1");
    QubitId id = fresh_id();
    Group g;
    g.members = {id};
    g.amps = {value == 0 ? 1.0 : 0.0, value == 0 ? 0.0 : 1.0};
    groups_.push_back(std::move(g));
    return id;
}

std::pair<QubitId, QubitId> Registry::new_bell_pair(BellKind kind) {
    QubitId a = fresh_id();
    QubitId b = fresh_id();
    Group g;
    g.members = {a, b};
    auto amps = bell_amplitudes(kind);
    g.amps.assign(amps.begin(), amps.end());
    groups_.push_back(std::move(g));
    return {a, b};
}

int Registry::measure_z(QubitId q) {
    Location loc = locate(q);
    Group& g = groups_[loc.group];
    const std::size_t dim = g.amps.size();
    const std::size_t k = g.members.size();
    const std::size_t bit = std::size_t{1} << (k - 1 - loc.pos);

    double p_one = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        if (i & bit) p_one += std::norm(g.amps[i]);
    }
    const int outcome = rng_.uniform() < p_one ? 1 : 0;
    const double p = outcome ? p_one : 1.0 - p_one;

    if (k == 1) {
        g.amps = {outcome == 0 ? 1.0 : 0.0, outcome == 0 ? 0.0 : 1.0};
        return outcome;
    }

    // Residual state of the other members, conditioned on the outcome.
    std::vector<std::complex<double>> rest(dim / 2);
    const double scale = 1.0 / std::sqrt(p);
    for (std::size_t i = 0; i < dim; ++i) {
        if (((i & bit) != 0) != (outcome != 0)) continue;
        const std::size_t low = i & (bit - 1);
        const std::size_t high = (i >> 1) & ~(bit - 1);
        rest[high | low] = g.amps[i] * scale;
    }

    std::vector<QubitId> rest_members;
    rest_members.reserve(k - 1);
    for (std::size_t p2 = 0; p2 < k; ++p2) {
        if (p2 != loc.pos) rest_members.push_back(g.members[p2]);
    }

    g.members = std::move(rest_members);
    g.amps = std::move(rest);

    Group single;
    single.members = {q};
    single.amps = {outcome == 0 ? 1.0 : 0.0, outcome == 0 ? 0.0 : 1.0};
    groups_.push_back(std::move(single));
    return outcome;
}

std::vector<std::complex<double>> Registry::project_pair(
    const Group& g, std::size_t p1, std::size_t p2, BellKind kind) {
    const std::size_t k = g.members.size();
    const std::size_t dim = g.amps.size();
    const std::size_t bit1 = std::size_t{1} << (k - 1 - p1);
    const std::size_t bit2 = std::size_t{1} << (k - 1 - p2);
    const auto bell = bell_amplitudes(kind);

    std::vector<std::complex<double>> rest(k > 2 ? dim / 4 : 1, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
        const int b1 = (i & bit1) ? 1 : 0;
        const int b2 = (i & bit2) ? 1 : 0;
        // Index over the remaining members, in member-list order.
        std::size_t r = 0;
        for (std::size_t p = 0; p < k; ++p) {
            if (p == p1 || p == p2) continue;
            const std::size_t bp = std::size_t{1} << (k - 1 - p);
            r = (r << 1) | ((i & bp) ? 1 : 0);
        }
        rest[r] += std::conj(bell[b1 * 2 + b2]) * g.amps[i];
    }
    return rest;
}

std::array<double, 4> Registry::bell_probabilities(QubitId q1, QubitId q2) const {
    if (q1 == q2) throw std::invalid_argument("bell measurement needs two distinct qubits");
    Location l1 = locate(q1);
    Location l2 = locate(q2);

    const Group* g = nullptr;
    Group merged;
    std::size_t p1, p2;
    if (l1.group == l2.group) {
        g = &groups_[l1.group];
        p1 = l1.pos;
        p2 = l2.pos;
    } else {
        const Group& ga = groups_[l1.group];
        const Group& gb = groups_[l2.group];
        merged.members = ga.members;
        merged.members.insert(merged.members.end(), gb.members.begin(), gb.members.end());
        merged.amps.resize(ga.amps.size() * gb.amps.size());
        for (std::size_t i = 0; i < ga.amps.size(); ++i) {
            for (std::size_t j = 0; j < gb.amps.size(); ++j) {
                merged.amps[i * gb.amps.size() + j] = ga.amps[i] * gb.amps[j];
            }
        }
        g = &merged;
        p1 = l1.pos;
        p2 = ga.members.size() + l2.pos;
    }

    std::array<double, 4> probs{};
    double total = 0.0;
    for (int k = 0; k < 4; ++k) {
        auto rest = project_pair(*g, p1, p2, static_cast<BellKind>(k));
        double p = 0.0;
        for (const auto& a : rest) p += std::norm(a);
        probs[k] = p;
        total += p;
    }
    if (std::abs(total - 1.0) > kNormTol) {
        throw std::logic_error("bell probabilities do not sum to 1");
    }
    return probs;
}

BellKind Registry::measure_bell(QubitId q1, QubitId q2) {
    if (q1 == q2) throw std::invalid_argument("bell measurement needs two distinct qubits");
    Location l1 = locate(q1);
    Location l2 = locate(q2);

    if (l1.group != l2.group) {
        // Merge q2's group into q1's.
        Group& ga = groups_[l1.group];
        Group& gb = groups_[l2.group];
        std::vector<std::complex<double>> amps(ga.amps.size() * gb.amps.size());
        for (std::size_t i = 0; i < ga.amps.size(); ++i) {
            for (std::size_t j = 0; j < gb.amps.size(); ++j) {
                amps[i * gb.amps.size() + j] = ga.amps[i] * gb.amps[j];
            }
        }
        ga.members.insert(ga.members.end(), gb.members.begin(), gb.members.end());
        ga.amps = std::move(amps);
        groups_.erase(groups_.begin() + static_cast<std::ptrdiff_t>(l2.group));
        l1 = locate(q1);
        l2 = locate(q2);
    }

    Group& g = groups_[l1.group];
    const std::size_t p1 = l1.pos;
    const std::size_t p2 = l2.pos;

    std::array<std::vector<std::complex<double>>, 4> residuals;
    std::array<double, 4> probs{};
    for (int k = 0; k < 4; ++k) {
        residuals[k] = project_pair(g, p1, p2, static_cast<BellKind>(k));
        for (const auto& a : residuals[k]) probs[k] += std::norm(a);
    }

    const double u = rng_.uniform();
    int outcome = -1;
    double cum = 0.0;
    int last_possible = 0;
    for (int k = 0; k < 4; ++k) {
        if (probs[k] > 1e-12) last_possible = k;
    }
    for (int k = 0; k < 4; ++k) {
        cum += probs[k];
        if (u < cum && probs[k] > 1e-12) {
            outcome = k;
            break;
        }
    }
    if (outcome < 0) outcome = last_possible;
    const BellKind kind = static_cast<BellKind>(outcome);

    // The measured pair factors out exactly: the post-measurement state is
    // |kind> on (q1, q2) tensored with the normalized residual.
    std::vector<QubitId> rest_members;
    for (std::size_t p = 0; p < g.members.size(); ++p) {
        if (p != p1 && p != p2) rest_members.push_back(g.members[p]);
    }

    Group pair;
    pair.members = {q1, q2};
    auto bell = bell_amplitudes(kind);
    pair.amps.assign(bell.begin(), bell.end());

    if (rest_members.empty()) {
        g = std::move(pair);
    } else {
        auto rest = std::move(residuals[outcome]);
        const double scale = 1.0 / std::sqrt(probs[outcome]);
        for (auto& a : rest) a *= scale;
        g.members = std::move(rest_members);
        g.amps = std::move(rest);
        groups_.push_back(std::move(pair));
    }
    return kind;
}

void Registry::discard(QubitId q) {
    Location loc = locate(q);
    if (groups_[loc.group].members.size() != 1) {
        throw std::logic_error("cannot discard an entangled qubit");
    }
    groups_.erase(groups_.begin() + static_cast<std::ptrdiff_t>(loc.group));
}

bool Registry::is_live(QubitId q) const {
    for (const auto& g : groups_) {
        for (const auto& m : g.members) {
            if (m == q) return true;
        }
    }
    return false;
}

std::size_t Registry::live_count() const {
    std::size_t n = 0;
    for (const auto& g : groups_) n += g.members.size();
    return n;
}

std::size_t Registry::group_size(QubitId q) const {
    return groups_[locate(q).group].members.size();
}

std::vector<QubitId> Registry::group_members(QubitId q) const {
    return groups_[locate(q).group].members;
}

void Registry::check_consistency() const {
    std::vector<std::uint64_t> seen;
    for (const auto& g : groups_) {
        if (g.members.empty()) throw std::logic_error("empty entanglement group");
        if (g.amps.size() != (std::size_t{1} << g.members.size())) {
            throw std::logic_error("amplitude vector size mismatch");
        }
        double norm = 0.0;
        for (const auto& a : g.amps) norm += std::norm(a);
        if (std::abs(norm - 1.0) > kNormTol) {
            throw std::logic_error("entanglement group is not normalized");
        }
        for (const auto& m : g.members) seen.push_back(m.value);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
        throw std::logic_error("qubit appears in more than one group");
    }
}

}  // namespace sqka
