#include "oracle.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sqka::testing {

namespace {

constexpr double kRoot = 0.70710678118654752440;
constexpr double kTol = 1e-9;

// Amplitude of |first=b1, second=b2> in the named Bell state. Written out
// case by case so the table is independent of the library's.
std::complex<double> bell_amp(BellKind kind, int b1, int b2) {
    switch (kind) {
        case BellKind::PhiPlus: return b1 == b2 ? kRoot : 0.0;
        case BellKind::PhiMinus: return b1 != b2 ? 0.0 : (b1 ? -kRoot : kRoot);
        case BellKind::PsiPlus: return b1 != b2 ? kRoot : 0.0;
        case BellKind::PsiMinus: return b1 == b2 ? 0.0 : (b1 ? -kRoot : kRoot);
    }
    throw std::invalid_argument("bad BellKind");
}

}  // namespace

std::size_t DenseState::index_of(std::uint64_t label) const {
    for (std::size_t p = 0; p < labels_.size(); ++p) {
        if (labels_[p] == label) return p;
    }
    throw std::out_of_range("oracle: unknown qubit label");
}

void DenseState::add_qubit(std::uint64_t label, int value) {
    const std::size_t old_size = amps_.size();
    std::vector<std::complex<double>> grown(old_size * 2, 0.0);
    for (std::size_t j = 0; j < old_size; ++j) {
        grown[static_cast<std::size_t>(value) * old_size + j] = amps_[j];
    }
    labels_.push_back(label);
    amps_ = std::move(grown);
}

void DenseState::add_bell_pair(std::uint64_t first, std::uint64_t second, BellKind kind) {
    const std::size_t old_size = amps_.size();
    std::vector<std::complex<double>> grown(old_size * 4, 0.0);
    for (int b2 = 0; b2 < 2; ++b2) {
        for (int b1 = 0; b1 < 2; ++b1) {
            const auto a = bell_amp(kind, b1, b2);
            if (a == std::complex<double>(0.0)) continue;
            const std::size_t block =
                (static_cast<std::size_t>(b2) * 2 + static_cast<std::size_t>(b1)) * old_size;
            for (std::size_t j = 0; j < old_size; ++j) grown[block + j] = a * amps_[j];
        }
    }
    labels_.push_back(first);
    labels_.push_back(second);
    amps_ = std::move(grown);
}

double DenseState::prob_one(std::uint64_t label) const {
    const std::size_t bit = std::size_t{1} << index_of(label);
    double p = 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if (i & bit) p += std::norm(amps_[i]);
    }
    return p;
}

std::array<double, 4> DenseState::bell_probabilities(std::uint64_t first,
                                                     std::uint64_t second) const {
    const std::size_t bit1 = std::size_t{1} << index_of(first);
    const std::size_t bit2 = std::size_t{1} << index_of(second);
    std::array<double, 4> probs{};
    for (int k = 0; k < 4; ++k) {
        const auto kind = static_cast<BellKind>(k);
        double p = 0.0;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if ((i & bit1) || (i & bit2)) continue;
            std::complex<double> inner = 0.0;
            for (int b1 = 0; b1 < 2; ++b1) {
                for (int b2 = 0; b2 < 2; ++b2) {
                    const std::size_t idx =
                        i | (b1 ? bit1 : 0) | (b2 ? bit2 : 0);
                    inner += std::conj(bell_amp(kind, b1, b2)) * amps_[idx];
                }
            }
            p += std::norm(inner);
        }
        probs[k] = p;
    }
    return probs;
}

void DenseState::collapse_z(std::uint64_t label, int outcome) {
    const std::size_t bit = std::size_t{1} << index_of(label);
    double p = 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if (((i & bit) != 0) == (outcome != 0)) p += std::norm(amps_[i]);
    }
    if (p < 1e-12) throw std::logic_error("oracle: collapse onto a zero-probability outcome");
    const double scale = 1.0 / std::sqrt(p);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if (((i & bit) != 0) == (outcome != 0)) {
            amps_[i] *= scale;
        } else {
            amps_[i] = 0.0;
        }
    }
}

void DenseState::collapse_bell(std::uint64_t first, std::uint64_t second, BellKind kind) {
    const std::size_t bit1 = std::size_t{1} << index_of(first);
    const std::size_t bit2 = std::size_t{1} << index_of(second);
    std::vector<std::complex<double>> projected(amps_.size(), 0.0);
    double p = 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if ((i & bit1) || (i & bit2)) continue;
        std::complex<double> inner = 0.0;
        for (int b1 = 0; b1 < 2; ++b1) {
            for (int b2 = 0; b2 < 2; ++b2) {
                const std::size_t idx = i | (b1 ? bit1 : 0) | (b2 ? bit2 : 0);
                inner += std::conj(bell_amp(kind, b1, b2)) * amps_[idx];
            }
        }
        p += std::norm(inner);
        for (int b1 = 0; b1 < 2; ++b1) {
            for (int b2 = 0; b2 < 2; ++b2) {
                const std::size_t idx = i | (b1 ? bit1 : 0) | (b2 ? bit2 : 0);
                projected[idx] = inner * bell_amp(kind, b1, b2);
            }
        }
    }
    if (p < 1e-12) throw std::logic_error("oracle: collapse onto a zero-probability Bell outcome");
    const double scale = 1.0 / std::sqrt(p);
    for (auto& a : projected) a *= scale;
    amps_ = std::move(projected);
}

QubitId Mirror::add_qubit(int value) {
    QubitId q = reg_.new_qubit(value);
    oracle_.add_qubit(q.value, value);
    live_.push_back(q);
    check_all();
    return q;
}

std::pair<QubitId, QubitId> Mirror::add_bell_pair(BellKind kind) {
    auto [a, b] = reg_.new_bell_pair(kind);
    oracle_.add_bell_pair(a.value, b.value, kind);
    live_.push_back(a);
    live_.push_back(b);
    check_all();
    return {a, b};
}

int Mirror::measure_z(QubitId q) {
    const double p_one = oracle_.prob_one(q.value);
    const int outcome = reg_.measure_z(q);
    const double p = outcome ? p_one : 1.0 - p_one;
    if (p < 1e-12) {
        throw std::logic_error("mirror: registry sampled a zero-probability z outcome");
    }
    oracle_.collapse_z(q.value, outcome);
    check_all();
    return outcome;
}

BellKind Mirror::measure_bell(QubitId a, QubitId b) {
    const auto probs = oracle_.bell_probabilities(a.value, b.value);
    const BellKind kind = reg_.measure_bell(a, b);
    if (probs[static_cast<int>(kind)] < 1e-12) {
        throw std::logic_error("mirror: registry sampled a zero-probability Bell outcome");
    }
    oracle_.collapse_bell(a.value, b.value, kind);
    check_all();
    return kind;
}

void Mirror::check_pair(QubitId a, QubitId b) const {
    const auto got = reg_.bell_probabilities(a, b);
    const auto want = oracle_.bell_probabilities(a.value, b.value);
    for (int k = 0; k < 4; ++k) {
        if (std::abs(got[k] - want[k]) > kTol) {
            std::ostringstream msg;
            msg << "mirror: Bell distribution mismatch on (" << a.value << ", " << b.value
                << ") kind " << k << ": registry " << got[k] << " oracle " << want[k];
            throw std::logic_error(msg.str());
        }
    }
}

void Mirror::check_all() const {
    reg_.check_consistency();
    for (std::size_t i = 0; i < live_.size(); ++i) {
        for (std::size_t j = i + 1; j < live_.size(); ++j) {
            check_pair(live_[i], live_[j]);
        }
    }
}

}  // namespace sqka::testing
