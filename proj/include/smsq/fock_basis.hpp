#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace smsq {

/// Occupation numbers of the four Schwinger modes.
/// Mode order: a = |e,+1>, b = |g,-1>, c = |e,-1>, d = |g,+1>.
struct FockState {
    std::array<int, 4> n{};

    int alpha() const { return n[0]; }
    int beta() const { return n[1]; }
    int gamma() const { return n[2]; }
    int delta() const { return n[3]; }
    int total() const { return n[0] + n[1] + n[2] + n[3]; }

    // diagonal collective quantum numbers
    int n_excited() const { return n[0] + n[2]; }
    int n_ground() const { return n[1] + n[3]; }
    int n_plus() const { return n[0] + n[3]; }
    int n_minus() const { return n[1] + n[2]; }
    double m_j() const { return 0.5 * (n_excited() - n_ground()); }
    double m_k() const { return 0.5 * (n_plus() - n_minus()); }

    friend bool operator==(const FockState&, const FockState&) = default;

    std::uint64_t key() const {
        return (std::uint64_t(n[0]) << 48) | (std::uint64_t(n[1]) << 32) |
               (std::uint64_t(n[2]) << 16) | std::uint64_t(n[3]);
    }
};

/// The N-particle four-mode basis in canonical order: lexicographically
/// decreasing in (alpha, beta, gamma), with delta = N - alpha - beta - gamma.
/// Immutable after construction.
class FockBasis {
  public:
    explicit FockBasis(int n_atoms) : n_atoms_(n_atoms) {
        if (n_atoms < 1) throw std::invalid_argument("FockBasis requires N >= 1");
        states_.reserve(static_cast<std::size_t>(dimension(n_atoms)));
        for (int a = n_atoms; a >= 0; --a)
            for (int b = n_atoms - a; b >= 0; --b)
                for (int c = n_atoms - a - b; c >= 0; --c)
                    states_.push_back(FockState{{a, b, c, n_atoms - a - b - c}});
        index_.reserve(states_.size());
        for (std::size_t i = 0; i < states_.size(); ++i)
            index_.emplace(states_[i].key(), static_cast<std::uint32_t>(i));
    }

    /// Number of N-particle states, (N+1)(N+2)(N+3)/6, in exact integer arithmetic.
    static std::int64_t dimension(int n) {
        if (n < 0) throw std::invalid_argument("dimension requires N >= 0");
        const std::int64_t m = n;
        return (m + 1) * (m + 2) * (m + 3) / 6;
    }

    int n_atoms() const { return n_atoms_; }
    std::size_t size() const { return states_.size(); }
    const std::vector<FockState>& states() const { return states_; }
    const FockState& state(std::size_t i) const { return states_[i]; }

    std::size_t index_of(const FockState& s) const {
        if (s.total() != n_atoms_)
            throw std::out_of_range("state not in basis: wrong particle number");
        auto it = index_.find(s.key());
        if (it == index_.end())
            throw std::out_of_range("state not in basis");
        return it->second;
    }

    bool contains(const FockState& s) const {
        return s.total() == n_atoms_ && index_.count(s.key()) != 0;
    }

  private:
    int n_atoms_;
    std::vector<FockState> states_;
    std::unordered_map<std::uint64_t, std::uint32_t> index_;
};

}  // namespace smsq
