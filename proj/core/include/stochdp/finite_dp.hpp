#pragma once

#include <cstddef>
#include <vector>

#include "stochdp/shock_chain.hpp"

namespace stochdp {

/// Discounted Markov decision problem with finitely many states and actions.
struct FiniteMdp {
    double beta = 0.9;
    std::vector<std::vector<double>> reward;                   // [state][action]
    std::vector<std::vector<std::vector<Transition>>> next;    // [state][action] -> law of the next state

    std::size_t states() const noexcept { return reward.size(); }
    void validate() const;
};

struct FiniteSolution {
    std::vector<double> value;
    std::vector<std::size_t> policy;
    std::size_t iterations = 0;
};

/// Exhaustive-action value iteration until the sup change is below `tol`.
/// Ties go to the lowest action index.
FiniteSolution finite_value_iteration(const FiniteMdp& mdp, double tol = 1e-12, std::size_t max_iter = 1000000);

/// Value of a stationary policy by a direct linear solve of (I - beta P) v = r.
std::vector<double> finite_policy_value(const FiniteMdp& mdp, const std::vector<std::size_t>& policy);

/// Best stationary policy by enumerating all of them; only for tiny problems.
FiniteSolution finite_policy_enumeration(const FiniteMdp& mdp);

}  // namespace stochdp
