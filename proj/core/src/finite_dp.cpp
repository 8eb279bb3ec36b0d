#include "stochdp/finite_dp.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "stochdp/error.hpp"

namespace stochdp {

void FiniteMdp::validate() const {
    if (!(beta >= 0.0 && beta < 1.0)) throw ConditionError("finite problem needs beta in [0, 1)");
    if (reward.empty() || next.size() != reward.size()) throw ConfigError("finite problem is empty or inconsistent");
    for (std::size_t s = 0; s < reward.size(); ++s) {
        if (reward[s].empty() || next[s].size() != reward[s].size()) {
            throw ConfigError("state " + std::to_string(s) + " has no actions or mismatched transitions");
        }
        for (const auto& law : next[s]) {
            double total = 0.0;
            for (const auto& t : law) {
                if (t.target >= reward.size() || t.probability < 0.0) throw ConfigError("invalid transition");
                total += t.probability;
            }
            if (std::abs(total - 1.0) > 1e-12) throw ConfigError("transition law does not sum to 1");
        }
    }
}

FiniteSolution finite_value_iteration(const FiniteMdp& mdp, double tol, std::size_t max_iter) {
    mdp.validate();
    const std::size_t n = mdp.states();
    FiniteSolution sol;
    sol.value.assign(n, 0.0);
    sol.policy.assign(n, 0);
    std::vector<double> next(n);
    for (std::size_t it = 1; it <= max_iter; ++it) {
        double change = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            double best = -INFINITY;
            std::size_t arg = 0;
            for (std::size_t a = 0; a < mdp.reward[s].size(); ++a) {
                double v = mdp.reward[s][a];
                double cont = 0.0;
                for (const auto& t : mdp.next[s][a]) cont += t.probability * sol.value[t.target];
                v += mdp.beta * cont;
                if (v > best) {
                    best = v;
                    arg = a;
                }
            }
            next[s] = best;
            sol.policy[s] = arg;
            change = std::max(change, std::abs(best - sol.value[s]));
        }
        sol.value.swap(next);
        sol.iterations = it;
        if (change <= tol) return sol;
    }
    throw NumericalError("finite value iteration did not converge");
}

std::vector<double> finite_policy_value(const FiniteMdp& mdp, const std::vector<std::size_t>& policy) {
    mdp.validate();
    const auto n = static_cast<Eigen::Index>(mdp.states());
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd r(n);
    for (Eigen::Index s = 0; s < n; ++s) {
        const std::size_t a = policy.at(static_cast<std::size_t>(s));
        r[s] = mdp.reward[static_cast<std::size_t>(s)].at(a);
        for (const auto& t : mdp.next[static_cast<std::size_t>(s)][a]) {
            A(s, static_cast<Eigen::Index>(t.target)) -= mdp.beta * t.probability;
        }
    }
    const Eigen::VectorXd v = A.partialPivLu().solve(r);
    return std::vector<double>(v.data(), v.data() + n);
}

FiniteSolution finite_policy_enumeration(const FiniteMdp& mdp) {
    mdp.validate();
    const std::size_t n = mdp.states();
    double count = 1.0;
    for (const auto& r : mdp.reward) count *= static_cast<double>(r.size());
    if (count > 1e6) throw ConfigError("too many stationary policies to enumerate");

    FiniteSolution best;
    std::vector<std::size_t> policy(n, 0);
    while (true) {
        auto v = finite_policy_value(mdp, policy);
        bool dominates = best.value.empty();
        if (!dominates) {
            // The optimal policy dominates every other one state by state.
            double gain = 0.0;
            for (std::size_t s = 0; s < n; ++s) gain += v[s] - best.value[s];
            dominates = gain > 1e-12;
        }
        if (dominates) {
            best.value = std::move(v);
            best.policy = policy;
        }
        std::size_t s = 0;
        while (s < n && ++policy[s] == mdp.reward[s].size()) policy[s++] = 0;
        if (s == n) break;
    }
    return best;
}

}  // namespace stochdp
