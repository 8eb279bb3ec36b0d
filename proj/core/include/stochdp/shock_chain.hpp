#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "stochdp/shock_kernels.hpp"

namespace stochdp {

struct Transition {
    std::size_t target = 0;
    double probability = 0.0;
};

struct ChainBuildOptions {
    std::size_t depth = 1;
    std::size_t max_nodes = 100000;
    double match_rel_tol = 1e-12;
};

/// Finite node set for the shock with the transition probabilities the kernel's quadrature
/// induces between nodes. Successors of frontier nodes that fall outside the node set are
/// snapped to the nearest node and counted.
class ShockChain {
public:
    ShockChain() = default;

    static ShockChain build(const TransitionKernel& Q, const std::vector<Shock>& seeds,
                            const ChainBuildOptions& options = {});
    static ShockChain from_matrix(std::vector<Shock> nodes, const std::vector<std::vector<double>>& P);

    std::size_t size() const noexcept { return nodes_.size(); }
    std::size_t dim() const noexcept { return nodes_.empty() ? 0 : nodes_.front().size(); }
    const Shock& node(std::size_t i) const { return nodes_[i]; }
    const std::vector<Shock>& nodes() const noexcept { return nodes_; }
    const std::vector<Transition>& transitions(std::size_t i) const { return transitions_[i]; }

    std::optional<std::size_t> find(std::span<const double> z) const;
    /// Index of a stored node; throws NumericalError naming the shock otherwise.
    std::size_t index_of(std::span<const double> z) const;

    /// True when every kernel successor was itself a node (no snapping happened).
    bool closed() const noexcept { return snapped_ == 0; }
    std::size_t snapped_successors() const noexcept { return snapped_; }
    double max_snap_distance() const noexcept { return max_snap_distance_; }
    std::size_t seed_count() const noexcept { return seed_count_; }

    template <class F>
    double expectation(std::size_t from, F&& f) const {
        double total = 0.0;
        for (const auto& t : transitions_[from]) total += t.probability * f(t.target);
        return total;
    }

    std::size_t sample_next(std::size_t from, Rng& rng) const;

private:
    std::vector<Shock> nodes_;
    std::vector<std::vector<Transition>> transitions_;
    std::size_t snapped_ = 0;
    double max_snap_distance_ = 0.0;
    std::size_t seed_count_ = 0;
    double match_rel_tol_ = 1e-12;
};

}  // namespace stochdp
