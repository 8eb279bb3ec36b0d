#include "stochdp/shock_chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "stochdp/error.hpp"

namespace stochdp {

namespace {

bool same_shock(std::span<const double> a, std::span<const double> b, double rel) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double scale = std::max({1.0, std::abs(a[i]), std::abs(b[i])});
        if (std::abs(a[i] - b[i]) > rel * scale) return false;
    }
    return true;
}

double distance(std::span<const double> a, std::span<const double> b) {
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(sq);
}

std::vector<Transition> merge(std::vector<Transition> raw) {
    std::sort(raw.begin(), raw.end(), [](const Transition& a, const Transition& b) { return a.target < b.target; });
    std::vector<Transition> out;
    for (const auto& t : raw) {
        if (!out.empty() && out.back().target == t.target) {
            out.back().probability += t.probability;
        } else {
            out.push_back(t);
        }
    }
    return out;
}

// Nodes are bucketed on the first coordinate so lookups stay cheap for large chains.
class NodeIndex {
public:
    explicit NodeIndex(double rel) : rel_(rel) {}

    std::optional<std::size_t> find(const std::vector<Shock>& nodes, std::span<const double> z) const {
        const double scale = std::max(1.0, std::abs(z[0]));
        auto lo = by_first_.lower_bound(z[0] - 2.0 * rel_ * scale);
        for (auto it = lo; it != by_first_.end() && it->first <= z[0] + 2.0 * rel_ * scale; ++it) {
            if (same_shock(nodes[it->second], z, rel_)) return it->second;
        }
        return std::nullopt;
    }

    void insert(double first, std::size_t index) { by_first_.emplace(first, index); }

private:
    double rel_;
    std::multimap<double, std::size_t> by_first_;
};

}  // namespace

ShockChain ShockChain::build(const TransitionKernel& Q, const std::vector<Shock>& seeds,
                             const ChainBuildOptions& options) {
    if (seeds.empty()) throw ConfigError("shock chain needs at least one seed node");
    ShockChain chain;
    chain.match_rel_tol_ = options.match_rel_tol;
    NodeIndex index(options.match_rel_tol);

    auto add = [&](const Shock& z) -> std::size_t {
        if (auto found = index.find(chain.nodes_, z)) return *found;
        if (chain.nodes_.size() >= options.max_nodes) {
            throw ConfigError("shock chain exceeds " + std::to_string(options.max_nodes) +
                              " nodes; lower the closure depth or the quadrature node count");
        }
        chain.nodes_.push_back(z);
        index.insert(z[0], chain.nodes_.size() - 1);
        return chain.nodes_.size() - 1;
    };

    for (const auto& s : seeds) {
        if (s.size() != Q.dim()) throw ConfigError("seed shock " + format_shock(s) + " has the wrong dimension");
        add(s);
    }
    chain.seed_count_ = chain.nodes_.size();

    std::size_t level_begin = 0;
    for (std::size_t level = 0; level < options.depth; ++level) {
        const std::size_t level_end = chain.nodes_.size();
        if (level_begin == level_end) break;
        for (std::size_t i = level_begin; i < level_end; ++i) {
            for (const auto& s : Q.successors(chain.nodes_[i])) add(s.value);
        }
        level_begin = level_end;
    }

    chain.transitions_.resize(chain.nodes_.size());
    for (std::size_t i = 0; i < chain.nodes_.size(); ++i) {
        std::vector<Transition> raw;
        for (const auto& s : Q.successors(chain.nodes_[i])) {
            std::size_t target;
            if (auto found = index.find(chain.nodes_, s.value)) {
                target = *found;
            } else {
                double best = std::numeric_limits<double>::infinity();
                target = 0;
                for (std::size_t j = 0; j < chain.nodes_.size(); ++j) {
                    const double d = distance(chain.nodes_[j], s.value);
                    if (d < best) {
                        best = d;
                        target = j;
                    }
                }
                ++chain.snapped_;
                chain.max_snap_distance_ = std::max(chain.max_snap_distance_, best);
            }
            raw.push_back({target, s.weight});
        }
        chain.transitions_[i] = merge(std::move(raw));
    }
    return chain;
}

ShockChain ShockChain::from_matrix(std::vector<Shock> nodes, const std::vector<std::vector<double>>& P) {
    if (nodes.empty() || P.size() != nodes.size()) throw ConfigError("transition matrix must be n x n for n nodes");
    ShockChain chain;
    chain.nodes_ = std::move(nodes);
    chain.seed_count_ = chain.nodes_.size();
    chain.transitions_.resize(P.size());
    for (std::size_t i = 0; i < P.size(); ++i) {
        if (P[i].size() != P.size()) throw ConfigError("transition matrix must be square");
        double total = 0.0;
        for (std::size_t j = 0; j < P[i].size(); ++j) {
            if (!(P[i][j] >= 0.0) || !std::isfinite(P[i][j])) {
                throw ConfigError("transition probabilities must be finite and nonnegative");
            }
            if (P[i][j] > 0.0) chain.transitions_[i].push_back({j, P[i][j]});
            total += P[i][j];
        }
        if (std::abs(total - 1.0) > 1e-12) {
            throw ConfigError("row " + std::to_string(i) + " of the transition matrix does not sum to 1");
        }
    }
    return chain;
}

std::optional<std::size_t> ShockChain::find(std::span<const double> z) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (same_shock(nodes_[i], z, match_rel_tol_)) return i;
    }
    return std::nullopt;
}

std::size_t ShockChain::index_of(std::span<const double> z) const {
    if (auto found = find(z)) return *found;
    throw NumericalError("shock " + format_shock(z) + " is not a stored node");
}

std::size_t ShockChain::sample_next(std::size_t from, Rng& rng) const {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    double acc = 0.0;
    const auto& row = transitions_[from];
    for (const auto& t : row) {
        acc += t.probability;
        if (u < acc) return t.target;
    }
    return row.back().target;
}

}  // namespace stochdp
