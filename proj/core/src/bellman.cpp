#include "stochdp/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "stochdp/error.hpp"
#include "stochdp/io.hpp"

namespace stochdp {

namespace {

std::string node_label(const StateGrid& grid, const ShockChain& chain, std::size_t ix, std::size_t iz) {
    return "x = " + format_shock(grid.point(ix)) + ", z = " + format_shock(chain.node(iz));
}

}  // namespace

PolicyFunction::PolicyFunction(GridPtr grid, ChainPtr chain, std::size_t action_dim)
    : grid_(std::move(grid)), chain_(std::move(chain)), action_dim_(action_dim) {
    actions_.assign(grid_->size() * chain_->size() * action_dim_, 0.0);
}

std::span<double> PolicyFunction::action(std::size_t ix, std::size_t iz) {
    return std::span<double>(actions_).subspan((iz * grid_->size() + ix) * action_dim_, action_dim_);
}

std::span<const double> PolicyFunction::action(std::size_t ix, std::size_t iz) const {
    return std::span<const double>(actions_).subspan((iz * grid_->size() + ix) * action_dim_, action_dim_);
}

std::vector<double> PolicyFunction::evaluate(std::span<const double> x, std::size_t iz) const {
    const auto stencil = grid_->stencil(x);
    std::vector<double> y(action_dim_, 0.0);
    for (const auto& e : stencil) {
        const auto a = action(e.node, iz);
        for (std::size_t j = 0; j < action_dim_; ++j) y[j] += e.weight * a[j];
    }
    return y;
}

double PolicyFunction::max_abs_difference(const PolicyFunction& other) const {
    if (actions_.size() != other.actions_.size()) throw ConfigError("policies live on different grids");
    double m = 0.0;
    for (std::size_t i = 0; i < actions_.size(); ++i) m = std::max(m, std::abs(actions_[i] - other.actions_[i]));
    return m;
}

void PolicyFunction::write_csv(std::ostream& out) const {
    const std::size_t l = grid_->dim();
    const std::size_t k = chain_->dim();
    for (std::size_t i = 0; i < l; ++i) out << 'x' << i + 1 << ',';
    for (std::size_t i = 0; i < k; ++i) out << 'z' << i + 1 << ',';
    for (std::size_t i = 0; i < action_dim_; ++i) out << 'y' << i + 1 << (i + 1 < action_dim_ ? "," : "\n");
    std::vector<double> row(l + k + action_dim_);
    for (std::size_t ix = 0; ix < grid_->size(); ++ix) {
        grid_->point(ix, std::span<double>(row).first(l));
        for (std::size_t iz = 0; iz < chain_->size(); ++iz) {
            const auto& z = chain_->node(iz);
            std::copy(z.begin(), z.end(), row.begin() + static_cast<std::ptrdiff_t>(l));
            const auto a = action(ix, iz);
            std::copy(a.begin(), a.end(), row.begin() + static_cast<std::ptrdiff_t>(l + k));
            write_csv_row(out, row);
        }
    }
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(threads, n);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w * n / workers; i < (w + 1) * n / workers; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

BellmanOperator::BellmanOperator(ModelSpec model) : model_(std::move(model)) {
    if (!model_.reward || !model_.feasible) throw ConfigError("model needs a reward and a feasible correspondence");
    if (!model_.grid || !model_.shocks || model_.shocks->size() == 0) {
        throw ConfigError("model needs a state grid and a nonempty shock chain");
    }
    if (!(model_.beta >= 0.0 && model_.beta < 1.0)) {
        throw ConditionError("discount factor must lie in [0, 1), got " + std::to_string(model_.beta));
    }
    const StateGrid& grid = *model_.grid;
    const std::size_t d = grid.dim();
    gamma_.resize(nx() * nz());
    cover_lo_.resize(nx() * nz() * d);
    cover_hi_.resize(nx() * nz() * d);

    std::vector<double> x(d);
    for (std::size_t iz = 0; iz < nz(); ++iz) {
        const auto& z = model_.shocks->node(iz);
        for (std::size_t ix = 0; ix < nx(); ++ix) {
            grid.point(ix, x);
            ActionSet g = feasible_set(x, z);
            const std::size_t node = iz * nx() + ix;
            cover_range(grid, g.lower, g.upper, std::span<std::size_t>(cover_lo_).subspan(node * d, d),
                        std::span<std::size_t>(cover_hi_).subspan(node * d, d));
            gamma_[node] = std::move(g);
        }
    }
}

ActionSet BellmanOperator::feasible_set(std::span<const double> x, std::span<const double> z) const {
    const StateGrid& grid = *model_.grid;
    const std::size_t d = grid.dim();
    ActionSet g = model_.feasible(x, z);
    auto empty = [&](const std::string& why) {
        return NumericalError("empty feasible set at x = " + format_shock(x) + ", z = " + format_shock(z) + ": " + why);
    };
    if (g.finite()) {
        std::vector<std::vector<double>> kept;
        for (auto& c : g.candidates) {
            if (c.size() != d) throw ConfigError("feasible action has the wrong dimension");
            if (grid.contains(c)) kept.push_back(grid.clamp_to_hull(c));
        }
        if (kept.empty()) throw empty("no listed action lies in the grid hull");
        std::sort(kept.begin(), kept.end());
        kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
        return ActionSet::from_candidates(std::move(kept));
    }
    if (g.lower.size() != d || g.upper.size() != d) throw ConfigError("action box has the wrong dimension");
    for (std::size_t i = 0; i < d; ++i) {
        g.lower[i] = std::max(g.lower[i], grid.lower(i));
        g.upper[i] = std::min(g.upper[i], grid.upper(i));
        if (g.lower[i] > g.upper[i]) {
            const double tol = 1e-12 * std::max({1.0, std::abs(grid.lower(i)), std::abs(grid.upper(i))});
            if (g.lower[i] > g.upper[i] + tol) throw empty("box misses the grid hull");
            g.upper[i] = g.lower[i];
        }
    }
    if (g.budget) {
        if (g.budget->coeff.size() != d) throw ConfigError("budget has the wrong dimension");
        for (double c : g.budget->coeff) {
            if (!(c >= 0.0)) throw ConfigError("budget coefficients must be nonnegative");
        }
        const double excess = budget_excess(g, g.lower);
        if (excess > 1e-12 * std::max(1.0, std::abs(g.budget->bound))) {
            throw empty("budget excludes the whole box (excess " + format_double(excess) + ")");
        }
        if (excess > 0.0) g.budget->bound += excess;
        for (std::size_t j = 0; j < d; ++j) g.upper[j] = std::max(g.lower[j], coordinate_upper(g, g.lower, j));
    }
    return g;
}

ValueFunction BellmanOperator::zero() const { return ValueFunction(model_.grid, model_.shocks, 0.0); }

ValueFunction BellmanOperator::markov(const ValueFunction& f) const {
    if (f.nx() != nx() || f.nz() != nz()) throw ConfigError("value function does not match the model grids");
    ValueFunction out(model_.grid, model_.shocks, 0.0);
    for (std::size_t iz = 0; iz < nz(); ++iz) {
        auto target = out.slice(iz);
        for (const auto& t : model_.shocks->transitions(iz)) {
            const auto source = f.slice(t.target);
            for (std::size_t ix = 0; ix < nx(); ++ix) target[ix] += t.probability * source[ix];
        }
    }
    return out;
}

double BellmanOperator::objective(const ValueFunction& Mf, std::size_t ix, std::size_t iz,
                                  std::span<const double> y) const {
    const auto x = model_.grid->point(ix);
    const double u = model_.reward(x, y, model_.shocks->node(iz));
    if (model_.beta == 0.0) return u;
    return u + model_.beta * model_.grid->interpolate(Mf.slice(iz), y);
}

std::pair<ValueFunction, PolicyFunction> BellmanOperator::apply_with_policy(const ValueFunction& f) const {
    if (!f.all_finite()) throw NumericalError("Bellman operator applied to a non-finite value function");
    const ValueFunction Mf = markov(f);
    ValueFunction out(model_.grid, model_.shocks, 0.0);
    PolicyFunction policy(model_.grid, model_.shocks, action_dim());
    const StateGrid& grid = *model_.grid;
    const double beta = model_.beta;

    parallel_for(nx() * nz(), model_.threads, [&](std::size_t node) {
        const std::size_t iz = node / nx();
        const std::size_t ix = node % nx();
        const auto x = grid.point(ix);
        const auto& z = model_.shocks->node(iz);
        const auto slice = Mf.slice(iz);
        auto objective = [&](std::span<const double> y) {
            const double u = model_.reward(x, y, z);
            return beta == 0.0 ? u : u + beta * grid.interpolate(slice, y);
        };
        MaxResult best = maximize(objective, gamma_[node], model_.maximizer);
        if (!std::isfinite(best.value)) {
            throw NumericalError("non-finite Bellman value at " + node_label(grid, *model_.shocks, ix, iz));
        }
        out.at(ix, iz) = best.value;
        auto a = policy.action(ix, iz);
        std::copy(best.argmax.begin(), best.argmax.end(), a.begin());
    });
    return {std::move(out), std::move(policy)};
}

ValueFunction BellmanOperator::apply(const ValueFunction& f) const { return apply_with_policy(f).first; }

PolicyFunction BellmanOperator::policy(const ValueFunction& f) const { return apply_with_policy(f).second; }

ValueFunction BellmanOperator::psi() const { return apply(zero()); }

double BellmanOperator::gamma_cover_max(std::span<const double> node_values, std::size_t ix, std::size_t iz) const {
    const StateGrid& grid = *model_.grid;
    const std::size_t d = grid.dim();
    const std::size_t node = iz * nx() + ix;
    const std::size_t* lo = &cover_lo_[node * d];
    const std::size_t* hi = &cover_hi_[node * d];
    if (d == 1) {
        double m = 0.0;
        for (std::size_t j = lo[0]; j <= hi[0]; ++j) m = std::max(m, node_values[j]);
        return m;
    }
    std::array<std::size_t, StateGrid::max_dim> idx{};
    for (std::size_t i = 0; i < d; ++i) idx[i] = lo[i];
    double m = 0.0;
    while (true) {
        m = std::max(m, node_values[grid.flat_index(std::span<const std::size_t>(idx.data(), d))]);
        std::size_t i = d;
        bool done = true;
        while (i > 0) {
            --i;
            if (idx[i] < hi[i]) {
                ++idx[i];
                done = false;
                break;
            }
            idx[i] = lo[i];
        }
        if (done) return m;
    }
}

namespace {

struct ResolvedFamily {
    std::vector<ResolvedSet> sets;
};

std::shared_ptr<const ResolvedFamily> resolve_all(const std::vector<CompactSet>& Ks, const StateGrid& grid) {
    auto family = std::make_shared<ResolvedFamily>();
    for (const auto& K : Ks) family->sets.push_back(resolve(K, grid));
    return family;
}

}  // namespace

SeminormTable BellmanOperator::family_seminorms(const ValueFunction& d, const std::vector<CompactSet>& Ks) const {
    const auto resolved = resolve_all(Ks, *model_.grid);
    if (d.nx() != nx() || d.nz() != nz()) throw ConfigError("table does not match the model grids");
    const std::size_t nK = Ks.size();
    SeminormTable out(family_rows(nK), nz());
    std::vector<double> abs_values(d.values().begin(), d.values().end());
    for (double& v : abs_values) v = std::abs(v);
    auto slice = [&](std::size_t iz) { return std::span<const double>(abs_values).subspan(iz * nx(), nx()); };

    for (std::size_t iz = 0; iz < nz(); ++iz) {
        const auto& row = model_.shocks->transitions(iz);
        for (std::size_t ix = 0; ix < nx(); ++ix) {
            double total = 0.0;
            for (const auto& t : row) total += t.probability * gamma_cover_max(slice(t.target), ix, iz);
            out(ix, iz) = total;
        }
    }
    for (std::size_t k = 0; k < nK; ++k) {
        std::vector<double> slice_max(nz());
        for (std::size_t iz = 0; iz < nz(); ++iz) slice_max[iz] = max_abs_over(resolved->sets[k], slice(iz));
        for (std::size_t iz = 0; iz < nz(); ++iz) {
            out(nx() + k, iz) = model_.shocks->expectation(iz, [&](std::size_t next) { return slice_max[next]; });
        }
    }
    for (std::size_t iz = 0; iz < nz(); ++iz) {
        const auto s = slice(iz);
        out(nx() + nK, iz) = s.empty() ? 0.0 : *std::max_element(s.begin(), s.end());
    }
    return out;
}

SeminormTable BellmanOperator::distances(const ValueFunction& f, const ValueFunction& g,
                                         const std::vector<CompactSet>& Ks) const {
    return family_seminorms(f - g, Ks);
}

SeminormTable BellmanOperator::cop_apply(const SeminormTable& p, const std::vector<CompactSet>& Ks) const {
    return cop(Ks)(p);
}

CopOperator BellmanOperator::cop(const std::vector<CompactSet>& Ks) const {
    auto resolved = resolve_all(Ks, *model_.grid);
    const std::size_t nK = Ks.size();
    return [this, resolved, nK](const SeminormTable& p) {
        if (p.rows() != family_rows(nK) || p.cols() != nz()) {
            throw NumericalError("contraction operator parameter: table shape does not match the family (" +
                                 std::to_string(family_rows(nK)) + " x " + std::to_string(nz()) + ")");
        }
        const double beta = model_.beta;
        std::vector<double> columns(nx() * nz());
        for (std::size_t iz = 0; iz < nz(); ++iz) {
            for (std::size_t ix = 0; ix < nx(); ++ix) columns[iz * nx() + ix] = p(ix, iz);
        }
        auto column = [&](std::size_t iz) { return std::span<const double>(columns).subspan(iz * nx(), nx()); };

        SeminormTable out(p.rows(), p.cols());
        for (std::size_t iz = 0; iz < nz(); ++iz) {
            const auto& row = model_.shocks->transitions(iz);
            for (std::size_t ix = 0; ix < nx(); ++ix) {
                double total = 0.0;
                for (const auto& t : row) total += t.probability * gamma_cover_max(column(t.target), ix, iz);
                out(ix, iz) = beta * total;
            }
        }
        for (std::size_t k = 0; k < nK; ++k) {
            std::vector<double> cover_max(nz(), 0.0);
            for (std::size_t iz = 0; iz < nz(); ++iz) {
                const auto c = column(iz);
                for (std::size_t node : resolved->sets[k].cover) cover_max[iz] = std::max(cover_max[iz], c[node]);
            }
            for (std::size_t iz = 0; iz < nz(); ++iz) {
                out(nx() + k, iz) =
                    beta * model_.shocks->expectation(iz, [&](std::size_t next) { return cover_max[next]; });
            }
        }
        for (std::size_t iz = 0; iz < nz(); ++iz) {
            const auto c = column(iz);
            out(nx() + nK, iz) = beta * (c.empty() ? 0.0 : *std::max_element(c.begin(), c.end()));
        }
        return out;
    };
}

IndexLabeler BellmanOperator::family_labeler(const std::vector<CompactSet>& Ks) const {
    std::vector<std::string> names;
    for (std::size_t k = 0; k < Ks.size(); ++k) {
        names.push_back(Ks[k].label().empty() ? "K" + std::to_string(k + 1) : Ks[k].label());
    }
    return [this, names](std::size_t row, std::size_t col) {
        const std::string z = "z = " + format_shock(model_.shocks->node(col));
        if (row < nx()) return "Gamma(x = " + format_shock(model_.grid->point(row)) + "), " + z;
        if (row < nx() + names.size()) return "K = " + names[row - nx()] + ", " + z;
        return "sup over grid nodes, " + z;
    };
}

PseudometricFamily<ValueFunction> BellmanOperator::metric_family(const std::vector<CompactSet>& Ks) const {
    PseudometricFamily<ValueFunction> family;
    family.rows = family_rows(Ks.size());
    family.cols = nz();
    family.distances = [this, Ks](const ValueFunction& f, const ValueFunction& g) { return distances(f, g, Ks); };
    family.label = family_labeler(Ks);
    return family;
}

ValueFunction markov_operator(const ValueFunction& f) {
    ValueFunction out(f.grid(), f.chain(), 0.0);
    for (std::size_t iz = 0; iz < f.nz(); ++iz) {
        auto target = out.slice(iz);
        for (const auto& t : f.chain()->transitions(iz)) {
            const auto source = f.slice(t.target);
            for (std::size_t ix = 0; ix < f.nx(); ++ix) target[ix] += t.probability * source[ix];
        }
    }
    return out;
}

ValueFunction apply_bellman(const ValueFunction& f, const BellmanOperator& T) { return T.apply(f); }

ValueFunction psi(const BellmanOperator& T) { return T.psi(); }

SeminormTable cop_apply(const SeminormTable& p, const BellmanOperator& T, const std::vector<CompactSet>& Ks) {
    return T.cop_apply(p, Ks);
}

PolicyFunction extract_policy(const ValueFunction& f, const BellmanOperator& T) { return T.policy(f); }

SolveResult solve_bellman(const BellmanOperator& T, const SolveOptions& options) {
    std::vector<CompactSet> Ks = options.monitored;
    if (Ks.empty()) Ks.push_back(CompactSet::hull(*T.grid()));

    FixedPointOptions fp;
    fp.tolerance = options.tolerance;
    fp.max_iter = options.max_iter;
    if (options.check_bound || options.certified_stop) fp.cop = T.cop(Ks);
    fp.radius = options.radius;
    fp.certified_stop = options.certified_stop;
    fp.on_iteration = options.on_iteration;

    const auto family = T.metric_family(Ks);
    ValueFunction start = options.initial ? *options.initial : T.zero();
    auto [value, report] =
        iterate_fixed_point([&T](const ValueFunction& f) { return T.apply(f); }, family, std::move(start), fp);
    PolicyFunction policy = T.policy(value);
    return {std::move(value), std::move(policy), std::move(report)};
}

SimulationResult simulate_policy_value(const BellmanOperator& T, const PolicyFunction& policy,
                                       std::span<const double> x0, std::size_t iz0,
                                       const SimulationOptions& options) {
    if (options.paths == 0) throw ConfigError("simulation needs at least one path");
    if (iz0 >= T.nz()) throw ConfigError("initial shock node out of range");
    const StateGrid& grid = *T.grid();
    const ShockChain& chain = *T.shocks();
    const auto& reward = T.model().reward;
    const double beta = T.beta();
    Rng rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    auto draw_node = [&](std::span<const double> y) {
        const auto stencil = grid.stencil(y);
        const double u = unit(rng);
        double acc = 0.0;
        for (const auto& e : stencil) {
            acc += e.weight;
            if (u < acc) return e.node;
        }
        return stencil.back().node;
    };

    std::vector<double> totals(options.paths);
    std::vector<double> x(grid.dim());
    for (std::size_t path = 0; path < options.paths; ++path) {
        double total = 0.0;
        double discount = 1.0;
        std::size_t iz = iz0;
        if (options.mode == SimulationMode::lottery) {
            std::size_t ix = draw_node(x0);
            for (std::size_t t = 0; t <= options.horizon; ++t) {
                grid.point(ix, x);
                const auto y = policy.action(ix, iz);
                total += discount * reward(x, y, chain.node(iz));
                if (t == options.horizon) break;
                ix = draw_node(y);
                iz = chain.sample_next(iz, rng);
                discount *= beta;
            }
        } else {
            x.assign(x0.begin(), x0.end());
            for (std::size_t t = 0; t <= options.horizon; ++t) {
                if (!grid.contains(x)) {
                    throw NumericalError("simulated path " + std::to_string(path) + " left the grid hull at step " +
                                         std::to_string(t) + ", state " + format_shock(x));
                }
                const auto y = policy.evaluate(x, iz);
                total += discount * reward(x, y, chain.node(iz));
                if (t == options.horizon) break;
                x = y;
                iz = chain.sample_next(iz, rng);
                discount *= beta;
            }
        }
        if (!std::isfinite(total)) throw NumericalError("non-finite simulated return on path " + std::to_string(path));
        totals[path] = total;
    }
    const auto [lo, hi] = std::minmax_element(totals.begin(), totals.end());
    if (*lo == *hi) return {*lo, 0.0, std::pow(beta, static_cast<double>(options.horizon + 1))};
    double mean = 0.0;
    for (double v : totals) mean += v;
    mean /= static_cast<double>(options.paths);
    double ss = 0.0;
    for (double v : totals) ss += (v - mean) * (v - mean);
    const double n = static_cast<double>(options.paths);
    const double se = options.paths > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return {mean, se, std::pow(beta, static_cast<double>(options.horizon + 1))};
}

}  // namespace stochdp
