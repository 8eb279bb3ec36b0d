#include "stochdp/bound_ledger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stochdp/error.hpp"
#include "stochdp/io.hpp"

namespace stochdp {

namespace {

std::string at(std::span<const double> x, std::span<const double> z) {
    return "x = " + format_shock(x) + ", z = " + format_shock(z);
}

}  // namespace

BoundLedger audit_drift_bound(const BoundFn& l0, const BellmanOperator& T, double alpha,
                               const std::vector<CompactSet>& monitored, const DriftOptions& options) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("drift constant alpha must be finite and >= 0");
    const double ab = alpha * T.beta();
    if (!(ab < 1.0)) {
        throw ConditionError("drift discount product alpha * beta = " + format_double(ab) + " is not below 1");
    }

    BoundLedger ledger;
    ledger.alpha = alpha;
    ledger.beta = T.beta();
    ledger.monitored = monitored;
    ledger.l0 = ValueFunction::tabulate(T.grid(), T.shocks(), l0);
    for (std::size_t i = 0; i < ledger.l0.values().size(); ++i) {
        const double v = ledger.l0.values()[i];
        if (!std::isfinite(v) || v < 0.0) {
            const std::size_t ix = i % T.nx();
            const std::size_t iz = i / T.nx();
            throw NumericalError("l0 must be finite and nonnegative; fails at " +
                                 at(T.grid()->point(ix), T.shocks()->node(iz)));
        }
    }

    const ShockChain& chain = *T.shocks();
    const StateGrid audit = T.grid()->refined(std::max<std::size_t>(options.audit_factor, 1));
    ledger.audit_grid_size = audit.size();
    ledger.worst_slack = std::numeric_limits<double>::infinity();
    ledger.verified = true;

    auto check = [&](std::span<const double> x, std::size_t iz) {
        const auto& z = chain.node(iz);
        const ActionSet gamma = T.feasible_set(x, z);
        double lhs = 0.0;
        for (const auto& t : chain.transitions(iz)) {
            const auto& next = chain.node(t.target);
            const MaxResult best = maximize([&](std::span<const double> y) { return l0(y, next); }, gamma,
                                            options.maximizer);
            lhs += t.probability * best.value;
        }
        const double rhs = alpha * l0(x, z);
        const double slack = rhs - lhs;
        if (slack < ledger.worst_slack) {
            ledger.worst_slack = slack;
            ledger.worst_node = at(x, z);
        }
        if (slack < -options.rel_tol * std::max({1.0, std::abs(rhs), std::abs(lhs)})) ledger.verified = false;
        ++ledger.checked_nodes;
    };

    std::vector<double> x(T.grid()->dim());
    for (std::size_t iz = 0; iz < chain.size(); ++iz) {
        for (std::size_t ix = 0; ix < T.nx(); ++ix) {
            T.grid()->point(ix, x);
            check(x, iz);
        }
        for (std::size_t ix = 0; ix < audit.size(); ++ix) {
            audit.point(ix, x);
            check(x, iz);
        }
    }
    if (!ledger.verified) {
        ledger.failure = "drift inequality fails; worst slack " + format_double(ledger.worst_slack) + " at " +
                         ledger.worst_node;
    }

    const ValueFunction psi_table = T.psi();
    ledger.psi_slack = std::numeric_limits<double>::infinity();
    for (std::size_t iz = 0; iz < T.nz(); ++iz) {
        for (std::size_t ix = 0; ix < T.nx(); ++ix) {
            const double slack = ledger.l0.at(ix, iz) - std::abs(psi_table.at(ix, iz));
            if (slack < ledger.psi_slack) {
                ledger.psi_slack = slack;
                ledger.psi_worst_node = at(T.grid()->point(ix), chain.node(iz));
            }
        }
    }
    if (ledger.psi_slack < -options.rel_tol * std::max(1.0, psi_table.max_abs())) {
        ledger.verified = false;
        if (!ledger.failure.empty()) ledger.failure += "; ";
        ledger.failure += "l0 < |psi| by " + format_double(-ledger.psi_slack) + " at " + ledger.psi_worst_node;
    }

    ledger.r0 = T.family_seminorms(ledger.l0, monitored);
    ledger.R0 = (1.0 / (1.0 - ab)) * ledger.r0;
    if (!ledger.R0.all_finite()) throw NumericalError("R0 has non-finite entries");
    return ledger;
}

BoundLedger verify_drift_bound(const BoundFn& l0, const BellmanOperator& T, double alpha,
                                const std::vector<CompactSet>& monitored, const DriftOptions& options) {
    BoundLedger ledger = audit_drift_bound(l0, T, alpha, monitored, options);
    if (!ledger.verified) throw ConditionError("bound verification failed: " + ledger.failure);
    return ledger;
}

ValueFunction lt_term(const BoundLedger& ledger, std::size_t t) {
    const double factor = std::pow(ledger.alpha * ledger.beta, static_cast<double>(t));
    if (!std::isfinite(factor)) throw NumericalError("(alpha beta)^t is not finite for t = " + std::to_string(t));
    return factor * ledger.l0;
}

SeminormTable residual_certificate(const BoundLedger& ledger, const CopOperator& L, std::size_t t) {
    return cop_power(L, ledger.R0, t);
}

}  // namespace stochdp
