#pragma once

#include <memory>
#include <vector>

#include "oracles.hpp"
#include "stochdp/bellman.hpp"
#include "stochdp/growth_model.hpp"
#include "stochdp/lucas_model.hpp"

namespace toys {

// One-capital growth toy: A = 1, alpha = 0.3, sigma = 0.5, delta_k = 0.1, delta_h = 0,
// w in {1, 1.2} with equal weights, beta = 0.72, h fixed at 1, 50 log-spaced capital nodes
// on [0.05, 40] and 8 shock nodes that all move to {1, 1.2}.
stochdp::GrowthParams growth_params();
stochdp::GrowthSetup growth_setup(stochdp::ActionMode mode = stochdp::ActionMode::grid, std::size_t k_nodes = 50);
std::vector<double> growth_z_nodes();

// The same model described for the oracle, with P written out by hand.
oracle::GrowthInput growth_oracle_input(const stochdp::GrowthSetup& setup);

// Library values re-laid out in the oracle's [iz * nk + ik] order, with shocks matched by value.
std::vector<double> growth_values_in_oracle_order(const stochdp::ValueFunction& v, const std::vector<double>& z_nodes);

// Three-dimensional state grid (3 x 3 x 3 on [0, 2]^3), finite actions (grid nodes with
// 1'y <= 1'x + z), reward log(1 + 1'x + z - 1'y), three shock nodes.
std::shared_ptr<const stochdp::BellmanOperator> cube_operator(unsigned threads = 1);
std::vector<stochdp::CompactSet> cube_monitored();

// One-asset Lucas economy with i.i.d. two-atom dividends {0.8, 1.3}.
stochdp::LucasParams lucas_iid(double sigma = 0.5, double beta = 0.9);
stochdp::LucasSetup lucas_setup(std::vector<stochdp::Shock> seeds, std::size_t holdings_nodes = 11);

// Transition matrix of a chain written as dense rows.
oracle::Matrix dense(const stochdp::ShockChain& chain);

}  // namespace toys
