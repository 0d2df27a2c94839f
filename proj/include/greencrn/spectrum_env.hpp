#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "greencrn/rng.hpp"

namespace greencrn {

struct ChannelSet {
    std::size_t n_channels = 20;
    double bandwidth_total_hz = 20e6;

    double channel_bandwidth_hz() const { return bandwidth_total_hz / static_cast<double>(n_channels); }
    void validate() const;
};

/// Ground-truth primary-user activity: one independent two-state Markov chain
/// per licensed channel.
struct OccupancyState {
    std::vector<std::uint8_t> busy;
    std::vector<double> p_idle_to_busy;
    std::vector<double> p_busy_to_idle;

    std::size_t size() const { return busy.size(); }
    void validate() const;
};

/// One slot of evolution. Draws exactly one uniform per channel, in channel order.
OccupancyState step_occupancy(const OccupancyState& state, Rng& rng);

/// Long-run busy probability p01 / (p01 + p10). Throws std::invalid_argument
/// when both transition probabilities are zero.
double stationary_busy_prob(double p01, double p10);

/// Builds an occupancy process whose initial busy vector is drawn from each
/// channel's stationary distribution. A chain with p01 = p10 = 0 starts idle.
OccupancyState make_stationary_occupancy(std::vector<double> p01, std::vector<double> p10, Rng& rng);

} // namespace greencrn
