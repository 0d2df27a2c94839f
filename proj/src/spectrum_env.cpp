#include "greencrn/spectrum_env.hpp"

#include <stdexcept>
#include <string>

namespace greencrn {

namespace {

void check_probability(double p, const char* what)
{
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument(std::string(what) + " must lie in [0, 1], got " + std::to_string(p));
    }
}

} // namespace

void ChannelSet::validate() const
{
    if (n_channels < 1) {
        throw std::invalid_argument("channel set needs at least one channel");
    }
    if (!(bandwidth_total_hz > 0.0)) {
        throw std::invalid_argument("total bandwidth must be positive");
    }
}

void OccupancyState::validate() const
{
    if (p_idle_to_busy.size() != busy.size() || p_busy_to_idle.size() != busy.size()) {
        throw std::invalid_argument("occupancy vectors must all have one entry per channel");
    }
    for (std::size_t c = 0; c < busy.size(); ++c) {
        check_probability(p_idle_to_busy[c], "p_idle_to_busy");
        check_probability(p_busy_to_idle[c], "p_busy_to_idle");
    }
}

OccupancyState step_occupancy(const OccupancyState& state, Rng& rng)
{
    state.validate();
    OccupancyState next = state;
    for (std::size_t c = 0; c < state.size(); ++c) {
        const double u = rng.uniform();
        if (state.busy[c]) {
            next.busy[c] = u < state.p_busy_to_idle[c] ? 0 : 1;
        } else {
            next.busy[c] = u < state.p_idle_to_busy[c] ? 1 : 0;
        }
    }
    return next;
}

double stationary_busy_prob(double p01, double p10)
{
    check_probability(p01, "p01");
    check_probability(p10, "p10");
    if (p01 + p10 <= 0.0) {
        throw std::invalid_argument("stationary distribution undefined when p01 = p10 = 0");
    }
    return p01 / (p01 + p10);
}

OccupancyState make_stationary_occupancy(std::vector<double> p01, std::vector<double> p10, Rng& rng)
{
    OccupancyState state;
    state.busy.assign(p01.size(), 0);
    state.p_idle_to_busy = std::move(p01);
    state.p_busy_to_idle = std::move(p10);
    state.validate();
    for (std::size_t c = 0; c < state.size(); ++c) {
        const double u = rng.uniform();
        const double a = state.p_idle_to_busy[c];
        const double b = state.p_busy_to_idle[c];
        const double pi = (a + b > 0.0) ? a / (a + b) : 0.0;
        state.busy[c] = u < pi ? 1 : 0;
    }
    return state;
}

} // namespace greencrn
