#include "greencrn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace greencrn {

void TraditionalConfig::validate() const
{
    if (sense_period < 1) {
        throw std::invalid_argument("traditional sensing period must be at least 1");
    }
    if (!(fixed_p_tx >= 0.1 && fixed_p_tx <= 2.0)) {
        throw std::invalid_argument("baseline.fixed_p_tx must lie in [0.1, 2] W");
    }
}

void HybridConfig::validate() const
{
    if (cooperating_k < 1) {
        throw std::invalid_argument("hybrid.k must be at least 1");
    }
    if (power_ladder.empty()) {
        throw std::invalid_argument("hybrid power ladder is empty");
    }
    for (double p : power_ladder) {
        if (!(p >= 0.1 && p <= 2.0)) {
            throw std::invalid_argument("hybrid power ladder rungs must lie in [0.1, 2] W");
        }
    }
    if (!(backlog_ref_bits > 0.0)) {
        throw std::invalid_argument("hybrid reference backlog must be positive");
    }
}

Action traditional_decide(const TraditionalConfig& cfg, const std::vector<bool>& detected_busy, const ActionGrid& grid,
                          Rng& rng)
{
    Action a;
    a.sense_period = cfg.sense_period;
    a.p_tx = cfg.fixed_p_tx;
    a.slice = 1.0;
    a.codeword = 0;
    std::vector<std::size_t> idle;
    for (std::size_t c = 0; c < detected_busy.size() && c < grid.channels; ++c) {
        if (!detected_busy[c]) {
            idle.push_back(c);
        }
    }
    if (idle.empty()) {
        a.transmit = false;
        return a;
    }
    a.channel = cfg.channel_rule == ChannelRule::FirstIdle ? idle.front() : idle[rng.below(idle.size())];
    a.transmit = true;
    return a;
}

double hybrid_power(const HybridConfig& cfg, double queue_bits)
{
    const auto rungs = cfg.power_ladder.size();
    const double pos = std::max(0.0, queue_bits) / cfg.backlog_ref_bits * static_cast<double>(rungs);
    const auto rung = std::min(rungs - 1, static_cast<std::size_t>(pos));
    return cfg.power_ladder[rung];
}

Action hybrid_decide(const HybridConfig& cfg, const std::vector<bool>& fused_busy, const std::vector<double>& snr_est,
                     double queue_bits, const ActionGrid& grid)
{
    if (snr_est.size() != fused_busy.size()) {
        throw std::invalid_argument("hybrid needs one SNR estimate per channel");
    }
    Action a;
    a.sense_period = 1;
    a.p_tx = hybrid_power(cfg, queue_bits);
    a.slice = grid.slices.front();
    a.codeword = 0;
    bool found = false;
    for (std::size_t c = 0; c < fused_busy.size() && c < grid.channels; ++c) {
        if (!fused_busy[c] && (!found || snr_est[c] > snr_est[a.channel])) {
            a.channel = c;
            found = true;
        }
    }
    a.transmit = found;
    return a;
}

double hybrid_slice(double own_backlog_bits, double channel_backlog_bits)
{
    if (!(channel_backlog_bits > 0.0)) {
        return 0.25;
    }
    const double share = std::clamp(own_backlog_bits / channel_backlog_bits, 0.0, 1.0);
    return std::max(0.25, std::floor(4.0 * share) / 4.0);
}

} // namespace greencrn
