#pragma once

#include <cstddef>
#include <vector>

#include "greencrn/action.hpp"
#include "greencrn/rng.hpp"
#include "greencrn/sensing.hpp"

namespace greencrn {

enum class ChannelRule { RandomIdle, FirstIdle };

/// Energy detection every slot, fixed power, full channel, surface left at codeword 0.
struct TraditionalConfig {
    int sense_period = 1;
    double fixed_p_tx = 1.0;
    double threshold = 0.0;
    ChannelRule channel_rule = ChannelRule::RandomIdle;

    void validate() const;
};

/// Cooperative detection over k reports, greedy max-SNR channel, backlog-driven
/// power ladder and backlog-proportional slice.
struct HybridConfig {
    FusionRule fusion_rule = FusionRule::Or;
    std::size_t cooperating_k = 3;
    double threshold = 0.0;
    std::vector<double> power_ladder{0.5, 1.0, 2.0};
    double backlog_ref_bits = 3000.0; // ladder rungs split [0, ref) into terciles

    void validate() const;
};

/// Picks among channels whose local detection reads idle; defers if none.
/// RANDOM_IDLE draws one index from `rng`, FIRST_IDLE draws nothing.
Action traditional_decide(const TraditionalConfig& cfg, const std::vector<bool>& detected_busy, const ActionGrid& grid,
                          Rng& rng);

/// Picks the fused-idle channel with the highest SNR estimate (lowest index on
/// ties); defers if none. The slice is provisional until hybrid_slice runs over
/// the co-channel group.
Action hybrid_decide(const HybridConfig& cfg, const std::vector<bool>& fused_busy, const std::vector<double>& snr_est,
                     double queue_bits, const ActionGrid& grid);

/// Ladder rung for a backlog: terciles of the reference backlog.
double hybrid_power(const HybridConfig& cfg, double queue_bits);

/// Backlog share among co-channel SUs floored to quarter slices, at least 1/4.
double hybrid_slice(double own_backlog_bits, double channel_backlog_bits);

} // namespace greencrn
