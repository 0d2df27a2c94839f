#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "greencrn/config.hpp"
#include "greencrn/policy.hpp"

namespace greencrn {

/// Freshly initialised network shaped for `cfg`.
PolicyParams initial_policy(const ScenarioConfig& cfg, std::uint64_t seed);

struct TrainResult {
    PolicyParams params;
    std::vector<double> returns; // mean per-step reward of each episode, before its update
};

using EpisodeCallback = std::function<void(std::size_t episode, double mean_return)>;

/// Training loop: each episode rolls out `cfg.train_slots` slots with a
/// sampled policy, then applies one REINFORCE step over every SU's trajectory.
TrainResult train_policy(const ScenarioConfig& cfg, PolicyParams init, std::size_t episodes, std::uint64_t seed,
                         const EpisodeCallback& on_episode = {});

/// Mean per-step reward of `params` (sampled policy) over `episodes` rollouts.
double evaluate_return(const ScenarioConfig& cfg, const PolicyParams& params, std::uint64_t seed,
                       std::size_t episodes);

struct TransferResult {
    PolicyParams params;
    std::vector<double> returns;
    double threshold = 0.0;
    std::size_t episodes_to_threshold = 0; // budget + 1 when never reached
};

/// First 1-based episode whose return reaches `threshold`, or returns.size() + 1.
std::size_t episodes_to_threshold(const std::vector<double>& returns, double threshold);

/// Fine-tunes `source` on `target` for `budget` episodes. Throws
/// std::invalid_argument when the target's state or head shape differs.
TransferResult transfer_finetune(const PolicyParams& source, const ScenarioConfig& target, std::size_t budget,
                                 std::uint64_t seed, double threshold);

} // namespace greencrn
