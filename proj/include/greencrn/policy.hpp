#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "greencrn/action.hpp"
#include "greencrn/rng.hpp"

namespace greencrn {

// ---------------------------------------------------------------------------
// State featurization

/// Raw per-slot measurements of one SU.
struct SlotObservation {
    std::vector<double> snr;           // linear per-channel SNR at reference power
    std::vector<double> busy_fraction; // per-channel fraction of reports saying busy; empty if not sensed
    double queue_bits = 0.0;
    double battery_j = 0.0;
    double harvest_j = 0.0;
    std::vector<double> belief;        // per-channel busy belief
};

struct FeatureScales {
    double snr_ref = 1000.0;     // log1p(snr_ref) maps to 1
    double queue_bits = 10000.0;
    double battery_j = 1.0;
    double harvest_j = 1e-5;
};

/// Stateful featurizer for one SU: EMA-filtered SNR (factor 0.9), a window of
/// the last W sensing outcomes, normalized queue, battery and harvest rate, and
/// the belief vector.
class Featurizer {
public:
    static constexpr double kEmaFactor = 0.9;

    Featurizer(std::size_t channels, std::size_t window, FeatureScales scales);

    static std::size_t dimension(std::size_t channels, std::size_t window) { return channels * (window + 2) + 3; }
    std::size_t dimension() const { return dimension(channels_, window_); }

    /// Folds one slot of observations in and returns the state vector.
    const std::vector<double>& update(const SlotObservation& obs);
    const std::vector<double>& state() const { return state_; }

private:
    std::size_t channels_;
    std::size_t window_;
    FeatureScales scales_;
    std::vector<double> snr_ema_;
    std::vector<double> history_; // window_ rows of channels_, newest first
    double harvest_ema_ = 0.0;
    std::vector<double> state_;
};

// ---------------------------------------------------------------------------
// Policy network

/// Two-layer network d -> h (tanh) -> one categorical head per action field.
/// Weights are one flat vector laid out as W1 (h x d), b1 (h), W2 (H x h), b2 (H)
/// with H the total head width, in head order.
struct PolicyParams {
    std::size_t input_dim = 0;
    std::size_t hidden = 0;
    std::array<std::size_t, HeadCount> head_sizes{};
    std::vector<double> weights;

    static PolicyParams zeros(std::size_t input_dim, std::size_t hidden, const std::array<std::size_t, HeadCount>& heads);
    static PolicyParams random(std::size_t input_dim, std::size_t hidden, const std::array<std::size_t, HeadCount>& heads,
                               Rng& rng);

    std::size_t head_total() const;
    std::size_t head_offset(std::size_t head) const;
    std::size_t parameter_count() const { return hidden * input_dim + hidden + head_total() * hidden + head_total(); }

    std::size_t w1_offset() const { return 0; }
    std::size_t b1_offset() const { return hidden * input_dim; }
    std::size_t w2_offset() const { return b1_offset() + hidden; }
    std::size_t b2_offset() const { return w2_offset() + head_total() * hidden; }

    void validate() const;
};

using HeadMask = std::array<bool, HeadCount>;
inline constexpr HeadMask kAllHeads{true, true, true, true, true};

struct PolicyOutput {
    std::vector<double> hidden;
    std::array<std::vector<double>, HeadCount> probs;
};

/// Softmax distributions for every head in `mask`; masked-out heads stay empty.
/// Throws std::invalid_argument on a state dimension mismatch.
PolicyOutput policy_forward(const PolicyParams& params, std::span<const double> state, const HeadMask& mask = kAllHeads);

/// Inverse-CDF sample per active head; inactive heads stay at index 0.
ActionIndex sample_action(const PolicyOutput& out, Rng& rng, const HeadMask& mask = kAllHeads);

/// Most probable entry per active head (lowest index on ties).
ActionIndex greedy_action(const PolicyOutput& out, const HeadMask& mask = kAllHeads);

/// sum over active heads of log pi(a_h | s).
double log_prob(const PolicyParams& params, std::span<const double> state, const ActionIndex& action,
                const HeadMask& mask = kAllHeads);

/// Adds scale * grad_theta log pi(a | s) into `grad` (same layout as weights).
void accumulate_log_prob_gradient(const PolicyParams& params, std::span<const double> state,
                                  const ActionIndex& action, const HeadMask& mask, double scale,
                                  std::span<double> grad);

// ---------------------------------------------------------------------------
// Reward

struct RewardWeights {
    double alpha = 1.0;
    double beta = 0.0;
    double gamma = 1.0;
    double delta = 1.0;
    double lambda = 0.0;
    double mu = 0.0;

    void validate() const;
};

/// Per-slot terms of the reward, already normalized.
struct RewardTerms {
    double ee = 0.0;
    double util = 0.0;
    double interference = 0.0;
    double latency = 0.0;
};

/// alpha * ee + beta * util - gamma * interference - delta * latency.
double reward(const RewardTerms& terms, const RewardWeights& w);

// ---------------------------------------------------------------------------
// Training

struct Step {
    std::vector<double> state;
    ActionIndex action{};
    double reward = 0.0;
};

using Trajectory = std::vector<Step>;

struct UpdateOptions {
    double lr = 1e-3;
    double discount = 0.99;
    HeadMask mask = kAllHeads;
};

/// Discounted reward-to-go of every step.
std::vector<double> rewards_to_go(const Trajectory& traj, double discount);

/// One REINFORCE ascent step over a batch of trajectories: reward-to-go returns
/// centred on their batch mean, gradient summed along each trajectory and averaged over
/// trajectories. Returns new parameters; throws std::runtime_error on a non-finite gradient.
PolicyParams update_policy(const PolicyParams& params, std::span<const Trajectory> batch, const UpdateOptions& opts);

PolicyParams update_policy(const PolicyParams& params, const Trajectory& trajectory, double lr, double discount = 0.99);

/// Largest relative error between the analytic grad log pi(a|s) and central
/// finite differences with step eps. Relative error is |a - n| / max(|a|, |n|, 1e-6).
double gradient_check(const PolicyParams& params, std::span<const double> state, const ActionIndex& action,
                      double eps, const HeadMask& mask = kAllHeads);

// ---------------------------------------------------------------------------
// Checkpoints

/// "GCRN1", u32 d, u32 h, 5 x u32 head sizes, then weights as f64, all little-endian.
void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params);
PolicyParams load_checkpoint(const std::filesystem::path& path);

} // namespace greencrn
