#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "greencrn/rng.hpp"

namespace greencrn {

struct SensingSample {
    std::vector<double> values;
    bool true_busy = false;
};

struct RocPoint {
    double p_fa = 0.0;
    double p_d = 0.0;
};

enum class FusionRule { Or, Majority };

/// T = sum(values^2) / noise_var.
double energy_statistic(const SensingSample& sample, double noise_var);

/// Strict comparison: a statistic equal to the threshold reads as idle.
inline bool detect(double t, double threshold) { return t > threshold; }

/// Standard normal upper tail.
double q_function(double x);

/// Inverse of q_function on (0, 1).
double q_inverse(double p);

/// Gaussian approximation of the chi-square tails for n real samples at the
/// given linear SNR.
RocPoint analytic_roc_point(double threshold, std::size_t n, double snr);

/// Threshold giving false-alarm probability `p_fa` under the analytic model.
double threshold_for_pfa(double p_fa, std::size_t n);

/// OR: any busy. MAJORITY: strictly more than half busy. Throws on empty input.
bool cooperative_fuse(const std::vector<bool>& decisions, FusionRule rule);

/// Statistic whose thresholding reproduces the fused decision at every common
/// threshold: the maximum for OR, the (floor(k/2)+1)-th largest for MAJORITY.
double fused_statistic(std::span<const double> statistics, FusionRule rule);

/// Bayes posterior of "busy" after one hard decision. A 0/0 denominator
/// returns the prior.
double update_belief(double prior, bool decision, double p_d, double p_fa);

/// One-slot Markov prediction of a busy belief.
inline double predict_belief(double belief, double p01, double p10)
{
    return belief * (1.0 - p10) + (1.0 - belief) * p01;
}

/// Exact log-likelihood ratio of an energy statistic from n real Gaussian
/// samples: busy (variance 1 + snr) against idle (variance 1).
double energy_llr(double statistic, std::size_t n, double snr);

/// Posterior busy probability from a prior and a summed log-likelihood ratio.
double posterior_from_llr(double prior, double llr);

/// Single-detector statistic that carries the same posterior under the
/// stationary prior as `posterior_log_odds` does. Lets belief-based scores be
/// swept on the same threshold grid as raw energy statistics.
double equivalent_statistic(double posterior_log_odds, double stationary_prior, std::size_t n, double snr);

/// Energy statistic drawn directly from its distribution: (1 + snr) * chi2_n
/// when busy, chi2_n otherwise.
double draw_energy_statistic(std::size_t n, double snr, bool busy, Rng& rng);

/// Trapezoidal area under a ROC curve. (0,0) and (1,1) are added if absent.
double roc_auc(std::vector<RocPoint> points);

/// Sorts by p_fa and forces p_d non-decreasing.
std::vector<RocPoint> monotone_roc(std::vector<RocPoint> points);

/// `count` evenly spaced thresholds spanning n +/- 6 sqrt(2n), descending.
std::vector<double> sweep_thresholds(std::size_t n, std::size_t count = 21);

/// Streaming threshold sweep over labelled scores.
class RocAccumulator {
public:
    RocAccumulator() = default;
    explicit RocAccumulator(std::vector<double> thresholds);

    void add(double score, bool busy);
    void merge(const RocAccumulator& other);

    /// One point per threshold, in the order of thresholds().
    std::vector<RocPoint> curve() const;
    double auc() const;
    const std::vector<double>& thresholds() const { return thresholds_; }
    std::uint64_t busy_count() const { return n_busy_; }
    std::uint64_t idle_count() const { return n_idle_; }

private:
    std::vector<double> thresholds_;       // ascending
    std::vector<std::uint64_t> busy_above_; // per threshold, scores strictly above
    std::vector<std::uint64_t> idle_above_;
    std::uint64_t n_busy_ = 0;
    std::uint64_t n_idle_ = 0;
};

} // namespace greencrn
