#include "greencrn/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace greencrn {

double energy_statistic(const SensingSample& sample, double noise_var)
{
    if (!(noise_var > 0.0)) {
        throw std::invalid_argument("noise variance must be positive");
    }
    if (sample.values.empty()) {
        throw std::invalid_argument("sensing sample needs at least one value");
    }
    double acc = 0.0;
    for (double v : sample.values) {
        acc += v * v;
    }
    return acc / noise_var;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double q_inverse(double p)
{
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("q_inverse needs p in (0, 1)");
    }
    double lo = -40.0;
    double hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (q_function(mid) > p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

RocPoint analytic_roc_point(double threshold, std::size_t n, double snr)
{
    if (n < 1 || snr < 0.0) {
        throw std::invalid_argument("analytic ROC needs n >= 1 and snr >= 0");
    }
    const double nn = static_cast<double>(n);
    const double p_fa = q_function((threshold - nn) / std::sqrt(2.0 * nn));
    const double p_d = q_function((threshold - nn * (1.0 + snr)) / std::sqrt(2.0 * nn * (1.0 + 2.0 * snr)));
    return {p_fa, p_d};
}

double threshold_for_pfa(double p_fa, std::size_t n)
{
    const double nn = static_cast<double>(n);
    return nn + std::sqrt(2.0 * nn) * q_inverse(p_fa);
}

bool cooperative_fuse(const std::vector<bool>& decisions, FusionRule rule)
{
    if (decisions.empty()) {
        throw std::invalid_argument("cannot fuse an empty decision list");
    }
    const auto busy = static_cast<std::size_t>(std::count(decisions.begin(), decisions.end(), true));
    if (rule == FusionRule::Or) {
        return busy > 0;
    }
    return 2 * busy > decisions.size();
}

double fused_statistic(std::span<const double> statistics, FusionRule rule)
{
    if (statistics.empty()) {
        throw std::invalid_argument("cannot fuse an empty statistic list");
    }
    if (rule == FusionRule::Or) {
        return *std::max_element(statistics.begin(), statistics.end());
    }
    std::vector<double> sorted(statistics.begin(), statistics.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    return sorted[sorted.size() / 2];
}

double update_belief(double prior, bool decision, double p_d, double p_fa)
{
    double num = 0.0;
    double den = 0.0;
    if (decision) {
        num = prior * p_d;
        den = num + (1.0 - prior) * p_fa;
    } else {
        num = prior * (1.0 - p_d);
        den = num + (1.0 - prior) * (1.0 - p_fa);
    }
    if (den <= 0.0) {
        return prior;
    }
    return std::clamp(num / den, 0.0, 1.0);
}

double energy_llr(double statistic, std::size_t n, double snr)
{
    return statistic * snr / (2.0 * (1.0 + snr)) - 0.5 * static_cast<double>(n) * std::log1p(snr);
}

double posterior_from_llr(double prior, double llr)
{
    if (prior <= 0.0 || prior >= 1.0) {
        return prior;
    }
    const double log_odds = std::log(prior / (1.0 - prior)) + llr;
    return 1.0 / (1.0 + std::exp(-log_odds));
}

double equivalent_statistic(double posterior_log_odds, double stationary_prior, std::size_t n, double snr)
{
    if (!(snr > 0.0)) {
        throw std::invalid_argument("equivalent statistic needs a positive sensing SNR");
    }
    if (!(stationary_prior > 0.0 && stationary_prior < 1.0)) {
        throw std::invalid_argument("equivalent statistic needs a stationary prior in (0, 1)");
    }
    const double prior_log_odds = std::log(stationary_prior / (1.0 - stationary_prior));
    const double llr = posterior_log_odds - prior_log_odds;
    return (llr + 0.5 * static_cast<double>(n) * std::log1p(snr)) * 2.0 * (1.0 + snr) / snr;
}

double draw_energy_statistic(std::size_t n, double snr, bool busy, Rng& rng)
{
    std::gamma_distribution<double> chi2(0.5 * static_cast<double>(n), 2.0);
    const double t = chi2(rng);
    return busy ? (1.0 + snr) * t : t;
}

std::vector<RocPoint> monotone_roc(std::vector<RocPoint> points)
{
    std::sort(points.begin(), points.end(), [](const RocPoint& a, const RocPoint& b) {
        return a.p_fa < b.p_fa || (a.p_fa == b.p_fa && a.p_d < b.p_d);
    });
    double running = 0.0;
    for (auto& p : points) {
        running = std::max(running, p.p_d);
        p.p_d = running;
    }
    return points;
}

double roc_auc(std::vector<RocPoint> points)
{
    const auto has = [&](double fa, double d) {
        return std::any_of(points.begin(), points.end(),
                           [&](const RocPoint& p) { return p.p_fa == fa && p.p_d == d; });
    };
    if (!has(0.0, 0.0)) {
        points.push_back({0.0, 0.0});
    }
    if (!has(1.0, 1.0)) {
        points.push_back({1.0, 1.0});
    }
    std::sort(points.begin(), points.end(), [](const RocPoint& a, const RocPoint& b) {
        return a.p_fa < b.p_fa || (a.p_fa == b.p_fa && a.p_d < b.p_d);
    });
    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        area += (points[i].p_fa - points[i - 1].p_fa) * 0.5 * (points[i].p_d + points[i - 1].p_d);
    }
    return area;
}

std::vector<double> sweep_thresholds(std::size_t n, std::size_t count)
{
    if (count < 2) {
        throw std::invalid_argument("threshold sweep needs at least two points");
    }
    const double nn = static_cast<double>(n);
    const double span = 6.0 * std::sqrt(2.0 * nn);
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = nn + span - 2.0 * span * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return out;
}

RocAccumulator::RocAccumulator(std::vector<double> thresholds)
    : thresholds_(std::move(thresholds))
    , busy_above_(thresholds_.size() + 1, 0)
    , idle_above_(thresholds_.size() + 1, 0)
{
    std::sort(thresholds_.begin(), thresholds_.end());
}

void RocAccumulator::add(double score, bool busy)
{
    // bin j counts scores that sit strictly above exactly j thresholds
    const auto j = static_cast<std::size_t>(
        std::lower_bound(thresholds_.begin(), thresholds_.end(), score) - thresholds_.begin());
    if (busy) {
        ++busy_above_[j];
        ++n_busy_;
    } else {
        ++idle_above_[j];
        ++n_idle_;
    }
}

void RocAccumulator::merge(const RocAccumulator& other)
{
    if (other.thresholds_ != thresholds_) {
        throw std::invalid_argument("cannot merge ROC accumulators over different thresholds");
    }
    for (std::size_t j = 0; j < busy_above_.size(); ++j) {
        busy_above_[j] += other.busy_above_[j];
        idle_above_[j] += other.idle_above_[j];
    }
    n_busy_ += other.n_busy_;
    n_idle_ += other.n_idle_;
}

std::vector<RocPoint> RocAccumulator::curve() const
{
    std::vector<RocPoint> pts(thresholds_.size());
    std::uint64_t busy_tail = 0;
    std::uint64_t idle_tail = 0;
    // walk from the highest threshold down, accumulating scores above it
    for (std::size_t i = thresholds_.size(); i-- > 0;) {
        busy_tail += busy_above_[i + 1];
        idle_tail += idle_above_[i + 1];
        const double p_d = n_busy_ ? static_cast<double>(busy_tail) / static_cast<double>(n_busy_) : 0.0;
        const double p_fa = n_idle_ ? static_cast<double>(idle_tail) / static_cast<double>(n_idle_) : 0.0;
        pts[i] = {p_fa, p_d};
    }
    return pts;
}

double RocAccumulator::auc() const { return roc_auc(monotone_roc(curve())); }

} // namespace greencrn
