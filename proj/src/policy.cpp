#include "greencrn/policy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace greencrn {

// ---------------------------------------------------------------------------
// Featurizer

Featurizer::Featurizer(std::size_t channels, std::size_t window, FeatureScales scales)
    : channels_(channels)
    , window_(window)
    , scales_(scales)
    , snr_ema_(channels, 0.0)
    , history_(channels * window, 0.0)
    , state_(dimension(channels, window), 0.0)
{
    if (window < 1) {
        throw std::invalid_argument("occupancy history window must be at least 1");
    }
}

const std::vector<double>& Featurizer::update(const SlotObservation& obs)
{
    if (obs.snr.size() != channels_ || obs.belief.size() != channels_) {
        throw std::invalid_argument("observation does not match the featurizer's channel count");
    }
    const double snr_norm = std::log1p(scales_.snr_ref);
    for (std::size_t c = 0; c < channels_; ++c) {
        snr_ema_[c] = kEmaFactor * snr_ema_[c] + (1.0 - kEmaFactor) * std::log1p(std::max(0.0, obs.snr[c]));
    }
    if (!obs.busy_fraction.empty()) {
        if (obs.busy_fraction.size() != channels_) {
            throw std::invalid_argument("busy-fraction observation has the wrong length");
        }
        std::copy_backward(history_.begin(), history_.end() - static_cast<std::ptrdiff_t>(channels_), history_.end());
        std::copy(obs.busy_fraction.begin(), obs.busy_fraction.end(), history_.begin());
    }
    harvest_ema_ = kEmaFactor * harvest_ema_ + (1.0 - kEmaFactor) * obs.harvest_j;

    auto out = state_.begin();
    for (std::size_t c = 0; c < channels_; ++c) {
        *out++ = snr_ema_[c] / snr_norm;
    }
    out = std::copy(history_.begin(), history_.end(), out);
    out = std::copy(obs.belief.begin(), obs.belief.end(), out);
    *out++ = std::min(1.0, obs.queue_bits / scales_.queue_bits);
    *out++ = std::clamp(obs.battery_j / scales_.battery_j, 0.0, 1.0);
    *out++ = harvest_ema_ / scales_.harvest_j;
    return state_;
}

// ---------------------------------------------------------------------------
// Parameters

PolicyParams PolicyParams::zeros(std::size_t input_dim, std::size_t hidden,
                                 const std::array<std::size_t, HeadCount>& heads)
{
    PolicyParams p;
    p.input_dim = input_dim;
    p.hidden = hidden;
    p.head_sizes = heads;
    p.weights.assign(p.parameter_count(), 0.0);
    p.validate();
    return p;
}

PolicyParams PolicyParams::random(std::size_t input_dim, std::size_t hidden,
                                  const std::array<std::size_t, HeadCount>& heads, Rng& rng)
{
    PolicyParams p = zeros(input_dim, hidden, heads);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
    for (std::size_t i = 0; i < hidden * input_dim; ++i) {
        p.weights[p.w1_offset() + i] = s1 * normal(rng);
    }
    // small output layer so a fresh policy starts close to uniform
    const double s2 = 0.1 / std::sqrt(static_cast<double>(hidden));
    for (std::size_t i = 0; i < p.head_total() * hidden; ++i) {
        p.weights[p.w2_offset() + i] = s2 * normal(rng);
    }
    return p;
}

std::size_t PolicyParams::head_total() const
{
    return std::accumulate(head_sizes.begin(), head_sizes.end(), std::size_t{0});
}

std::size_t PolicyParams::head_offset(std::size_t head) const
{
    return std::accumulate(head_sizes.begin(), head_sizes.begin() + static_cast<std::ptrdiff_t>(head), std::size_t{0});
}

void PolicyParams::validate() const
{
    if (input_dim == 0 || hidden == 0) {
        throw std::invalid_argument("policy needs positive input and hidden dimensions");
    }
    for (auto s : head_sizes) {
        if (s == 0) {
            throw std::invalid_argument("every policy head needs at least one entry");
        }
    }
    if (weights.size() != parameter_count()) {
        throw std::invalid_argument("policy weight vector does not match its declared shapes");
    }
}

// ---------------------------------------------------------------------------
// Forward / sampling

namespace {

void softmax_inplace(std::vector<double>& v)
{
    const double mx = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (auto& x : v) {
        x = std::exp(x - mx);
        sum += x;
    }
    for (auto& x : v) {
        x /= sum;
    }
}

} // namespace

PolicyOutput policy_forward(const PolicyParams& params, std::span<const double> state, const HeadMask& mask)
{
    if (state.size() != params.input_dim) {
        throw std::invalid_argument("state dimension " + std::to_string(state.size()) +
                                    " does not match policy input " + std::to_string(params.input_dim));
    }
    const std::size_t d = params.input_dim;
    const std::size_t h = params.hidden;
    const double* w = params.weights.data();

    PolicyOutput out;
    out.hidden.resize(h);
    for (std::size_t i = 0; i < h; ++i) {
        const double* row = w + params.w1_offset() + i * d;
        double z = w[params.b1_offset() + i];
        for (std::size_t j = 0; j < d; ++j) {
            z += row[j] * state[j];
        }
        out.hidden[i] = std::tanh(z);
    }
    for (std::size_t k = 0; k < HeadCount; ++k) {
        if (!mask[k]) {
            continue;
        }
        const std::size_t off = params.head_offset(k);
        auto& logits = out.probs[k];
        logits.resize(params.head_sizes[k]);
        for (std::size_t a = 0; a < logits.size(); ++a) {
            const double* row = w + params.w2_offset() + (off + a) * h;
            double z = w[params.b2_offset() + off + a];
            for (std::size_t i = 0; i < h; ++i) {
                z += row[i] * out.hidden[i];
            }
            logits[a] = z;
        }
        softmax_inplace(logits);
    }
    return out;
}

ActionIndex sample_action(const PolicyOutput& out, Rng& rng, const HeadMask& mask)
{
    ActionIndex idx{};
    for (std::size_t k = 0; k < HeadCount; ++k) {
        if (!mask[k]) {
            continue;
        }
        const auto& p = out.probs[k];
        const double u = rng.uniform();
        double acc = 0.0;
        std::size_t choice = p.size() - 1;
        for (std::size_t a = 0; a < p.size(); ++a) {
            acc += p[a];
            if (u < acc) {
                choice = a;
                break;
            }
        }
        idx[k] = choice;
    }
    return idx;
}

ActionIndex greedy_action(const PolicyOutput& out, const HeadMask& mask)
{
    ActionIndex idx{};
    for (std::size_t k = 0; k < HeadCount; ++k) {
        if (mask[k]) {
            const auto& p = out.probs[k];
            idx[k] = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
        }
    }
    return idx;
}

double log_prob(const PolicyParams& params, std::span<const double> state, const ActionIndex& action,
                const HeadMask& mask)
{
    const auto out = policy_forward(params, state, mask);
    double lp = 0.0;
    for (std::size_t k = 0; k < HeadCount; ++k) {
        if (mask[k]) {
            lp += std::log(out.probs[k].at(action[k]));
        }
    }
    return lp;
}

void accumulate_log_prob_gradient(const PolicyParams& params, std::span<const double> state,
                                  const ActionIndex& action, const HeadMask& mask, double scale,
                                  std::span<double> grad)
{
    if (grad.size() != params.weights.size()) {
        throw std::invalid_argument("gradient buffer does not match the parameter count");
    }
    const auto out = policy_forward(params, state, mask);
    const std::size_t d = params.input_dim;
    const std::size_t h = params.hidden;
    const double* w = params.weights.data();

    std::vector<double> dh(h, 0.0);
    for (std::size_t k = 0; k < HeadCount; ++k) {
        if (!mask[k]) {
            continue;
        }
        const std::size_t off = params.head_offset(k);
        const auto& p = out.probs[k];
        for (std::size_t a = 0; a < p.size(); ++a) {
            const double g = scale * ((a == action[k] ? 1.0 : 0.0) - p[a]);
            if (g == 0.0) {
                continue;
            }
            const std::size_t row = off + a;
            double* gw = grad.data() + params.w2_offset() + row * h;
            const double* ww = w + params.w2_offset() + row * h;
            for (std::size_t i = 0; i < h; ++i) {
                gw[i] += g * out.hidden[i];
                dh[i] += g * ww[i];
            }
            grad[params.b2_offset() + row] += g;
        }
    }
    for (std::size_t i = 0; i < h; ++i) {
        const double dz = dh[i] * (1.0 - out.hidden[i] * out.hidden[i]);
        if (dz == 0.0) {
            continue;
        }
        double* gw = grad.data() + params.w1_offset() + i * d;
        for (std::size_t j = 0; j < d; ++j) {
            gw[j] += dz * state[j];
        }
        grad[params.b1_offset() + i] += dz;
    }
}

// ---------------------------------------------------------------------------
// Reward

void RewardWeights::validate() const
{
    for (double v : {alpha, beta, gamma, delta, lambda, mu}) {
        if (!(v >= 0.0)) {
            throw std::invalid_argument("reward and utility weights must be non-negative");
        }
    }
}

double reward(const RewardTerms& t, const RewardWeights& w)
{
    return w.alpha * t.ee + w.beta * t.util - w.gamma * t.interference - w.delta * t.latency;
}

// ---------------------------------------------------------------------------
// Updates

std::vector<double> rewards_to_go(const Trajectory& traj, double discount)
{
    std::vector<double> g(traj.size());
    double acc = 0.0;
    for (std::size_t i = traj.size(); i-- > 0;) {
        acc = traj[i].reward + discount * acc;
        g[i] = acc;
    }
    return g;
}

PolicyParams update_policy(const PolicyParams& params, std::span<const Trajectory> batch, const UpdateOptions& opts)
{
    std::size_t steps = 0;
    for (const auto& t : batch) {
        steps += t.size();
    }
    if (steps == 0) {
        throw std::invalid_argument("policy update needs a non-empty trajectory");
    }
    if (opts.lr < 0.0) {
        throw std::invalid_argument("learning rate must be non-negative");
    }

    std::vector<std::vector<double>> returns;
    returns.reserve(batch.size());
    double mean = 0.0;
    for (const auto& t : batch) {
        returns.push_back(rewards_to_go(t, opts.discount));
        for (double g : returns.back()) {
            mean += g;
        }
    }
    mean /= static_cast<double>(steps);

    // sum over each trajectory, mean over trajectories: the plain episodic estimator
    std::vector<double> grad(params.weights.size(), 0.0);
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto& traj = batch[b];
        for (std::size_t i = 0; i < traj.size(); ++i) {
            const double adv = returns[b][i] - mean;
            if (adv == 0.0) {
                continue;
            }
            accumulate_log_prob_gradient(params, traj[i].state, traj[i].action, opts.mask, adv * inv, grad);
        }
    }

    PolicyParams next = params;
    for (std::size_t i = 0; i < grad.size(); ++i) {
        if (!std::isfinite(grad[i])) {
            std::ostringstream msg;
            msg << "non-finite policy gradient at parameter " << i << " (value " << grad[i] << ", " << steps
                << " steps, return mean " << mean << ")";
            throw std::runtime_error(msg.str());
        }
        next.weights[i] += opts.lr * grad[i];
    }
    return next;
}

PolicyParams update_policy(const PolicyParams& params, const Trajectory& trajectory, double lr, double discount)
{
    UpdateOptions opts;
    opts.lr = lr;
    opts.discount = discount;
    return update_policy(params, std::span<const Trajectory>(&trajectory, 1), opts);
}

double gradient_check(const PolicyParams& params, std::span<const double> state, const ActionIndex& action,
                      double eps, const HeadMask& mask)
{
    if (!(eps > 0.0)) {
        throw std::invalid_argument("finite-difference step must be positive");
    }
    std::vector<double> analytic(params.weights.size(), 0.0);
    accumulate_log_prob_gradient(params, state, action, mask, 1.0, analytic);

    PolicyParams probe = params;
    double worst = 0.0;
    for (std::size_t i = 0; i < probe.weights.size(); ++i) {
        const double saved = probe.weights[i];
        probe.weights[i] = saved + eps;
        const double up = log_prob(probe, state, action, mask);
        probe.weights[i] = saved - eps;
        const double down = log_prob(probe, state, action, mask);
        probe.weights[i] = saved;
        const double numeric = (up - down) / (2.0 * eps);
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
        worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kMagic[5] = {'G', 'C', 'R', 'N', '1'};

void put_u32(std::ostream& os, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i) {
        os.put(static_cast<char>((v >> (8 * i)) & 0xFFu));
    }
}

void put_f64(std::ostream& os, double x)
{
    const auto v = std::bit_cast<std::uint64_t>(x);
    for (int i = 0; i < 8; ++i) {
        os.put(static_cast<char>((v >> (8 * i)) & 0xFFu));
    }
}

std::uint64_t get_bytes(std::istream& is, int count)
{
    std::uint64_t v = 0;
    for (int i = 0; i < count; ++i) {
        const int c = is.get();
        if (c == std::char_traits<char>::eof()) {
            throw std::runtime_error("checkpoint truncated");
        }
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params)
{
    params.validate();
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw std::runtime_error("cannot write checkpoint " + path.string());
    }
    os.write(kMagic, sizeof kMagic);
    put_u32(os, static_cast<std::uint32_t>(params.input_dim));
    put_u32(os, static_cast<std::uint32_t>(params.hidden));
    for (auto s : params.head_sizes) {
        put_u32(os, static_cast<std::uint32_t>(s));
    }
    for (double x : params.weights) {
        put_f64(os, x);
    }
    if (!os) {
        throw std::runtime_error("failed writing checkpoint " + path.string());
    }
}

PolicyParams load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw std::runtime_error("cannot open checkpoint " + path.string());
    }
    char magic[sizeof kMagic];
    is.read(magic, sizeof magic);
    if (!is || !std::equal(magic, magic + sizeof magic, kMagic)) {
        throw std::runtime_error("not a GCRN1 checkpoint: " + path.string());
    }
    PolicyParams p;
    p.input_dim = get_bytes(is, 4);
    p.hidden = get_bytes(is, 4);
    for (auto& s : p.head_sizes) {
        s = get_bytes(is, 4);
    }
    p.weights.resize(p.parameter_count());
    for (auto& x : p.weights) {
        x = std::bit_cast<double>(get_bytes(is, 8));
    }
    if (is.peek() != std::char_traits<char>::eof()) {
        throw std::runtime_error("checkpoint has trailing bytes: " + path.string());
    }
    p.validate();
    return p;
}

} // namespace greencrn
