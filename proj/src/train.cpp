#include "greencrn/train.hpp"

#include <memory>
#include <stdexcept>

#include "greencrn/simulator.hpp"

namespace greencrn {

namespace {

ScenarioConfig rollout_config(const ScenarioConfig& cfg)
{
    ScenarioConfig c = cfg;
    c.slots = cfg.train_slots;
    // refinement is an evaluation-time layer; training sees the raw policy
    c.ga_enabled = false;
    return c;
}

std::uint64_t episode_seed(std::uint64_t seed, std::size_t episode)
{
    return splitmix64(seed ^ splitmix64(0x7261696EULL + episode));
}

} // namespace

PolicyParams initial_policy(const ScenarioConfig& cfg, std::uint64_t seed)
{
    Rng rng = Rng::keyed(seed, Stream::Init);
    return PolicyParams::random(Featurizer::dimension(cfg.channels, cfg.history_window), cfg.hidden,
                                Simulator::head_sizes(cfg), rng);
}

TrainResult train_policy(const ScenarioConfig& cfg, PolicyParams init, std::size_t episodes, std::uint64_t seed,
                         const EpisodeCallback& on_episode)
{
    const ScenarioConfig rc = rollout_config(cfg);
    UpdateOptions upd;
    upd.lr = cfg.lr;
    upd.discount = cfg.discount;
    upd.mask = Simulator::trained_heads(cfg);

    TrainResult result;
    result.params = std::move(init);
    SimOptions opts;
    opts.greedy = false;
    opts.record = true;
    for (std::size_t ep = 0; ep < episodes; ++ep) {
        auto params = std::make_shared<const PolicyParams>(result.params);
        Simulator sim(rc, PolicyKind::Proposed, episode_seed(seed, ep), params, opts);
        for (std::size_t t = 0; t < rc.slots; ++t) {
            sim.step();
        }
        const double ret = sim.metrics().mean_return;
        result.returns.push_back(ret);
        std::vector<Trajectory> batch;
        for (auto& traj : sim.trajectories()) {
            if (!traj.empty()) {
                batch.push_back(std::move(traj));
            }
        }
        if (!batch.empty()) {
            result.params = update_policy(result.params, batch, upd);
        }
        if (on_episode) {
            on_episode(ep, ret);
        }
    }
    return result;
}

double evaluate_return(const ScenarioConfig& cfg, const PolicyParams& params, std::uint64_t seed, std::size_t episodes)
{
    const ScenarioConfig rc = rollout_config(cfg);
    auto shared = std::make_shared<const PolicyParams>(params);
    SimOptions opts;
    opts.greedy = false;
    double sum = 0.0;
    for (std::size_t ep = 0; ep < episodes; ++ep) {
        sum += run_episode(rc, PolicyKind::Proposed, episode_seed(seed ^ 0xE7A1ULL, ep), shared, opts).mean_return;
    }
    return episodes ? sum / static_cast<double>(episodes) : 0.0;
}

std::size_t episodes_to_threshold(const std::vector<double>& returns, double threshold)
{
    for (std::size_t i = 0; i < returns.size(); ++i) {
        if (returns[i] >= threshold) {
            return i + 1;
        }
    }
    return returns.size() + 1;
}

TransferResult transfer_finetune(const PolicyParams& source, const ScenarioConfig& target, std::size_t budget,
                                 std::uint64_t seed, double threshold)
{
    const auto dim = Featurizer::dimension(target.channels, target.history_window);
    if (source.input_dim != dim || source.head_sizes != Simulator::head_sizes(target)) {
        throw std::invalid_argument("source policy (d=" + std::to_string(source.input_dim) +
                                    ") is incompatible with the target scenario (d=" + std::to_string(dim) + ")");
    }
    TransferResult out;
    out.threshold = threshold;
    if (budget == 0) {
        out.params = source;
        out.episodes_to_threshold = 0;
        return out;
    }
    auto trained = train_policy(target, source, budget, seed);
    out.params = std::move(trained.params);
    out.returns = std::move(trained.returns);
    out.episodes_to_threshold = episodes_to_threshold(out.returns, threshold);
    return out;
}

} // namespace greencrn
