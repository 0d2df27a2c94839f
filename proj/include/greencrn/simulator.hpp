#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "greencrn/action.hpp"
#include "greencrn/baselines.hpp"
#include "greencrn/channel_model.hpp"
#include "greencrn/config.hpp"
#include "greencrn/energy.hpp"
#include "greencrn/genetic.hpp"
#include "greencrn/policy.hpp"
#include "greencrn/sensing.hpp"
#include "greencrn/spectrum_env.hpp"

namespace greencrn {

/// Net utility: expected throughput less priced energy and collision risk.
inline double utility(double throughput_est, double energy_est, double collision_prob, double lambda, double mu)
{
    return throughput_est - lambda * energy_est - mu * collision_prob;
}

/// Argmax with ties to the lowest index. Throws on an empty vector.
std::size_t assign_channel(std::span<const double> utilities);

/// Overrides for the stochastic inputs of a run. Any hook left empty falls back
/// to the seeded model.
struct SimHooks {
    std::function<std::vector<std::uint8_t>(std::size_t slot)> occupancy;
    std::function<std::size_t(std::size_t su, std::size_t slot)> arrivals;
    std::function<cplx(std::size_t su, std::size_t channel, std::size_t slot)> fading;
    std::function<double(std::size_t su, std::size_t channel, std::size_t report, std::size_t slot)> sensing;
    std::function<double(std::size_t su, std::size_t slot)> harvest;
    std::function<double(std::size_t su)> distance;
};

struct Packet {
    std::size_t arrival = 0;
    std::size_t deadline = 0; // last slot in which delivery still counts
    double bits_left = 0.0;
};

struct SuOutcome {
    Action action;
    double bits = 0.0;
    bool collided = false;    // transmitted while the PU was active on that channel
    bool contended = false;   // lost to an overlapping SU slice
    bool suppressed = false;  // energy budget exhausted
    EnergyLedger ledger;
    double battery = 0.0;
    double grid = 0.0;
    std::vector<double> delays; // slots, delivered packets only
};

struct SlotOutcome {
    std::size_t slot = 0;
    std::vector<SuOutcome> su;
    std::vector<std::uint8_t> pu_busy;
    std::vector<std::uint8_t> su_occupancy; // SUs transmitting per channel
};

struct MetricsRecord {
    double auc = 0.0;
    double ee_bits_per_j = 0.0;
    bool ee_gross_fallback = false;
    double latency_ms = 0.0;
    double pdr = 1.0;
    double pu_interference = 0.0; // fraction of PU-busy slot-channel pairs hit by an SU
    double total_energy_j = 0.0;  // gross consumption
    double grid_energy_j = 0.0;
    double harvested_j = 0.0;
    double throughput_bits = 0.0;
    double mean_p_tx = 0.0;        // over transmit slots
    double sense_energy_j = 0.0;
    std::uint64_t packets_generated = 0;
    std::uint64_t packets_delivered = 0;
    std::uint64_t packets_pending = 0;
    double mean_return = 0.0; // mean per-step reward of the proposed controller
    double decision_s = 0.0;  // wall time spent deciding (excludes GA)
    double ga_s = 0.0;
    std::uint64_t ga_calls = 0;
    std::uint64_t stream_checksum = 0;
};

struct SimOptions {
    bool greedy = true;          // proposed: greedy heads instead of sampling
    bool record = false;         // keep per-SU trajectories for training
    double power_multiplier = 1.0; // scales every radiated power; ablation search only
    bool time_decisions = false;
    std::ostream* trace = nullptr;
};

/// One slotted world bound to one controller kind.
class Simulator {
public:
    Simulator(const ScenarioConfig& cfg, PolicyKind kind, std::uint64_t seed,
              std::shared_ptr<const PolicyParams> params = nullptr, SimOptions opts = {}, SimHooks hooks = {});

    /// Runs every phase of the next slot and returns what happened.
    SlotOutcome step();

    std::size_t slot() const { return t_; }
    MetricsRecord metrics() const;
    const RocAccumulator& roc() const { return roc_; }

    /// Per-SU trajectories recorded so far (SimOptions::record).
    std::vector<Trajectory>& trajectories() { return trajectories_; }

    static void write_trace_header(std::ostream& os);

    std::size_t state_dimension() const;
    static std::array<std::size_t, HeadCount> head_sizes(const ScenarioConfig& cfg);
    static HeadMask trained_heads(const ScenarioConfig& cfg);

private:
    struct Su {
        double distance = 0.0;
        double path_gain = 0.0;
        std::deque<Packet> queue;
        double backlog = 0.0;
        Battery battery;
        std::vector<double> belief;
        std::unique_ptr<Featurizer> featurizer;
        int period = 1;
        double energy_used = 0.0;
        double delay_sum = 0.0;
        std::uint64_t delivered = 0;
        std::uint64_t generated = 0;
        std::uint64_t expired = 0;
        std::vector<double> sensed_fraction;
        bool sensed_now = false;
    };

    struct Pending {
        Action action;
        ActionIndex index{};
        bool record = false;
        std::vector<double> state;
        cplx h_eff{};
        bool ris_ok = true;
    };

    // per-slot draws, all keyed so every policy sees the same realizations
    cplx fading(std::size_t su, std::size_t c) const;
    double sense_stat(std::size_t su, std::size_t c, std::size_t report) const;
    const std::vector<cplx>& cascade(std::size_t su);
    RisLink ris_link(std::size_t su) const;

    void phase_occupancy();
    void phase_arrivals();
    void phase_sensing(std::vector<SuOutcome>& out);
    void phase_decide(std::vector<Pending>& pend);
    void decide_proposed(std::size_t u, Pending& p);
    void hybrid_slices(std::vector<Pending>& pend) const;
    void phase_transmit(std::vector<Pending>& pend, std::vector<SuOutcome>& out, SlotOutcome& slot);

    ScenarioConfig cfg_;
    PolicyKind kind_;
    std::uint64_t seed_;
    std::shared_ptr<const PolicyParams> params_;
    SimOptions opts_;
    SimHooks hooks_;

    ActionGrid grid_;
    PhaseCodebook book_;
    HarvestModel harvest_;
    RewardWeights weights_;
    HeadMask mask_{};
    GaBudget ga_;
    double threshold_ = 0.0;
    double sense_snr_ = 0.0;
    double stationary_ = 0.0;
    std::size_t reports_ = 1;

    OccupancyState occ_;
    std::size_t t_ = 0;
    std::vector<Su> sus_;
    std::vector<std::vector<cplx>> cascade_cache_;
    std::vector<std::size_t> cascade_slot_;
    std::vector<std::vector<cplx>> fading_now_; // [su][channel] for the current slot
    std::vector<std::vector<bool>> detect_now_;  // busy decisions used by baselines

    RocAccumulator roc_;
    std::vector<Trajectory> trajectories_;

    // accumulators
    double bits_total_ = 0.0;
    double gross_ = 0.0;
    double harvested_ = 0.0;
    double grid_total_ = 0.0;
    double sense_energy_ = 0.0;
    double ptx_sum_ = 0.0;
    std::uint64_t tx_slots_ = 0;
    std::uint64_t pu_busy_pairs_ = 0;
    std::uint64_t pu_hit_pairs_ = 0;
    double reward_sum_ = 0.0;
    std::uint64_t reward_steps_ = 0;
    double decision_s_ = 0.0;
    double ga_s_ = 0.0;
    std::uint64_t ga_calls_ = 0;
    std::uint64_t checksum_ = 0;
};

/// Runs `cfg.slots` slots and returns the episode's metrics.
MetricsRecord run_episode(const ScenarioConfig& cfg, PolicyKind kind, std::uint64_t seed,
                          std::shared_ptr<const PolicyParams> params = nullptr, SimOptions opts = {},
                          SimHooks hooks = {});

} // namespace greencrn
