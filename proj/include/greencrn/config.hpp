#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "greencrn/baselines.hpp"
#include "greencrn/sensing.hpp"

namespace greencrn {

enum class PolicyKind { Traditional, Hybrid, Proposed };
enum class ChannelMode { ArgmaxUtility, Policy };
enum class RisMode { Scan, Policy };

/// Raised for malformed lines (line > 0) and out-of-domain values (key set).
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, std::size_t line = 0, std::string key = {})
        : std::runtime_error(what), line_(line), key_(std::move(key))
    {
    }
    std::size_t line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    std::size_t line_;
    std::string key_;
};

struct ScenarioConfig {
    // spectrum
    std::size_t channels = 20;
    double bandwidth_hz = 20e6;
    std::size_t n_pu = 10; // channels carrying a primary user; the rest are PU-free
    double pu_p01 = 0.2;
    double pu_p10 = 0.3;

    // propagation and surface
    std::size_t ris_elements = 64;
    std::size_t codebook_size = 32;
    double carrier_ghz = 3.5;
    double noise_psd = 4e-16;
    double interference_cap_w = std::numeric_limits<double>::infinity();
    double ris_element_gain = 1.0 / 64.0;
    double dist_min_m = 100.0;
    double dist_max_m = 600.0;

    // energy
    double eh_eff_min = 0.2;
    double eh_eff_max = 0.5;
    double eh_ambient_w = 0.004;
    double battery_capacity_j = 1.0;
    double battery_init_j = 0.0;
    double p_sense_w = 0.05;
    double p_rx_w = 0.1;
    double slot_s = 1e-3;
    bool no_eh = false;

    // sensing
    std::size_t sense_samples_n = 64;
    double sense_threshold = std::numeric_limits<double>::quiet_NaN(); // NaN: derived from baseline.target_pfa
    double sense_snr_db = -7.0;

    // action grid
    double ptx_min = 0.1;
    double ptx_max = 2.0;
    std::size_t ptx_levels = 20;

    // learning
    double lr = 0.05;
    double discount = 0.9;
    std::size_t hidden = 32;
    std::size_t episodes = 100;
    std::size_t train_slots = 1000;
    std::size_t history_window = 4;
    ChannelMode channel_mode = ChannelMode::ArgmaxUtility;
    RisMode ris_mode = RisMode::Scan;
    double reward_alpha = 1.0;
    double reward_beta = 0.0;
    double reward_gamma = 20.0;
    double reward_delta = 20.0;
    double reward_ee_ref = 2e5;
    double utility_lambda = 0.0;
    double utility_mu = 0.0;

    // genetic refinement
    std::size_t ga_population = 20;
    std::size_t ga_generations = 10;
    std::size_t ga_refine_every = 100;
    std::size_t ga_perturb_radius = 1;
    bool ga_enabled = true;

    // baselines
    double baseline_fixed_p_tx = 1.0;
    double baseline_target_pfa = 0.1;
    ChannelRule baseline_channel_rule = ChannelRule::RandomIdle;
    std::size_t hybrid_k = 3;
    FusionRule hybrid_fusion_rule = FusionRule::Or;
    double hybrid_overhead_frac = 0.5;

    // traffic
    double arrival_rate = 5.0; // packets per second per SU
    double packet_bits = 1000.0;
    std::size_t deadline_slots = 100;

    // run
    std::size_t n_su = 50;
    std::size_t slots = 10000;
    std::size_t seeds = 5;
    std::uint64_t seed = 1;
    PolicyKind policy = PolicyKind::Proposed;
    bool no_ris = false;
    double energy_budget_j = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> sweep_densities{25, 50, 100, 200};
    std::vector<double> sweep_budgets_j{0.0, 0.02, 0.05, 0.1, 0.2};
    std::size_t workers = 1;

    /// Throws ConfigError naming the first offending key.
    void validate() const;

    /// Sensing threshold in force: the explicit key or the target false-alarm point.
    double resolved_threshold() const;
    double channel_bandwidth_hz() const { return bandwidth_hz / static_cast<double>(channels); }
    double sense_snr_linear() const;
    /// Energy of one local sensing event over all channels.
    double sense_event_energy() const;
};

/// Parses flat `key=value` text; `#` starts a comment. Unknown keys, repeated
/// keys and malformed lines are errors carrying the line number.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Applies one assignment as if it appeared in a file.
void set_config_value(ScenarioConfig& cfg, const std::string& key, const std::string& value);

/// Every key with its resolved value, one `key=value` line each, in a fixed order.
std::string echo_config(const ScenarioConfig& cfg);

/// Names of all recognised keys in echo order.
std::vector<std::string> config_keys();

std::string to_string(PolicyKind kind);
PolicyKind parse_policy(const std::string& name);

/// Shortest round-trip decimal form.
std::string format_number(double x);

} // namespace greencrn
