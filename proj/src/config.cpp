#include "greencrn/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace greencrn {

std::string format_number(double x)
{
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    if (std::isnan(x)) {
        return "nan";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string to_string(PolicyKind kind)
{
    switch (kind) {
    case PolicyKind::Traditional: return "traditional";
    case PolicyKind::Hybrid: return "hybrid";
    case PolicyKind::Proposed: return "proposed";
    }
    return "?";
}

PolicyKind parse_policy(const std::string& name)
{
    if (name == "traditional") {
        return PolicyKind::Traditional;
    }
    if (name == "hybrid") {
        return PolicyKind::Hybrid;
    }
    if (name == "proposed") {
        return PolicyKind::Proposed;
    }
    throw ConfigError("unknown policy '" + name + "' (expected traditional, hybrid or proposed)", 0, "policy");
}

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v)
{
    if (v == "inf" || v == "+inf") {
        return std::numeric_limits<double>::infinity();
    }
    if (v == "nan") {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double x = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
        throw ConfigError(key + ": expected a number, got '" + v + "'", 0, key);
    }
    return x;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v)
{
    std::uint64_t x = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'", 0, key);
    }
    return x;
}

bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1") {
        return true;
    }
    if (v == "false" || v == "0") {
        return false;
    }
    throw ConfigError(key + ": expected true or false, got '" + v + "'", 0, key);
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& v, T (*one)(const std::string&, const std::string&))
{
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(one(key, item));
        }
    }
    return out;
}

std::size_t parse_size(const std::string& key, const std::string& v) { return static_cast<std::size_t>(parse_uint(key, v)); }

struct Field {
    std::string key;
    std::function<void(ScenarioConfig&, const std::string&)> set;
    std::function<std::string(const ScenarioConfig&)> get;
};

template <typename T>
Field num(std::string key, T ScenarioConfig::*member)
{
    Field f;
    f.key = key;
    if constexpr (std::is_same_v<T, double>) {
        f.set = [key, member](ScenarioConfig& c, const std::string& v) { c.*member = parse_double(key, v); };
        f.get = [member](const ScenarioConfig& c) { return format_number(c.*member); };
    } else if constexpr (std::is_same_v<T, bool>) {
        f.set = [key, member](ScenarioConfig& c, const std::string& v) { c.*member = parse_bool(key, v); };
        f.get = [member](const ScenarioConfig& c) { return std::string(c.*member ? "true" : "false"); };
    } else {
        f.set = [key, member](ScenarioConfig& c, const std::string& v) { c.*member = static_cast<T>(parse_uint(key, v)); };
        f.get = [member](const ScenarioConfig& c) { return std::to_string(c.*member); };
    }
    return f;
}

FusionRule parse_fusion(const std::string& key, const std::string& v)
{
    if (v == "OR" || v == "or") {
        return FusionRule::Or;
    }
    if (v == "MAJORITY" || v == "majority") {
        return FusionRule::Majority;
    }
    throw ConfigError(key + ": expected OR or MAJORITY, got '" + v + "'", 0, key);
}

std::string fusion_name(FusionRule r) { return r == FusionRule::Or ? "OR" : "MAJORITY"; }

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = [] {
        using C = ScenarioConfig;
        std::vector<Field> t;
        t.push_back(num("channels", &C::channels));
        t.push_back(num("bandwidth_hz", &C::bandwidth_hz));
        t.push_back(num("n_pu", &C::n_pu));
        t.push_back(num("pu_p01", &C::pu_p01));
        t.push_back(num("pu_p10", &C::pu_p10));
        t.push_back(num("ris_elements", &C::ris_elements));
        t.push_back(num("codebook_size", &C::codebook_size));
        t.push_back(num("carrier_ghz", &C::carrier_ghz));
        t.push_back(num("noise_psd", &C::noise_psd));
        t.push_back(num("interference_cap_w", &C::interference_cap_w));
        t.push_back(num("ris_element_gain", &C::ris_element_gain));
        t.push_back(num("dist_min_m", &C::dist_min_m));
        t.push_back(num("dist_max_m", &C::dist_max_m));
        t.push_back(num("eh_eff_min", &C::eh_eff_min));
        t.push_back(num("eh_eff_max", &C::eh_eff_max));
        t.push_back(num("eh_ambient_w", &C::eh_ambient_w));
        t.push_back(num("battery_capacity_j", &C::battery_capacity_j));
        t.push_back(num("battery_init_j", &C::battery_init_j));
        t.push_back(num("p_sense_w", &C::p_sense_w));
        t.push_back(num("p_rx_w", &C::p_rx_w));
        t.push_back(num("slot_s", &C::slot_s));
        t.push_back(num("no_eh", &C::no_eh));
        t.push_back(num("sense_samples_n", &C::sense_samples_n));
        t.push_back(num("sense_threshold", &C::sense_threshold));
        t.push_back(num("sense_snr_db", &C::sense_snr_db));
        t.push_back({"fusion_rule",
                     [](C& c, const std::string& v) { c.hybrid_fusion_rule = parse_fusion("fusion_rule", v); },
                     [](const C& c) { return fusion_name(c.hybrid_fusion_rule); }});
        t.push_back(num("ptx_min", &C::ptx_min));
        t.push_back(num("ptx_max", &C::ptx_max));
        t.push_back(num("ptx_levels", &C::ptx_levels));
        t.push_back(num("lr", &C::lr));
        t.push_back(num("discount", &C::discount));
        t.push_back(num("hidden", &C::hidden));
        t.push_back(num("episodes", &C::episodes));
        t.push_back(num("train_slots", &C::train_slots));
        t.push_back(num("history_window", &C::history_window));
        t.push_back({"channel_mode",
                     [](C& c, const std::string& v) {
                         if (v == "ARGMAX_UTILITY") {
                             c.channel_mode = ChannelMode::ArgmaxUtility;
                         } else if (v == "POLICY") {
                             c.channel_mode = ChannelMode::Policy;
                         } else {
                             throw ConfigError("channel_mode: expected ARGMAX_UTILITY or POLICY", 0, "channel_mode");
                         }
                     },
                     [](const C& c) {
                         return std::string(c.channel_mode == ChannelMode::ArgmaxUtility ? "ARGMAX_UTILITY" : "POLICY");
                     }});
        t.push_back({"ris_mode",
                     [](C& c, const std::string& v) {
                         if (v == "SCAN") {
                             c.ris_mode = RisMode::Scan;
                         } else if (v == "POLICY") {
                             c.ris_mode = RisMode::Policy;
                         } else {
                             throw ConfigError("ris_mode: expected SCAN or POLICY", 0, "ris_mode");
                         }
                     },
                     [](const C& c) { return std::string(c.ris_mode == RisMode::Scan ? "SCAN" : "POLICY"); }});
        t.push_back(num("reward.alpha", &C::reward_alpha));
        t.push_back(num("reward.beta", &C::reward_beta));
        t.push_back(num("reward.gamma", &C::reward_gamma));
        t.push_back(num("reward.delta", &C::reward_delta));
        t.push_back(num("reward.ee_ref", &C::reward_ee_ref));
        t.push_back(num("utility.lambda", &C::utility_lambda));
        t.push_back(num("utility.mu", &C::utility_mu));
        t.push_back(num("ga.population", &C::ga_population));
        t.push_back(num("ga.generations", &C::ga_generations));
        t.push_back(num("ga.refine_every", &C::ga_refine_every));
        t.push_back(num("ga.perturb_radius", &C::ga_perturb_radius));
        t.push_back(num("ga.enabled", &C::ga_enabled));
        t.push_back(num("baseline.fixed_p_tx", &C::baseline_fixed_p_tx));
        t.push_back(num("baseline.target_pfa", &C::baseline_target_pfa));
        t.push_back({"baseline.channel_rule",
                     [](C& c, const std::string& v) {
                         if (v == "RANDOM_IDLE") {
                             c.baseline_channel_rule = ChannelRule::RandomIdle;
                         } else if (v == "FIRST_IDLE") {
                             c.baseline_channel_rule = ChannelRule::FirstIdle;
                         } else {
                             throw ConfigError("baseline.channel_rule: expected RANDOM_IDLE or FIRST_IDLE", 0,
                                               "baseline.channel_rule");
                         }
                     },
                     [](const C& c) {
                         return std::string(c.baseline_channel_rule == ChannelRule::RandomIdle ? "RANDOM_IDLE"
                                                                                               : "FIRST_IDLE");
                     }});
        t.push_back(num("hybrid.k", &C::hybrid_k));
        t.push_back({"hybrid.fusion_rule",
                     [](C& c, const std::string& v) { c.hybrid_fusion_rule = parse_fusion("hybrid.fusion_rule", v); },
                     [](const C& c) { return fusion_name(c.hybrid_fusion_rule); }});
        t.push_back(num("hybrid.overhead_frac", &C::hybrid_overhead_frac));
        t.push_back(num("arrival_rate", &C::arrival_rate));
        t.push_back(num("packet_bits", &C::packet_bits));
        t.push_back(num("deadline_slots", &C::deadline_slots));
        t.push_back(num("n_su", &C::n_su));
        t.push_back(num("slots", &C::slots));
        t.push_back(num("seeds", &C::seeds));
        t.push_back(num("seed", &C::seed));
        t.push_back({"policy", [](C& c, const std::string& v) { c.policy = parse_policy(v); },
                     [](const C& c) { return to_string(c.policy); }});
        t.push_back(num("no_ris", &C::no_ris));
        t.push_back(num("energy_budget_j", &C::energy_budget_j));
        t.push_back({"sweep.densities",
                     [](C& c, const std::string& v) { c.sweep_densities = parse_list<std::size_t>("sweep.densities", v, parse_size); },
                     [](const C& c) {
                         std::string s;
                         for (auto d : c.sweep_densities) {
                             s += (s.empty() ? "" : ",") + std::to_string(d);
                         }
                         return s;
                     }});
        t.push_back({"sweep.budgets_j",
                     [](C& c, const std::string& v) { c.sweep_budgets_j = parse_list<double>("sweep.budgets_j", v, parse_double); },
                     [](const C& c) {
                         std::string s;
                         for (auto d : c.sweep_budgets_j) {
                             s += (s.empty() ? "" : ",") + format_number(d);
                         }
                         return s;
                     }});
        t.push_back(num("workers", &C::workers));
        return t;
    }();
    return table;
}

const Field* find_field(const std::string& key)
{
    for (const auto& f : fields()) {
        if (f.key == key) {
            return &f;
        }
    }
    return nullptr;
}

void require(bool ok, const char* key, const std::string& what)
{
    if (!ok) {
        throw ConfigError(std::string(key) + ": " + what, 0, key);
    }
}

bool is_prob(double p) { return p >= 0.0 && p <= 1.0; }

} // namespace

void set_config_value(ScenarioConfig& cfg, const std::string& key, const std::string& value)
{
    const Field* f = find_field(key);
    if (f == nullptr) {
        throw ConfigError("unknown key '" + key + "'", 0, key);
    }
    f->set(cfg, value);
}

std::vector<std::string> config_keys()
{
    std::vector<std::string> keys;
    for (const auto& f : fields()) {
        keys.push_back(f.key);
    }
    return keys;
}

std::string echo_config(const ScenarioConfig& cfg)
{
    std::string out;
    for (const auto& f : fields()) {
        out += f.key + "=" + f.get(cfg) + "\n";
    }
    return out;
}

ScenarioConfig parse_config(const std::string& text)
{
    ScenarioConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key=value", line_no);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(line_no) + ": empty key", line_no);
        }
        if (!seen.insert(key).second) {
            throw ConfigError("line " + std::to_string(line_no) + ": key '" + key + "' repeated", line_no, key);
        }
        try {
            set_config_value(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what(), line_no, e.key());
        }
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void ScenarioConfig::validate() const
{
    require(channels >= 1, "channels", "must be at least 1");
    require(bandwidth_hz > 0.0, "bandwidth_hz", "must be positive");
    require(n_pu <= 1000, "n_pu", "must not exceed 1000");
    require(is_prob(pu_p01), "pu_p01", "must lie in [0, 1]");
    require(is_prob(pu_p10), "pu_p10", "must lie in [0, 1]");
    require(codebook_size >= 1, "codebook_size", "must be at least 1");
    require(carrier_ghz > 0.0, "carrier_ghz", "must be positive");
    require(noise_psd > 0.0, "noise_psd", "must be positive");
    require(interference_cap_w >= 0.0, "interference_cap_w", "must be non-negative");
    require(ris_element_gain >= 0.0, "ris_element_gain", "must be non-negative");
    require(dist_min_m > 0.0, "dist_min_m", "must be positive");
    require(dist_max_m >= dist_min_m, "dist_max_m", "must be at least dist_min_m");
    require(eh_eff_min >= 0.0 && eh_eff_min <= eh_eff_max, "eh_eff_min", "must satisfy 0 <= eh_eff_min <= eh_eff_max");
    require(eh_eff_max <= 1.0, "eh_eff_max", "must not exceed 1");
    require(eh_ambient_w >= 0.0, "eh_ambient_w", "must be non-negative");
    require(battery_capacity_j > 0.0, "battery_capacity_j", "must be positive");
    require(battery_init_j >= 0.0 && battery_init_j <= battery_capacity_j, "battery_init_j",
            "must lie in [0, battery_capacity_j]");
    require(p_sense_w >= 0.0, "p_sense_w", "must be non-negative");
    require(p_rx_w >= 0.0, "p_rx_w", "must be non-negative");
    require(slot_s > 0.0, "slot_s", "must be positive");
    require(sense_samples_n >= 1, "sense_samples_n", "must be at least 1");
    require(std::isfinite(sense_snr_db), "sense_snr_db", "must be finite");
    require(ptx_min >= 0.1, "ptx_min", "must be at least 0.1 W");
    require(ptx_max <= 2.0, "ptx_max", "must not exceed 2 W");
    require(ptx_max >= ptx_min, "ptx_max", "must be at least ptx_min");
    require(ptx_levels >= 1, "ptx_levels", "must be at least 1");
    require(lr >= 0.0, "lr", "must be non-negative");
    require(discount >= 0.0 && discount <= 1.0, "discount", "must lie in [0, 1]");
    require(hidden >= 1, "hidden", "must be at least 1");
    require(train_slots >= 1, "train_slots", "must be at least 1");
    require(history_window >= 1, "history_window", "must be at least 1");
    require(reward_alpha >= 0.0, "reward.alpha", "must be non-negative");
    require(reward_beta >= 0.0, "reward.beta", "must be non-negative");
    require(reward_gamma >= 0.0, "reward.gamma", "must be non-negative");
    require(reward_delta >= 0.0, "reward.delta", "must be non-negative");
    require(reward_ee_ref >= 0.0, "reward.ee_ref", "must be non-negative");
    require(utility_lambda >= 0.0, "utility.lambda", "must be non-negative");
    require(utility_mu >= 0.0, "utility.mu", "must be non-negative");
    require(ga_population >= 2, "ga.population", "must be at least 2");
    require(ga_refine_every >= 1, "ga.refine_every", "must be at least 1");
    require(baseline_fixed_p_tx >= 0.1 && baseline_fixed_p_tx <= 2.0, "baseline.fixed_p_tx", "must lie in [0.1, 2] W");
    require(baseline_target_pfa > 0.0 && baseline_target_pfa < 1.0, "baseline.target_pfa", "must lie in (0, 1)");
    require(hybrid_k >= 1, "hybrid.k", "must be at least 1");
    require(hybrid_overhead_frac >= 0.0, "hybrid.overhead_frac", "must be non-negative");
    require(arrival_rate >= 0.0, "arrival_rate", "must be non-negative");
    require(packet_bits > 0.0, "packet_bits", "must be positive");
    require(deadline_slots >= 1, "deadline_slots", "must be at least 1");
    require(n_su >= 1 && n_su <= 1000, "n_su", "must lie in [1, 1000]");
    require(slots >= 1, "slots", "must be at least 1");
    require(seeds >= 1, "seeds", "must be at least 1");
    require(energy_budget_j >= 0.0, "energy_budget_j", "must be non-negative");
    require(!sweep_densities.empty(), "sweep.densities", "must list at least one density");
    for (auto d : sweep_densities) {
        require(d >= 1 && d <= 1000, "sweep.densities", "entries must lie in [1, 1000]");
    }
    require(!sweep_budgets_j.empty(), "sweep.budgets_j", "must list at least one budget");
    for (auto b : sweep_budgets_j) {
        require(b >= 0.0, "sweep.budgets_j", "entries must be non-negative");
    }
    require(workers >= 1, "workers", "must be at least 1");
}

double ScenarioConfig::resolved_threshold() const
{
    if (!std::isnan(sense_threshold)) {
        return sense_threshold;
    }
    return threshold_for_pfa(baseline_target_pfa, sense_samples_n);
}

double ScenarioConfig::sense_snr_linear() const { return std::pow(10.0, sense_snr_db / 10.0); }

double ScenarioConfig::sense_event_energy() const
{
    return p_sense_w * static_cast<double>(sense_samples_n) / channel_bandwidth_hz();
}

} // namespace greencrn
