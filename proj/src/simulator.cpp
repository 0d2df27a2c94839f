#include "greencrn/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace greencrn {

std::size_t assign_channel(std::span<const double> utilities)
{
    if (utilities.empty()) {
        throw std::invalid_argument("channel assignment needs at least one utility");
    }
    return static_cast<std::size_t>(std::max_element(utilities.begin(), utilities.end()) - utilities.begin());
}

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) { return splitmix64(h ^ (v + 0x9E3779B97F4A7C15ULL)); }

double logit(double p) { return std::log(p / (1.0 - p)); }

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

} // namespace

std::array<std::size_t, HeadCount> Simulator::head_sizes(const ScenarioConfig& cfg)
{
    ActionGrid grid;
    return {grid.sense_periods.size(), cfg.channels, cfg.ptx_levels, grid.slices.size(), cfg.codebook_size};
}

HeadMask Simulator::trained_heads(const ScenarioConfig& cfg)
{
    HeadMask m{};
    m[SensePeriod] = true;
    m[Power] = true;
    m[Slice] = true;
    m[Channel] = cfg.channel_mode == ChannelMode::Policy;
    m[Codeword] = cfg.ris_mode == RisMode::Policy;
    return m;
}

std::size_t Simulator::state_dimension() const { return Featurizer::dimension(cfg_.channels, cfg_.history_window); }

Simulator::Simulator(const ScenarioConfig& cfg, PolicyKind kind, std::uint64_t seed,
                     std::shared_ptr<const PolicyParams> params, SimOptions opts, SimHooks hooks)
    : cfg_(cfg)
    , kind_(kind)
    , seed_(seed)
    , params_(std::move(params))
    , opts_(opts)
    , hooks_(std::move(hooks))
{
    cfg_.validate();
    const std::size_t C = cfg_.channels;

    grid_.channels = C;
    grid_.ptx_levels = ActionGrid::power_levels(cfg_.ptx_min, cfg_.ptx_max, cfg_.ptx_levels);
    grid_.codewords = cfg_.codebook_size;
    book_ = build_codebook(cfg_.no_ris ? 0 : cfg_.ris_elements, cfg_.codebook_size);

    harvest_.ambient_power_w = cfg_.eh_ambient_w;
    harvest_.eff_min = cfg_.eh_eff_min;
    harvest_.eff_max = cfg_.eh_eff_max;
    harvest_.slot_s = cfg_.slot_s;
    harvest_.validate();

    weights_ = {cfg_.reward_alpha, cfg_.reward_beta, cfg_.reward_gamma,
                cfg_.reward_delta, cfg_.utility_lambda, cfg_.utility_mu};
    mask_ = trained_heads(cfg_);
    ga_ = {cfg_.ga_population, cfg_.ga_generations, cfg_.ga_refine_every, cfg_.ga_perturb_radius};
    threshold_ = cfg_.resolved_threshold();
    sense_snr_ = cfg_.sense_snr_linear();
    const double p01 = cfg_.pu_p01;
    const double p10 = cfg_.pu_p10;
    stationary_ = (p01 + p10) > 0.0 ? stationary_busy_prob(p01, p10) : 0.5;
    stationary_ = std::clamp(stationary_, 1e-6, 1.0 - 1e-6);
    reports_ = kind_ == PolicyKind::Traditional ? 1 : cfg_.hybrid_k;

    if (kind_ == PolicyKind::Proposed) {
        if (!params_) {
            throw std::invalid_argument("proposed controller needs policy parameters");
        }
        if (params_->input_dim != state_dimension() || params_->head_sizes != head_sizes(cfg_)) {
            throw std::invalid_argument("policy checkpoint shape (d=" + std::to_string(params_->input_dim) +
                                        ") does not match this scenario (d=" + std::to_string(state_dimension()) +
                                        ", channels=" + std::to_string(C) + ")");
        }
    }

    // PU-carrying channels first; the rest never turn busy
    const std::size_t n_pu = std::min(cfg_.n_pu, C);
    std::vector<double> v01(C, 0.0);
    std::vector<double> v10(C, 0.0);
    for (std::size_t c = 0; c < n_pu; ++c) {
        v01[c] = p01;
        v10[c] = p10;
    }
    Rng init = Rng::keyed(seed_, Stream::OccupancyInit);
    occ_ = make_stationary_occupancy(v01, v10, init);

    FeatureScales scales;
    scales.queue_bits = 4.0 * cfg_.packet_bits;
    scales.battery_j = cfg_.battery_capacity_j;
    const double harvest_max = cfg_.eh_eff_max * cfg_.eh_ambient_w * cfg_.slot_s;
    scales.harvest_j = harvest_max > 0.0 ? harvest_max : 1.0;

    sus_.resize(cfg_.n_su);
    for (std::size_t u = 0; u < cfg_.n_su; ++u) {
        Su& s = sus_[u];
        if (hooks_.distance) {
            s.distance = hooks_.distance(u);
        } else {
            Rng r = Rng::keyed(seed_, Stream::Placement, u);
            s.distance = cfg_.dist_min_m + (cfg_.dist_max_m - cfg_.dist_min_m) * r.uniform();
        }
        s.path_gain = db_to_linear(-pathloss_db(s.distance, cfg_.carrier_ghz));
        s.battery = {cfg_.battery_init_j, cfg_.battery_capacity_j, 0.0};
        // the SU does not know which channels are licensed: one prior for all of them
        s.belief.assign(C, (p01 + p10) > 0.0 ? stationary_busy_prob(p01, p10) : 0.0);
        s.sensed_fraction.assign(C, 0.0);
        if (kind_ == PolicyKind::Proposed) {
            s.featurizer = std::make_unique<Featurizer>(C, cfg_.history_window, scales);
        }
    }
    cascade_cache_.assign(cfg_.n_su, {});
    cascade_slot_.assign(cfg_.n_su, std::numeric_limits<std::size_t>::max());
    fading_now_.assign(cfg_.n_su, {});
    detect_now_.assign(cfg_.n_su, std::vector<bool>(C, false));
    roc_ = RocAccumulator(sweep_thresholds(cfg_.sense_samples_n));
    if (opts_.record) {
        trajectories_.assign(cfg_.n_su, {});
    }
}

cplx Simulator::fading(std::size_t su, std::size_t c) const
{
    if (hooks_.fading) {
        return hooks_.fading(su, c, t_);
    }
    Rng r = Rng::keyed(seed_, Stream::Fading, su * cfg_.channels + c, t_);
    return sample_rayleigh(r);
}

double Simulator::sense_stat(std::size_t su, std::size_t c, std::size_t report) const
{
    if (hooks_.sensing) {
        return hooks_.sensing(su, c, report, t_);
    }
    // report 0 is the SU's own measurement and is shared by every controller
    Rng r = Rng::keyed(seed_, Stream::Sensing, (su * cfg_.hybrid_k + report) * cfg_.channels + c, t_);
    return draw_energy_statistic(cfg_.sense_samples_n, sense_snr_, occ_.busy[c] != 0, r);
}

RisLink Simulator::ris_link(std::size_t su) const
{
    Rng r = Rng::keyed(seed_, Stream::Ris, su, t_);
    return sample_ris_link(book_.elements(), cfg_.ris_element_gain, r);
}

const std::vector<cplx>& Simulator::cascade(std::size_t su)
{
    if (cascade_slot_[su] != t_) {
        cascade_cache_[su] = book_.elements() > 0 ? cascade_sums(ris_link(su), book_)
                                                  : std::vector<cplx>(book_.size(), cplx{});
        cascade_slot_[su] = t_;
    }
    return cascade_cache_[su];
}

void Simulator::write_trace_header(std::ostream& os)
{
    os << "slot,su,channel,action.sense_period,action.p_tx,action.slice,action.codeword,action.transmit,bits,"
          "collided,e_tx,e_rx,e_sense,e_harv,battery,grid\n";
}

void Simulator::phase_occupancy()
{
    if (hooks_.occupancy) {
        auto busy = hooks_.occupancy(t_);
        if (busy.size() != cfg_.channels) {
            throw std::runtime_error("slot " + std::to_string(t_) + ": scripted occupancy has wrong length");
        }
        occ_.busy = std::move(busy);
    } else {
        Rng r = Rng::keyed(seed_, Stream::Occupancy, 0, t_);
        occ_ = step_occupancy(occ_, r);
    }
    for (auto b : occ_.busy) {
        checksum_ = mix(checksum_, b);
    }
}

void Simulator::phase_arrivals()
{
    const double mean = cfg_.arrival_rate * cfg_.slot_s;
    for (std::size_t u = 0; u < sus_.size(); ++u) {
        std::size_t n = 0;
        if (hooks_.arrivals) {
            n = hooks_.arrivals(u, t_);
        } else if (mean > 0.0) {
            Rng r = Rng::keyed(seed_, Stream::Traffic, u, t_);
            std::poisson_distribution<std::size_t> poisson(mean);
            n = poisson(r);
        }
        checksum_ = mix(checksum_, n);
        Su& s = sus_[u];
        for (std::size_t i = 0; i < n; ++i) {
            s.queue.push_back({t_, t_ + cfg_.deadline_slots - 1, cfg_.packet_bits});
            s.backlog += cfg_.packet_bits;
            ++s.generated;
        }
    }
}

void Simulator::phase_sensing(std::vector<SuOutcome>& out)
{
    const std::size_t C = cfg_.channels;
    const std::size_t n_pu = std::min(cfg_.n_pu, C);
    const double e_local = cfg_.sense_event_energy();
    const double e_coop = e_local * (1.0 + cfg_.hybrid_overhead_frac);
    std::vector<double> stats(reports_);

    for (std::size_t u = 0; u < sus_.size(); ++u) {
        Su& s = sus_[u];
        s.sensed_now = false;
        if (kind_ == PolicyKind::Proposed && t_ > 0) {
            for (std::size_t c = 0; c < C; ++c) {
                s.belief[c] = predict_belief(s.belief[c], cfg_.pu_p01, cfg_.pu_p10);
            }
        }
        const bool due = kind_ != PolicyKind::Proposed || t_ % static_cast<std::size_t>(s.period) == 0;
        if (!due) {
            continue;
        }
        s.sensed_now = true;
        out[u].ledger.e_sense = kind_ == PolicyKind::Traditional ? e_local : e_coop;
        for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t k = 0; k < reports_; ++k) {
                stats[k] = sense_stat(u, c, k);
            }
            const bool truth = occ_.busy[c] != 0;
            switch (kind_) {
            case PolicyKind::Traditional:
                detect_now_[u][c] = detect(stats[0], threshold_);
                if (c < n_pu) {
                    roc_.add(stats[0], truth);
                }
                break;
            case PolicyKind::Hybrid: {
                const double fused = fused_statistic(stats, cfg_.hybrid_fusion_rule);
                detect_now_[u][c] = detect(fused, threshold_);
                if (c < n_pu) {
                    roc_.add(fused, truth);
                }
                break;
            }
            case PolicyKind::Proposed: {
                std::size_t above = 0;
                for (double x : stats) {
                    above += detect(x, threshold_) ? 1 : 0;
                }
                s.sensed_fraction[c] = static_cast<double>(above) / static_cast<double>(reports_);
                double llr = 0.0;
                for (double x : stats) {
                    llr += energy_llr(x, cfg_.sense_samples_n, sense_snr_);
                }
                const double b = std::clamp(s.belief[c], 1e-12, 1.0 - 1e-12);
                const double lo = logit(b) + llr;
                s.belief[c] = 1.0 / (1.0 + std::exp(-lo));
                if (c < n_pu) {
                    roc_.add(equivalent_statistic(lo, stationary_, cfg_.sense_samples_n, sense_snr_), truth);
                }
                break;
            }
            }
        }
    }
}

void Simulator::decide_proposed(std::size_t u, Pending& p)
{
    Su& s = sus_[u];
    const std::size_t C = cfg_.channels;
    auto& h = fading_now_[u];

    SlotObservation obs;
    obs.snr.resize(C);
    const double unit = s.path_gain / (cfg_.noise_psd * cfg_.channel_bandwidth_hz());
    for (std::size_t c = 0; c < C; ++c) {
        obs.snr[c] = std::norm(h[c]) * unit;
    }
    if (s.sensed_now) {
        obs.busy_fraction = s.sensed_fraction;
    }
    obs.queue_bits = s.backlog;
    obs.battery_j = s.battery.level;
    obs.harvest_j = 0.0;
    obs.belief = s.belief;
    const auto& state = s.featurizer->update(obs);

    const auto out = policy_forward(*params_, state, mask_);
    ActionIndex idx{};
    if (opts_.greedy) {
        idx = greedy_action(out, mask_);
    } else {
        Rng r = Rng::keyed(seed_, Stream::Policy, u, t_);
        idx = sample_action(out, r, mask_);
    }
    p.record = opts_.record && (s.sensed_now || s.backlog > 0.0);
    if (p.record) {
        p.state = state;
    }

    s.period = grid_.sense_periods[idx[SensePeriod]];
    p.index = idx;
    if (s.backlog <= 0.0) {
        p.action = decode(grid_, idx, false);
        return;
    }

    const double p_tx = grid_.ptx_levels[idx[Power]];
    const double slice = grid_.slices[idx[Slice]];
    const auto& sums = cascade(u);

    if (cfg_.channel_mode == ChannelMode::ArgmaxUtility) {
        std::vector<double> util(C);
        for (std::size_t c = 0; c < C; ++c) {
            double gain = std::norm(h[c]);
            if (cfg_.ris_mode == RisMode::Scan) {
                for (const auto& r : sums) {
                    gain = std::max(gain, std::norm(h[c] + r));
                }
            } else {
                gain = std::norm(h[c] + sums[idx[Codeword]]);
            }
            const double snr = p_tx * gain * s.path_gain / (cfg_.noise_psd * slice * cfg_.channel_bandwidth_hz());
            const double rate = rate_bits_per_slot(snr, slice * cfg_.channel_bandwidth_hz(), cfg_.slot_s);
            const double frac = rate > 0.0 ? std::min(1.0, s.backlog / rate) : 1.0;
            const double energy = p_tx * frac * cfg_.slot_s + cfg_.p_rx_w * cfg_.slot_s;
            const double b = s.belief[c];
            // expected rate rather than min(backlog, rate): the latter saturates and ties every SU to one channel
            util[c] = utility((1.0 - b) * rate, energy, b, cfg_.utility_lambda, cfg_.utility_mu);
        }
        idx[Channel] = assign_channel(util);
        // the choice must survive any positive rescaling of the utilities
        std::vector<double> scaled(util);
        for (auto& x : scaled) {
            x *= 2.5;
        }
        if (assign_channel(scaled) != idx[Channel]) {
            throw std::runtime_error("slot " + std::to_string(t_) + ": utility argmax not scale invariant");
        }
        p.action.transmit = s.backlog > 0.0 && util[idx[Channel]] > 0.0;
    } else {
        p.action.transmit = s.backlog > 0.0;
    }

    if (cfg_.ris_mode == RisMode::Scan) {
        RisLink link = book_.elements() > 0 ? ris_link(u) : RisLink{};
        link.h_d = h[idx[Channel]];
        std::vector<RisLink> pu_links;
        if (std::isfinite(cfg_.interference_cap_w) && book_.elements() > 0) {
            // one PU receiver per SU at the far edge of the placement annulus
            Rng r = Rng::keyed(seed_, Stream::PuLink, u, t_);
            RisLink pu = sample_ris_link(book_.elements(), cfg_.ris_element_gain, r);
            const double amp = std::sqrt(db_to_linear(-pathloss_db(cfg_.dist_max_m, cfg_.carrier_ghz)));
            pu.h_d *= amp;
            for (auto& x : pu.h_br) {
                x *= std::sqrt(amp);
            }
            for (auto& x : pu.h_rs) {
                x *= std::sqrt(amp);
            }
            pu_links.push_back(std::move(pu));
        }
        LinkBudget budget{s.distance, cfg_.carrier_ghz, cfg_.noise_psd, p_tx, slice * cfg_.channel_bandwidth_hz()};
        const auto choice = select_codeword(link, book_, budget, pu_links, cfg_.interference_cap_w);
        idx[Codeword] = choice.index;
        p.ris_ok = choice.feasible;
    }

    if (cfg_.ga_enabled && p.action.transmit && t_ % cfg_.ga_refine_every == 0) {
        const auto start = Clock::now();
        SlotContext ctx;
        ctx.grid = grid_;
        ctx.h_direct = h;
        ctx.cascade = book_.elements() > 0 ? sums : std::vector<cplx>{};
        ctx.path_gain = s.path_gain;
        ctx.noise_psd = cfg_.noise_psd;
        ctx.channel_bandwidth_hz = cfg_.channel_bandwidth_hz();
        ctx.slot_s = cfg_.slot_s;
        ctx.belief = s.belief;
        ctx.queue_bits = s.backlog;
        ctx.hol_age_slots = s.queue.empty() ? 0.0 : static_cast<double>(t_ - s.queue.front().arrival);
        ctx.deadline_slots = static_cast<double>(cfg_.deadline_slots);
        ctx.e_rx = cfg_.p_rx_w * cfg_.slot_s;
        ctx.e_sense_event = cfg_.sense_event_energy() * (1.0 + cfg_.hybrid_overhead_frac);
        ctx.ee_ref = cfg_.reward_ee_ref;
        ctx.bits_scale = cfg_.packet_bits;
        Rng r = Rng::keyed(seed_, Stream::Genetic, u, t_);
        auto pop = init_population(idx, grid_, ga_, r);
        const auto res = evolve(std::move(pop), ga_, ctx, weights_, r);
        idx = res.best;
        ga_s_ += seconds_since(start);
        ++ga_calls_;
    }

    p.index = idx;
    const bool transmit = p.action.transmit;
    p.action = decode(grid_, idx, transmit);
    p.h_eff = h[idx[Channel]] + sums[idx[Codeword]];
    s.period = p.action.sense_period;
}

void Simulator::phase_decide(std::vector<Pending>& pend)
{
    const std::size_t C = cfg_.channels;
    for (std::size_t u = 0; u < sus_.size(); ++u) {
        Su& s = sus_[u];
        Pending& p = pend[u];
        const bool needs_csi = kind_ == PolicyKind::Proposed || s.backlog > 0.0;
        if (!needs_csi) {
            continue;
        }
        auto& h = fading_now_[u];
        h.resize(C);
        for (std::size_t c = 0; c < C; ++c) {
            h[c] = fading(u, c);
        }
        switch (kind_) {
        case PolicyKind::Traditional: {
            TraditionalConfig tc;
            tc.fixed_p_tx = cfg_.baseline_fixed_p_tx;
            tc.threshold = threshold_;
            tc.channel_rule = cfg_.baseline_channel_rule;
            Rng r = Rng::keyed(seed_, Stream::Decision, u, t_);
            p.action = traditional_decide(tc, detect_now_[u], grid_, r);
            p.h_eff = h[p.action.channel] + cascade(u)[0];
            break;
        }
        case PolicyKind::Hybrid: {
            HybridConfig hc;
            hc.fusion_rule = cfg_.hybrid_fusion_rule;
            hc.cooperating_k = cfg_.hybrid_k;
            hc.threshold = threshold_;
            hc.backlog_ref_bits = 3.0 * cfg_.packet_bits;
            const cplx r0 = cascade(u)[0];
            std::vector<double> est(C);
            for (std::size_t c = 0; c < C; ++c) {
                est[c] = std::norm(h[c] + r0) * s.path_gain / (cfg_.noise_psd * cfg_.channel_bandwidth_hz());
            }
            p.action = hybrid_decide(hc, detect_now_[u], est, s.backlog, grid_);
            p.h_eff = h[p.action.channel] + r0;
            break;
        }
        case PolicyKind::Proposed:
            decide_proposed(u, p);
            break;
        }
    }
    if (kind_ == PolicyKind::Hybrid) {
        hybrid_slices(pend);
    }
}

void Simulator::hybrid_slices(std::vector<Pending>& pend) const
{
    std::vector<double> channel_backlog(cfg_.channels, 0.0);
    for (std::size_t u = 0; u < sus_.size(); ++u) {
        if (pend[u].action.transmit && sus_[u].backlog > 0.0) {
            channel_backlog[pend[u].action.channel] += sus_[u].backlog;
        }
    }
    for (std::size_t u = 0; u < sus_.size(); ++u) {
        if (pend[u].action.transmit && sus_[u].backlog > 0.0) {
            pend[u].action.slice = hybrid_slice(sus_[u].backlog, channel_backlog[pend[u].action.channel]);
        }
    }
}

void Simulator::phase_transmit(std::vector<Pending>& pend, std::vector<SuOutcome>& out, SlotOutcome& slot)
{
    const std::size_t C = cfg_.channels;
    const double bw = cfg_.channel_bandwidth_hz();
    std::vector<double> attempted(sus_.size(), 0.0);
    std::vector<double> frac(sus_.size(), 0.0);
    std::vector<std::vector<std::size_t>> on_channel(C);

    for (std::size_t u = 0; u < sus_.size(); ++u) {
        Su& s = sus_[u];
        SuOutcome& o = out[u];
        o.action = pend[u].action;
        if (!o.action.transmit || s.backlog <= 0.0) {
            o.action.transmit = false;
            continue;
        }
        if (s.energy_used >= cfg_.energy_budget_j) {
            o.action.transmit = false;
            o.suppressed = true;
            continue;
        }
        const double p_tx = o.action.p_tx * opts_.power_multiplier;
        const double snr = snr_from_gain(pend[u].h_eff, p_tx, s.path_gain, cfg_.noise_psd, o.action.slice * bw);
        const double rate = rate_bits_per_slot(snr, o.action.slice * bw, cfg_.slot_s);
        attempted[u] = std::min(s.backlog, rate);
        frac[u] = rate > 0.0 ? std::min(1.0, s.backlog / rate) : 1.0;
        o.collided = occ_.busy[o.action.channel] != 0;
        on_channel[o.action.channel].push_back(u);
        o.ledger.e_tx = tx_energy(p_tx, frac[u], cfg_.slot_s);
        o.ledger.e_rx = cfg_.p_rx_w * cfg_.slot_s;
        ptx_sum_ += p_tx;
        ++tx_slots_;
    }

    // quarter-slice packing in ascending SU order; any shared quarter is mutual loss
    for (std::size_t c = 0; c < C; ++c) {
        const auto& users = on_channel[c];
        slot.su_occupancy[c] = static_cast<std::uint8_t>(std::min<std::size_t>(users.size(), 255));
        if (users.size() < 2) {
            continue;
        }
        std::vector<unsigned> masks(users.size());
        std::size_t offset = 0;
        for (std::size_t i = 0; i < users.size(); ++i) {
            const auto quarters = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(out[users[i]].action.slice * 4.0)));
            unsigned m = 0;
            for (std::size_t q = 0; q < quarters; ++q) {
                m |= 1u << ((offset + q) % 4);
            }
            masks[i] = m;
            offset = (offset + quarters) % 4;
        }
        for (std::size_t i = 0; i < users.size(); ++i) {
            for (std::size_t j = i + 1; j < users.size(); ++j) {
                if (masks[i] & masks[j]) {
                    out[users[i]].contended = true;
                    out[users[j]].contended = true;
                }
            }
        }
    }

    const std::size_t n_pu = std::min(cfg_.n_pu, C);
    for (std::size_t c = 0; c < n_pu; ++c) {
        if (occ_.busy[c]) {
            ++pu_busy_pairs_;
            if (!on_channel[c].empty()) {
                ++pu_hit_pairs_;
            }
        }
    }
    for (std::size_t u = 0; u < sus_.size(); ++u) {
        SuOutcome& o = out[u];
        if (o.action.transmit && !o.collided && !o.contended) {
            o.bits = attempted[u];
        }
    }
}

SlotOutcome Simulator::step()
{
    const auto n = sus_.size();
    SlotOutcome slot;
    slot.slot = t_;
    slot.su.resize(n);
    slot.su_occupancy.assign(cfg_.channels, 0);

    // occupancy, then traffic
    phase_occupancy();
    slot.pu_busy = occ_.busy;
    phase_arrivals();

    // sensing and belief update
    phase_sensing(slot.su);

    // decisions, surface configuration included
    std::vector<Pending> pend(n);
    const auto start = Clock::now();
    phase_decide(pend);
    if (opts_.time_decisions) {
        decision_s_ += seconds_since(start);
    }

    // transmission and contention
    phase_transmit(pend, slot.su, slot);

    // utilization of idle channels, shared by every SU's reward
    std::size_t idle = 0;
    std::size_t used = 0;
    for (std::size_t c = 0; c < cfg_.channels; ++c) {
        if (!occ_.busy[c]) {
            ++idle;
            used += slot.su_occupancy[c] > 0 ? 1 : 0;
        }
    }
    const double util_frac = idle ? static_cast<double>(used) / static_cast<double>(idle) : 0.0;

    // energy, battery and queue bookkeeping
    for (std::size_t u = 0; u < n; ++u) {
        Su& s = sus_[u];
        SuOutcome& o = slot.su[u];
        if (!cfg_.no_eh) {
            if (hooks_.harvest) {
                o.ledger.e_harv = hooks_.harvest(u, t_);
            } else {
                Rng r = Rng::keyed(seed_, Stream::Harvest, u, t_);
                o.ledger.e_harv = harvest_sample(harvest_, r);
            }
        }
        const double consumed = o.ledger.consumed();
        const auto bs = battery_step(s.battery, consumed, o.ledger.e_harv);
        s.battery = bs.battery;
        o.battery = s.battery.level;
        o.grid = bs.grid_draw;
        s.energy_used += consumed;
        gross_ += consumed;
        harvested_ += o.ledger.e_harv;
        grid_total_ += bs.grid_draw;
        sense_energy_ += o.ledger.e_sense;

        if (o.bits > s.backlog + 1e-9) {
            throw std::runtime_error("slot " + std::to_string(t_) + ": SU " + std::to_string(u) +
                                     " delivered more bits than its backlog");
        }
        if (o.collided && !(o.action.transmit && occ_.busy[o.action.channel])) {
            throw std::runtime_error("slot " + std::to_string(t_) + ": collision flag inconsistent with PU truth");
        }
        double bits = o.bits;
        bits_total_ += bits;
        while (bits > 0.0 && !s.queue.empty()) {
            Packet& pk = s.queue.front();
            const double take = std::min(bits, pk.bits_left);
            pk.bits_left -= take;
            bits -= take;
            s.backlog -= take;
            if (pk.bits_left <= 1e-9) {
                const double delay = static_cast<double>(t_ - pk.arrival + 1);
                o.delays.push_back(delay);
                s.delay_sum += delay;
                ++s.delivered;
                s.queue.pop_front();
            }
        }
        while (!s.queue.empty() && s.queue.front().deadline <= t_) {
            s.backlog -= s.queue.front().bits_left;
            s.queue.pop_front();
            ++s.expired;
        }
        // expiry can leave out-of-order deadlines behind only if packet sizes differ; drain any stragglers
        for (auto it = s.queue.begin(); it != s.queue.end();) {
            if (it->deadline <= t_) {
                s.backlog -= it->bits_left;
                it = s.queue.erase(it);
                ++s.expired;
            } else {
                ++it;
            }
        }
        if (s.queue.empty() || s.backlog < 0.0) {
            s.backlog = s.queue.empty() ? 0.0 : std::max(0.0, s.backlog);
        }

        if (kind_ == PolicyKind::Proposed) {
            RewardTerms terms;
            terms.ee = (o.bits - cfg_.reward_ee_ref * consumed) / cfg_.packet_bits;
            terms.util = util_frac;
            terms.interference = o.collided ? 1.0 : 0.0;
            terms.latency = s.queue.empty()
                                ? 0.0
                                : static_cast<double>(t_ - s.queue.front().arrival + 1) /
                                      static_cast<double>(cfg_.deadline_slots);
            const double r = reward(terms, weights_);
            if (pend[u].record) {
                trajectories_[u].push_back({std::move(pend[u].state), pend[u].index, r});
            }
            if (s.sensed_now || o.action.transmit || !s.queue.empty()) {
                reward_sum_ += r;
                ++reward_steps_;
            }
        }

        if (opts_.trace) {
            auto& os = *opts_.trace;
            os << t_ << ',' << u << ',' << (o.action.transmit ? std::to_string(o.action.channel) : std::string("-1"))
               << ',' << o.action.sense_period << ',' << format_number(o.action.p_tx) << ','
               << format_number(o.action.slice) << ',' << o.action.codeword << ',' << (o.action.transmit ? 1 : 0)
               << ',' << format_number(o.bits) << ',' << (o.collided ? 1 : 0) << ','
               << format_number(o.ledger.e_tx) << ',' << format_number(o.ledger.e_rx) << ','
               << format_number(o.ledger.e_sense) << ',' << format_number(o.ledger.e_harv) << ','
               << format_number(o.battery) << ',' << format_number(o.grid) << '\n';
        }
    }
    ++t_;
    return slot;
}

MetricsRecord Simulator::metrics() const
{
    MetricsRecord m;
    m.auc = (roc_.busy_count() > 0 && roc_.idle_count() > 0) ? roc_.auc() : 0.5;
    const auto ee = efficiency_with_fallback(bits_total_, gross_ - harvested_, gross_);
    m.ee_bits_per_j = ee.bits_per_joule;
    m.ee_gross_fallback = ee.gross_fallback;

    double latency_sum = 0.0;
    std::size_t users = 0;
    for (const auto& s : sus_) {
        m.packets_generated += s.generated;
        m.packets_delivered += s.delivered;
        m.packets_pending += s.queue.size();
        if (s.delivered > 0) {
            latency_sum += s.delay_sum / static_cast<double>(s.delivered);
            ++users;
        }
    }
    m.latency_ms = users ? latency_sum / static_cast<double>(users) * cfg_.slot_s * 1000.0 : 0.0;
    const auto resolved = m.packets_generated - m.packets_pending;
    m.pdr = resolved ? static_cast<double>(m.packets_delivered) / static_cast<double>(resolved) : 1.0;
    m.pu_interference = pu_busy_pairs_ ? static_cast<double>(pu_hit_pairs_) / static_cast<double>(pu_busy_pairs_) : 0.0;
    m.total_energy_j = gross_;
    m.grid_energy_j = grid_total_;
    m.harvested_j = harvested_;
    m.throughput_bits = bits_total_;
    m.mean_p_tx = tx_slots_ ? ptx_sum_ / static_cast<double>(tx_slots_) : 0.0;
    m.sense_energy_j = sense_energy_;
    m.mean_return = reward_steps_ ? reward_sum_ / static_cast<double>(reward_steps_) : 0.0;
    m.decision_s = decision_s_;
    m.ga_s = ga_s_;
    m.ga_calls = ga_calls_;
    m.stream_checksum = checksum_;
    return m;
}

MetricsRecord run_episode(const ScenarioConfig& cfg, PolicyKind kind, std::uint64_t seed,
                          std::shared_ptr<const PolicyParams> params, SimOptions opts, SimHooks hooks)
{
    Simulator sim(cfg, kind, seed, std::move(params), opts, std::move(hooks));
    for (std::size_t t = 0; t < cfg.slots; ++t) {
        sim.step();
    }
    return sim.metrics();
}

} // namespace greencrn
