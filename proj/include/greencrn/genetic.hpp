#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "greencrn/action.hpp"
#include "greencrn/channel_model.hpp"
#include "greencrn/policy.hpp"
#include "greencrn/rng.hpp"

namespace greencrn {

/// Action fields as grid indices, in head order.
using Genome = ActionIndex;

struct GaBudget {
    std::size_t population = 20;
    std::size_t generations = 10;
    std::size_t refine_every = 100;
    std::size_t perturb_radius = 1;

    void validate() const;
};

/// Frozen view of one SU's slot used for one-slot lookahead scoring. Fading is
/// the realization already drawn for this slot; nothing here is mutated.
struct SlotContext {
    ActionGrid grid;
    std::vector<cplx> h_direct;  // per channel, small-scale only
    std::vector<cplx> cascade;   // per codeword reflected sum (empty without a surface)
    double path_gain = 1.0;
    double noise_psd = 1e-16;
    double channel_bandwidth_hz = 1e6;
    double slot_s = 1e-3;
    std::vector<double> belief;  // per channel busy probability
    double queue_bits = 0.0;
    double hol_age_slots = 0.0;
    double deadline_slots = 100.0;
    double e_rx = 0.0;           // per transmit slot
    double e_sense_event = 0.0;  // per sensing event, overhead included
    double ee_ref = 0.0;         // bits/J against which energy is priced
    double bits_scale = 1000.0;

    /// Expected SNR for the genome's channel, power, slice and codeword.
    double snr(const Genome& g) const;
};

/// Seed at index 0 followed by population-1 copies that each move up to two
/// fields by at most perturb_radius grid steps, clamped to the grid.
std::vector<Genome> init_population(const Genome& seed, const ActionGrid& grid, const GaBudget& budget, Rng& rng);

/// alpha * expected EE term - gamma * collision risk - delta * expected latency
/// term, all on a one-slot lookahead.
double fitness(const Genome& genome, const SlotContext& ctx, const RewardWeights& w);

struct EvolveResult {
    Genome best{};
    double best_fitness = 0.0;
    std::vector<double> best_so_far; // one entry per generation, initial population first
};

using FitnessFn = std::function<double(const Genome&)>;

/// Tournament (size 2) selection, uniform crossover, +/-1 step mutation with
/// probability 0.1 per field and single-genome elitism for G generations.
EvolveResult evolve(std::vector<Genome> population, const GaBudget& budget, const ActionGrid& grid,
                    const FitnessFn& fit, Rng& rng);

inline EvolveResult evolve(std::vector<Genome> population, const GaBudget& budget, const SlotContext& ctx,
                           const RewardWeights& w, Rng& rng)
{
    return evolve(std::move(population), budget, ctx.grid,
                  [&](const Genome& g) { return fitness(g, ctx, w); }, rng);
}

} // namespace greencrn
