#include "greencrn/genetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace greencrn {

namespace {

constexpr double kMutationProb = 0.1;
constexpr double kCrossoverProb = 0.5;

} // namespace

void GaBudget::validate() const
{
    if (population < 2) {
        throw std::invalid_argument("GA population must be at least 2");
    }
    if (refine_every < 1) {
        throw std::invalid_argument("GA refinement interval must be at least 1 slot");
    }
}

double SlotContext::snr(const Genome& g) const
{
    const cplx reflected = cascade.empty() ? cplx{} : cascade.at(g[Codeword]);
    const cplx h = h_direct.at(g[Channel]) + reflected;
    const double slice = grid.slices.at(g[Slice]);
    return snr_from_gain(h, grid.ptx_levels.at(g[Power]), path_gain, noise_psd, slice * channel_bandwidth_hz);
}

std::vector<Genome> init_population(const Genome& seed, const ActionGrid& grid, const GaBudget& budget, Rng& rng)
{
    budget.validate();
    if (!grid.contains(seed)) {
        throw std::invalid_argument("GA seed action lies outside its grid");
    }
    std::vector<Genome> pop;
    pop.reserve(budget.population);
    pop.push_back(seed);
    const auto radius = static_cast<long>(budget.perturb_radius);
    for (std::size_t i = 1; i < budget.population; ++i) {
        std::array<long, HeadCount> raw{};
        for (std::size_t h = 0; h < HeadCount; ++h) {
            raw[h] = static_cast<long>(seed[h]);
        }
        if (radius > 0) {
            const std::size_t fields = 1 + rng.below(2);
            const std::size_t first = rng.below(HeadCount);
            std::size_t second = rng.below(HeadCount - 1);
            if (second >= first) {
                ++second;
            }
            for (std::size_t f = 0; f < fields; ++f) {
                const std::size_t head = f == 0 ? first : second;
                // non-zero offset in [-radius, radius]
                auto step = static_cast<long>(rng.below(static_cast<std::uint64_t>(2 * radius))) - radius;
                if (step >= 0) {
                    ++step;
                }
                raw[head] += step;
            }
        }
        pop.push_back(grid.clamp(raw));
    }
    return pop;
}

double fitness(const Genome& genome, const SlotContext& ctx, const RewardWeights& w)
{
    const double belief = ctx.belief.at(genome[Channel]);
    const double slice = ctx.grid.slices.at(genome[Slice]);
    const double p_tx = ctx.grid.ptx_levels.at(genome[Power]);
    const double rate = rate_bits_per_slot(ctx.snr(genome), slice * ctx.channel_bandwidth_hz, ctx.slot_s);
    const double sent = std::min(ctx.queue_bits, rate);
    const double frac = rate > 0.0 ? std::min(1.0, ctx.queue_bits / rate) : 1.0;
    const double energy = p_tx * frac * ctx.slot_s + ctx.e_rx +
                          ctx.e_sense_event / static_cast<double>(ctx.grid.sense_periods.at(genome[SensePeriod]));
    const double expected_bits = (1.0 - belief) * sent;
    const double ee_term = (expected_bits - ctx.ee_ref * energy) / ctx.bits_scale;
    const double cleared = ctx.queue_bits > 0.0 ? expected_bits / ctx.queue_bits : 1.0;
    const double latency_term = (1.0 - cleared) * (ctx.hol_age_slots + 1.0) / ctx.deadline_slots;
    return w.alpha * ee_term - w.gamma * belief - w.delta * latency_term;
}

EvolveResult evolve(std::vector<Genome> population, const GaBudget& budget, const ActionGrid& grid,
                    const FitnessFn& fit, Rng& rng)
{
    if (population.empty()) {
        throw std::invalid_argument("GA needs a non-empty population");
    }
    const std::size_t m = population.size();
    const auto card = grid.cardinalities();
    std::vector<double> scores(m);

    EvolveResult result;
    auto score_all = [&] {
        for (std::size_t i = 0; i < m; ++i) {
            scores[i] = fit(population[i]);
        }
        // first maximum wins so the seed keeps priority on ties
        const auto best = static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
        if (result.best_so_far.empty() || scores[best] > result.best_fitness) {
            result.best = population[best];
            result.best_fitness = scores[best];
        }
        result.best_so_far.push_back(result.best_fitness);
    };
    score_all();

    auto tournament = [&]() -> const Genome& {
        const std::size_t a = rng.below(m);
        const std::size_t b = rng.below(m);
        if (scores[a] > scores[b] || (scores[a] == scores[b] && a <= b)) {
            return population[a];
        }
        return population[b];
    };

    std::vector<Genome> next;
    next.reserve(m);
    for (std::size_t gen = 0; gen < budget.generations; ++gen) {
        next.clear();
        next.push_back(result.best);
        while (next.size() < m) {
            const Genome& pa = tournament();
            const Genome& pb = tournament();
            Genome child{};
            for (std::size_t h = 0; h < HeadCount; ++h) {
                child[h] = rng.uniform() < kCrossoverProb ? pa[h] : pb[h];
                if (rng.uniform() < kMutationProb) {
                    if (rng.uniform() < 0.5) {
                        child[h] = child[h] > 0 ? child[h] - 1 : 0;
                    } else {
                        child[h] = std::min(child[h] + 1, card[h] - 1);
                    }
                }
            }
            next.push_back(child);
        }
        population.swap(next);
        score_all();
    }
    return result;
}

} // namespace greencrn
