#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "greencrn/genetic.hpp"

using namespace greencrn;

namespace {

ActionGrid small_grid()
{
    ActionGrid g;
    g.channels = 6;
    g.ptx_levels = ActionGrid::power_levels(0.1, 2.0, 8);
    g.codewords = 8;
    return g;
}

Genome random_genome(const ActionGrid& g, Rng& rng)
{
    const auto card = g.cardinalities();
    Genome x{};
    for (std::size_t h = 0; h < HeadCount; ++h) {
        x[h] = rng.below(card[h]);
    }
    return x;
}

SlotContext random_context(const ActionGrid& g, Rng& rng)
{
    SlotContext ctx;
    ctx.grid = g;
    for (std::size_t c = 0; c < g.channels; ++c) {
        ctx.h_direct.push_back(sample_rayleigh(rng));
        ctx.belief.push_back(rng.uniform());
    }
    for (std::size_t k = 0; k < g.codewords; ++k) {
        ctx.cascade.push_back(0.3 * sample_rayleigh(rng));
    }
    ctx.path_gain = 1e-9 * (0.5 + rng.uniform());
    ctx.noise_psd = 4e-16;
    ctx.channel_bandwidth_hz = 1e6;
    ctx.slot_s = 1e-3;
    ctx.queue_bits = 1000.0 * static_cast<double>(rng.below(5));
    ctx.hol_age_slots = static_cast<double>(rng.below(20));
    ctx.deadline_slots = 100.0;
    ctx.e_rx = 1e-4;
    ctx.e_sense_event = 6e-5;
    ctx.ee_ref = 2e5;
    ctx.bits_scale = 1000.0;
    return ctx;
}

const RewardWeights kWeights{1.0, 0.0, 20.0, 20.0, 0.0, 0.0};

} // namespace

TEST_SUITE("genetic")
{
    TEST_CASE("initial population around the seed")
    {
        const auto g = small_grid();
        Rng rng(1);
        for (int trial = 0; trial < 100; ++trial) {
            const Genome seed = random_genome(g, rng);
            const GaBudget budget{20, 10, 100, 2};
            const auto pop = init_population(seed, g, budget, rng);
            REQUIRE(pop.size() == 20);
            CHECK(pop[0] == seed);
            for (const auto& x : pop) {
                CHECK(g.contains(x));
                std::size_t moved = 0;
                for (std::size_t h = 0; h < HeadCount; ++h) {
                    const auto d = x[h] > seed[h] ? x[h] - seed[h] : seed[h] - x[h];
                    CHECK(d <= 2);
                    moved += d > 0 ? 1 : 0;
                }
                CHECK(moved <= 2);
            }
        }
    }

    TEST_CASE("zero radius copies the seed")
    {
        const auto g = small_grid();
        Rng rng(2);
        const Genome seed = random_genome(g, rng);
        for (const auto& x : init_population(seed, g, {12, 10, 100, 0}, rng)) {
            CHECK(x == seed);
        }
    }

    TEST_CASE("off-grid seed is rejected")
    {
        const auto g = small_grid();
        Rng rng(3);
        Genome bad{};
        bad[Channel] = g.channels;
        CHECK_THROWS(init_population(bad, g, {}, rng));
    }

    TEST_CASE("fitness is deterministic and penalizes busy channels")
    {
        const auto g = small_grid();
        Rng rng(4);
        for (int trial = 0; trial < 50; ++trial) {
            auto ctx = random_context(g, rng);
            ctx.queue_bits = 2000.0;
            const Genome x = random_genome(g, rng);
            CHECK(fitness(x, ctx, kWeights) == fitness(x, ctx, kWeights));
            auto busy = ctx;
            busy.belief[x[Channel]] = 1.0;
            auto idle = ctx;
            idle.belief[x[Channel]] = 0.0;
            CHECK(fitness(x, busy, kWeights) < fitness(x, idle, kWeights));
        }
    }

    TEST_CASE("zero generations return the best of the initial population")
    {
        const auto g = small_grid();
        Rng rng(5);
        const auto ctx = random_context(g, rng);
        const Genome seed = random_genome(g, rng);
        const GaBudget budget{20, 0, 100, 1};
        auto pop = init_population(seed, g, budget, rng);
        double best = -1e300;
        for (const auto& x : pop) {
            best = std::max(best, fitness(x, ctx, kWeights));
        }
        const auto res = evolve(pop, budget, ctx, kWeights, rng);
        CHECK(res.best_fitness == best);
        CHECK(res.best_fitness >= fitness(seed, ctx, kWeights));
        CHECK(res.best_so_far.size() == 1);
    }

    TEST_CASE("flat fitness returns a member of the population")
    {
        const auto g = small_grid();
        Rng rng(6);
        const Genome seed = random_genome(g, rng);
        const GaBudget budget{10, 5, 100, 1};
        const auto pop = init_population(seed, g, budget, rng);
        const auto res = evolve(pop, budget, g, [](const Genome&) { return 1.0; }, rng);
        CHECK(res.best == seed);
        CHECK(g.contains(res.best));
    }

    TEST_CASE("refinement never regresses and best-so-far is monotone")
    {
        const auto g = small_grid();
        Rng rng(7);
        const GaBudget budget{20, 10, 100, 1};
        for (int trial = 0; trial < 200; ++trial) {
            const auto ctx = random_context(g, rng);
            const Genome seed = random_genome(g, rng);
            const auto res = evolve(init_population(seed, g, budget, rng), budget, ctx, kWeights, rng);
            CHECK(res.best_fitness >= fitness(seed, ctx, kWeights));
            CHECK(res.best_fitness == fitness(res.best, ctx, kWeights));
            CHECK(g.contains(res.best));
            REQUIRE(res.best_so_far.size() == budget.generations + 1);
            for (std::size_t i = 1; i < res.best_so_far.size(); ++i) {
                CHECK(res.best_so_far[i] >= res.best_so_far[i - 1]);
            }
        }
    }

    TEST_CASE("every evaluated genome stays on the grid")
    {
        const auto g = small_grid();
        Rng rng(8);
        const auto ctx = random_context(g, rng);
        bool all_valid = true;
        const GaBudget budget{20, 10, 100, 3};
        const auto pop = init_population(random_genome(g, rng), g, budget, rng);
        evolve(pop, budget, g,
               [&](const Genome& x) {
                   all_valid = all_valid && g.contains(x);
                   return g.contains(x) ? fitness(x, ctx, kWeights) : -1e300;
               },
               rng);
        CHECK(all_valid);
    }

    TEST_CASE("evolve is deterministic for a fixed seed")
    {
        const auto g = small_grid();
        Rng setup(9);
        const auto ctx = random_context(g, setup);
        const GaBudget budget{20, 10, 100, 1};
        const auto pop = init_population(random_genome(g, setup), g, budget, setup);
        Rng a(99);
        Rng b(99);
        const auto ra = evolve(pop, budget, ctx, kWeights, a);
        const auto rb = evolve(pop, budget, ctx, kWeights, b);
        CHECK(ra.best == rb.best);
        CHECK(ra.best_so_far == rb.best_so_far);
    }

    TEST_CASE("shrunk grid: evolve reaches the brute-force optimum")
    {
        ActionGrid g;
        g.sense_periods = {1};
        g.channels = 5;
        g.ptx_levels = ActionGrid::power_levels(0.1, 2.0, 5);
        g.slices = {1.0};
        g.codewords = 1;
        const GaBudget budget{20, 10, 100, 1};
        int hits = 0;
        for (int trial = 0; trial < 100; ++trial) {
            Rng rng(500 + trial);
            const auto ctx = random_context(g, rng);
            double brute = -1e300;
            for (std::size_t c = 0; c < 5; ++c) {
                for (std::size_t p = 0; p < 5; ++p) {
                    brute = std::max(brute, fitness(Genome{0, c, p, 0, 0}, ctx, kWeights));
                }
            }
            std::vector<Genome> pop;
            for (std::size_t i = 0; i < budget.population; ++i) {
                pop.push_back(random_genome(g, rng));
            }
            const auto res = evolve(pop, budget, ctx, kWeights, rng);
            CHECK(res.best_fitness <= brute);
            hits += res.best_fitness == brute ? 1 : 0;
        }
        CHECK(hits >= 95);
    }

    TEST_CASE("one-dimensional concave toy: global argmax in at least 95 of 100 runs")
    {
        ActionGrid g;
        g.sense_periods = {1};
        g.channels = 1;
        g.ptx_levels = {1.0};
        g.slices = {1.0};
        g.codewords = 32;
        const GaBudget budget{20, 10, 100, 1};
        int hits = 0;
        for (int run = 0; run < 100; ++run) {
            Rng rng(1000 + run);
            const auto target = static_cast<double>(rng.below(32));
            std::vector<Genome> pop;
            for (std::size_t i = 0; i < budget.population; ++i) {
                pop.push_back(Genome{0, 0, 0, 0, rng.below(32)});
            }
            const auto res = evolve(
                pop, budget, g,
                [&](const Genome& x) {
                    const double d = static_cast<double>(x[Codeword]) - target;
                    return -d * d;
                },
                rng);
            hits += static_cast<double>(res.best[Codeword]) == target ? 1 : 0;
        }
        CHECK(hits >= 95);
    }

    TEST_CASE("empty population is an error")
    {
        const auto g = small_grid();
        Rng rng(10);
        CHECK_THROWS(evolve({}, GaBudget{}, g, [](const Genome&) { return 0.0; }, rng));
        CHECK_THROWS(GaBudget{1, 10, 100, 1}.validate());
    }
}
