#include <doctest.h>

#include <set>

#include "greencrn/baselines.hpp"

using namespace greencrn;

namespace {

ActionGrid grid_of(std::size_t channels)
{
    ActionGrid g;
    g.channels = channels;
    g.ptx_levels = ActionGrid::power_levels(0.1, 2.0, 20);
    g.codewords = 32;
    return g;
}

} // namespace

TEST_SUITE("baselines")
{
    TEST_CASE("traditional controller")
    {
        const auto g = grid_of(6);
        Rng rng(1);
        TraditionalConfig cfg;

        SUBCASE("all busy defers")
        {
            CHECK_FALSE(traditional_decide(cfg, std::vector<bool>(6, true), g, rng).transmit);
        }
        SUBCASE("single idle channel under both rules")
        {
            std::vector<bool> busy(6, true);
            busy[4] = false;
            for (auto rule : {ChannelRule::RandomIdle, ChannelRule::FirstIdle}) {
                cfg.channel_rule = rule;
                const auto a = traditional_decide(cfg, busy, g, rng);
                CHECK(a.transmit);
                CHECK(a.channel == 4);
            }
        }
        SUBCASE("first idle picks the lowest idle index")
        {
            std::vector<bool> busy(6, true);
            busy[2] = false;
            busy[5] = false;
            cfg.channel_rule = ChannelRule::FirstIdle;
            CHECK(traditional_decide(cfg, busy, g, rng).channel == 2);
        }
        SUBCASE("random idle only picks idle channels and reaches each of them")
        {
            const std::vector<bool> busy{true, false, true, false, false, true};
            std::set<std::size_t> seen;
            for (int i = 0; i < 300; ++i) {
                const auto a = traditional_decide(cfg, busy, g, rng);
                CHECK_FALSE(busy[a.channel]);
                seen.insert(a.channel);
            }
            CHECK(seen == std::set<std::size_t>{1, 3, 4});
        }
        SUBCASE("fixed power, full band, codeword 0, on the grid")
        {
            cfg.fixed_p_tx = 1.0;
            const auto a = traditional_decide(cfg, std::vector<bool>(6, false), g, rng);
            CHECK(a.p_tx == 1.0);
            CHECK(a.slice == 1.0);
            CHECK(a.codeword == 0);
            CHECK(a.sense_period == 1);
            CHECK(g.contains(encode(g, a)));
        }
        SUBCASE("power outside the legal range is rejected")
        {
            cfg.fixed_p_tx = 2.5;
            CHECK_THROWS(cfg.validate());
        }
    }

    TEST_CASE("hybrid controller")
    {
        const auto g = grid_of(4);
        HybridConfig cfg;
        cfg.backlog_ref_bits = 3000.0;

        SUBCASE("all fused busy defers")
        {
            CHECK_FALSE(hybrid_decide(cfg, std::vector<bool>(4, true), {1, 2, 3, 4}, 1000.0, g).transmit);
        }
        SUBCASE("empty queue gets the lowest rung and the minimal slice")
        {
            const auto a = hybrid_decide(cfg, {true, false, true, true}, {1, 2, 3, 4}, 0.0, g);
            CHECK(a.transmit);
            CHECK(a.channel == 1);
            CHECK(a.p_tx == 0.5);
            CHECK(a.slice == 0.25);
            CHECK(a.codeword == 0);
        }
        SUBCASE("greedy highest SNR among idle channels")
        {
            const auto a = hybrid_decide(cfg, {false, false, true, true}, {3.0, 7.1, 50.0, 60.0}, 500.0, g);
            CHECK(a.channel == 1);
            const auto tie = hybrid_decide(cfg, {false, false, false, true}, {5.0, 5.0, 5.0, 9.0}, 500.0, g);
            CHECK(tie.channel == 0);
        }
        SUBCASE("power ladder by backlog terciles")
        {
            CHECK(hybrid_power(cfg, 0.0) == 0.5);
            CHECK(hybrid_power(cfg, 999.0) == 0.5);
            CHECK(hybrid_power(cfg, 1000.0) == 1.0);
            CHECK(hybrid_power(cfg, 1999.0) == 1.0);
            CHECK(hybrid_power(cfg, 2000.0) == 2.0);
            CHECK(hybrid_power(cfg, 3000.0) == 2.0);
            CHECK(hybrid_power(cfg, 1e9) == 2.0);
        }
        SUBCASE("backlog-proportional slices")
        {
            CHECK(hybrid_slice(1000.0, 1000.0) == 1.0);
            CHECK(hybrid_slice(1000.0, 2000.0) == 0.5);
            CHECK(hybrid_slice(1000.0, 3000.0) == 0.25);
            CHECK(hybrid_slice(1.0, 1000.0) == 0.25);
            CHECK(hybrid_slice(0.0, 0.0) == 0.25);
        }
        SUBCASE("actions stay on the shared grid")
        {
            Rng rng(3);
            for (int i = 0; i < 200; ++i) {
                std::vector<bool> busy(4);
                std::vector<double> snr(4);
                for (std::size_t c = 0; c < 4; ++c) {
                    busy[c] = rng.uniform() < 0.5;
                    snr[c] = 10.0 * rng.uniform();
                }
                auto a = hybrid_decide(cfg, busy, snr, 5000.0 * rng.uniform(), g);
                a.slice = hybrid_slice(rng.uniform() * 100.0, 100.0);
                CHECK(g.contains(encode(g, a)));
                CHECK(a.p_tx >= 0.1);
                CHECK(a.p_tx <= 2.0);
            }
        }
        SUBCASE("mismatched estimate vector is an error")
        {
            CHECK_THROWS(hybrid_decide(cfg, {false, false}, {1.0}, 0.0, g));
        }
    }
}
