#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "greencrn/energy.hpp"

using namespace greencrn;

TEST_SUITE("energy")
{
    TEST_CASE("slot energy balance")
    {
        CHECK(slot_energy({}) == 0.0);
        CHECK(slot_energy({0.5, 0.1, 0.05, 0.2}) == doctest::Approx(0.45));
        CHECK(slot_energy({0.0, 0.0, 0.0, 0.3}) == doctest::Approx(-0.3));
    }

    TEST_CASE("harvest sampling")
    {
        Rng rng(4);
        SUBCASE("degenerate efficiency interval")
        {
            const HarvestModel m{1.0, 0.3, 0.3, 1.0};
            CHECK(harvest_sample(m, rng) == doctest::Approx(0.3));
        }
        SUBCASE("draws stay inside the efficiency band")
        {
            const HarvestModel m{0.01, 0.2, 0.5, 1e-3};
            for (int i = 0; i < 1000; ++i) {
                const double e = harvest_sample(m, rng);
                CHECK(e >= 0.2 * 0.01 * 1e-3);
                CHECK(e <= 0.5 * 0.01 * 1e-3);
            }
        }
        SUBCASE("mean is 0.35 P tau")
        {
            const HarvestModel m{2.0, 0.2, 0.5, 1e-3};
            const int n = 100000;
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                acc += harvest_sample(m, rng);
            }
            const double want = 0.35 * 2.0 * 1e-3;
            CHECK(std::abs(acc / n - want) <= 0.01 * want);
        }
        SUBCASE("bad bounds are rejected")
        {
            const HarvestModel bad{1.0, 0.6, 0.5, 1e-3};
            CHECK_THROWS(bad.validate());
        }
    }

    TEST_CASE("battery update")
    {
        SUBCASE("interior")
        {
            const auto s = battery_step({5.0, 10.0, 0.0}, 2.0, 1.0);
            CHECK(s.battery.level == doctest::Approx(4.0));
            CHECK(s.grid_draw == 0.0);
        }
        SUBCASE("deficit goes to the grid")
        {
            const auto s = battery_step({1.0, 10.0, 0.0}, 3.0, 0.5);
            CHECK(s.battery.level == 0.0);
            CHECK(s.grid_draw == doctest::Approx(1.5));
            CHECK(s.battery.grid_draw_total == doctest::Approx(1.5));
        }
        SUBCASE("surplus above capacity is discarded")
        {
            const auto s = battery_step({9.0, 10.0, 0.0}, 0.0, 5.0);
            CHECK(s.battery.level == doctest::Approx(10.0));
            CHECK(s.overflow == doctest::Approx(4.0));
            CHECK(battery_update({9.0, 10.0, 0.0}, 0.0, 5.0).level == doctest::Approx(10.0));
        }
        SUBCASE("conservation")
        {
            Rng rng(12);
            Battery b{0.3, 1.0, 0.0};
            for (int i = 0; i < 1000; ++i) {
                const double used = 0.2 * rng.uniform();
                const double got = 0.2 * rng.uniform();
                const auto s = battery_step(b, used, got);
                CHECK(s.battery.level >= 0.0);
                CHECK(s.battery.level <= b.capacity);
                CHECK(s.battery.level == doctest::Approx(b.level + got + s.grid_draw - used - s.overflow));
                b = s.battery;
            }
        }
        SUBCASE("negative flows are rejected")
        {
            CHECK_THROWS(battery_step({}, -1.0, 0.0));
        }
    }

    TEST_CASE("energy efficiency")
    {
        CHECK(energy_efficiency(0.0, 20.0) == 0.0);
        CHECK(energy_efficiency(100.0, 20.0) == doctest::Approx(5.0));
        CHECK_THROWS_AS(energy_efficiency(100.0, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(energy_efficiency(100.0, -1.0), std::invalid_argument);

        const auto net = efficiency_with_fallback(100.0, 10.0, 30.0);
        CHECK(net.bits_per_joule == doctest::Approx(10.0));
        CHECK_FALSE(net.gross_fallback);
        const auto gross = efficiency_with_fallback(100.0, -2.0, 25.0);
        CHECK(gross.bits_per_joule == doctest::Approx(4.0));
        CHECK(gross.gross_fallback);
        CHECK(efficiency_with_fallback(0.0, 0.0, 0.0).bits_per_joule == 0.0);
    }

    TEST_CASE("transmit energy")
    {
        CHECK(tx_energy(2.0, 1.0, 1e-3) == doctest::Approx(0.002));
        CHECK(tx_energy(1.0, 0.0, 1e-3) == 0.0);
        CHECK(tx_energy(0.1, 0.5, 1e-3) == doctest::Approx(5e-5));
        CHECK_THROWS(tx_energy(1.0, 1.5, 1e-3));
    }
}
