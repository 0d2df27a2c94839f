#include <doctest.h>

#include <cmath>
#include <sstream>

#include "greencrn/harness.hpp"
#include "greencrn/train.hpp"
#include "test_util.hpp"

using namespace greencrn;
using namespace greencrn::test;

namespace {

ScenarioConfig tiny()
{
    ScenarioConfig cfg;
    cfg.channels = 4;
    cfg.bandwidth_hz = 4e6;
    cfg.n_pu = 2;
    cfg.n_su = 4;
    cfg.slots = 200;
    cfg.seeds = 2;
    cfg.ris_elements = 8;
    cfg.codebook_size = 4;
    cfg.arrival_rate = 50.0;
    cfg.ga_refine_every = 50;
    cfg.sweep_densities = {3, 5};
    return cfg;
}

std::shared_ptr<const PolicyParams> params_for(const ScenarioConfig& cfg)
{
    return std::make_shared<const PolicyParams>(initial_policy(cfg, 11));
}

template <typename F>
std::string capture(F&& write)
{
    std::ostringstream os;
    write(os);
    return os.str();
}

} // namespace

TEST_SUITE("harness_cli")
{
    TEST_CASE("empty config text yields the defaults")
    {
        const auto cfg = parse_config("");
        const ScenarioConfig def;
        CHECK(echo_config(cfg) == echo_config(def));
        CHECK(cfg.channels == 20);
        CHECK(cfg.n_su == 50);
        CHECK(cfg.ptx_max == 2.0);
    }

    TEST_CASE("assignments and comments")
    {
        const auto cfg = parse_config("# scenario\nchannels=20\n\nseed=7  # trailing\n");
        CHECK(cfg.channels == 20);
        CHECK(cfg.seed == 7);
    }

    TEST_CASE("out-of-range values name the key")
    {
        try {
            parse_config("ptx_max=5\n");
            FAIL("accepted ptx_max=5");
        } catch (const ConfigError& e) {
            CHECK(e.key() == "ptx_max");
            CHECK(std::string(e.what()).find("ptx_max") != std::string::npos);
        }
    }

    TEST_CASE("malformed input reports the line")
    {
        for (const auto& [text, line] : std::vector<std::pair<std::string, std::size_t>>{
                 {"channels=20\nbogus_key=3\n", 2},
                 {"seed=1\n\nseed=2\n", 3},
                 {"no equals sign\n", 1},
                 {"channels=twenty\n", 1},
             }) {
            CAPTURE(text);
            try {
                parse_config(text);
                FAIL("accepted malformed config");
            } catch (const ConfigError& e) {
                CHECK(e.line() == line);
            }
        }
    }

    TEST_CASE("echo round-trips")
    {
        auto cfg = tiny();
        cfg.lr = 0.0123;
        cfg.hybrid_fusion_rule = FusionRule::Majority;
        cfg.baseline_channel_rule = ChannelRule::FirstIdle;
        cfg.sense_threshold = 71.25;
        const auto text = echo_config(cfg);
        CHECK(echo_config(parse_config(text)) == text);
        CHECK(parse_config(text).lr == 0.0123);

        std::size_t lines = 0;
        for (char ch : text) {
            lines += ch == '\n' ? 1 : 0;
        }
        CHECK(lines == config_keys().size());
    }

    TEST_CASE("seed list")
    {
        auto cfg = tiny();
        cfg.seed = 40;
        cfg.seeds = 3;
        CHECK(seed_list(cfg) == std::vector<std::uint64_t>{40, 41, 42});
    }

    TEST_CASE("parallel_map keeps index order for any worker count")
    {
        const std::function<std::uint64_t(std::size_t)> task = [](std::size_t i) {
            std::uint64_t h = i + 1;
            for (int k = 0; k < 1000; ++k) {
                h = h * 6364136223846793005ULL + 1442695040888963407ULL;
            }
            return h;
        };
        const auto one = parallel_map<std::uint64_t>(37, 1, task);
        CHECK(parallel_map<std::uint64_t>(37, 4, task) == one);
        CHECK(parallel_map<std::uint64_t>(37, 64, task) == one);
        CHECK(parallel_map<std::uint64_t>(0, 4, task).empty());
    }

    TEST_CASE("summary schema")
    {
        const auto cfg = tiny();
        const auto res = run_compare(cfg, all_policies(), params_for(cfg), 1);
        const auto rows = parse_csv(capture([&](std::ostream& os) { write_summary_csv(os, res); }));
        REQUIRE(rows.size() == 4);
        CHECK(rows[0] == Row{"policy", "auc", "ee_bits_per_j", "latency_ms", "pdr", "pu_interf_pct",
                             "total_energy_j", "grid_energy_j", "throughput_bits"});
        CHECK(rows[1][0] == "traditional");
        CHECK(rows[2][0] == "hybrid");
        CHECK(rows[3][0] == "proposed");
        for (const auto& r : rows) {
            CHECK(r.size() == 9);
        }

        const auto crn = parse_csv(capture([&](std::ostream& os) { write_crn_csv(os, res); }));
        REQUIRE(crn.size() == 1 + 3 * cfg.seeds);
        for (std::size_t s = 0; s < cfg.seeds; ++s) {
            // same stream for every controller on the same seed
            CHECK(crn[1 + s][2] == crn[1 + cfg.seeds + s][2]);
            CHECK(crn[1 + s][2] == crn[1 + 2 * cfg.seeds + s][2]);
        }
        const auto table = capture([&](std::ostream& os) { write_summary_table(os, res); });
        CHECK(table.find("+/-") != std::string::npos);
    }

    TEST_CASE("one seed, one policy equals the run record")
    {
        auto cfg = tiny();
        cfg.seeds = 1;
        const auto res = run_compare(cfg, {PolicyKind::Hybrid, PolicyKind::Hybrid}, nullptr, 2);
        const auto m = run_episode(cfg, PolicyKind::Hybrid, cfg.seed);
        REQUIRE(res.rows.size() == 2);
        CHECK(res.rows[0].mean.throughput_bits == m.throughput_bits);
        CHECK(res.rows[0].mean.total_energy_j == m.total_energy_j);
        CHECK(res.rows[0].mean.pdr == m.pdr);
        CHECK(res.rows[0].stddev.throughput_bits == 0.0);
        CHECK(res.rows[1].mean.throughput_bits == res.rows[0].mean.throughput_bits);
        CHECK(res.rows[1].mean.latency_ms == res.rows[0].mean.latency_ms);
    }

    TEST_CASE("compare needs a policy for the proposed controller")
    {
        CHECK_THROWS(run_compare(tiny(), all_policies(), nullptr, 1));
    }

    TEST_CASE("output bytes do not depend on worker count")
    {
        const auto cfg = tiny();
        const auto p = params_for(cfg);
        auto summary = [&](std::size_t w) {
            return capture([&](std::ostream& os) { write_summary_csv(os, run_compare(cfg, all_policies(), p, w)); });
        };
        CHECK(summary(1) == summary(4));
        auto density = [&](std::size_t w) {
            return capture([&](std::ostream& os) { write_density_csv(os, sweep_density(cfg, {3, 5}, p, w)); });
        };
        CHECK(density(1) == density(3));
    }

    TEST_CASE("density point matches compare at the same SU count")
    {
        auto cfg = tiny();
        const auto p = params_for(cfg);
        const auto rows = sweep_density(cfg, {6}, p, 1);
        cfg.n_su = 6;
        const auto res = run_compare(cfg, all_policies(), p, 1);
        REQUIRE(rows.size() == 3);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(rows[i].policy == res.rows[i].policy);
            CHECK(rows[i].n_su == 6);
            CHECK(rows[i].mean.total_energy_j == res.rows[i].mean.total_energy_j);
            CHECK(rows[i].mean.pdr == res.rows[i].mean.pdr);
        }
        const auto csv = parse_csv(capture([&](std::ostream& os) { write_density_csv(os, rows); }));
        CHECK(csv[0] == Row{"policy", "n_su", "total_energy_j", "latency_ms", "pdr", "throughput_bits", "ee"});
    }

    TEST_CASE("zero energy budget carries no traffic")
    {
        const auto cfg = tiny();
        const auto rows = sweep_energy_budget(cfg, {0.0, 1.0}, params_for(cfg), 1);
        REQUIRE(rows.size() == 6);
        for (const auto& r : rows) {
            if (r.budget_j == 0.0) {
                CHECK(r.throughput_bits == 0.0);
            } else {
                CHECK(r.throughput_bits > 0.0);
            }
        }
        const auto csv = parse_csv(capture([&](std::ostream& os) { write_budget_csv(os, rows); }));
        CHECK(csv[0] == Row{"policy", "budget_j", "throughput_bits"});
        CHECK(csv.size() == 7);
    }

    TEST_CASE("timing covers every controller")
    {
        auto cfg = tiny();
        const auto p = params_for(cfg);
        const auto rows = report_timing(cfg, p);
        REQUIRE(rows.size() == 3);
        for (const auto& r : rows) {
            CHECK(r.decision_ms_per_slot >= 0.0);
            if (r.policy != "proposed") {
                CHECK(r.ga_ms_per_evolve == 0.0);
            }
        }
        cfg.ga_enabled = false;
        for (const auto& r : report_timing(cfg, p)) {
            CHECK(r.ga_ms_per_evolve == 0.0);
            CHECK(r.ga_amortized_ms_per_slot == 0.0);
        }
        const auto csv = parse_csv(capture([&](std::ostream& os) { write_timing_csv(os, rows); }));
        CHECK(csv[0].size() == 4);
    }

    TEST_CASE("ablation without surface elements shows no power gap")
    {
        auto cfg = tiny();
        cfg.ris_elements = 0;
        const auto p = params_for(cfg);
        const auto res = ablate(cfg, p, 1);
        CHECK(std::abs(res.power_delta_pct) <= 1e-9);
        CHECK(res.k_full == res.k_no_ris);
        const auto text = capture([&](std::ostream& os) { write_ablation_csv(os, res); });
        CHECK(text.find("no_ris_power_delta_pct") != std::string::npos);
        CHECK(text.find("no_eh_grid_delta_pct") != std::string::npos);
    }

    TEST_CASE("ROC tables")
    {
        const auto cfg = tiny();
        const auto tables = roc_study(cfg, {PolicyKind::Traditional, PolicyKind::Hybrid}, nullptr, 1);
        REQUIRE(tables.size() == 2);
        for (const auto& t : tables) {
            REQUIRE_FALSE(t.empty());
            for (const auto& r : t) {
                CHECK(r.p_fa_emp >= 0.0);
                CHECK(r.p_fa_emp <= 1.0);
                CHECK(r.p_d_ana >= r.p_fa_ana - 1e-12);
            }
        }
    }
}
