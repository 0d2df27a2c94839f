#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "greencrn/config.hpp"
#include "greencrn/policy.hpp"
#include "greencrn/simulator.hpp"
#include "greencrn/train.hpp"

using namespace greencrn;

namespace {

const std::array<std::size_t, HeadCount> kHeads{4, 5, 6, 4, 8};

std::vector<double> random_state(std::size_t d, Rng& rng)
{
    std::vector<double> s(d);
    for (auto& x : s) {
        x = 2.0 * rng.uniform() - 1.0;
    }
    return s;
}

ActionIndex random_action(Rng& rng)
{
    ActionIndex a{};
    for (std::size_t h = 0; h < HeadCount; ++h) {
        a[h] = rng.below(kHeads[h]);
    }
    return a;
}

std::filesystem::path temp_path(const std::string& name)
{
    return std::filesystem::temp_directory_path() / ("greencrn_test_" + name);
}

} // namespace

TEST_SUITE("policy_drl")
{
    TEST_CASE("featurizer shape and zero input")
    {
        Featurizer f(3, 4, FeatureScales{});
        CHECK(f.dimension() == 3 * 6 + 3);
        SlotObservation obs;
        obs.snr.assign(3, 0.0);
        obs.belief.assign(3, 0.4);
        const auto& s = f.update(obs);
        REQUIRE(s.size() == f.dimension());
        for (std::size_t i = 0; i < s.size(); ++i) {
            const bool belief_entry = i >= 3 + 12 && i < 3 + 12 + 3;
            CHECK(s[i] == doctest::Approx(belief_entry ? 0.4 : 0.0));
        }
    }

    TEST_CASE("featurizer EMA settles on a constant input")
    {
        FeatureScales scales;
        Featurizer f(2, 2, scales);
        SlotObservation obs;
        obs.snr = {50.0, 400.0};
        obs.belief = {0.1, 0.9};
        obs.harvest_j = 4e-6;
        for (int i = 0; i < 50; ++i) {
            f.update(obs);
        }
        const auto& s = f.state();
        for (std::size_t c = 0; c < 2; ++c) {
            const double want = std::log1p(obs.snr[c]) / std::log1p(scales.snr_ref);
            CHECK(std::abs(s[c] - want) <= 0.01 * want);
        }
        const double harvest_want = obs.harvest_j / scales.harvest_j;
        CHECK(std::abs(s.back() - harvest_want) <= 0.01 * harvest_want);
    }

    TEST_CASE("featurizer keeps the newest sensing outcome first")
    {
        Featurizer f(2, 2, FeatureScales{});
        SlotObservation obs;
        obs.snr = {0.0, 0.0};
        obs.belief = {0.0, 0.0};
        obs.busy_fraction = {1.0, 0.0};
        f.update(obs);
        obs.busy_fraction = {0.0, 1.0 / 3.0};
        const auto& s = f.update(obs);
        CHECK(s[2] == 0.0);
        CHECK(s[3] == doctest::Approx(1.0 / 3.0));
        CHECK(s[4] == 1.0);
        CHECK(s[5] == 0.0);
        obs.busy_fraction = {1.0};
        CHECK_THROWS(f.update(obs));
    }

    TEST_CASE("zero weights give uniform heads")
    {
        const auto p = PolicyParams::zeros(6, 5, kHeads);
        const std::vector<double> s(6, 0.7);
        const auto out = policy_forward(p, s);
        for (std::size_t h = 0; h < HeadCount; ++h) {
            REQUIRE(out.probs[h].size() == kHeads[h]);
            for (double q : out.probs[h]) {
                CHECK(q == doctest::Approx(1.0 / static_cast<double>(kHeads[h])));
            }
        }
    }

    TEST_CASE("heads are normalized and shift invariant")
    {
        Rng rng(7);
        for (int trial = 0; trial < 20; ++trial) {
            auto p = PolicyParams::random(8, 8, kHeads, rng);
            for (auto& w : p.weights) {
                w *= 3.0;
            }
            const auto s = random_state(8, rng);
            const auto out = policy_forward(p, s);
            for (std::size_t h = 0; h < HeadCount; ++h) {
                double sum = 0.0;
                for (double q : out.probs[h]) {
                    sum += q;
                }
                CHECK(std::abs(sum - 1.0) <= 1e-12);
            }
            const std::size_t head = trial % HeadCount;
            auto shifted = p;
            for (std::size_t j = 0; j < kHeads[head]; ++j) {
                shifted.weights[p.b2_offset() + p.head_offset(head) + j] += 4.25;
            }
            const auto out2 = policy_forward(shifted, s);
            for (std::size_t j = 0; j < kHeads[head]; ++j) {
                CHECK(std::abs(out2.probs[head][j] - out.probs[head][j]) <= 1e-12);
            }
        }
    }

    TEST_CASE("forward pass errors and masking")
    {
        const auto p = PolicyParams::zeros(4, 3, kHeads);
        const std::vector<double> wrong(5, 0.0);
        CHECK_THROWS_AS(policy_forward(p, wrong), std::invalid_argument);

        const std::vector<double> s(4, 0.0);
        HeadMask mask{};
        mask[Power] = true;
        const auto out = policy_forward(p, s, mask);
        CHECK(out.probs[Power].size() == kHeads[Power]);
        CHECK(out.probs[Channel].empty());
        Rng rng(1);
        const auto a = sample_action(out, rng, mask);
        CHECK(a[Channel] == 0);
        CHECK(greedy_action(out, mask)[Power] == 0); // uniform: lowest index wins
    }

    TEST_CASE("sampling is deterministic and stays on the grid")
    {
        Rng init(9);
        const auto p = PolicyParams::random(8, 8, kHeads, init);
        const auto s = random_state(8, init);
        const auto out = policy_forward(p, s);
        Rng a(123);
        Rng b(123);
        for (int i = 0; i < 200; ++i) {
            const auto x = sample_action(out, a);
            CHECK(x == sample_action(out, b));
            for (std::size_t h = 0; h < HeadCount; ++h) {
                CHECK(x[h] < kHeads[h]);
            }
        }
    }

    TEST_CASE("sampled actions decode inside the power range")
    {
        ActionGrid grid;
        grid.channels = 5;
        grid.codewords = 8;
        grid.ptx_levels = ActionGrid::power_levels(0.1, 2.0, 20);
        const std::array<std::size_t, HeadCount> heads = grid.cardinalities();
        Rng rng(10);
        const auto p = PolicyParams::random(6, 8, heads, rng);
        for (int i = 0; i < 500; ++i) {
            const auto s = random_state(6, rng);
            const auto idx = sample_action(policy_forward(p, s), rng);
            REQUIRE(grid.contains(idx));
            const auto act = decode(grid, idx);
            CHECK(act.p_tx >= 0.1 - 1e-12);
            CHECK(act.p_tx <= 2.0 + 1e-12);
        }
    }

    TEST_CASE("reward is the weighted sum of its terms")
    {
        const RewardTerms t{2.0, 0.5, 1.0, 0.25};
        CHECK(reward(t, {0, 0, 0, 0, 0, 0}) == 0.0);
        CHECK(reward(t, {1, 0, 0, 0, 0, 0}) == 2.0);
        CHECK(reward(t, {1, 1, 1, 1, 0, 0}) == doctest::Approx(1.25));
        // affine in alpha: the slope is the EE term
        const double r1 = reward(t, {1.5, 1, 1, 1, 0, 0});
        const double r2 = reward(t, {2.5, 1, 1, 1, 0, 0});
        CHECK(r2 - r1 == doctest::Approx(t.ee));
    }

    TEST_CASE("reward-to-go")
    {
        const Trajectory traj{{{}, {}, 1.0}, {{}, {}, 2.0}, {{}, {}, 4.0}};
        const auto g = rewards_to_go(traj, 0.5);
        REQUIRE(g.size() == 3);
        CHECK(g[2] == doctest::Approx(4.0));
        CHECK(g[1] == doctest::Approx(2.0 + 0.5 * 4.0));
        CHECK(g[0] == doctest::Approx(1.0 + 0.5 * (2.0 + 0.5 * 4.0)));
    }

    TEST_CASE("policy update edge cases")
    {
        Rng rng(17);
        const auto p = PolicyParams::random(8, 8, kHeads, rng);
        Trajectory traj;
        for (int i = 0; i < 5; ++i) {
            traj.push_back({random_state(8, rng), random_action(rng), 0.0});
        }
        SUBCASE("constant returns leave the weights alone")
        {
            // discount 0 makes every return equal to the common reward, i.e. the baseline
            for (auto& s : traj) {
                s.reward = 3.0;
            }
            CHECK(update_policy(p, traj, 0.1, 0.0).weights == p.weights);
        }
        SUBCASE("zero learning rate")
        {
            traj[2].reward = 5.0;
            CHECK(update_policy(p, traj, 0.0).weights == p.weights);
        }
        SUBCASE("input is not modified and the step moves the weights")
        {
            traj[2].reward = 5.0;
            const auto before = p.weights;
            const auto q = update_policy(p, traj, 0.1);
            CHECK(p.weights == before);
            CHECK(q.weights != before);
        }
        SUBCASE("non-finite gradient is an error")
        {
            traj[1].reward = std::numeric_limits<double>::quiet_NaN();
            CHECK_THROWS_AS(update_policy(p, traj, 0.1), std::runtime_error);
        }
    }

    TEST_CASE("gradient check on random small networks")
    {
        Rng rng(19);
        for (int trial = 0; trial < 20; ++trial) {
            const auto p = PolicyParams::random(8, 8, kHeads, rng);
            const auto s = random_state(8, rng);
            const auto a = random_action(rng);
            CHECK(gradient_check(p, s, a, 1e-5) < 1e-4);
            for (std::size_t h = 0; h < HeadCount; ++h) {
                HeadMask single{};
                single[h] = true;
                CHECK(gradient_check(p, s, a, 1e-5, single) < 1e-4);
            }
        }
    }

    TEST_CASE("central differences converge at second order")
    {
        // roundoff dominates below eps ~ 1e-4 in double precision, so the
        // order is read off the truncation-limited range
        Rng rng(20);
        for (int trial = 0; trial < 10; ++trial) {
            const auto p = PolicyParams::random(8, 8, kHeads, rng);
            const auto s = random_state(8, rng);
            const auto a = random_action(rng);
            const double coarse = gradient_check(p, s, a, 1e-2);
            const double fine = gradient_check(p, s, a, 1e-3);
            CHECK(coarse / fine > 50.0);
        }
    }

    TEST_CASE("zero-weight network gradient matches finite differences")
    {
        const auto p = PolicyParams::zeros(8, 8, kHeads);
        Rng rng(21);
        const auto s = random_state(8, rng);
        const auto a = random_action(rng);
        HeadMask single{};
        single[Slice] = true;
        CHECK(gradient_check(p, s, a, 1e-5, single) < 1e-4);
    }

    TEST_CASE("two-armed bandit converges to the better arm")
    {
        const std::array<std::size_t, HeadCount> heads{1, 2, 1, 1, 1};
        Rng rng(23);
        auto p = PolicyParams::random(1, 4, heads, rng);
        HeadMask mask{};
        mask[Channel] = true;
        UpdateOptions opts;
        opts.lr = 0.1;
        opts.discount = 0.0;
        opts.mask = mask;
        const std::vector<double> state{1.0};
        for (int it = 0; it < 500; ++it) {
            const auto out = policy_forward(p, state, mask);
            std::vector<Trajectory> batch;
            for (int k = 0; k < 8; ++k) {
                const auto a = sample_action(out, rng, mask);
                batch.push_back({{state, a, a[Channel] == 0 ? 1.0 : 0.0}});
            }
            p = update_policy(p, batch, opts);
        }
        CHECK(policy_forward(p, state, mask).probs[Channel][0] > 0.9);
    }

    TEST_CASE("checkpoint round trip")
    {
        Rng rng(29);
        const auto p = PolicyParams::random(7, 5, kHeads, rng);
        const auto path = temp_path("roundtrip.gcrn");
        save_checkpoint(path, p);
        const auto q = load_checkpoint(path);
        CHECK(q.input_dim == p.input_dim);
        CHECK(q.hidden == p.hidden);
        CHECK(q.head_sizes == p.head_sizes);
        CHECK(q.weights == p.weights);

        std::ifstream in(path, std::ios::binary);
        char magic[5];
        in.read(magic, 5);
        CHECK(std::string(magic, 5) == "GCRN1");
        CHECK(std::filesystem::file_size(path) == 5 + 7 * 4 + 8 * p.weights.size());

        const auto bad = temp_path("bad.gcrn");
        std::ofstream(bad, std::ios::binary) << "NOPE!";
        CHECK_THROWS(load_checkpoint(bad));
        std::filesystem::resize_file(path, 40);
        CHECK_THROWS(load_checkpoint(path));
        std::filesystem::remove(path);
        std::filesystem::remove(bad);
    }

    TEST_CASE("transfer fine-tuning contracts")
    {
        ScenarioConfig cfg;
        cfg.channels = 4;
        cfg.n_pu = 2;
        cfg.n_su = 4;
        cfg.train_slots = 50;
        cfg.codebook_size = 4;
        cfg.ris_elements = 8;
        cfg.ga_enabled = false;
        const auto source = initial_policy(cfg, 3);

        const auto none = transfer_finetune(source, cfg, 0, 5, 0.0);
        CHECK(none.params.weights == source.weights);
        CHECK(none.returns.empty());
        CHECK(none.episodes_to_threshold == 0);

        auto other = cfg;
        other.channels = 6;
        CHECK_THROWS_AS(transfer_finetune(source, other, 2, 5, 0.0), std::invalid_argument);

        CHECK(episodes_to_threshold({-3.0, -1.0, 0.5, 2.0}, 0.0) == 3);
        CHECK(episodes_to_threshold({-3.0, -1.0}, 0.0) == 3);
    }

    TEST_CASE("identical target starts near the source return")
    {
        ScenarioConfig cfg;
        cfg.channels = 4;
        cfg.n_pu = 2;
        cfg.n_su = 6;
        cfg.train_slots = 200;
        cfg.codebook_size = 4;
        cfg.ris_elements = 8;
        cfg.ga_enabled = false;
        const auto trained = train_policy(cfg, initial_policy(cfg, 2), 5, 2).params;
        const double source_return = evaluate_return(cfg, trained, 40, 4);
        const auto ft = transfer_finetune(trained, cfg, 1, 41, -std::numeric_limits<double>::infinity());
        REQUIRE(ft.returns.size() == 1);
        CHECK(std::abs(ft.returns[0] - source_return) <= 0.5 * std::abs(source_return) + 0.05);
    }
}
