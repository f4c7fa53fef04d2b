#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "clipflow/denoiser.hpp"
#include "helpers.hpp"

using namespace clipflow;

namespace {

Latents scalar_seq(std::initializer_list<float> vals) {
    Latents z(vals.size(), 1);
    std::size_t i = 0;
    for (float v : vals) {
        z.at(i++, 0) = v;
    }
    return z;
}

SchedulerParams fixture_params(frame_t steps) {
    SchedulerParams p;
    p.total_len = 100;
    p.window = 40;
    p.overlap = 10;
    p.shift_step = 5;
    p.max_offset = 10;
    p.min_clip = 20;
    p.num_steps = steps;
    return p;
}

double max_relative_frame_error(const Latents& got, const Latents& want) {
    double worst = 0.0;
    for (std::size_t i = 0; i < got.frames; ++i) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t d = 0; d < got.dim; ++d) {
            const double diff =
                static_cast<double>(got.at(i, d)) - want.at(i, d);
            num += diff * diff;
            den += static_cast<double>(want.at(i, d)) * want.at(i, d);
        }
        worst = std::max(worst, std::sqrt(num) / std::max(1e-30,
                                                          std::sqrt(den)));
    }
    return worst;
}

}  // namespace

TEST_CASE("flow_matching_loss targets z1 - z0") {
    const Latents z0 = scalar_seq({0.0f});
    const Latents z1 = scalar_seq({2.0f});

    CHECK(flow_matching_loss(scalar_seq({2.0f}), z0, z1) == 0.0);
    CHECK(flow_matching_loss(scalar_seq({0.0f}), z0, z0) == 0.0);
    CHECK(flow_matching_loss(scalar_seq({1.0f}), z0, z1) == 1.0);
    CHECK_THROWS_AS(flow_matching_loss(Latents(2, 1), z0, z1),
                    std::invalid_argument);
}

TEST_CASE("interpolate_path is the linear path") {
    const Latents z0 = scalar_seq({0.0f});
    const Latents z1 = scalar_seq({4.0f});
    CHECK(interpolate_path(z0, z1, 0.0) == z0);
    CHECK(interpolate_path(z0, z1, 1.0) == z1);
    CHECK(interpolate_path(z0, z1, 0.25).at(0, 0) == 1.0f);
    CHECK_THROWS_AS(interpolate_path(z0, z1, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(interpolate_path(z0, z1, 1.5), std::invalid_argument);
}

TEST_CASE("euler_step") {
    const Latents z0 = scalar_seq({0.0f});
    const Latents z1 = scalar_seq({4.0f});
    CHECK(euler_step(z1, scalar_seq({0.0f}), 0.5) == z1);
    // one exact transport step along the constant path velocity
    Latents v = z1;
    v.at(0, 0) -= z0.at(0, 0);
    CHECK(euler_step(z0, v, 1.0) == z1);
    CHECK(euler_step(scalar_seq({0.0f}), scalar_seq({3.0f}), 0.5).at(0, 0) ==
          1.5f);
    CHECK_THROWS_AS(euler_step(z0, Latents(3, 2), 0.1),
                    std::invalid_argument);
}

TEST_CASE("euler_step composes linearly for constant velocity") {
    // dyadic steps and integer values keep float arithmetic exact
    const Latents z = scalar_seq({2.0f, -3.0f, 5.0f});
    const Latents v = scalar_seq({1.0f, 4.0f, -2.0f});
    const Latents two = euler_step(euler_step(z, v, 0.25), v, 0.5);
    const Latents one = euler_step(z, v, 0.75);
    CHECK(two == one);
}

TEST_CASE("oracle_point_velocity pulls toward the target") {
    SECTION("zero at the target") {
        const Latents target = scalar_seq({1.0f, -2.0f});
        auto model = oracle_point_velocity(target);
        const Latents v = model(target, 0.3, ConditionSet{});
        for (float x : v.data) {
            CHECK(x == 0.0f);
        }
    }
    SECTION("hand values") {
        auto model = oracle_point_velocity(scalar_seq({1.0f}));
        CHECK(model(scalar_seq({0.0f}), 0.0, ConditionSet{}).at(0, 0) ==
              1.0f);
        CHECK(model(scalar_seq({0.5f}), 0.5, ConditionSet{}).at(0, 0) ==
              1.0f);
    }
    SECTION("slice offset selects the matching target rows") {
        const Latents target = scalar_seq({1.0f, 2.0f, 3.0f});
        auto model = oracle_point_velocity(target);
        ConditionSet cond;
        const Latents v =
            model(scalar_seq({0.0f, 0.0f}), 0.0, cond.slice(1, 3));
        CHECK(v.at(0, 0) == 2.0f);
        CHECK(v.at(1, 0) == 3.0f);
    }
}

TEST_CASE("condition slicing keeps per-frame alignment") {
    ConditionSet cond;
    cond.audio = Latents(10, 3, 1.0f);
    cond.audio->at(4, 0) = 9.0f;
    cond.text = std::vector<float>{1.0f, 2.0f};
    const ConditionSet s = cond.slice(4, 7);
    REQUIRE(s.audio.has_value());
    CHECK(s.audio->frames == 3);
    CHECK(s.audio->at(0, 0) == 9.0f);
    CHECK(s.offset == 4);
    CHECK(s.text == cond.text);
    CHECK_THROWS_AS(cond.require_frames(11), std::invalid_argument);
}

TEST_CASE("run_windowed with a zero model is the identity") {
    const DenoiseSchedule s = build_schedule(fixture_params(4));
    std::mt19937_64 gen(3);
    const Latents z = random_latents(100, 4, gen);
    auto zero = [](const Latents& clip, double, const ConditionSet&) {
        return Latents(clip.frames, clip.dim);
    };
    CHECK(run_windowed(zero, s, z, ConditionSet{}, FusionPolicy::kBlend) ==
          z);
    CHECK(run_windowed(zero, s, z, ConditionSet{},
                       FusionPolicy::kOverwrite) == z);
    CHECK(run_monolithic(zero, 4, z, ConditionSet{}) == z);
}

TEST_CASE("single-window schedules equal the monolithic executor exactly") {
    SchedulerParams p = fixture_params(6);
    p.total_len = 30;  // within one window
    const DenoiseSchedule s = build_schedule(p);
    for (const auto& plan : s.plans) {
        REQUIRE(plan.clips.size() == 1);
    }
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 10; ++trial) {
        const Latents target = random_latents(30, 5, gen);
        const Latents z0 = random_latents(30, 5, gen);
        auto model = oracle_point_velocity(target);
        const Latents a =
            run_windowed(model, s, z0, ConditionSet{}, FusionPolicy::kBlend);
        const Latents b = run_monolithic(model, 6, z0, ConditionSet{});
        CHECK(a == b);  // bit-for-bit
    }
}

TEST_CASE("oracle transport converges through a multi-clip schedule") {
    std::mt19937_64 gen(23);
    const Latents target = random_latents(100, 8, gen);
    const Latents z0 = random_latents(100, 8, gen);
    auto model = oracle_point_velocity(target);

    const DenoiseSchedule s32 = build_schedule(fixture_params(32));
    const Latents out32 =
        run_windowed(model, s32, z0, ConditionSet{},
                     FusionPolicy::kOverwrite);
    CHECK(max_relative_frame_error(out32, target) <= 1e-3);

    const DenoiseSchedule sb = build_schedule(fixture_params(32));
    const Latents blended =
        run_windowed(model, sb, z0, ConditionSet{}, FusionPolicy::kBlend);
    CHECK(max_relative_frame_error(blended, target) <= 1e-3);
}

TEST_CASE("clip execution order cannot leak outside overlap regions") {
    const SchedulerParams p = fixture_params(1);
    DenoiseSchedule forward = build_schedule(p);
    DenoiseSchedule reversed = forward;
    std::reverse(reversed.plans[0].clips.begin(),
                 reversed.plans[0].clips.end());

    std::mt19937_64 gen(5);
    const Latents z0 = random_latents(100, 3, gen);
    auto model = testutil::offset_hash_model();

    for (FusionPolicy fusion :
         {FusionPolicy::kOverwrite, FusionPolicy::kBlend}) {
        const Latents a =
            run_timestep(model, forward.plans[0].clips, 0.0, 1.0, z0,
                         ConditionSet{}, fusion);
        const Latents b =
            run_timestep(model, reversed.plans[0].clips, 0.0, 1.0, z0,
                         ConditionSet{}, fusion);
        // overlap regions of [0,40),[30,70),[60,100): [30,40) and [60,70)
        for (std::size_t i = 0; i < 100; ++i) {
            const bool overlapped = (i >= 30 && i < 40) ||
                                    (i >= 60 && i < 70);
            if (!overlapped) {
                for (std::size_t d = 0; d < 3; ++d) {
                    INFO("frame " << i);
                    CHECK(a.at(i, d) == b.at(i, d));
                }
            }
        }
    }
}

TEST_CASE("blend produces convex combinations with weights summing to 1") {
    // two clips, constant but distinct predictions; model output depends
    // only on the clip offset
    std::vector<ClipWindow> clips = {{0, 6}, {4, 10}};
    auto model = [](const Latents& clip, double, const ConditionSet& cond) {
        Latents v(clip.frames, clip.dim);
        const float val = cond.offset == 0 ? 1.0f : 3.0f;
        for (auto& x : v.data) {
            x = val;
        }
        return v;
    };
    const Latents z0(10, 1, 0.0f);
    const Latents out = run_timestep(model, clips, 0.0, 1.0, z0,
                                     ConditionSet{}, FusionPolicy::kBlend);
    // outside the overlap the writers are exclusive
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(out.at(i, 0) == 1.0f);
    }
    for (std::size_t i = 6; i < 10; ++i) {
        CHECK(out.at(i, 0) == 3.0f);
    }
    // inside the overlap: strictly between both predictions and ramping up
    float prev = 1.0f;
    for (std::size_t i = 4; i < 6; ++i) {
        CHECK(out.at(i, 0) > 1.0f);
        CHECK(out.at(i, 0) < 3.0f);
        CHECK(out.at(i, 0) > prev);
        prev = out.at(i, 0);
    }
    // crossfade weights for overlap length 2: (j+1)/3 on the later clip
    CHECK(out.at(4, 0) == Catch::Approx(1.0 + 2.0 * (1.0 / 3.0)));
    CHECK(out.at(5, 0) == Catch::Approx(1.0 + 2.0 * (2.0 / 3.0)));

    // overwrite keeps the later clip on the shared frames
    const Latents ow = run_timestep(model, clips, 0.0, 1.0, z0,
                                    ConditionSet{},
                                    FusionPolicy::kOverwrite);
    CHECK(ow.at(4, 0) == 3.0f);
    CHECK(ow.at(5, 0) == 3.0f);
}

TEST_CASE("fusion policies differ only inside overlap regions") {
    const DenoiseSchedule s = build_schedule(fixture_params(4));
    std::mt19937_64 gen(29);
    const Latents target = random_latents(100, 4, gen);
    const Latents z0 = random_latents(100, 4, gen);
    auto model = testutil::offset_hash_model();
    const Latents a =
        run_windowed(model, s, z0, ConditionSet{}, FusionPolicy::kOverwrite);
    const Latents b =
        run_windowed(model, s, z0, ConditionSet{}, FusionPolicy::kBlend);
    // frames never covered by two clips in any timestep plan
    std::vector<bool> ever_overlapped(100, false);
    for (const auto& plan : s.plans) {
        std::vector<int> cover(100, 0);
        for (const auto& c : plan.clips) {
            for (frame_t i = c.start; i < c.end; ++i) {
                ++cover[static_cast<std::size_t>(i)];
            }
        }
        for (std::size_t i = 0; i < 100; ++i) {
            if (cover[i] > 1) {
                ever_overlapped[i] = true;
            }
        }
    }
    for (std::size_t i = 0; i < 100; ++i) {
        if (!ever_overlapped[i]) {
            for (std::size_t d = 0; d < 4; ++d) {
                CHECK(a.at(i, d) == b.at(i, d));
            }
        }
    }
}

TEST_CASE("model contract violations are rejected") {
    const DenoiseSchedule s = build_schedule(fixture_params(2));
    std::mt19937_64 gen(31);
    const Latents z0 = random_latents(100, 2, gen);

    auto bad_shape = [](const Latents& clip, double, const ConditionSet&) {
        return Latents(clip.frames + 1, clip.dim);
    };
    CHECK_THROWS_AS(run_windowed(bad_shape, s, z0, ConditionSet{},
                                 FusionPolicy::kBlend),
                    std::runtime_error);

    auto non_finite = [](const Latents& clip, double, const ConditionSet&) {
        Latents v(clip.frames, clip.dim);
        v.at(0, 0) = std::numeric_limits<float>::infinity();
        return v;
    };
    CHECK_THROWS_AS(run_windowed(non_finite, s, z0, ConditionSet{},
                                 FusionPolicy::kBlend),
                    std::runtime_error);

    CHECK_THROWS_AS(run_windowed(testutil::offset_hash_model(), s,
                                 Latents(99, 2), ConditionSet{},
                                 FusionPolicy::kBlend),
                    std::invalid_argument);

    ConditionSet cond;
    cond.audio = Latents(7, 1);
    CHECK_THROWS_AS(run_windowed(testutil::offset_hash_model(), s,
                                 Latents(100, 2), cond,
                                 FusionPolicy::kBlend),
                    std::invalid_argument);
}

TEST_CASE("monolithic oracle run converges to the target") {
    std::mt19937_64 gen(37);
    const Latents target = random_latents(20, 6, gen);
    const Latents z0 = random_latents(20, 6, gen);
    const Latents out = run_monolithic(oracle_point_velocity(target), 64,
                                       z0, ConditionSet{});
    CHECK(max_relative_frame_error(out, target) <= 1e-3);
}

TEST_CASE("monolithic T=1 is one Euler step") {
    const Latents z0 = scalar_seq({1.0f, 2.0f});
    auto model = [](const Latents& clip, double, const ConditionSet&) {
        Latents v(clip.frames, clip.dim);
        for (auto& x : v.data) {
            x = 4.0f;
        }
        return v;
    };
    const Latents out = run_monolithic(model, 1, z0, ConditionSet{});
    CHECK(out.at(0, 0) == 5.0f);
    CHECK(out.at(1, 0) == 6.0f);
}

TEST_CASE("seam_discontinuity") {
    CHECK(seam_discontinuity(Latents(5, 3, 2.5f)) == 0.0);
    CHECK(seam_discontinuity(scalar_seq({0.0f, 1.0f, 3.0f})) == 2.0);
    // linear ramp with slope c has constant jump c * |unit|
    Latents ramp(6, 2);
    for (std::size_t i = 0; i < 6; ++i) {
        ramp.at(i, 0) = 0.75f * static_cast<float>(i);
        ramp.at(i, 1) = 0.0f;
    }
    CHECK(seam_discontinuity(ramp) == Catch::Approx(0.75));
    CHECK_THROWS_AS(seam_discontinuity(Latents(1, 1)),
                    std::invalid_argument);
}

TEST_CASE("overlapped schedules smooth seams better than disjoint chunks") {
    // quick spot check of the property; the acceptance suite runs the
    // full 50-seed comparison
    SchedulerParams p;
    p.total_len = 60;
    p.window = 24;
    p.overlap = 8;
    p.shift_step = 4;
    p.max_offset = 8;
    p.min_clip = 12;
    p.num_steps = 8;
    const DenoiseSchedule overlapped = build_schedule(p);

    DenoiseSchedule disjoint;
    disjoint.params = p;
    for (frame_t t = p.num_steps; t >= 1; --t) {
        TimestepPlan plan;
        plan.step = t;
        plan.clips = {{0, 24}, {24, 48}, {48, 60}};
        disjoint.plans.push_back(plan);
    }

    auto model = testutil::neighborhood_smoothing_model(0.5);
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 gen(seed);
        const Latents z0 = random_latents(60, 4, gen);
        const double with_overlap = seam_discontinuity(run_windowed(
            model, overlapped, z0, ConditionSet{}, FusionPolicy::kBlend));
        const double without = seam_discontinuity(run_windowed(
            model, disjoint, z0, ConditionSet{}, FusionPolicy::kBlend));
        if (with_overlap <= without) {
            ++wins;
        }
    }
    CHECK(wins >= 9);
}
