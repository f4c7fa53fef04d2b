#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "clipflow/segment.hpp"

using namespace clipflow;

namespace {

AudioBuffer silence(double seconds, double rate = 8000.0) {
    AudioBuffer a;
    a.sample_rate = rate;
    a.samples.assign(static_cast<std::size_t>(seconds * rate), 0.0);
    return a;
}

AudioBuffer click_track(double seconds, double period_s,
                        double rate = 44100.0) {
    AudioBuffer a = silence(seconds, rate);
    const auto period = static_cast<std::size_t>(period_s * rate);
    for (std::size_t i = period; i < a.samples.size(); i += period) {
        a.samples[i] = 0.9;
    }
    return a;
}

AudioBuffer sine(double seconds, double freq, double rate = 8000.0) {
    AudioBuffer a = silence(seconds, rate);
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        a.samples[i] =
            0.5 * std::sin(2.0 * M_PI * freq * static_cast<double>(i) /
                           rate);
    }
    return a;
}

double peak_value(const OnsetEnvelope& env) {
    double m = 0.0;
    for (double v : env.values) {
        m = std::max(m, v);
    }
    return m;
}

bool is_local_max(const OnsetEnvelope& env, std::size_t i) {
    return i >= 1 && i + 1 < env.values.size() &&
           env.values[i] > env.values[i - 1] &&
           env.values[i] >= env.values[i + 1];
}

}  // namespace

TEST_CASE("bar_duration is four beats") {
    CHECK(bar_duration(120.0) == 2.0);
    CHECK(bar_duration(60.0) == 4.0);
    CHECK(bar_duration(240.0) == 1.0);
    CHECK_THROWS_AS(bar_duration(0.0), std::invalid_argument);
    CHECK_THROWS_AS(bar_duration(-10.0), std::invalid_argument);
}

TEST_CASE("onset_strength of silence is identically zero") {
    const OnsetEnvelope env = onset_strength(silence(2.0));
    REQUIRE(!env.values.empty());
    for (double v : env.values) {
        CHECK(v == 0.0);
    }
    CHECK(env.hop_seconds == 256.0 / 8000.0);
}

TEST_CASE("an isolated click dominates the envelope near its frame") {
    AudioBuffer a = silence(2.0);
    const std::size_t click = 8000;  // t = 1 s
    a.samples[click] = 0.9;
    const OnsetEnvelope env = onset_strength(a);
    std::size_t argmax = 0;
    for (std::size_t i = 1; i < env.values.size(); ++i) {
        if (env.values[i] > env.values[argmax]) {
            argmax = i;
        }
    }
    const double t = static_cast<double>(argmax) * env.hop_seconds;
    CHECK(std::abs(t - 1.0) <= 1024.0 / 8000.0);  // within one frame
    CHECK(env.values[argmax] > 0.0);
}

TEST_CASE("a steady sine has near-zero flux after onset") {
    const OnsetEnvelope tone = onset_strength(sine(2.0, 440.0));
    AudioBuffer a = silence(2.0);
    a.samples[8000] = 0.9;
    const double click_peak = peak_value(onset_strength(a));
    // skip the frames covering the tone's own onset
    double steady_max = 0.0;
    for (std::size_t i = 8; i < tone.values.size(); ++i) {
        steady_max = std::max(steady_max, tone.values[i]);
    }
    CHECK(steady_max < 0.01 * click_peak);
}

TEST_CASE("onset_strength rejects bad inputs") {
    CHECK_THROWS_AS(onset_strength(silence(0.05)),  // shorter than a frame
                    std::invalid_argument);
    CHECK_THROWS_AS(onset_strength(silence(1.0), 256, 512),
                    std::invalid_argument);
}

TEST_CASE("local_maxima") {
    OnsetEnvelope env;
    env.hop_seconds = 0.01;

    SECTION("monotone envelopes have no interior maxima") {
        env.values = {0, 1, 2, 3, 4};
        CHECK(local_maxima(env, 1).empty());
    }
    SECTION("stronger peaks are selected first") {
        env.values = {0, 1, 0, 2, 0};
        const auto peaks = local_maxima(env, 1);
        REQUIRE(peaks.size() == 2);
        CHECK(peaks[0].index == 3);
        CHECK(peaks[1].index == 1);
    }
    SECTION("equal twin peaks tie toward the earlier index") {
        env.values = {0, 5, 0, 5, 0};
        const auto peaks = local_maxima(env, 1);
        REQUIRE(peaks.size() == 2);
        CHECK(peaks[0].index == 1);
        CHECK(peaks[1].index == 3);
    }
    SECTION("min_gap suppresses close neighbors of stronger peaks") {
        env.values = {0, 3, 0, 5, 0, 4, 0};
        const auto peaks = local_maxima(env, 3);
        REQUIRE(peaks.size() == 1);  // both others sit 2 bins from index 3
        CHECK(peaks[0].index == 3);
    }
    SECTION("min_gap below 1 is rejected") {
        env.values = {0, 1, 0};
        CHECK_THROWS_AS(local_maxima(env, 0), std::invalid_argument);
    }
}

TEST_CASE("segment_music on a 120 bpm click track") {
    const AudioBuffer a = click_track(60.0, 0.5);
    const OnsetEnvelope env = onset_strength(a);
    const SegmentPlan plan = segment_music(env, 120.0, a.duration());

    CHECK(plan.boundaries.size() == 29);
    CHECK(plan.segments.size() == 30);
    const double mean = a.duration() /
                        static_cast<double>(plan.segments.size());
    CHECK(std::abs(mean - 2.0) <= env.hop_seconds);

    // cut-to-the-beat: every boundary sits on an envelope local maximum
    for (double b : plan.boundaries) {
        const auto bin =
            static_cast<std::size_t>(std::llround(b / env.hop_seconds));
        CHECK(is_local_max(env, bin));
    }
    // boundaries respect the half-bar minimum gap
    for (std::size_t i = 1; i < plan.boundaries.size(); ++i) {
        CHECK(plan.boundaries[i] - plan.boundaries[i - 1] >= 1.0);
    }
    CHECK(check_segment_plan(plan, env).empty());
}

TEST_CASE("segment_music degenerate and sparse cases") {
    OnsetEnvelope env;
    env.hop_seconds = 0.01;

    SECTION("duration of one bar yields a single segment") {
        env.values.assign(100, 0.0);
        const SegmentPlan plan = segment_music(env, 120.0, 2.0);
        CHECK(plan.boundaries.empty());
        REQUIRE(plan.segments.size() == 1);
        CHECK(plan.segments[0] == Segment{0.0, 2.0});
    }
    SECTION("flat envelopes still partition the full duration") {
        env.values.assign(2000, 1.0);
        const SegmentPlan plan = segment_music(env, 120.0, 20.0);
        CHECK(plan.boundaries.size() <= 9);
        REQUIRE(!plan.segments.empty());
        CHECK(plan.segments.front().start == 0.0);
        CHECK(plan.segments.back().end == 20.0);
        for (std::size_t i = 0; i + 1 < plan.segments.size(); ++i) {
            CHECK(plan.segments[i].end == plan.segments[i + 1].start);
        }
    }
    SECTION("errors") {
        env.values.clear();
        CHECK_THROWS_AS(segment_music(env, 120.0, 10.0),
                        std::invalid_argument);
        env.values.assign(10, 0.0);
        CHECK_THROWS_AS(segment_music(env, 120.0, 0.0),
                        std::invalid_argument);
        CHECK_THROWS_AS(segment_music(env, 0.0, 10.0),
                        std::invalid_argument);
    }
}

TEST_CASE("doubling bpm never decreases the boundary target") {
    OnsetEnvelope env;
    env.hop_seconds = 0.01;
    env.values.assign(6000, 0.0);
    for (std::size_t i = 50; i + 1 < env.values.size(); i += 25) {
        env.values[i] = 10.0;  // dense candidates
    }
    for (double bpm : {40.0, 60.0, 90.0, 120.0, 150.0}) {
        const auto k1 =
            segment_music(env, bpm, 60.0).boundaries.size();
        const auto k2 =
            segment_music(env, 2.0 * bpm, 60.0).boundaries.size();
        CHECK(k2 >= k1);
    }
}
