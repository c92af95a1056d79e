#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "bubble/learner.hpp"
#include "helpers.hpp"

using namespace bubble;

namespace {

Surface floor_surface() {
    Surface s;
    s.geom = Surface::Geom::Segment;
    s.a = {-400, 550};
    s.b = {400, 550};
    s.normal = {0, -1};
    s.owner = ObjRef::env(0);
    return s;
}

// synthetic bounce data from the model itself with planted parameters
std::vector<EventSample> planted_bounce_samples(double e_n, double e_t, int n,
                                                double noise_sigma, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> vx(-300, 300), vy(50, 500);
    std::normal_distribution<double> noise(0, noise_sigma);
    KinParams planted{e_n, e_t, 0};
    Surface surf = floor_surface();
    std::vector<EventSample> out;
    for (int i = 0; i < n; ++i) {
        EventSample s;
        s.type = ContactType::BounceOffSegment;
        s.surface = surf;
        s.s_in.pos = {double(i * 3), 535};
        s.s_in.vel = {vx(rng), vy(rng)};
        s.y = predict_bounce(s.s_in, surf, planted);
        if (noise_sigma > 0) {
            s.y.vel.x += noise(rng);
            s.y.vel.y += noise(rng);
        }
        out.push_back(s);
    }
    return out;
}

std::vector<EventSample> planted_roll_samples(double a_roll, int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> vx(40, 300);
    KinParams planted{0, 1, a_roll};
    Surface surf = floor_surface();
    std::vector<EventSample> out;
    for (int i = 0; i < n; ++i) {
        EventSample s;
        s.type = ContactType::RollOnSegment;
        s.surface = surf;
        s.s_in.pos = {-400.0 + i * 7.0, 535};
        s.s_in.vel = {vx(rng), 0};
        RollResult r = predict_roll(s.s_in, surf, planted);
        s.y = r.exit;
        s.duration = r.duration;
        out.push_back(s);
    }
    return out;
}

}  // namespace

TEST_CASE("planted bounce parameters recovered to 1e-6 from noiseless data") {
    auto samples = planted_bounce_samples(0.7, 0.85, 20, 0.0, 11);
    KinParams prior{0.4, 0.9, 0};
    FitReport rep = fit(ContactType::BounceOffSegment, samples, prior);
    CHECK(std::abs(rep.beta_new.e_n - 0.7) < 1e-6);
    CHECK(std::abs(rep.beta_new.e_t - 0.85) < 1e-6);
    CHECK(rep.residual_after <= 1e-9);
    CHECK(rep.residual_after <= rep.residual_before);
}

TEST_CASE("single bounce sample is interpolated exactly") {
    auto samples = planted_bounce_samples(0.55, 0.95, 1, 0.0, 3);
    KinParams prior{0.4, 0.9, 0};
    FitReport rep = fit(ContactType::BounceOffSegment, samples, prior);
    CHECK(rep.n_samples == 1);
    CHECK(rep.residual_after == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("noisy fits never degrade the residual (100 seeds)") {
    KinParams prior{0.4, 0.9, 0};
    for (unsigned seed = 0; seed < 100; ++seed) {
        auto samples = planted_bounce_samples(0.7, 0.85, 12, 5.0, seed);
        FitReport rep = fit(ContactType::BounceOffSegment, samples, prior);
        CHECK(rep.residual_after <= rep.residual_before);
    }
}

TEST_CASE("fit is invariant under sample permutation") {
    auto samples = planted_bounce_samples(0.66, 0.8, 15, 2.0, 21);
    KinParams prior{0.4, 0.9, 0};
    FitReport a = fit(ContactType::BounceOffSegment, samples, prior);
    std::mt19937_64 rng(5);
    std::shuffle(samples.begin(), samples.end(), rng);
    FitReport b = fit(ContactType::BounceOffSegment, samples, prior);
    CHECK(a.beta_new.e_n == doctest::Approx(b.beta_new.e_n).epsilon(1e-12));
    CHECK(a.beta_new.e_t == doctest::Approx(b.beta_new.e_t).epsilon(1e-12));
}

TEST_CASE("self-consistency: rolling deceleration recovered to 1e-9") {
    auto samples = planted_roll_samples(35.0, 10, 9);
    KinParams prior{0, 1, 20};
    FitReport rep = fit(ContactType::RollOnSegment, samples, prior);
    CHECK(std::abs(rep.beta_new.a_roll - 35.0) <= 1e-9);
    CHECK(rep.residual_after <= rep.residual_before);
}

TEST_CASE("ridge weight damps a single-sample jump but not large batches") {
    auto one = planted_bounce_samples(0.9, 0.9, 1, 0.0, 2);
    KinParams prior{0.4, 0.9, 0};
    FitReport damped = fit(ContactType::BounceOffSegment, one, prior, 1.0);
    // pulled toward the prior: strictly between
    CHECK(damped.beta_new.e_n > 0.4);
    CHECK(damped.beta_new.e_n < 0.9);

    auto many = planted_bounce_samples(0.9, 0.9, 50, 0.0, 2);
    FitReport full = fit(ContactType::BounceOffSegment, many, prior, 1.0);
    CHECK(std::abs(full.beta_new.e_n - 0.9) < 0.02);
}

TEST_CASE("degenerate data keeps the prior and is flagged") {
    // identical zero-approach impacts carry no information
    Surface surf = floor_surface();
    std::vector<EventSample> samples(3);
    for (EventSample& s : samples) {
        s.type = ContactType::BounceOffSegment;
        s.surface = surf;
        s.s_in.pos = {0, 535};
        s.s_in.vel = {0, 0};
        s.y = s.s_in;
    }
    KinParams prior{0.4, 0.9, 0};
    FitReport rep = fit(ContactType::BounceOffSegment, samples, prior);
    CHECK(rep.degenerate);
    CHECK(rep.beta_new.e_n == doctest::Approx(0.4));
}

TEST_CASE("extract_samples on a simulated drop produces bounce then roll data") {
    Level lv = test::flat_floor_level();
    lv.ball_start.pos = {200, 430};
    lv.ball_start.vel = {120, 0};
    lv.target = {790, 10};
    lv.target_eps = 5;
    lv.horizon = 500;  // long enough for the roll to park
    TrialRecord tr = simulate(lv, {});
    auto samples = extract_samples(tr);
    int bounces = 0, rolls = 0;
    for (const EventSample& s : samples) {
        if (s.type == ContactType::BounceOffSegment) ++bounces;
        if (s.type == ContactType::RollOnSegment) ++rolls;
    }
    CHECK(bounces >= 1);
    CHECK(rolls >= 1);

    // the bounce sample reproduces the engine's restitution on the nose
    for (const EventSample& s : samples) {
        if (s.type != ContactType::BounceOffSegment) continue;
        double vin = -s.s_in.vel.dot(s.surface.normal);
        double vout = s.y.vel.dot(s.surface.normal);
        if (vin > 100.0) CHECK(vout / vin == doctest::Approx(0.4).epsilon(1e-6));
    }
}

TEST_CASE("pure free fall yields no contact samples") {
    Level lv = test::flat_floor_level();
    lv.ball_start.pos = {100, 50};
    lv.ball_start.vel = {30, -60};
    lv.horizon = 25;
    lv.target = {790, 590};
    TrialRecord tr = simulate(lv, {});
    CHECK(extract_samples(tr).empty());
}

TEST_CASE("fitting the simulator's own bounces recovers the table restitution") {
    Level lv = test::flat_floor_level();
    lv.ball_start.pos = {150, 400};
    lv.ball_start.vel = {100, 0};
    lv.target = {790, 10};
    lv.target_eps = 5;
    lv.horizon = 300;
    TrialRecord tr = simulate(lv, {});
    auto all = extract_samples(tr);
    std::vector<EventSample> bounces;
    for (const EventSample& s : all)
        if (s.type == ContactType::BounceOffSegment) bounces.push_back(s);
    REQUIRE(!bounces.empty());
    KinParams prior{0.2, 0.5, 0};  // deliberately wrong prior
    FitReport rep = fit(ContactType::BounceOffSegment, bounces, prior);
    CHECK(rep.beta_new.e_n == doctest::Approx(0.4).epsilon(0.05));
    CHECK(rep.residual_after <= rep.residual_before);
}
