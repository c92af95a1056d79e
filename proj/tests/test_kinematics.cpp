#include <doctest.h>

#include <cmath>

#include "bubble/kinematics.hpp"

using namespace bubble;

namespace {

Surface horizontal_floor(double y = 0.0) {
    Surface s;
    s.geom = Surface::Geom::Segment;
    s.a = {-200, y};
    s.b = {200, y};
    s.normal = {0, -1};
    return s;
}

Surface incline(double angle) {
    // segment rising to the right by `angle` when angle < 0 in screen coords;
    // here: downhill to the right for positive angle
    Surface s;
    s.geom = Surface::Geom::Segment;
    Vec2 dir{std::cos(angle), std::sin(angle)};
    s.a = dir * -200.0;
    s.b = dir * 200.0;
    s.normal = {std::sin(angle), -std::cos(angle)};
    return s;
}

}  // namespace

TEST_CASE("classify: vertical drop onto a floor bounces") {
    BallState s;
    s.vel = {0, 200};
    CHECK(classify(s, horizontal_floor()) == ContactType::BounceOffSegment);
}

TEST_CASE("classify: tangential motion rolls") {
    BallState s;
    s.vel = {100, 0};
    CHECK(classify(s, horizontal_floor()) == ContactType::RollOnSegment);
}

TEST_CASE("classify: steep incline slides once past the friction cone") {
    BallState s;
    s.vel = {3, 17};  // nearly along an 80-degree slope, low normal approach
    Surface steep = incline(80.0 * M_PI / 180.0);
    CHECK(classify(s, steep) == ContactType::SlideOnSegment);

    // 10 degrees is inside atan(0.3) ~ 16.7deg: still rolling
    Surface shallow = incline(10.0 * M_PI / 180.0);
    BallState r;
    r.vel = {100, std::tan(10.0 * M_PI / 180.0) * 100};
    CHECK(classify(r, shallow) == ContactType::RollOnSegment);
}

TEST_CASE("classify: fast approach to an arc bounces off the circle") {
    Surface s;
    s.geom = Surface::Geom::Circle;
    s.center = {0, 65};
    s.radius = 65;
    s.normal = {0, -1};
    BallState b;
    b.vel = {0, 300};
    CHECK(classify(b, s) == ContactType::BounceOffCircle);
}

TEST_CASE("predict_freefall closed form") {
    BallState s;
    s.pos = {0, 0};
    s.vel = {100, 0};
    auto out = predict_freefall(s, 100);
    REQUIRE(out);
    CHECK(out->pos.x == doctest::Approx(100.0));
    CHECK(out->pos.y == doctest::Approx(490.0));   // half g over one second
    CHECK(out->vel.y == doctest::Approx(980.0));

    // identity on zero distance
    auto same = predict_freefall(s, 0);
    REQUIRE(same);
    CHECK(same->pos == s.pos);
    CHECK(same->vel == s.vel);

    // hand-computed oblique case
    BallState o;
    o.vel = {50, -100};
    auto r = predict_freefall(o, 25);
    REQUIRE(r);
    CHECK(r->pos.y == doctest::Approx(-100.0 * 0.5 + 0.5 * 980.0 * 0.25));
    CHECK(r->pos.y == doctest::Approx(72.5));

    // no horizontal progress possible
    BallState v;
    v.vel = {0, 50};
    CHECK_FALSE(predict_freefall(v, 10));
    CHECK(predict_freefall_y(v, 100).pos.y == doctest::Approx(100.0));
}

TEST_CASE("predict_roll: unaccelerated flat roll exits at the far end") {
    Surface floor = horizontal_floor(0);
    BallState s;
    s.pos = {-200, -15};
    s.vel = {100, 0};
    KinParams beta{0, 1, 0};
    RollResult r = predict_roll(s, floor, beta);
    CHECK_FALSE(r.rest);
    CHECK(r.duration == doctest::Approx(4.0));  // 400 px at 100 px/s
    CHECK(r.exit.vel.x == doctest::Approx(100.0));
    CHECK(r.exit.pos.x == doctest::Approx(200.0));
}

TEST_CASE("predict_roll: 30 degree incline from rest, energy oracle") {
    // exit speed sqrt(2 g sin30 L) for L = 100
    Surface slope;
    slope.geom = Surface::Geom::Segment;
    Vec2 dir{std::cos(M_PI / 6), std::sin(M_PI / 6)};
    slope.a = {0, 0};
    slope.b = dir * 100.0;
    slope.normal = {std::sin(M_PI / 6), -std::cos(M_PI / 6)};
    BallState s;
    s.pos = {0, 0};
    s.vel = {0, 0};
    KinParams beta{0, 1, 0};
    RollResult r = predict_roll(s, slope, beta);
    CHECK_FALSE(r.rest);
    CHECK(r.exit.vel.norm() == doctest::Approx(std::sqrt(2.0 * 980.0 * 0.5 * 100.0)).epsilon(1e-9));
    CHECK(r.exit.vel.norm() == doctest::Approx(313.0495).epsilon(1e-4));
}

TEST_CASE("predict_roll: rolling resistance brings the ball to rest") {
    Surface floor = horizontal_floor(0);
    BallState s;
    s.pos = {-200, -15};
    s.vel = {50, 0};
    KinParams beta{0, 1, 20};
    RollResult r = predict_roll(s, floor, beta);
    CHECK(r.rest);
    CHECK(r.duration == doctest::Approx(2.5));
    CHECK(dist(r.exit.pos, s.pos) == doctest::Approx(62.5));
    CHECK(r.exit.vel.norm() == doctest::Approx(0.0));
}

TEST_CASE("predict_bounce restitution definition") {
    Surface floor = horizontal_floor();
    BallState s;
    s.vel = {0, 200};
    KinParams beta{0.5, 1.0, 0};
    BallState out = predict_bounce(s, floor, beta);
    CHECK(out.vel.x == doctest::Approx(0.0));
    CHECK(out.vel.y == doctest::Approx(-100.0));
    CHECK(out.pos == s.pos);

    KinParams plastic{0.0, 1.0, 0};
    CHECK(predict_bounce(s, floor, plastic).vel.y == doctest::Approx(0.0));
}

TEST_CASE("predict_bounce 45 degree reflection oracle") {
    // incline with normal (-1,-1)/sqrt2, incoming (100,100)
    Surface s;
    s.geom = Surface::Geom::Segment;
    s.a = {0, 0};
    s.b = {100, -100};
    s.normal = Vec2{-1, -1}.normalized();
    BallState b;
    b.vel = {100, 100};
    KinParams beta{0.5, 0.9, 0};
    BallState out = predict_bounce(b, s, beta);
    // v_n = -141.42 toward the surface, reflected to +70.71; v_t = 0
    CHECK(out.vel.x == doctest::Approx(-50.0));
    CHECK(out.vel.y == doctest::Approx(-50.0));
}

TEST_CASE("bounce with unit restitution preserves speed exactly") {
    Surface s;
    s.geom = Surface::Geom::Segment;
    s.a = {0, 0};
    s.b = {100, -37};
    s.normal = (s.b - s.a).normalized().perp() * -1.0;
    KinParams beta{1.0, 1.0, 0};
    BallState b;
    b.vel = {123.456, 78.9};
    BallState out = predict_bounce(b, s, beta);
    CHECK(out.vel.norm() == doctest::Approx(b.vel.norm()).epsilon(1e-12));
}

TEST_CASE("event_transition dispatch") {
    KinParamsSet beta;
    BallState s;
    s.vel = {100, 0};
    auto ff = event_transition(s, nullptr, ContactType::FreeFall, 100, beta);
    REQUIRE(ff);
    CHECK(ff->out.pos.y == doctest::Approx(490.0));
    CHECK(ff->duration == doctest::Approx(1.0));

    Surface floor = horizontal_floor(0);
    BallState drop;
    drop.vel = {0, 200};
    auto bo = event_transition(drop, &floor, ContactType::BounceOffSegment, 0, beta);
    REQUIRE(bo);
    CHECK(bo->out.vel.y == doctest::Approx(-0.4 * 200.0));

    BallState roll;
    roll.pos = {-200, -15};
    roll.vel = {100, 0};
    auto ro = event_transition(roll, &floor, ContactType::RollOnSegment, 0, beta);
    REQUIRE(ro);
    // default rolling resistance (20 px/s^2) parks the ball after 250 px
    CHECK(ro->terminal_rest);
    CHECK(ro->out.pos.x == doctest::Approx(50.0));
}

TEST_CASE("beta set json round trip") {
    KinParamsSet b;
    b.bounce_seg.e_n = 0.456;
    b.roll.a_roll = 17.5;
    KinParamsSet c = KinParamsSet::from_json(b.to_json());
    CHECK(c.bounce_seg.e_n == doctest::Approx(0.456));
    CHECK(c.roll.a_roll == doctest::Approx(17.5));
    CHECK(c.slide.a_roll == b.slide.a_roll);
}
