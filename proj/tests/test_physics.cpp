#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "bubble/physics.hpp"
#include "helpers.hpp"

using namespace bubble;

namespace {

std::string serialize(const TrialRecord& tr) {
    std::ostringstream os;
    os.precision(17);
    for (const TrajSample& s : tr.trajectory)
        os << s.k << ' ' << s.state.pos.x << ' ' << s.state.pos.y << ' ' << s.state.vel.x << ' '
           << s.state.vel.y << '\n';
    for (const auto& blocks : tr.block_history)
        for (const BlockState& b : blocks)
            os << b.pos.x << ' ' << b.pos.y << ' ' << b.angle << ' ' << b.vel.x << ' ' << b.vel.y
               << ' ' << b.angvel << '\n';
    return os.str();
}

}  // namespace

TEST_CASE("free-space step applies gravity then moves at the new velocity") {
    Level lv = test::flat_floor_level();
    WorldState w;
    w.ball.pos = {100, 100};
    w.ball.vel = {0, 0};
    WorldState out = step(w, lv);
    CHECK(out.ball.vel.x == doctest::Approx(0.0));
    CHECK(out.ball.vel.y == doctest::Approx(980.0 / 60.0).epsilon(1e-12));
    CHECK(out.ball.pos.y == doctest::Approx(100.0 + (980.0 / 60.0) * (1.0 / 60.0)).epsilon(1e-12));
    CHECK(out.step == 1);
}

TEST_CASE("ball resting on the floor stays put") {
    Level lv = test::flat_floor_level();
    WorldState w;
    w.ball.pos = {400, 535};  // tangent to the floor top at 550
    w.ball.vel = {0, 0};
    WorldState out = w;
    for (int i = 0; i < 60; ++i) out = step(out, lv);
    CHECK(out.ball.pos.y == doctest::Approx(535.0).epsilon(1e-3));
    CHECK(std::abs(out.ball.vel.y) < 1.0);
}

TEST_CASE("impact restitution: analytic impulse oracle") {
    Level lv = test::flat_floor_level();
    SimParams params;
    params.restitution_wood = 0.5;
    WorldState w;
    w.ball.pos = {400, 535};
    w.ball.vel = {0, 200};
    WorldState out = step(w, lv, params);
    CHECK(out.ball.vel.y == doctest::Approx(-100.0).epsilon(0.005));  // within 1 px/s
}

TEST_CASE("simulate is deterministic: identical records byte for byte") {
    Level lv = test::flat_floor_level();
    lv.inventory = {test::plank(1)};
    lv.ball_start.vel = {120, 0};
    Placement p;
    p.entries.push_back({1, {{300, 540}, 0}});
    TrialRecord a = simulate(lv, p);
    TrialRecord b = simulate(lv, p);
    CHECK(serialize(a) == serialize(b));
}

TEST_CASE("free flight matches the semi-implicit recurrence bitwise") {
    Level lv = test::flat_floor_level();
    lv.bounds = {{0, 0}, {4000, 4000}};
    EnvBlock floor;
    floor.geom = {ShapeKind::Rect, 4000, 40};
    floor.pose = {{2000, 3980}, 0.0};
    lv.env = {floor};
    lv.ball_start.pos = {100, 100};
    lv.ball_start.vel = {30, -50};
    lv.target = {3900, 100};
    lv.horizon = 60;

    TrialRecord tr = simulate(lv, {});
    double x = 100, y = 100, vx = 30, vy = -50;
    const double dt = 1.0 / 60.0, g = 980.0;
    for (int k = 1; k <= 60; ++k) {
        vy += g * dt;
        x += vx * dt;
        y += vy * dt;
        CHECK(tr.trajectory[k].state.pos.x == x);
        CHECK(tr.trajectory[k].state.pos.y == y);
        CHECK(tr.trajectory[k].state.vel.y == vy);
    }

    // and the continuous parabola within 2% over one second
    double t = 1.0;
    double y_cont = 100.0 + (-50.0) * t + 0.5 * g * t * t;
    double x_cont = 100.0 + 30.0 * t;
    Vec2 sim = tr.trajectory[60].state.pos;
    double displacement = dist({x_cont, y_cont}, {100, 100});
    CHECK(dist(sim, {x_cont, y_cont}) / displacement < 0.02);
}

TEST_CASE("energy never increases across impact events") {
    // randomized single-impact scenarios on inclined floors, restitution up to 1
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> angle_d(-0.6, 0.6);
    std::uniform_real_distribution<double> e_d(0.0, 1.0);
    std::uniform_real_distribution<double> vx_d(-250, 250);
    std::uniform_real_distribution<double> vy_d(40, 500);

    int checked = 0;
    for (int i = 0; i < 200; ++i) {
        double ang = angle_d(rng);
        Level lv;
        lv.bounds = {{-2000, -2000}, {2000, 2000}};
        EnvBlock floor;
        floor.geom = {ShapeKind::Rect, 3000, 60};
        floor.pose = {{0, 0}, ang};
        lv.env = {floor};
        lv.ball_radius = 15;
        lv.horizon = 4;
        lv.target = {1900, -1900};
        lv.target_eps = 1;

        // ball exactly touching the upper face at the origin-side point
        Vec2 n{std::sin(ang), -std::cos(ang)};
        lv.ball_start.pos = Vec2{0, 0} + n * (30.0 + 15.0);
        Vec2 vel{vx_d(rng), vy_d(rng)};
        if (vel.dot(n) > -30.0) continue;  // need a real impact
        lv.ball_start.vel = vel;

        SimParams params;
        params.restitution_wood = e_d(rng);
        TrialRecord tr = simulate(lv, {}, params);

        const BallState& pre = tr.trajectory[0].state;
        const BallState& post = tr.trajectory[1].state;
        double e_pre = 0.5 * pre.vel.norm2() + 980.0 * -pre.pos.y;
        double e_post = 0.5 * post.vel.norm2() + 980.0 * -post.pos.y;
        CHECK(e_post <= e_pre * (1.0 + 1e-6) + 1e-6);
        ++checked;
    }
    CHECK(checked > 100);
}

TEST_CASE("ball dropped on the floor: events segment into fall, bounces, roll") {
    Level lv = test::flat_floor_level();
    lv.ball_start.pos = {200, 400};
    lv.ball_start.vel = {90, 0};
    lv.target = {790, 10};  // unreachable, run the full horizon
    lv.target_eps = 5;
    lv.horizon = 300;
    TrialRecord tr = simulate(lv, {});
    std::vector<Event> events = detect_events(tr);

    REQUIRE(events.size() >= 3);
    CHECK(events.front().kind == ContactType::FreeFall);
    bool saw_bounce = false, saw_roll = false;
    for (const Event& e : events) {
        if (e.kind == ContactType::BounceOffSegment) saw_bounce = true;
        if (e.kind == ContactType::RollOnSegment && saw_bounce) saw_roll = true;
    }
    CHECK(saw_bounce);
    CHECK(saw_roll);

    // events partition the record without gaps or overlap
    CHECK(events.front().start_step == 0);
    for (size_t i = 0; i + 1 < events.size(); ++i) {
        CHECK(events[i].end_step + 1 == events[i + 1].start_step);
    }
    CHECK(events.back().end_step == tr.trajectory.back().k);

    // consecutive events differ in (kind, object)
    for (size_t i = 0; i + 1 < events.size(); ++i) {
        bool distinct = events[i].kind != events[i + 1].kind ||
                        events[i].object != events[i + 1].object;
        CHECK(distinct);
    }
}

TEST_CASE("pure free fall is a single event") {
    Level lv = test::flat_floor_level();
    lv.ball_start.pos = {100, 50};
    lv.ball_start.vel = {40, -80};
    lv.horizon = 30;
    lv.target = {790, 590};
    TrialRecord tr = simulate(lv, {});
    std::vector<Event> events = detect_events(tr);
    REQUIRE(events.size() == 1);
    CHECK(events[0].kind == ContactType::FreeFall);
    CHECK(events[0].object.kind == ObjRef::Kind::None);
}

TEST_CASE("contact flicker shorter than 3 steps merges into its neighbors") {
    // synthetic record: roll with a one-step gap in the contact list
    TrialRecord tr;
    Surface surf;
    surf.geom = Surface::Geom::Segment;
    surf.a = {0, 550};
    surf.b = {400, 550};
    surf.normal = {0, -1};
    surf.owner = ObjRef::env(0);
    for (int k = 0; k <= 20; ++k) {
        TrajSample s;
        s.k = k;
        s.state.pos = {double(20 * k), 535};
        s.state.vel = {120, 0};
        tr.trajectory.push_back(s);
        tr.block_history.push_back({});
        Contact c;
        c.b = ObjRef::env(0);
        c.normal = {0, -1};
        c.penetration = 0.1;
        c.approach_speed = 5.0;
        c.surface = surf;
        if (k == 10) tr.contacts.push_back({});  // flicker: one contact-free step
        else tr.contacts.push_back({c});
    }
    std::vector<Event> events = detect_events(tr);
    REQUIRE(events.size() == 1);
    CHECK(events[0].kind == ContactType::RollOnSegment);
    CHECK(events[0].start_step == 0);
    CHECK(events[0].end_step == 20);
}

TEST_CASE("single-step impact surrounded by free fall survives debouncing") {
    TrialRecord tr;
    Surface surf;
    surf.geom = Surface::Geom::Segment;
    surf.a = {0, 550};
    surf.b = {400, 550};
    surf.normal = {0, -1};
    surf.owner = ObjRef::env(0);
    for (int k = 0; k <= 10; ++k) {
        TrajSample s;
        s.k = k;
        s.state.pos = {100, double(400 + k)};
        s.state.vel = {0, k < 5 ? 300.0 : -150.0};
        tr.trajectory.push_back(s);
        tr.block_history.push_back({});
        if (k == 5) {
            Contact c;
            c.b = ObjRef::env(0);
            c.normal = {0, -1};
            c.penetration = 0.2;
            c.approach_speed = 300.0;
            c.surface = surf;
            tr.contacts.push_back({c});
        } else {
            tr.contacts.push_back({});
        }
    }
    std::vector<Event> events = detect_events(tr);
    REQUIRE(events.size() == 3);
    CHECK(events[1].kind == ContactType::BounceOffSegment);
    CHECK(events[1].start_step == 5);
    CHECK(events[1].end_step == 5);
}

TEST_CASE("unsupported block falls; supported block stays") {
    Level lv = test::flat_floor_level();
    lv.inventory = {test::plank(1), test::square(2)};

    Placement floating;
    floating.entries.push_back({1, {{300, 300}, 0}});
    TrialRecord tr = simulate(lv, floating);
    // after half a second the plank has clearly dropped
    CHECK(tr.block_history[30][0].pos.y > 310.0);

    Placement resting;
    resting.entries.push_back({1, {{300, 540}, 0}});
    TrialRecord tr2 = simulate(lv, resting);
    CHECK(std::abs(tr2.block_history[60][0].pos.y - 540.0) < 1.0);
    CHECK(std::abs(tr2.block_history[60][0].angle) < 0.01);
}

TEST_CASE("trial csv has the header and one row per step") {
    Level lv = test::flat_floor_level();
    lv.horizon = 10;
    lv.target = {790, 10};
    lv.target_eps = 1;
    TrialRecord tr = simulate(lv, {});
    std::string csv = trial_to_csv(tr);
    CHECK(csv.find("k,x,y,vx,vy,event_kind,object_id") == 0);
    int lines = 0;
    for (char ch : csv)
        if (ch == '\n') ++lines;
    CHECK(lines == 12);  // header + 11 samples
}

TEST_CASE("bundled L01 with its frozen solution placement reaches the target") {
    Level lv = load_level_file(std::string(LEVELS_DIR) + "/L01.json");
    // regression fixture: the placement the solver finds for this level
    Placement p;
    p.entries.push_back({1, {{160.0, 549.9999998866695}, 0.0}});
    TrialRecord tr = simulate(lv, p);
    CHECK(tr.reached());
    CHECK(tr.tau < lv.horizon);
    CHECK(tr.tau == 85);
}

TEST_CASE("catalog closure: classify reproduces every event kind") {
    Level lv = test::flat_floor_level();
    lv.ball_start.pos = {200, 350};
    lv.ball_start.vel = {150, 0};
    lv.target = {790, 10};
    lv.target_eps = 5;
    lv.horizon = 400;
    lv.inventory = {test::dome(1)};
    Placement p;
    p.entries.push_back({1, {{420, 550}, 0.0}});
    TrialRecord tr = simulate(lv, p);
    int contact_events = 0;
    for (const Event& e : detect_events(tr)) {
        if (e.object.kind == ObjRef::Kind::None) continue;
        const Contact* c = nullptr;
        for (const Contact& cand : tr.contacts[e.start_step])
            if (cand.b == e.object) c = &cand;
        REQUIRE(c);
        CHECK(classify_speeds(std::max(c->approach_speed, 0.0), c->surface) == e.kind);
        ++contact_events;
    }
    CHECK(contact_events >= 2);
}
