#include <doctest.h>

#include "bubble/level.hpp"
#include "helpers.hpp"

using namespace bubble;

TEST_CASE("minimal level file loads with one env block and one template") {
    Level lv = load_level(test::minimal_level_json());
    CHECK(lv.env.size() == 1);
    CHECK(lv.inventory.size() == 1);
    CHECK(lv.ball_start.pos == Vec2{100, 100});
    CHECK(lv.target_eps == 15.0);
    CHECK(lv.horizon == 600);
}

TEST_CASE("negative width is reported naming the block") {
    std::string text = test::minimal_level_json();
    size_t pos = text.find("\"w\": 100, \"h\": 20, \"material\"");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 8, "\"w\": -5 ");
    CHECK_THROWS_WITH_AS(load_level(text),
                         doctest::Contains("inventory id 1"), LevelError);
}

TEST_CASE("duplicate template ids are invariant violations") {
    std::string text = test::minimal_level_json();
    size_t pos = text.find("]\n}");
    text.insert(text.find("{\"id\": 1"), 
                R"({"id": 1, "shape": "square", "w": 40, "h": 40, "material": "wood"}, )");
    (void)pos;
    CHECK_THROWS_WITH_AS(load_level(text), doctest::Contains("duplicate id"), LevelError);
}

TEST_CASE("malformed json is a parse error") {
    CHECK_THROWS_AS(load_level("{ nope"), LevelError);
}

TEST_CASE("save then load is the identity") {
    Level lv = load_level(test::minimal_level_json());
    Level lv2 = load_level(save_level(lv));
    CHECK(lv2.env.size() == lv.env.size());
    CHECK(lv2.inventory.size() == lv.inventory.size());
    CHECK(lv2.ball_start.pos == lv.ball_start.pos);
    CHECK(lv2.ball_start.vel == lv.ball_start.vel);
    CHECK(lv2.target == lv.target);
    CHECK(lv2.target_eps == lv.target_eps);
    CHECK(lv2.horizon == lv.horizon);
    CHECK(lv2.env[0].pose.pos == lv.env[0].pose.pos);
    CHECK(lv2.inventory[0].geom.w == lv.inventory[0].geom.w);
    // and byte-stable on the second pass
    CHECK(save_level(lv2) == save_level(lv));
}

TEST_CASE("target set membership ignores velocity and includes the boundary") {
    Level lv = test::flat_floor_level();
    BallState s;
    s.pos = lv.target;
    s.vel = {1e6, -1e6};
    CHECK(in_target_set(s, lv));
    s.pos = lv.target + Vec2{lv.target_eps, 0};
    CHECK(in_target_set(s, lv));  // distance exactly eps
    s.pos = lv.target + Vec2{lv.target_eps + 1.0, 0};
    CHECK_FALSE(in_target_set(s, lv));
}

TEST_CASE("placement feasibility") {
    Level lv = test::flat_floor_level();
    lv.inventory = {test::plank(1), test::square(2)};

    SUBCASE("empty placement is feasible") {
        CHECK(placement_feasible({}, lv).ok);
    }
    SUBCASE("block centered inside the floor overlaps") {
        Placement p;
        p.entries.push_back({1, {{400, 570}, 0}});
        FeasibilityReport rep = placement_feasible(p, lv);
        CHECK_FALSE(rep.ok);
        REQUIRE(rep.violations.size() == 1);
        CHECK(rep.violations[0].find("block 1") != std::string::npos);
        CHECK(rep.violations[0].find("env[0]") != std::string::npos);
    }
    SUBCASE("tangent to the floor is feasible") {
        Placement p;
        p.entries.push_back({1, {{400, 540}, 0}});  // plank h=20, bottom exactly on 550
        CHECK(placement_feasible(p, lv).ok);
    }
    SUBCASE("overlapping the ball start is infeasible") {
        Placement p;
        p.entries.push_back({2, {{100, 100}, 0}});
        FeasibilityReport rep = placement_feasible(p, lv);
        CHECK_FALSE(rep.ok);
        CHECK(rep.violations[0].find("ball start") != std::string::npos);
    }
    SUBCASE("feasibility is invariant under entry permutation") {
        Placement p;
        p.entries.push_back({1, {{300, 540}, 0}});
        p.entries.push_back({2, {{500, 530}, 0}});
        Placement q;
        q.entries = {p.entries[1], p.entries[0]};
        CHECK(placement_feasible(p, lv).ok == placement_feasible(q, lv).ok);
    }
    SUBCASE("unknown template id throws") {
        Placement p;
        p.entries.push_back({99, {{300, 300}, 0}});
        CHECK_THROWS_AS(placement_feasible(p, lv), LevelError);
    }
    SUBCASE("same id twice is a violation") {
        Placement p;
        p.entries.push_back({1, {{300, 540}, 0}});
        p.entries.push_back({1, {{500, 540}, 0}});
        CHECK_FALSE(placement_feasible(p, lv).ok);
    }
}

TEST_CASE("placement round trip") {
    Placement p;
    p.entries.push_back({1, {{300.5, 540.25}, 0.1}});
    p.entries.push_back({2, {{500, 530}, -0.7}});
    Placement q = load_placement(save_placement(p));
    REQUIRE(q.entries.size() == 2);
    CHECK(q.entries[0].pose.pos == p.entries[0].pose.pos);
    CHECK(q.entries[1].pose.angle == p.entries[1].pose.angle);
}
