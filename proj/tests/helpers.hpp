#pragma once

#include <string>

#include "bubble/level.hpp"

namespace bubble::test {

// 800x600 world with a full-width floor whose top surface sits at y = 550
inline Level flat_floor_level() {
    Level lv;
    lv.name = "flat";
    lv.bounds = {{0, 0}, {800, 600}};
    EnvBlock floor;
    floor.geom = {ShapeKind::Rect, 800, 40};
    floor.pose = {{400, 570}, 0.0};
    lv.env.push_back(floor);
    lv.ball_start.pos = {100, 100};
    lv.ball_start.vel = {0, 0};
    lv.ball_radius = 15;
    lv.target = {700, 535};
    lv.target_eps = 15;
    lv.horizon = 600;
    return lv;
}

inline BlockTemplate plank(int id, double w = 100, double h = 20) {
    return {id, {ShapeKind::Rect, w, h}, Material::Wood};
}

inline BlockTemplate square(int id, double s = 40) {
    return {id, {ShapeKind::Square, s, s}, Material::Wood};
}

inline BlockTemplate dome(int id, double w = 120, double h = 40) {
    return {id, {ShapeKind::CircleSeg, w, h}, Material::Wood};
}

inline std::string minimal_level_json() {
    return R"({
  "bounds": [0, 0, 800, 600],
  "ball": {"start": [100, 100, 0, 0], "radius": 15},
  "target": {"pos": [700, 535], "eps": 15},
  "horizon": 600,
  "env": [{"shape": "rectangle", "pos": [400, 570], "angle": 0, "w": 800, "h": 40}],
  "inventory": [{"id": 1, "shape": "rectangle", "w": 100, "h": 20, "material": "wood"}]
})";
}

}  // namespace bubble::test
