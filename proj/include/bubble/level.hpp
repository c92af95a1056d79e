#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "bubble/geometry.hpp"

namespace bubble {

struct BallState {
    Vec2 pos;
    Vec2 vel;
};

// full movable-object state: pose, twist and extents; mass and inertia
// are derived from (w, h) and the level's constant density, never stored
struct BlockState {
    Vec2 pos;
    double angle = 0.0;
    Vec2 vel;
    double angvel = 0.0;
    double w = 0.0;
    double h = 0.0;
};

enum class Material { Wood, Metal };

struct EnvBlock {
    ShapeGeom geom;
    Pose pose;
};

struct BlockTemplate {
    int id = 0;
    ShapeGeom geom;
    Material material = Material::Wood;
};

struct Level {
    std::string name;
    AABB bounds;
    std::vector<EnvBlock> env;
    std::vector<BlockTemplate> inventory;
    BallState ball_start;
    double ball_radius = 15.0;
    Vec2 target;
    double target_eps = 15.0;
    int horizon = 600;

    const BlockTemplate* find_template(int id) const;
};

struct PlacedBlock {
    int id = 0;
    Pose pose;
};

struct Placement {
    std::vector<PlacedBlock> entries;

    bool uses(int id) const;
    bool empty() const { return entries.empty(); }
};

class LevelError : public std::runtime_error {
public:
    explicit LevelError(const std::string& msg) : std::runtime_error(msg) {}
};

Level load_level(const std::string& text);
Level load_level_file(const std::string& path);
std::string save_level(const Level& level);

Placement load_placement(const std::string& text);
Placement load_placement_file(const std::string& path);
std::string save_placement(const Placement& p);

// position within target_eps of the target; velocity plays no part
bool in_target_set(const BallState& s, const Level& level);

struct FeasibilityReport {
    bool ok = true;
    std::vector<std::string> violations;
};

// strict-interior overlap checks: resting tangency is allowed
FeasibilityReport placement_feasible(const Placement& p, const Level& level);

}  // namespace bubble
