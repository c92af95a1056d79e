#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "bubble/level.hpp"
#include "bubble/physics.hpp"

namespace bubble {

class NoPathError : public std::runtime_error {
public:
    explicit NoPathError(const std::string& msg) : std::runtime_error(msg) {}
};

struct GuidePath {
    std::vector<Vec2> waypoints;  // first = ball start, last = target
};

struct GuideParams {
    double cell = 10.0;       // occupancy grid resolution
    double eps1 = 10.0;       // deviation band lower edge
    double eps2 = 60.0;       // deviation band upper edge
    double margin = 40.0;     // region padding so a block fits inside
    double local_target_eps = 20.0;
};

struct LocalRegion {
    AABB rect;            // margin-expanded working rectangle
    AABB rect_premargin;  // minimal AABB over the qualifying pair points
    int k_loc = 0;        // earliest qualifying trajectory step
    std::vector<TrajSample> gamma_in_loc;
    std::vector<Vec2> gamma_g_loc;
    bool fallback = false;  // built by a band-miss fallback rule
};

struct LocalTargetSet {
    Vec2 center;
    double radius = 0.0;
    // membership is strictly inside, unlike the level target set
    bool contains(const Vec2& p) const { return dist(p, center) < radius; }
};

// geometry-only path over free space, ball-radius inflation, deterministic
GuidePath plan_guide_path(const Level& level, const GuideParams& gp = {});

// deviation-band local region per the nearest-point pairing rule, with two
// fallbacks: band overshoot (all deviations beyond eps2) and stalls (the
// trajectory hugs the guide but never advances along it)
std::optional<LocalRegion> compute_local_region(const std::vector<TrajSample>& gamma_in,
                                                const GuidePath& gamma_g, double eps1,
                                                double eps2, double margin = 40.0);

LocalTargetSet local_target(const LocalRegion& region, double eps);

}  // namespace bubble
