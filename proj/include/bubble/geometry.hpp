#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

namespace bubble {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    // z-component of the 2D cross product
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
    Vec2 normalized() const {
        double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{};
    }
    // rotate by +90 degrees (x right, y down: this maps +x onto +y)
    Vec2 perp() const { return {-y, x}; }
    Vec2 rotated(double angle) const {
        double c = std::cos(angle), s = std::sin(angle);
        return {c * x - s * y, s * x + c * y};
    }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double dist(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

struct AABB {
    Vec2 lo;
    Vec2 hi;

    static AABB around(const Vec2& p) { return {p, p}; }
    void include(const Vec2& p) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
    void expand(double m) {
        lo.x -= m; lo.y -= m;
        hi.x += m; hi.y += m;
    }
    bool contains(const Vec2& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
    }
    bool overlaps(const AABB& o) const {
        return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y && o.lo.y <= hi.y;
    }
    double width() const { return hi.x - lo.x; }
    double height() const { return hi.y - lo.y; }
    Vec2 center() const { return (lo + hi) * 0.5; }
};

struct Pose {
    Vec2 pos;
    double angle = 0.0;

    Vec2 to_world(const Vec2& local) const { return pos + local.rotated(angle); }
    Vec2 to_local(const Vec2& world) const { return (world - pos).rotated(-angle); }
};

enum class ShapeKind { Rect, Square, CircleSeg };

// Geometry of a block: an oriented rectangle or a circular segment
// (chord of width w along the local x axis, arc of sagitta h bulging
// toward local -y). Collision vs other blocks uses the polygon hull;
// the ball sees the true arc.
struct ShapeGeom {
    ShapeKind kind = ShapeKind::Rect;
    double w = 0.0;
    double h = 0.0;

    bool is_circle_seg() const { return kind == ShapeKind::CircleSeg; }

    // circle supporting the arc, local frame (CircleSeg only)
    double arc_radius() const { return (w * w / 4.0 + h * h) / (2.0 * h); }
    Vec2 arc_center_local() const { return {0.0, arc_radius() - h}; }
    // arc spans [pi + half, 2pi - half] ... measured from center; we keep
    // the half-angle from the vertical instead
    double arc_half_angle() const { return std::asin((w / 2.0) / arc_radius()); }

    std::vector<Vec2> local_polygon() const;
    double area() const;
    double inertia_per_mass() const;  // second moment about centroid / mass
};

std::vector<Vec2> world_polygon(const ShapeGeom& g, const Pose& pose);

// --- segment primitives ---

Vec2 closest_point_on_segment(const Vec2& p, const Vec2& a, const Vec2& b);
double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b);

// --- polygon primitives ---

// signed distance from point to convex polygon boundary (< 0 inside)
double signed_dist_point_polygon(const Vec2& p, const std::vector<Vec2>& poly);

// SAT overlap with strictly positive penetration; touching counts as separated
bool polygons_overlap_strict(const std::vector<Vec2>& a, const std::vector<Vec2>& b);

struct ClosestFeature {
    double separation = 0.0;  // center-to-boundary distance minus nothing; <0 means center inside
    Vec2 point;               // closest boundary point
    Vec2 normal;              // outward normal at that point
    int edge_a = -1;          // index of the polygon edge (a..a+1), -1 for arc
    bool on_arc = false;
};

// closest boundary feature of a block to an external point, true arc for CircleSeg
ClosestFeature closest_feature(const ShapeGeom& g, const Pose& pose, const Vec2& p);

// circle (center c, radius r) vs block: signed separation (negative = overlap depth)
double circle_block_separation(const Vec2& c, double r, const ShapeGeom& g, const Pose& pose);

// strict-interior overlap; tangency is not an overlap
bool circle_block_overlap_strict(const Vec2& c, double r, const ShapeGeom& g, const Pose& pose);

// distance between a segment and a block boundary (0 if they intersect)
double dist_segment_block(const Vec2& a, const Vec2& b, const ShapeGeom& g, const Pose& pose);

// polyline helpers
struct PolylineHit {
    double dist = 0.0;
    Vec2 point;
    int segment = 0;
    double t = 0.0;  // param within segment
};
PolylineHit closest_point_on_polyline(const Vec2& p, const std::vector<Vec2>& line);

// clip a polyline against an AABB; returns the contiguous pieces that lie inside
std::vector<std::vector<Vec2>> clip_polyline_aabb(const std::vector<Vec2>& line, const AABB& box);

}  // namespace bubble
