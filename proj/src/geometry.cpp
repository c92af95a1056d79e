#include "bubble/geometry.hpp"

#include <algorithm>
#include <limits>

namespace bubble {

namespace {
constexpr int kArcHullPoints = 12;  // arc subdivision for the polygon hull
}

std::vector<Vec2> ShapeGeom::local_polygon() const {
    if (kind != ShapeKind::CircleSeg) {
        double hw = w / 2.0, hh = h / 2.0;
        return {{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}};
    }
    // chord endpoints plus the arc sampled left-to-right, keeping positive winding
    std::vector<Vec2> pts;
    pts.reserve(kArcHullPoints + 2);
    double r = arc_radius();
    Vec2 c = arc_center_local();
    double half = arc_half_angle();
    pts.push_back({-w / 2.0, 0.0});
    for (int i = 1; i < kArcHullPoints; ++i) {
        // angle measured from the local -y direction at the circle center
        double a = -half + 2.0 * half * double(i) / double(kArcHullPoints);
        pts.push_back({c.x + r * std::sin(a), c.y - r * std::cos(a)});
    }
    pts.push_back({w / 2.0, 0.0});
    return pts;
}

double ShapeGeom::area() const {
    if (kind != ShapeKind::CircleSeg) return w * h;
    double r = arc_radius();
    double theta = 2.0 * arc_half_angle();
    return r * r * (theta - std::sin(theta)) / 2.0;
}

double ShapeGeom::inertia_per_mass() const {
    // polygon-hull second moment about the centroid, normalized by area
    std::vector<Vec2> poly = local_polygon();
    double a2 = 0.0, cx = 0.0, cy = 0.0, ixy = 0.0;
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % n];
        double cr = p.cross(q);
        a2 += cr;
        cx += (p.x + q.x) * cr;
        cy += (p.y + q.y) * cr;
        ixy += cr * (p.dot(p) + p.dot(q) + q.dot(q));
    }
    double area_ = a2 / 2.0;
    Vec2 centroid{cx / (3.0 * a2), cy / (3.0 * a2)};
    double inertia_origin = ixy / 12.0;  // integral of r^2 dA
    double per_mass = inertia_origin / area_ - centroid.norm2();
    return std::max(per_mass, 1e-6);
}

std::vector<Vec2> world_polygon(const ShapeGeom& g, const Pose& pose) {
    std::vector<Vec2> pts = g.local_polygon();
    for (Vec2& p : pts) p = pose.to_world(p);
    return pts;
}

Vec2 closest_point_on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    Vec2 ab = b - a;
    double len2 = ab.norm2();
    if (len2 <= 0.0) return a;
    double t = (p - a).dot(ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return a + ab * t;
}

double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    return dist(p, closest_point_on_segment(p, a, b));
}

double signed_dist_point_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
    double best = std::numeric_limits<double>::max();
    bool inside = true;
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        best = std::min(best, dist_point_segment(p, a, b));
        if ((b - a).cross(p - a) < 0.0) inside = false;
    }
    return inside ? -best : best;
}

namespace {

struct Projection {
    double lo, hi;
};

Projection project(const std::vector<Vec2>& poly, const Vec2& axis) {
    double lo = poly[0].dot(axis), hi = lo;
    for (const Vec2& p : poly) {
        double d = p.dot(axis);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return {lo, hi};
}

bool sat_separated(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    size_t n = a.size();
    for (size_t i = 0; i < n; ++i) {
        Vec2 edge = a[(i + 1) % n] - a[i];
        Vec2 axis = edge.perp().normalized();
        Projection pa = project(a, axis);
        Projection pb = project(b, axis);
        if (pa.hi <= pb.lo + 1e-9 || pb.hi <= pa.lo + 1e-9) return true;
    }
    return false;
}

}  // namespace

bool polygons_overlap_strict(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    return !sat_separated(a, b) && !sat_separated(b, a);
}

ClosestFeature closest_feature(const ShapeGeom& g, const Pose& pose, const Vec2& p) {
    ClosestFeature out;
    Vec2 local = pose.to_local(p);

    if (g.kind == ShapeKind::CircleSeg) {
        // candidate 1: the arc (clamped to its angular extent)
        double r = g.arc_radius();
        Vec2 c = g.arc_center_local();
        double half = g.arc_half_angle();
        Vec2 d = local - c;
        double ang = std::atan2(d.x, -d.y);  // 0 points to the arc apex
        double clamped = std::clamp(ang, -half, half);
        Vec2 arc_pt = {c.x + r * std::sin(clamped), c.y - r * std::cos(clamped)};
        double arc_d = dist(local, arc_pt);

        // candidate 2: the chord
        Vec2 a{-g.w / 2.0, 0.0}, b{g.w / 2.0, 0.0};
        Vec2 chord_pt = closest_point_on_segment(local, a, b);
        double chord_d = dist(local, chord_pt);

        bool inside = local.y < 0.0 && local.y > c.y - r &&
                      (local - c).norm() < r && std::abs(ang) < half;

        if (arc_d <= chord_d) {
            out.on_arc = true;
            out.point = pose.to_world(arc_pt);
            Vec2 n_local = (local - c).normalized();
            if (inside) n_local = Vec2{std::sin(clamped), -std::cos(clamped)};
            out.normal = n_local.rotated(pose.angle);
            out.separation = inside ? -arc_d : arc_d;
        } else {
            out.point = pose.to_world(chord_pt);
            Vec2 n_local{0.0, 1.0};  // chord outward normal is local +y
            if (!inside) {
                Vec2 dd = local - chord_pt;
                if (dd.norm2() > 1e-12) n_local = dd.normalized();
            }
            out.normal = n_local.rotated(pose.angle);
            out.separation = inside ? -chord_d : chord_d;
            out.edge_a = 0;
        }
        return out;
    }

    std::vector<Vec2> poly = g.local_polygon();
    size_t n = poly.size();
    double best = std::numeric_limits<double>::max();
    Vec2 best_pt;
    int best_edge = 0;
    bool inside = true;
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        Vec2 q = closest_point_on_segment(local, a, b);
        double d = dist(local, q);
        if (d < best) {
            best = d;
            best_pt = q;
            best_edge = int(i);
        }
        if ((b - a).cross(local - a) < 0.0) inside = false;
    }
    out.point = pose.to_world(best_pt);
    out.edge_a = best_edge;
    Vec2 n_local;
    if (inside) {
        Vec2 ea = poly[best_edge];
        Vec2 eb = poly[(best_edge + 1) % n];
        n_local = (eb - ea).perp().normalized() * -1.0;  // outward for positive winding
        out.separation = -best;
    } else {
        Vec2 d = local - best_pt;
        n_local = d.norm2() > 1e-12 ? d.normalized() : Vec2{0.0, -1.0};
        out.separation = best;
    }
    out.normal = n_local.rotated(pose.angle);
    return out;
}

double circle_block_separation(const Vec2& c, double r, const ShapeGeom& g, const Pose& pose) {
    ClosestFeature f = closest_feature(g, pose, c);
    return f.separation - r;
}

bool circle_block_overlap_strict(const Vec2& c, double r, const ShapeGeom& g, const Pose& pose) {
    return circle_block_separation(c, r, g, pose) < -1e-9;
}

double dist_segment_block(const Vec2& a, const Vec2& b, const ShapeGeom& g, const Pose& pose) {
    // sampled lower envelope; fine at the 1px scale callers need
    double len = dist(a, b);
    int steps = std::max(2, int(len / 2.0));
    double best = std::numeric_limits<double>::max();
    for (int i = 0; i <= steps; ++i) {
        Vec2 p = a + (b - a) * (double(i) / steps);
        ClosestFeature f = closest_feature(g, pose, p);
        best = std::min(best, f.separation);
        if (best < 0.0) return 0.0;
    }
    return std::max(best, 0.0);
}

PolylineHit closest_point_on_polyline(const Vec2& p, const std::vector<Vec2>& line) {
    PolylineHit best;
    best.dist = std::numeric_limits<double>::max();
    for (size_t i = 0; i + 1 < line.size(); ++i) {
        const Vec2& a = line[i];
        const Vec2& b = line[i + 1];
        Vec2 ab = b - a;
        double len2 = ab.norm2();
        double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
        Vec2 q = a + ab * t;
        double d = dist(p, q);
        if (d < best.dist) {
            best.dist = d;
            best.point = q;
            best.segment = int(i);
            best.t = t;
        }
    }
    if (line.size() == 1) {
        best = {dist(p, line[0]), line[0], 0, 0.0};
    }
    return best;
}

std::vector<std::vector<Vec2>> clip_polyline_aabb(const std::vector<Vec2>& line, const AABB& box) {
    std::vector<std::vector<Vec2>> pieces;
    std::vector<Vec2> cur;

    auto clip_seg = [&](Vec2 a, Vec2 b, Vec2& ca, Vec2& cb) -> bool {
        // Liang-Barsky
        double t0 = 0.0, t1 = 1.0;
        Vec2 d = b - a;
        auto update = [&](double p, double q) {
            if (p == 0.0) return q >= 0.0;
            double t = q / p;
            if (p < 0.0) {
                if (t > t1) return false;
                if (t > t0) t0 = t;
            } else {
                if (t < t0) return false;
                if (t < t1) t1 = t;
            }
            return true;
        };
        if (!update(-d.x, a.x - box.lo.x)) return false;
        if (!update(d.x, box.hi.x - a.x)) return false;
        if (!update(-d.y, a.y - box.lo.y)) return false;
        if (!update(d.y, box.hi.y - a.y)) return false;
        ca = a + d * t0;
        cb = a + d * t1;
        return true;
    };

    for (size_t i = 0; i + 1 < line.size(); ++i) {
        Vec2 ca, cb;
        if (clip_seg(line[i], line[i + 1], ca, cb)) {
            if (cur.empty()) {
                cur.push_back(ca);
            } else if (dist(cur.back(), ca) > 1e-9) {
                pieces.push_back(cur);
                cur.clear();
                cur.push_back(ca);
            }
            if (dist(cur.back(), cb) > 1e-9) cur.push_back(cb);
        } else if (!cur.empty()) {
            pieces.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) pieces.push_back(cur);
    if (pieces.empty() && line.size() == 1 && box.contains(line[0])) pieces.push_back({line[0]});
    return pieces;
}

}  // namespace bubble
