#include "bubble/guide.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

namespace bubble {

namespace {

struct Grid {
    int nx = 0, ny = 0;
    double cell = 10.0;
    Vec2 origin;
    std::vector<char> blocked;
    std::vector<double> penalty;  // horizontal-motion cost factor per cell

    int idx(int x, int y) const { return y * nx + x; }
    bool in(int x, int y) const { return x >= 0 && x < nx && y >= 0 && y < ny; }
    Vec2 center(int x, int y) const {
        return origin + Vec2{(x + 0.5) * cell, (y + 0.5) * cell};
    }
};

// horizontal travel high above any support is useless to a rolling ball;
// weight it so the planned path hugs drop lines and surfaces
constexpr double kAirPenaltyCap = 60.0;   // px of drop considered "high air"
constexpr double kAirPenaltyGain = 1.5;

double air_penalty(double drop_below) {
    double f = std::min(drop_below, kAirPenaltyCap) / kAirPenaltyCap;
    return 1.0 + kAirPenaltyGain * f;
}

Grid build_grid(const Level& level, double cell) {
    Grid g;
    g.cell = cell;
    g.origin = level.bounds.lo;
    g.nx = std::max(1, int(std::ceil(level.bounds.width() / cell)));
    g.ny = std::max(1, int(std::ceil(level.bounds.height() / cell)));
    g.blocked.assign(size_t(g.nx) * g.ny, 0);
    double r = level.ball_radius;
    for (int y = 0; y < g.ny; ++y) {
        for (int x = 0; x < g.nx; ++x) {
            Vec2 c = g.center(x, y);
            bool bad = c.x < level.bounds.lo.x + r || c.x > level.bounds.hi.x - r ||
                       c.y < level.bounds.lo.y + r || c.y > level.bounds.hi.y - r;
            if (!bad) {
                for (const EnvBlock& e : level.env) {
                    if (circle_block_separation(c, r, e.geom, e.pose) <= 0.0) {
                        bad = true;
                        break;
                    }
                }
            }
            g.blocked[g.idx(x, y)] = bad ? 1 : 0;
        }
    }
    g.penalty.assign(g.blocked.size(), 1.0);
    for (int x = 0; x < g.nx; ++x) {
        double drop = 1e9;  // cells below the world floor count as unsupported
        for (int y = g.ny - 1; y >= 0; --y) {
            if (g.blocked[g.idx(x, y)]) {
                drop = 0.0;
            } else {
                drop += g.cell;
                g.penalty[g.idx(x, y)] = air_penalty(drop);
            }
        }
    }
    return g;
}

double penalty_at(const Grid& g, const Vec2& p) {
    int cx = std::clamp(int((p.x - g.origin.x) / g.cell), 0, g.nx - 1);
    int cy = std::clamp(int((p.y - g.origin.y) / g.cell), 0, g.ny - 1);
    return g.penalty[g.idx(cx, cy)];
}

double penalized_length(const Grid& g, const Vec2& a, const Vec2& b) {
    double len = dist(a, b);
    int n = std::max(1, int(len / 5.0));
    double sum = 0.0;
    Vec2 step = (b - a) / double(n);
    for (int i = 0; i < n; ++i) {
        Vec2 mid = a + step * (i + 0.5);
        sum += std::abs(step.x) * penalty_at(g, mid) + std::abs(step.y);
    }
    return sum;
}

std::pair<int, int> nearest_free_cell(const Grid& g, const Vec2& p) {
    int cx = std::clamp(int((p.x - g.origin.x) / g.cell), 0, g.nx - 1);
    int cy = std::clamp(int((p.y - g.origin.y) / g.cell), 0, g.ny - 1);
    if (!g.blocked[g.idx(cx, cy)]) return {cx, cy};
    for (int rad = 1; rad < std::max(g.nx, g.ny); ++rad) {
        std::pair<int, int> best{-1, -1};
        double best_d = 1e18;
        for (int dy = -rad; dy <= rad; ++dy) {
            for (int dx = -rad; dx <= rad; ++dx) {
                if (std::max(std::abs(dx), std::abs(dy)) != rad) continue;
                int x = cx + dx, y = cy + dy;
                if (!g.in(x, y) || g.blocked[g.idx(x, y)]) continue;
                double d = dist(g.center(x, y), p);
                if (d < best_d) {
                    best_d = d;
                    best = {x, y};
                }
            }
        }
        if (best.first >= 0) return best;
    }
    return {-1, -1};
}

bool segment_free(const Level& level, const Vec2& a, const Vec2& b) {
    double r = level.ball_radius - 0.25;  // touching counts as free
    AABB inner = level.bounds;
    inner.lo += Vec2{r, r};
    inner.hi -= Vec2{r, r};
    if (!inner.contains(a) || !inner.contains(b)) return false;
    for (const EnvBlock& e : level.env) {
        if (dist_segment_block(a, b, e.geom, e.pose) < r) return false;
    }
    return true;
}

}  // namespace

GuidePath plan_guide_path(const Level& level, const GuideParams& gp) {
    Grid g = build_grid(level, gp.cell);
    auto [sx, sy] = nearest_free_cell(g, level.ball_start.pos);
    auto [tx, ty] = nearest_free_cell(g, level.target);
    if (sx < 0 || tx < 0)
        throw NoPathError("free space contains no start or target cell");

    // A* with octile heuristic; deterministic tie-breaks
    const int dxs[8] = {1, 1, 0, -1, -1, -1, 0, 1};
    const int dys[8] = {0, 1, 1, 1, 0, -1, -1, -1};
    size_t n = g.blocked.size();
    std::vector<double> cost(n, 1e18);
    std::vector<int> parent(n, -1);
    std::vector<char> closed(n, 0);

    auto heur = [&](int x, int y) {
        double dx = std::abs(x - tx), dy = std::abs(y - ty);
        return (dx + dy) + (std::sqrt(2.0) - 2.0) * std::min(dx, dy);
    };

    using QItem = std::tuple<double, double, int>;  // f, h, idx
    std::priority_queue<QItem, std::vector<QItem>, std::greater<QItem>> open;
    int start_idx = g.idx(sx, sy);
    cost[start_idx] = 0.0;
    open.push({heur(sx, sy), heur(sx, sy), start_idx});

    int goal_idx = g.idx(tx, ty);
    while (!open.empty()) {
        auto [f, h, idx] = open.top();
        open.pop();
        if (closed[idx]) continue;
        closed[idx] = 1;
        if (idx == goal_idx) break;
        int x = idx % g.nx, y = idx / g.nx;
        for (int d = 0; d < 8; ++d) {
            int nx_ = x + dxs[d], ny_ = y + dys[d];
            if (!g.in(nx_, ny_) || g.blocked[g.idx(nx_, ny_)]) continue;
            bool diag = dxs[d] != 0 && dys[d] != 0;
            if (diag) {
                // no corner cutting
                if (g.blocked[g.idx(x + dxs[d], y)] || g.blocked[g.idx(x, y + dys[d])]) continue;
            }
            int nidx = g.idx(nx_, ny_);
            double step_cost =
                std::abs(dxs[d]) * g.penalty[nidx] + std::abs(dys[d]) * 1.0;
            double nc = cost[idx] + step_cost;
            if (nc < cost[nidx] - 1e-12) {
                cost[nidx] = nc;
                parent[nidx] = idx;
                double nh = heur(nx_, ny_);
                open.push({nc + nh, nh, nidx});
            }
        }
    }
    if (!closed[goal_idx])
        throw NoPathError("free space disconnects the ball start from the target");

    std::vector<Vec2> cells;
    for (int idx = goal_idx; idx >= 0; idx = parent[idx])
        cells.push_back(g.center(idx % g.nx, idx / g.nx));
    std::reverse(cells.begin(), cells.end());

    // shortcut smoothing over the exact geometry; a shortcut may not beat the
    // grid route by flying, only by removing jaggies
    std::vector<Vec2> pts;
    pts.push_back(level.ball_start.pos);
    for (const Vec2& c : cells) pts.push_back(c);
    pts.push_back(level.target);

    std::vector<double> pcost(pts.size(), 0.0);
    for (size_t i = 1; i < pts.size(); ++i)
        pcost[i] = pcost[i - 1] + penalized_length(g, pts[i - 1], pts[i]);

    std::vector<Vec2> out;
    out.push_back(pts.front());
    size_t i = 0;
    while (i + 1 < pts.size()) {
        size_t j = pts.size() - 1;
        while (j > i + 1) {
            if (segment_free(level, pts[i], pts[j]) &&
                penalized_length(g, pts[i], pts[j]) <= (pcost[j] - pcost[i]) * 1.02 + 2.0)
                break;
            --j;
        }
        out.push_back(pts[j]);
        i = j;
    }

    GuidePath gp_out;
    gp_out.waypoints = out;
    return gp_out;
}

namespace {

AABB pair_aabb(const std::vector<std::pair<Vec2, Vec2>>& pairs) {
    AABB box = AABB::around(pairs.front().first);
    for (const auto& [v, u] : pairs) {
        box.include(v);
        box.include(u);
    }
    return box;
}

std::vector<Vec2> resample_polyline(const std::vector<Vec2>& line, double spacing) {
    std::vector<Vec2> out;
    if (line.empty()) return out;
    out.push_back(line.front());
    double carry = 0.0;
    for (size_t i = 0; i + 1 < line.size(); ++i) {
        Vec2 a = line[i], b = line[i + 1];
        double seg = dist(a, b);
        double pos = spacing - carry;
        while (pos < seg) {
            out.push_back(a + (b - a) * (pos / seg));
            pos += spacing;
        }
        carry = seg - (pos - spacing);
    }
    if (dist(out.back(), line.back()) > 1e-9) out.push_back(line.back());
    return out;
}

}  // namespace

std::optional<LocalRegion> compute_local_region(const std::vector<TrajSample>& gamma_in,
                                                const GuidePath& gamma_g, double eps1,
                                                double eps2, double margin) {
    if (gamma_in.empty() || gamma_g.waypoints.empty()) return std::nullopt;

    LocalRegion region;
    std::vector<std::pair<Vec2, Vec2>> pairs;  // (trajectory point, guide point)
    int k_loc = -1;

    std::vector<double> devs(gamma_in.size());
    for (size_t i = 0; i < gamma_in.size(); ++i) {
        PolylineHit hit = closest_point_on_polyline(gamma_in[i].state.pos, gamma_g.waypoints);
        devs[i] = hit.dist;
        if (hit.dist >= eps1 && hit.dist <= eps2) {
            pairs.push_back({gamma_in[i].state.pos, hit.point});
            if (k_loc < 0) k_loc = gamma_in[i].k;
        }
    }

    if (pairs.empty()) {
        bool overshoot = std::any_of(devs.begin(), devs.end(),
                                     [&](double d) { return d > eps2; });
        if (overshoot) {
            // band never sampled: window around the earliest departure
            size_t first = 0;
            while (first < devs.size() && devs[first] <= eps1) ++first;
            size_t lo = first >= 10 ? first - 10 : 0;
            size_t hi = std::min(first + 10, devs.size() - 1);
            for (size_t i = lo; i <= hi; ++i) {
                PolylineHit hit =
                    closest_point_on_polyline(gamma_in[i].state.pos, gamma_g.waypoints);
                pairs.push_back({gamma_in[i].state.pos, hit.point});
            }
            k_loc = gamma_in[lo].k;
            region.fallback = true;
        } else {
            // stall: the trajectory stays near the guide but the guide runs on;
            // pair guide samples with their nearest point on the trajectory
            // polyline instead
            std::vector<Vec2> traj_pts;
            traj_pts.reserve(gamma_in.size());
            for (const TrajSample& s : gamma_in) traj_pts.push_back(s.state.pos);
            std::vector<Vec2> gsamples = resample_polyline(gamma_g.waypoints, 5.0);
            int best_k = -1;
            for (const Vec2& gp : gsamples) {
                PolylineHit hit = closest_point_on_polyline(gp, traj_pts);
                if (hit.dist >= eps1 && hit.dist <= eps2) {
                    pairs.push_back({hit.point, gp});
                    int sample_idx = hit.segment + (hit.t > 0.5 ? 1 : 0);
                    int k = gamma_in[sample_idx].k;
                    if (best_k < 0 || k < best_k) best_k = k;
                }
            }
            if (pairs.empty()) return std::nullopt;
            k_loc = best_k;
            region.fallback = true;
        }
    }

    region.rect_premargin = pair_aabb(pairs);
    region.rect = region.rect_premargin;
    region.rect.expand(margin);
    region.k_loc = k_loc;

    // clipped trajectory: the contiguous in-rect run containing k_loc
    int k_idx = -1;
    for (size_t i = 0; i < gamma_in.size(); ++i)
        if (gamma_in[i].k == k_loc) k_idx = int(i);
    if (k_idx < 0) return std::nullopt;
    int lo = k_idx, hi = k_idx;
    while (lo > 0 && region.rect.contains(gamma_in[lo - 1].state.pos)) --lo;
    while (hi + 1 < int(gamma_in.size()) && region.rect.contains(gamma_in[hi + 1].state.pos))
        ++hi;
    region.gamma_in_loc.assign(gamma_in.begin() + lo, gamma_in.begin() + hi + 1);

    // clipped guide: pick the piece holding the k_loc pairing point
    PolylineHit anchor = closest_point_on_polyline(gamma_in[k_idx].state.pos, gamma_g.waypoints);
    std::vector<std::vector<Vec2>> pieces = clip_polyline_aabb(gamma_g.waypoints, region.rect);
    if (pieces.empty()) return std::nullopt;
    const std::vector<Vec2>* chosen = nullptr;
    double chosen_d = 1e18;
    for (const auto& piece : pieces) {
        PolylineHit h = closest_point_on_polyline(anchor.point, piece);
        if (h.dist < chosen_d) {
            chosen_d = h.dist;
            chosen = &piece;
        }
    }
    region.gamma_g_loc = *chosen;
    return region;
}

LocalTargetSet local_target(const LocalRegion& region, double eps) {
    LocalTargetSet t;
    t.center = region.gamma_g_loc.back();
    t.radius = eps;
    return t;
}

}  // namespace bubble
