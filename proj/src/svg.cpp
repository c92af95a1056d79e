#include "bubble/svg.hpp"

#include <cstdio>
#include <sstream>

namespace bubble {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

void poly_node(std::ostringstream& os, const std::vector<Vec2>& pts, const char* fill,
               const char* stroke, double stroke_w, bool closed) {
    os << (closed ? "  <polygon points=\"" : "  <polyline points=\"");
    for (const Vec2& p : pts) os << fmt(p.x) << ',' << fmt(p.y) << ' ';
    os << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\" stroke-width=\"" << stroke_w
       << "\"/>\n";
}

void traj_node(std::ostringstream& os, const std::vector<TrajSample>& traj, const char* color) {
    std::vector<Vec2> pts;
    pts.reserve(traj.size());
    for (const TrajSample& s : traj) pts.push_back(s.state.pos);
    poly_node(os, pts, "none", color, 1.5, false);
}

}  // namespace

std::string render_svg(const Level& level, const PlotLayers& layers) {
    std::ostringstream os;
    double w = level.bounds.width(), h = level.bounds.height();
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt(w)
       << "\" height=\"" << fmt(h) << "\" viewBox=\"" << fmt(level.bounds.lo.x) << ' '
       << fmt(level.bounds.lo.y) << ' ' << fmt(w) << ' ' << fmt(h) << "\">\n";
    os << "  <rect x=\"" << fmt(level.bounds.lo.x) << "\" y=\"" << fmt(level.bounds.lo.y)
       << "\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
       << "\" fill=\"#fbfbf8\" stroke=\"#444\" stroke-width=\"2\"/>\n";

    for (const EnvBlock& e : level.env)
        poly_node(os, world_polygon(e.geom, e.pose), "#3a3a3a", "#222", 1.0, true);

    if (layers.placement) {
        for (const PlacedBlock& p : layers.placement->entries) {
            const BlockTemplate* tpl = level.find_template(p.id);
            if (!tpl) continue;
            const char* fill = tpl->material == Material::Metal ? "#9aa7b5" : "#c89a5b";
            poly_node(os, world_polygon(tpl->geom, p.pose), fill, "#6b4e22", 1.0, true);
        }
    }

    if (layers.regions) {
        for (const AABB& r : *layers.regions) {
            os << "  <rect x=\"" << fmt(r.lo.x) << "\" y=\"" << fmt(r.lo.y) << "\" width=\""
               << fmt(r.width()) << "\" height=\"" << fmt(r.height())
               << "\" fill=\"none\" stroke=\"#e08020\" stroke-width=\"1.5\" "
                  "stroke-dasharray=\"6 4\"/>\n";
        }
    }

    if (layers.guide && !layers.guide->waypoints.empty()) {
        poly_node(os, layers.guide->waypoints, "none", "#2060d0", 1.5, false);
        for (const Vec2& p : layers.guide->waypoints)
            os << "  <circle cx=\"" << fmt(p.x) << "\" cy=\"" << fmt(p.y)
               << "\" r=\"2.5\" fill=\"#2060d0\"/>\n";
    }
    if (layers.gamma_in) traj_node(os, *layers.gamma_in, "#c03030");
    if (layers.final_trajectory) traj_node(os, *layers.final_trajectory, "#108040");

    // ball start and target flag
    os << "  <circle cx=\"" << fmt(level.ball_start.pos.x) << "\" cy=\""
       << fmt(level.ball_start.pos.y) << "\" r=\"" << fmt(level.ball_radius)
       << "\" fill=\"#d04040\" fill-opacity=\"0.65\" stroke=\"#902020\"/>\n";
    os << "  <circle cx=\"" << fmt(level.target.x) << "\" cy=\"" << fmt(level.target.y)
       << "\" r=\"" << fmt(level.target_eps)
       << "\" fill=\"none\" stroke=\"#108040\" stroke-width=\"1.5\" stroke-dasharray=\"3 3\"/>\n";
    os << "  <line x1=\"" << fmt(level.target.x) << "\" y1=\"" << fmt(level.target.y)
       << "\" x2=\"" << fmt(level.target.x) << "\" y2=\"" << fmt(level.target.y - 28.0)
       << "\" stroke=\"#333\" stroke-width=\"2\"/>\n";
    os << "  <path d=\"M " << fmt(level.target.x) << ' ' << fmt(level.target.y - 28.0) << " L "
       << fmt(level.target.x + 16.0) << ' ' << fmt(level.target.y - 22.0) << " L "
       << fmt(level.target.x) << ' ' << fmt(level.target.y - 16.0)
       << " Z\" fill=\"#108040\"/>\n";

    os << "</svg>\n";
    return os.str();
}

}  // namespace bubble
