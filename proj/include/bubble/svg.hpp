#pragma once

#include <string>
#include <vector>

#include "bubble/guide.hpp"
#include "bubble/level.hpp"
#include "bubble/physics.hpp"

namespace bubble {

struct PlotLayers {
    const GuidePath* guide = nullptr;
    const std::vector<TrajSample>* gamma_in = nullptr;       // reference trajectory
    const std::vector<TrajSample>* final_trajectory = nullptr;
    const std::vector<AABB>* regions = nullptr;
    const Placement* placement = nullptr;
};

// SVG 1.1 plot of the level geometry with optional overlays
std::string render_svg(const Level& level, const PlotLayers& layers = {});

}  // namespace bubble
