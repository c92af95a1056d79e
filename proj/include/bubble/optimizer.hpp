#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "bubble/guide.hpp"
#include "bubble/kinematics.hpp"
#include "bubble/level.hpp"
#include "bubble/physics.hpp"

namespace bubble {

class UnsolvableRegionError : public std::runtime_error {
public:
    explicit UnsolvableRegionError(const std::string& msg) : std::runtime_error(msg) {}
};

class EmptyGridError : public std::runtime_error {
public:
    explicit EmptyGridError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Candidate {
    int e1 = 0;          // hypothesised contact step (absolute index)
    int main_block = 0;  // template id l
    Pose pose;           // decided components of the Main Block state; v = 0
};

enum class GridResolution { Coarse, Fine };

struct OptimizerParams {
    double coarse_xy = 20.0;
    double fine_xy = 5.0;
    double coarse_angle = 15.0 * M_PI / 180.0;
    double fine_angle = 5.0 * M_PI / 180.0;
    int coarse_e1_stride = 5;
    int e1_tolerance = 2;        // |first contact - e1| accepted
    double settle_max_drop = 30.0;
    double contact_capture = 0.5;   // separation counting as trajectory contact
    bool random_shooting = false;   // seeded random grid jitter instead of lattice
    unsigned long long seed = 0;
    int jobs = 1;
};

// everything one local optimization reads; immutable while solving
struct RegionContext {
    const Level* level = nullptr;
    const LocalRegion* region = nullptr;
    LocalTargetSet target;
    const std::vector<TrajSample>* trajectory = nullptr;  // the full recorded gamma_in
    Placement frozen;  // placements from earlier regions, treated as scenery
    KinParamsSet beta;
};

struct ChainStep {
    ContactType kind = ContactType::FreeFall;
    BallState state;  // at the event start
};

struct EvalResult {
    bool feasible = false;
    double cost = 0.0;
    int contact_step = -1;           // resolved first-contact index
    std::vector<ChainStep> chain;    // s_e1..s_e4 with their model kinds
    bool through_target = false;     // short-circuited via the local target set
};

// key used everywhere a candidate ordering is needed: total order, so the
// argmin is independent of evaluation or shuffle order
struct ScoredCandidate {
    double cost = 0.0;
    Candidate c;
    bool operator<(const ScoredCandidate& o) const;
};

std::vector<Candidate> candidate_grid(const RegionContext& ctx,
                                      const std::vector<BlockTemplate>& inventory,
                                      GridResolution res, const Candidate* anchor,
                                      const OptimizerParams& params = {});

EvalResult evaluate(const RegionContext& ctx, const Candidate& c,
                    const OptimizerParams& params = {});

// static equilibrium check and greedy gap-filling supports (at most two)
std::optional<std::vector<PlacedBlock>> place_supports(
    const RegionContext& ctx, const Candidate& main,
    const std::vector<BlockTemplate>& inventory_remaining, int first_contact_step);

// placements are static and untouched before contact, so m0 equals the state
// at k_loc; combined main + supports patch
Placement back_map(const Candidate& main, const std::vector<PlacedBlock>& supports);

struct LocalSolution {
    Candidate best;
    double cost = 0.0;
    std::vector<PlacedBlock> supporting;
    Placement m0_patch;
    double cg_best_cost = 0.0;
    double fg_best_cost = 0.0;
    int cg_candidates = 0;
    int fg_candidates = 0;
    double cg_seconds = 0.0;
    double fg_seconds = 0.0;
};

// a banned key marks a (block, pose) already tried in this region
std::string candidate_key(const Candidate& c);

LocalSolution solve_local(const RegionContext& ctx,
                          const std::vector<BlockTemplate>& inventory_remaining,
                          const OptimizerParams& params = {},
                          const std::set<std::string>& banned = {});

// per-candidate debug dump (CSV rows: e1,l,x,y,angle,cost-or-infeasible)
std::string candidates_to_csv(const RegionContext& ctx, const std::vector<Candidate>& cs,
                              const OptimizerParams& params = {});

}  // namespace bubble
