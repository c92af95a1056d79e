#pragma once

#include <string>
#include <vector>

#include "bubble/constants.hpp"
#include "bubble/kinematics.hpp"
#include "bubble/level.hpp"

namespace bubble {

struct SimParams {
    double dt = kDt;
    double gravity = kGravity;
    double density = kDensity;
    double restitution_wood = kRestitutionWood;
    double restitution_metal = kRestitutionMetal;
    double tangential_retention = kTangentialRetention;  // ball impacts
    double friction_ball = kFrictionBall;    // Coulomb cap on impact tangential loss
    double friction_block = kFrictionBlock;  // block-block and block-env Coulomb
    double rolling_resist = kRollingResist;  // px/s^2 on persistent ball contacts
    double bounce_speed_threshold = kBounceSpeedThreshold;
    double slop = 0.5;        // px of tolerated penetration
    double baumgarte = 0.2;   // positional correction fraction per step
    int velocity_iterations = 8;
    int position_iterations = 2;
    double contact_margin = 0.25;  // px; base detection margin
};

struct Contact {
    ObjRef a;           // the moving body the contact acts on (ball or block)
    ObjRef b;           // what it touches
    Vec2 point;
    Vec2 normal;        // unit, pushes a away from b
    double penetration = 0.0;      // >= 0
    double approach_speed = 0.0;   // pre-solve normal approach, px/s
    Surface surface;    // b's contacted feature (for classification/learning)
};

struct WorldState {
    BallState ball;
    std::vector<BlockState> blocks;
    std::vector<int> block_ids;  // template id per block, same order
    int step = 0;
};

enum class Outcome { ReachedTarget, Timeout };

struct TrajSample {
    int k = 0;
    BallState state;
};

struct TrialRecord {
    std::vector<TrajSample> trajectory;               // length <= T+1
    std::vector<std::vector<BlockState>> block_history;
    std::vector<std::vector<Contact>> contacts;       // ball contacts per step
    std::vector<int> block_ids;
    Outcome outcome = Outcome::Timeout;
    int tau = -1;  // step at which the target was reached

    bool reached() const { return outcome == Outcome::ReachedTarget; }
};

struct Event {
    int start_step = 0;
    int end_step = 0;  // inclusive
    ContactType kind = ContactType::FreeFall;
    ObjRef object;
};

WorldState make_world(const Level& level, const Placement& p);

// advance one fixed timestep; pure function of its inputs
WorldState step(const WorldState& w, const Level& level, const SimParams& params = {});

// full trial from the level start state; stops early inside the target set
TrialRecord simulate(const Level& level, const Placement& p, const SimParams& params = {});

// segment the trajectory into maximal constant-(kind, object) runs; contact
// flicker shorter than 3 steps is merged, single-step impacts survive
std::vector<Event> detect_events(const TrialRecord& tr);

// CSV with columns k,x,y,vx,vy,event_kind,object_id
std::string trial_to_csv(const TrialRecord& tr);

std::string obj_ref_label(const ObjRef& o);

}  // namespace bubble
