#pragma once

#include <vector>

#include "bubble/kinematics.hpp"
#include "bubble/physics.hpp"

namespace bubble {

// one event-boundary transition observed in a trial
struct EventSample {
    BallState s_in;      // state at the event start (incoming velocity for impacts)
    Surface surface;
    ContactType type = ContactType::RollOnSegment;
    BallState y;         // observed state at the next event boundary
    double duration = 0.0;
};

// contact-kind samples for every adjacent event pair; free-fall carries no
// parameters and produces none
std::vector<EventSample> extract_samples(const TrialRecord& tr);

struct FitReport {
    KinParams beta_new;
    double residual_before = 0.0;
    double residual_after = 0.0;
    int n_samples = 0;
    bool kept_prior = false;
    bool degenerate = false;
};

// least-squares refit of the contact-type parameters; e_n and e_t in closed
// form, a_roll by golden section on [0, 200]. ridge_weight adds the prior as
// that many virtual samples (used to damp single-sample fits).
FitReport fit(ContactType type, const std::vector<EventSample>& samples,
              const KinParams& prior, double ridge_weight = 0.0);

// squared residual of one sample under the given parameters, position units
// with velocities scaled by dt
double sample_residual(const EventSample& s, ContactType type, const KinParams& beta);

}  // namespace bubble
