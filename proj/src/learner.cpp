#include "bubble/learner.hpp"

#include <algorithm>
#include <cmath>

namespace bubble {

std::vector<EventSample> extract_samples(const TrialRecord& tr) {
    std::vector<EventSample> out;
    std::vector<Event> events = detect_events(tr);
    for (size_t i = 0; i < events.size(); ++i) {
        const Event& ev = events[i];
        if (ev.kind == ContactType::FreeFall) continue;
        int start = ev.start_step;
        bool is_last = i + 1 == events.size();
        if (is_last) {
            // a trailing roll that parked the ball is still an observed
            // boundary: the rest state
            bool rolls = ev.kind == ContactType::RollOnSegment ||
                         ev.kind == ContactType::SlideOnSegment;
            if (!rolls || tr.trajectory.back().state.vel.norm() > kRestSpeedThreshold) continue;
        }
        int next = is_last ? tr.trajectory.back().k : events[i + 1].start_step;
        if (start >= int(tr.trajectory.size())) continue;

        EventSample s;
        s.type = ev.kind;

        const std::vector<Contact>& cs = tr.contacts[start];
        const Contact* c = nullptr;
        for (const Contact& cand : cs)
            if (cand.b == ev.object) c = &cand;
        if (!c) continue;
        s.surface = c->surface;

        if (ev.kind == ContactType::BounceOffSegment || ev.kind == ContactType::BounceOffCircle) {
            if (start == 0) continue;  // no incoming state recorded
            // impact: position at the event, incoming velocity from the step
            // before, observed outgoing state at the impact step itself
            s.s_in.pos = tr.trajectory[start].state.pos;
            s.s_in.vel = tr.trajectory[start - 1].state.vel;
            s.y = tr.trajectory[start].state;
            s.duration = 0.0;
        } else {
            s.s_in = tr.trajectory[start].state;
            s.y = tr.trajectory[next].state;
            s.duration = (next - start) * kDt;
        }
        out.push_back(s);
    }
    return out;
}

double sample_residual(const EventSample& s, ContactType type, const KinParams& beta) {
    BallState pred;
    switch (type) {
        case ContactType::BounceOffSegment:
        case ContactType::BounceOffCircle:
            pred = predict_bounce(s.s_in, s.surface, beta);
            break;
        case ContactType::RollOnSegment:
        case ContactType::SlideOnSegment:
            pred = predict_roll(s.s_in, s.surface, beta).exit;
            break;
        case ContactType::FreeFall:
            pred = s.s_in;
            break;
    }
    Vec2 dp = pred.pos - s.y.pos;
    Vec2 dv = (pred.vel - s.y.vel) * kDt;
    return dp.norm2() + dv.norm2();
}

namespace {

double total_residual(const std::vector<EventSample>& samples, ContactType type,
                      const KinParams& beta) {
    double sum = 0.0;
    for (const EventSample& s : samples) sum += sample_residual(s, type, beta);
    return sum;
}

// closed-form 1-D least squares with a scale-matched ridge toward the prior
double ls_ratio(double sum_ab, double sum_a2, int n, double prior, double ridge) {
    if (sum_a2 <= 1e-12) return prior;
    double mean_a2 = sum_a2 / std::max(n, 1);
    return (sum_ab + ridge * mean_a2 * prior) / (sum_a2 + ridge * mean_a2);
}

}  // namespace

FitReport fit(ContactType type, const std::vector<EventSample>& samples,
              const KinParams& prior, double ridge_weight) {
    FitReport rep;
    rep.n_samples = int(samples.size());
    rep.beta_new = prior;
    if (samples.empty()) {
        rep.kept_prior = true;
        return rep;
    }
    rep.residual_before = total_residual(samples, type, prior);

    KinParams beta = prior;
    if (type == ContactType::BounceOffSegment || type == ContactType::BounceOffCircle) {
        double a2_n = 0.0, ab_n = 0.0, a2_t = 0.0, ab_t = 0.0;
        for (const EventSample& s : samples) {
            Vec2 n = s.surface.normal;
            Vec2 t = n.perp();
            double vin_n = s.s_in.vel.dot(n);
            double vin_t = s.s_in.vel.dot(t);
            double vout_n = s.y.vel.dot(n);
            double vout_t = s.y.vel.dot(t);
            a2_n += vin_n * vin_n;
            ab_n += vin_n * -vout_n;  // v_out_n = -e_n v_in_n
            a2_t += vin_t * vin_t;
            ab_t += vin_t * vout_t;  // v_out_t = e_t v_in_t
        }
        beta.e_n = std::clamp(ls_ratio(ab_n, a2_n, rep.n_samples, prior.e_n, ridge_weight),
                              0.0, 1.0);
        beta.e_t = std::clamp(ls_ratio(ab_t, a2_t, rep.n_samples, prior.e_t, ridge_weight),
                              0.0, 1.0);
        if (a2_n <= 1e-12 && a2_t <= 1e-12) rep.degenerate = rep.residual_before <= 1e-12;
    } else {
        // roll family: 1-D golden section on the deceleration
        double lo = 0.0, hi = 200.0;
        const EventSample& anchor_sample = samples.front();
        KinParams probe = prior;
        auto J = [&](double a) {
            probe.a_roll = a;
            double j = total_residual(samples, type, probe);
            if (ridge_weight > 0.0) {
                // virtual sample: the prior model's own output on the first input
                KinParams pk = prior;
                EventSample virt = anchor_sample;
                virt.y = predict_roll(virt.s_in, virt.surface, pk).exit;
                j += ridge_weight * sample_residual(virt, type, probe);
            }
            return j;
        };
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double x1 = hi - gr * (hi - lo);
        double x2 = lo + gr * (hi - lo);
        double f1 = J(x1), f2 = J(x2);
        for (int it = 0; it < 120; ++it) {
            if (f1 < f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - gr * (hi - lo);
                f1 = J(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + gr * (hi - lo);
                f2 = J(x2);
            }
        }
        beta.a_roll = std::clamp((lo + hi) / 2.0, 0.0, 200.0);

        bool zero_var = true;
        for (const EventSample& s : samples) {
            if (dist(s.s_in.pos, samples[0].s_in.pos) > 1e-9 ||
                dist(s.s_in.vel, samples[0].s_in.vel) > 1e-9)
                zero_var = false;
        }
        rep.degenerate = zero_var && samples.size() > 1 && rep.residual_before <= 1e-12;
    }

    rep.residual_after = total_residual(samples, type, beta);
    if (rep.residual_after > rep.residual_before) {
        beta = prior;
        rep.residual_after = rep.residual_before;
        rep.kept_prior = true;
    }
    rep.beta_new = beta;
    return rep;
}

}  // namespace bubble
