#pragma once
// Temporal cutoff psi and magnitude cutoff chi for the perturbation step.
// psi is the indicator of a delta/2 neighborhood of the stress time support
// mollified by a quartic polynomial bump; the bump width is chosen so that
// psi = 1 on the support, supp psi stays inside the delta neighborhood and
// |psi'| <= 2/delta all hold with margin.  chi is 1 on [0,1], s on [2,inf)
// with a quintic Hermite bridge matching value and two derivatives.

#include "ciflow/time_field.hpp"

namespace ciflow {

// Smooth bump b(u) = c (1-(2u/w)^2)^2 / w on [-w/2, w/2] with unit mass;
// peak value is 15/(8w).
class PolyBump {
  public:
    explicit PolyBump(double width) : w_(width) {}
    double width() const { return w_; }
    double peak() const { return 15.0 / (8.0 * w_); }
    // CDF: integral of b over (-inf, u]
    double cdf(double u) const {
        double v = 2.0 * u / w_;
        if (v <= -1.0) return 0.0;
        if (v >= 1.0) return 1.0;
        // int (15/16)(1-v^2)^2 dv = (15/16)(v - 2v^3/3 + v^5/5), shifted to 0 at v=-1
        double F = (15.0 / 16.0) * (v - 2.0 * v * v * v / 3.0 + v * v * v * v * v / 5.0);
        return F + 0.5;
    }
    double density(double u) const {
        double v = 2.0 * u / w_;
        if (v <= -1.0 || v >= 1.0) return 0.0;
        double q = 1.0 - v * v;
        return (15.0 / 16.0) * q * q * (2.0 / w_);
    }

  private:
    double w_;
};

// psi as a closed-form piecewise polynomial: indicator([a,b]) * bump.
class TimeCutoff {
  public:
    TimeCutoff() = default;
    TimeCutoff(double support_lo, double support_hi, double delta)
        : lo_(support_lo), hi_(support_hi), delta_(delta), bump_(0.96 * delta), active_(true) {
        a_ = lo_ - 0.5 * delta_;  // indicator endpoints: N_{delta/2}(supp)
        b_ = hi_ + 0.5 * delta_;
    }
    static TimeCutoff zero() { return TimeCutoff(); }

    bool active() const { return active_; }
    double delta() const { return delta_; }
    // closed interval outside which psi vanishes
    double support_lo() const { return active_ ? a_ - 0.5 * bump_.width() : 0.0; }
    double support_hi() const { return active_ ? b_ + 0.5 * bump_.width() : 0.0; }
    // psi = 1 exactly on [one_lo, one_hi]
    double one_lo() const { return a_ + 0.5 * bump_.width(); }
    double one_hi() const { return b_ - 0.5 * bump_.width(); }
    double max_slope() const { return active_ ? bump_.peak() : 0.0; }

    double value(double t) const {
        if (!active_) return 0.0;
        return bump_.cdf(t - a_) - bump_.cdf(t - b_);
    }
    double slope(double t) const {
        if (!active_) return 0.0;
        return bump_.density(t - a_) - bump_.density(t - b_);
    }

  private:
    double lo_ = 0.0, hi_ = 0.0, delta_ = 1.0;
    double a_ = 0.0, b_ = 0.0;
    PolyBump bump_{1.0};
    bool active_ = false;
};

// chi: 1 on [0,1], s on [2,inf), quintic Hermite bridge on (1,2) with
// matching value, first and second derivatives at both ends.
struct MagnitudeCutoff {
    static double value(double s) {
        if (s <= 1.0) return 1.0;
        if (s >= 2.0) return s;
        double u = s - 1.0;
        return 1.0 + u * u * u * (6.0 - 8.0 * u + 3.0 * u * u);
    }
    static double slope(double s) {
        if (s <= 1.0) return 0.0;
        if (s >= 2.0) return 1.0;
        double u = s - 1.0;
        return u * u * (18.0 - 32.0 * u + 15.0 * u * u);
    }
    static double curvature(double s) {
        if (s <= 1.0 || s >= 2.0) return 0.0;
        double u = s - 1.0;
        return u * (36.0 - 96.0 * u + 60.0 * u * u);
    }
};

struct CutoffPair {
    TimeCutoff psi;
    // chi is stateless; kept here so the pair carries the whole cutoff choice
    MagnitudeCutoff chi;
};

// Builds psi from the sampled time support of R_q.  The support is the hull
// of samples with activity above abs_tol; delta_next is the current
// tolerance delta_{q+1}.
inline CutoffPair build_cutoffs(const TimeField& Rq, double delta_next, double abs_tol = 1e-13) {
    if (!(delta_next > 0.0)) fail(Errc::param_violation, "build_cutoffs needs delta_next > 0");
    CutoffPair out;
    auto [lo, hi] = Rq.support(abs_tol);
    if (hi < lo) {  // R_q vanishes: psi may be identically zero
        out.psi = TimeCutoff::zero();
        return out;
    }
    TimeCutoff psi(lo, hi, delta_next);
    if (psi.support_lo() < Rq.times().front() - 1e-12 || psi.support_hi() > Rq.times().back() + 1e-12)
        fail(Errc::support_too_wide,
             "the delta neighborhood of the stress support leaves the time domain");
    out.psi = psi;
    return out;
}

}  // namespace ciflow
