#pragma once
// Time-sampled spectral fields.  Three derivative sources, in order of
// preference: explicitly stored exact derivatives (construction-time product
// and chain rules), an analytic phase law (building blocks: each mode
// rotates at a frequency determined by its own wavevector), or centered
// finite differences on the sample grid.

#include <optional>

#include "ciflow/calculus.hpp"

namespace ciflow {

// Mode-wise time frequency for building-block fields: coefficient at k
// carries the factor e^{i omega(k) t} with omega(k) = mu (k.xi - shift),
// xi stored as the integer vector 5*xi.
struct PhaseLaw {
    double mu = 0.0;
    IVec3 xi5{0, 0, 0};
    double shift = 0.0;

    double omega(const IVec3& k) const { return mu * (double(dot(k, xi5)) / 5.0 - shift); }
};

// Fornberg finite-difference weights: derivative of order m at x0 from the
// given nodes (classic recurrence).
inline std::vector<double> fd_weights(double x0, const std::vector<double>& x, int m) {
    const int n = int(x.size());
    std::vector<std::vector<double>> c(size_t(n), std::vector<double>(size_t(m + 1), 0.0));
    double c1 = 1.0;
    double c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        int mn = std::min(i, m);
        double c2 = 1.0;
        double c5 = c4;
        c4 = x[size_t(i)] - x0;
        for (int j = 0; j < i; ++j) {
            double c3 = x[size_t(i)] - x[size_t(j)];
            c2 *= c3;
            if (j == i - 1) {
                for (int s = mn; s >= 1; --s)
                    c[size_t(i)][size_t(s)] = c1 * (s * c[size_t(i - 1)][size_t(s - 1)] - c5 * c[size_t(i - 1)][size_t(s)]) / c2;
                c[size_t(i)][0] = -c1 * c5 * c[size_t(i - 1)][0] / c2;
            }
            for (int s = mn; s >= 1; --s)
                c[size_t(j)][size_t(s)] = (c4 * c[size_t(j)][size_t(s)] - s * c[size_t(j)][size_t(s - 1)]) / c3;
            c[size_t(j)][0] = c4 * c[size_t(j)][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) w[size_t(i)] = c[size_t(i)][size_t(m)];
    return w;
}

class TimeField {
  public:
    TimeField() = default;
    TimeField(std::vector<double> times, std::vector<SpectralField> fields)
        : times_(std::move(times)), fields_(std::move(fields)) {
        validate();
    }

    static TimeField empty_like(const std::vector<double>& times, Rank rank) {
        std::vector<SpectralField> fs(times.size(), SpectralField(rank));
        return TimeField(times, std::move(fs));
    }

    size_t nsamples() const { return times_.size(); }
    const std::vector<double>& times() const { return times_; }
    double time(size_t i) const { return times_[i]; }
    Rank rank() const { return fields_.empty() ? Rank::scalar : fields_[0].rank(); }

    const SpectralField& at(size_t i) const { return fields_[i]; }
    SpectralField& at(size_t i) { return fields_[i]; }
    const std::vector<SpectralField>& fields() const { return fields_; }

    bool has_ddt() const { return !ddt_.empty(); }
    const SpectralField& ddt_at(size_t i) const { return ddt_[i]; }
    void set_ddt(std::vector<SpectralField> d) {
        if (d.size() != fields_.size()) fail(Errc::out_of_time_range, "ddt sample count mismatch");
        ddt_ = std::move(d);
    }
    const std::optional<PhaseLaw>& phase() const { return phase_; }
    void set_phase(const PhaseLaw& p) { phase_ = p; }

    size_t index_of(double t, double tol = 1e-9) const {
        for (size_t i = 0; i < times_.size(); ++i)
            if (std::abs(times_[i] - t) <= tol) return i;
        fail(Errc::out_of_time_range, "no sample at requested time");
    }
    bool in_range(double t) const {
        return !times_.empty() && t >= times_.front() - 1e-12 && t <= times_.back() + 1e-12;
    }

    // Apply a linear, time-independent spatial operator to every sample (and
    // to the stored derivatives, which commute with such operators).
    TimeField lifted(const std::function<SpectralField(const SpectralField&)>& op) const {
        TimeField out;
        out.times_ = times_;
        out.fields_.reserve(fields_.size());
        for (const auto& f : fields_) out.fields_.push_back(op(f));
        if (!ddt_.empty()) {
            out.ddt_.reserve(ddt_.size());
            for (const auto& f : ddt_) out.ddt_.push_back(op(f));
        }
        out.phase_ = phase_;
        return out;
    }

    TimeField plus(const TimeField& other, cplx s = cplx(1.0, 0.0)) const {
        check_same_grid(other);
        TimeField out;
        out.times_ = times_;
        for (size_t i = 0; i < fields_.size(); ++i) out.fields_.push_back(fields_[i].plus(other.fields_[i], s));
        if (!ddt_.empty() && !other.ddt_.empty())
            for (size_t i = 0; i < ddt_.size(); ++i) out.ddt_.push_back(ddt_[i].plus(other.ddt_[i], s));
        return out;
    }

    // Largest pointwise-magnitude proxy per sample: max |coefficient|.
    double max_coeff_at(size_t i) const { return fields_[i].max_abs(); }

    // Time support on the sample grid: indices with any activity above
    // rel_tol * (max over samples).
    std::pair<double, double> support(double abs_tol = 1e-13) const {
        double lo = 0, hi = -1;
        bool found = false;
        for (size_t i = 0; i < nsamples(); ++i) {
            if (fields_[i].max_abs() > abs_tol) {
                if (!found) lo = times_[i];
                hi = times_[i];
                found = true;
            }
        }
        if (!found) return {0.0, -1.0};  // empty support
        return {lo, hi};
    }

    void check_same_grid(const TimeField& other) const {
        if (times_.size() != other.times_.size()) fail(Errc::out_of_time_range, "sample grids differ");
        for (size_t i = 0; i < times_.size(); ++i)
            if (std::abs(times_[i] - other.times_[i]) > 1e-12)
                fail(Errc::out_of_time_range, "sample grids differ");
    }

  private:
    void validate() const {
        if (times_.size() != fields_.size()) fail(Errc::out_of_time_range, "times/fields size mismatch");
        for (size_t i = 1; i < times_.size(); ++i)
            if (!(times_[i] > times_[i - 1])) fail(Errc::out_of_time_range, "times must strictly increase");
        for (size_t i = 1; i < fields_.size(); ++i)
            if (fields_[i].rank() != fields_[0].rank()) fail(Errc::rank_mismatch, "mixed ranks in TimeField");
    }

    std::vector<double> times_;
    std::vector<SpectralField> fields_;
    std::vector<SpectralField> ddt_;
    std::optional<PhaseLaw> phase_;
};

// d/dt at sample index i: stored exact derivative, phase law, or centered
// finite differences of the configured order.
inline SpectralField time_derivative_at(const TimeField& tf, size_t i, int fd_order = 4) {
    if (tf.has_ddt()) return tf.ddt_at(i);
    if (tf.phase()) {
        const PhaseLaw& p = *tf.phase();
        const SpectralField& f = tf.at(i);
        return f.mapped([&](const IVec3& k, cplx* row) {
            cplx iw(0.0, p.omega(k));
            for (int c = 0; c < f.ncomp(); ++c) row[c] *= iw;
        });
    }
    // finite differences on the sample grid
    const int stencil = fd_order + 1;
    if (int(tf.nsamples()) < stencil)
        fail(Errc::out_of_time_range, "not enough samples for finite differences");
    int lo = int(i) - stencil / 2;
    lo = std::max(0, std::min(lo, int(tf.nsamples()) - stencil));
    std::vector<double> nodes(static_cast<size_t>(stencil));
    for (int j = 0; j < stencil; ++j) nodes[size_t(j)] = tf.time(size_t(lo + j));
    std::vector<double> w = fd_weights(tf.time(i), nodes, 1);
    SpectralField acc(tf.rank());
    for (int j = 0; j < stencil; ++j)
        acc = acc.plus(tf.at(size_t(lo + j)), cplx(w[size_t(j)], 0.0));
    return acc;
}

// Spec-facing variant: derivative at time t (must be within sample range).
inline SpectralField time_derivative(const TimeField& tf, double t, int fd_order = 4) {
    if (!tf.in_range(t)) fail(Errc::out_of_time_range, "time outside sample range");
    return time_derivative_at(tf, tf.index_of(t), fd_order);
}

// m-th time derivative samples (exact via phase law where available).
inline std::vector<SpectralField> time_derivative_order(const TimeField& tf, int m, int fd_order = 4) {
    std::vector<SpectralField> out;
    out.reserve(tf.nsamples());
    if (m == 0) {
        for (size_t i = 0; i < tf.nsamples(); ++i) out.push_back(tf.at(i));
        return out;
    }
    if (tf.phase()) {
        const PhaseLaw& p = *tf.phase();
        for (size_t i = 0; i < tf.nsamples(); ++i) {
            const SpectralField& f = tf.at(i);
            out.push_back(f.mapped([&](const IVec3& k, cplx* row) {
                cplx iw(0.0, p.omega(k));
                cplx factor = 1.0;
                for (int q = 0; q < m; ++q) factor *= iw;
                for (int c = 0; c < f.ncomp(); ++c) row[c] *= factor;
            }));
        }
        return out;
    }
    if (m == 1 && tf.has_ddt()) {
        for (size_t i = 0; i < tf.nsamples(); ++i) out.push_back(tf.ddt_at(i));
        return out;
    }
    const int stencil = std::max(fd_order + m, m + 2) | 1;  // odd stencil
    if (int(tf.nsamples()) < stencil)
        fail(Errc::out_of_time_range, "not enough samples for finite differences");
    for (size_t i = 0; i < tf.nsamples(); ++i) {
        int lo = int(i) - stencil / 2;
        lo = std::max(0, std::min(lo, int(tf.nsamples()) - stencil));
        std::vector<double> nodes(static_cast<size_t>(stencil));
        for (int j = 0; j < stencil; ++j) nodes[size_t(j)] = tf.time(size_t(lo + j));
        std::vector<double> w = fd_weights(tf.time(i), nodes, m);
        SpectralField acc(tf.rank());
        for (int j = 0; j < stencil; ++j)
            acc = acc.plus(tf.at(size_t(lo + j)), cplx(w[size_t(j)], 0.0));
        out.push_back(std::move(acc));
    }
    return out;
}

}  // namespace ciflow
