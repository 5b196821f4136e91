#pragma once
// SpectralField: a band-limited function on the 3-torus stored as a sorted
// sparse map from integer frequencies to complex coefficients.  Fields are
// immutable values in spirit: every operation returns a new field, and key
// order is canonical (ascending packed key) so results are reproducible.

#include <algorithm>
#include <cstring>
#include <unordered_map>
#include <vector>

#include "ciflow/core.hpp"
#include "ciflow/rng.hpp"

namespace ciflow {

class SpectralField {
  public:
    SpectralField() : rank_(Rank::scalar) {}
    explicit SpectralField(Rank r) : rank_(r) {}

    Rank rank() const { return rank_; }
    int ncomp() const { return component_count(rank_); }
    size_t nmodes() const { return keys_.size(); }
    bool empty() const { return keys_.empty(); }

    const std::vector<ModeKey>& keys() const { return keys_; }
    const std::vector<cplx>& coeffs() const { return coef_; }

    IVec3 mode(size_t i) const { return unpack_key(keys_[i]); }
    const cplx* row(size_t i) const { return coef_.data() + i * size_t(ncomp()); }
    cplx* row(size_t i) { return coef_.data() + i * size_t(ncomp()); }

    // Builder interface: accumulate (key, component) entries in any order,
    // then call normalize() once.  Duplicate keys are summed in the order
    // they were inserted.
    void add(const IVec3& k, int comp, cplx v) {
        if (!key_in_range(k)) fail(Errc::grid_too_small, "mode outside representable range");
        pending_.push_back({pack_key(k), comp, v});
    }
    void add_scalar(const IVec3& k, cplx v) { add(k, 0, v); }

    void normalize() {
        if (pending_.empty()) { sort_rows(); return; }
        // Stable-sort pending entries by key; insertion order within a key is
        // preserved so accumulation order is deterministic.
        std::stable_sort(pending_.begin(), pending_.end(),
                         [](const Pending& a, const Pending& b) { return a.key < b.key; });
        const int nc = ncomp();
        std::vector<ModeKey> keys;
        std::vector<cplx> coef;
        keys.reserve(keys_.size() + pending_.size());
        // merge existing sorted rows with pending
        size_t ei = 0, pi = 0;
        auto flush_existing = [&](size_t i) {
            keys.push_back(keys_[i]);
            coef.insert(coef.end(), coef_.begin() + i * nc, coef_.begin() + (i + 1) * nc);
        };
        while (ei < keys_.size() || pi < pending_.size()) {
            if (pi == pending_.size() || (ei < keys_.size() && keys_[ei] < pending_[pi].key)) {
                flush_existing(ei++);
                continue;
            }
            ModeKey k = pending_[pi].key;
            if (ei < keys_.size() && keys_[ei] == k) {
                flush_existing(ei++);
            } else {
                keys.push_back(k);
                coef.insert(coef.end(), size_t(nc), cplx(0.0, 0.0));
            }
            cplx* r = coef.data() + (keys.size() - 1) * nc;
            while (pi < pending_.size() && pending_[pi].key == k) {
                r[pending_[pi].comp] += pending_[pi].value;
                ++pi;
            }
        }
        keys_ = std::move(keys);
        coef_ = std::move(coef);
        pending_.clear();
        pending_.shrink_to_fit();
    }

    bool has_pending() const { return !pending_.empty(); }

    // Largest coefficient magnitude over all modes and components.
    double max_abs() const {
        double m = 0.0;
        for (const cplx& c : coef_) m = std::max(m, std::abs(c));
        return m;
    }

    // Bandwidth K = max |k|_inf over active modes.
    int64_t bandwidth() const {
        int64_t K = 0;
        for (ModeKey key : keys_) K = std::max(K, linf_norm(unpack_key(key)));
        return K;
    }
    int64_t max_l1() const {
        int64_t K = 0;
        for (ModeKey key : keys_) K = std::max(K, l1_norm(unpack_key(key)));
        return K;
    }
    int64_t min_l1_nonzero() const {
        int64_t K = std::numeric_limits<int64_t>::max();
        for (ModeKey key : keys_) {
            int64_t l = l1_norm(unpack_key(key));
            if (l > 0) K = std::min(K, l);
        }
        return K == std::numeric_limits<int64_t>::max() ? 0 : K;
    }

    // Coefficient lookup (zero if absent).
    cplx coeff(const IVec3& k, int comp = 0) const {
        ModeKey key = pack_key(k);
        auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
        if (it == keys_.end() || *it != key) return {0.0, 0.0};
        return coef_[size_t(it - keys_.begin()) * ncomp() + comp];
    }
    bool has_mode(const IVec3& k) const {
        ModeKey key = pack_key(k);
        auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
        return it != keys_.end() && *it == key;
    }

    // Mean value (k = 0 coefficients), one entry per component.
    std::vector<cplx> mean() const {
        std::vector<cplx> m(size_t(ncomp()), cplx(0.0, 0.0));
        ModeKey zero = pack_key({0, 0, 0});
        auto it = std::lower_bound(keys_.begin(), keys_.end(), zero);
        if (it != keys_.end() && *it == zero) {
            size_t i = size_t(it - keys_.begin());
            for (int c = 0; c < ncomp(); ++c) m[size_t(c)] = row(i)[c];
        }
        return m;
    }

    // Drop modes whose largest coefficient is below threshold * max_abs().
    SpectralField truncated(double rel_threshold) const {
        if (rel_threshold <= 0.0 || empty()) return *this;
        double cut = rel_threshold * max_abs();
        SpectralField out(rank_);
        out.keys_.reserve(keys_.size());
        const int nc = ncomp();
        for (size_t i = 0; i < keys_.size(); ++i) {
            double m = 0.0;
            for (int c = 0; c < nc; ++c) m = std::max(m, std::abs(row(i)[c]));
            if (m >= cut) {
                out.keys_.push_back(keys_[i]);
                out.coef_.insert(out.coef_.end(), coef_.begin() + i * nc, coef_.begin() + (i + 1) * nc);
            }
        }
        return out;
    }

    // Map every coefficient row in place: fn(k, row pointer).
    template <class Fn>
    SpectralField mapped(Fn&& fn) const {
        SpectralField out = *this;
        const int nc = ncomp();
        for (size_t i = 0; i < out.keys_.size(); ++i) fn(out.mode(i), out.coef_.data() + i * nc);
        return out;
    }

    // Keep modes satisfying the predicate on k.
    template <class Pred>
    SpectralField filtered(Pred&& pred) const {
        SpectralField out(rank_);
        const int nc = ncomp();
        for (size_t i = 0; i < keys_.size(); ++i) {
            if (pred(mode(i))) {
                out.keys_.push_back(keys_[i]);
                out.coef_.insert(out.coef_.end(), coef_.begin() + i * nc, coef_.begin() + (i + 1) * nc);
            }
        }
        return out;
    }

    // Shift every mode by dk (multiplication by e^{i dk.x}).
    SpectralField shifted(const IVec3& dk) const {
        SpectralField out(rank_);
        out.coef_ = coef_;
        out.keys_.resize(keys_.size());
        for (size_t i = 0; i < keys_.size(); ++i) {
            IVec3 k = mode(i) + dk;
            if (!key_in_range(k)) fail(Errc::grid_too_small, "shift leaves representable range");
            out.keys_[i] = pack_key(k);
        }
        out.sort_rows();
        return out;
    }

    // Scale all coefficients.
    SpectralField scaled(cplx s) const {
        SpectralField out = *this;
        for (cplx& c : out.coef_) c *= s;
        return out;
    }

    // Extract one component as a scalar field.
    SpectralField component(int comp) const {
        SpectralField out(Rank::scalar);
        out.keys_ = keys_;
        out.coef_.resize(keys_.size());
        const int nc = ncomp();
        for (size_t i = 0; i < keys_.size(); ++i) out.coef_[i] = coef_[i * nc + comp];
        return out;
    }

    // Install rows directly; keys must be sorted, unique, and coef sized
    // keys.size() * ncomp.
    static SpectralField from_rows(Rank r, std::vector<ModeKey> keys, std::vector<cplx> coef) {
        SpectralField out(r);
        if (coef.size() != keys.size() * size_t(component_count(r)))
            fail(Errc::rank_mismatch, "from_rows: coefficient size mismatch");
        out.keys_ = std::move(keys);
        out.coef_ = std::move(coef);
        return out;
    }

    // Assemble a multi-component field from per-component scalars; missing
    // modes are treated as zero.
    static SpectralField from_components(Rank r, const std::vector<SpectralField>& comps) {
        const int nc = component_count(r);
        if (int(comps.size()) != nc) fail(Errc::rank_mismatch, "component count mismatch");
        SpectralField out(r);
        for (int c = 0; c < nc; ++c) {
            for (size_t i = 0; i < comps[size_t(c)].nmodes(); ++i)
                out.add(comps[size_t(c)].mode(i), c, comps[size_t(c)].coeffs()[i]);
        }
        out.normalize();
        return out;
    }

    // Pointwise linear combination: this + s * other (ranks must match).
    SpectralField plus(const SpectralField& other, cplx s = cplx(1.0, 0.0)) const {
        if (rank_ != other.rank_) fail(Errc::rank_mismatch, "plus: rank mismatch");
        SpectralField out(rank_);
        const int nc = ncomp();
        size_t i = 0, j = 0;
        out.keys_.reserve(keys_.size() + other.keys_.size());
        while (i < keys_.size() || j < other.keys_.size()) {
            bool take_a = j == other.keys_.size() ||
                          (i < keys_.size() && keys_[i] <= other.keys_[j]);
            bool take_b = i == keys_.size() ||
                          (j < other.keys_.size() && other.keys_[j] <= keys_[i]);
            ModeKey k = take_a ? keys_[i] : other.keys_[j];
            out.keys_.push_back(k);
            for (int c = 0; c < nc; ++c) {
                cplx v(0.0, 0.0);
                if (take_a) v += coef_[i * nc + c];
                if (take_b) v += s * other.coef_[j * nc + c];
                out.coef_.push_back(v);
            }
            if (take_a) ++i;
            if (take_b) ++j;
        }
        return out;
    }
    SpectralField minus(const SpectralField& other) const { return plus(other, cplx(-1.0, 0.0)); }

    // Max deviation from conjugate symmetry coef(-k) = conj(coef(k)).
    double reality_defect() const {
        double worst = 0.0;
        const int nc = ncomp();
        for (size_t i = 0; i < keys_.size(); ++i) {
            IVec3 k = mode(i);
            ModeKey nk = pack_key(-k);
            auto it = std::lower_bound(keys_.begin(), keys_.end(), nk);
            if (it == keys_.end() || *it != nk) {
                for (int c = 0; c < nc; ++c) worst = std::max(worst, std::abs(row(i)[c]));
                continue;
            }
            size_t m = size_t(it - keys_.begin());
            for (int c = 0; c < nc; ++c)
                worst = std::max(worst, std::abs(row(i)[c] - std::conj(row(m)[c])));
        }
        return worst;
    }
    bool is_real(double tol = 1e-12) const {
        double m = max_abs();
        return reality_defect() <= tol * (m > 0.0 ? m : 1.0);
    }

    // Parseval sum of |coef|^2 over all modes and components, i.e. the
    // squared L2 norm under the normalized Haar measure.
    double l2_sq() const {
        double sum = 0.0;
        for (const cplx& c : coef_) sum += std::norm(c);
        return sum;
    }

    bool operator==(const SpectralField& o) const {
        return rank_ == o.rank_ && keys_ == o.keys_ && coef_ == o.coef_;
    }

    double max_diff(const SpectralField& o) const {
        return minus(o).max_abs();
    }

  private:
    struct Pending {
        ModeKey key;
        int comp;
        cplx value;
    };

    void sort_rows() {
        if (std::is_sorted(keys_.begin(), keys_.end())) {
            // still need duplicate merge? keys from shifted() are unique.
            return;
        }
        const int nc = ncomp();
        std::vector<size_t> order(keys_.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](size_t a, size_t b) { return keys_[a] < keys_[b]; });
        std::vector<ModeKey> keys(keys_.size());
        std::vector<cplx> coef(coef_.size());
        for (size_t i = 0; i < order.size(); ++i) {
            keys[i] = keys_[order[i]];
            std::memcpy(coef.data() + i * nc, coef_.data() + order[i] * nc, sizeof(cplx) * size_t(nc));
        }
        keys_ = std::move(keys);
        coef_ = std::move(coef);
    }

    Rank rank_;
    std::vector<ModeKey> keys_;   // ascending
    std::vector<cplx> coef_;      // nmodes x ncomp, row per mode
    std::vector<Pending> pending_;
};

// Convenience constructors -------------------------------------------------

inline SpectralField constant_field(Rank r, const std::vector<cplx>& value) {
    SpectralField f(r);
    for (int c = 0; c < component_count(r); ++c) f.add({0, 0, 0}, c, value[size_t(c)]);
    f.normalize();
    return f;
}

inline SpectralField constant_scalar(double v) { return constant_field(Rank::scalar, {cplx(v, 0.0)}); }

// cos(k.x) and sin(k.x) as reality-symmetric fields.
inline SpectralField cosine_field(const IVec3& k, double amplitude = 1.0) {
    SpectralField f(Rank::scalar);
    f.add(k, 0, cplx(amplitude / 2.0, 0.0));
    f.add(-k, 0, cplx(amplitude / 2.0, 0.0));
    f.normalize();
    return f;
}
inline SpectralField sine_field(const IVec3& k, double amplitude = 1.0) {
    SpectralField f(Rank::scalar);
    f.add(k, 0, cplx(0.0, -amplitude / 2.0));
    f.add(-k, 0, cplx(0.0, amplitude / 2.0));
    f.normalize();
    return f;
}

// Random reality-symmetric field with |k|_inf <= K (all components).
inline SpectralField random_real_field(Rank r, int K, Rng& rng, double scale = 1.0) {
    SpectralField f(r);
    const int nc = component_count(r);
    for (int32_t a = -K; a <= K; ++a)
        for (int32_t b = -K; b <= K; ++b)
            for (int32_t c = -K; c <= K; ++c) {
                IVec3 k{a, b, c};
                IVec3 nk = -k;
                if (pack_key(k) > pack_key(nk)) continue;  // fill half-space once
                for (int comp = 0; comp < nc; ++comp) {
                    if (k == nk) {  // k = 0: real coefficient
                        f.add(k, comp, cplx(scale * rng.normal(), 0.0));
                    } else {
                        cplx v(scale * rng.normal(), scale * rng.normal());
                        f.add(k, comp, v);
                        f.add(nk, comp, std::conj(v));
                    }
                }
            }
    f.normalize();
    return f;
}

}  // namespace ciflow
