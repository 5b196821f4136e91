#pragma once
// Thin RAII layer over FFTW for dense complex<->real transforms on n^3
// cubes.  Plans use FFTW_ESTIMATE (deterministic, input-independent) and are
// cached per size; FFTW threading stays off so transforms are reproducible
// for any caller thread count.

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

#include "ciflow/core.hpp"

namespace ciflow {

// Smallest odd integer >= n whose prime factors are all <= 13.
inline int next_odd_smooth(int n) {
    if (n < 1) n = 1;
    if (n % 2 == 0) ++n;
    for (;; n += 2) {
        int m = n;
        for (int p : {3, 5, 7, 11, 13})
            while (m % p == 0) m /= p;
        if (m == 1) return n;
    }
}

namespace detail {

// Recycled fftw_malloc blocks: dense scratch cubes are large and turn over
// constantly, so freeing them back to the OS dominates runtime without this.
class BufferPool {
  public:
    static BufferPool& instance() {
        static BufferPool pool;
        return pool;
    }
    void* acquire(size_t bytes) {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = free_.find(bytes);
            if (it != free_.end() && !it->second.empty()) {
                void* p = it->second.back();
                it->second.pop_back();
                held_ -= bytes;
                return p;
            }
        }
        void* p = fftw_malloc(bytes);
        if (!p) throw std::bad_alloc();
        return p;
    }
    void release(void* p, size_t bytes) {
        std::lock_guard<std::mutex> lock(mutex_);
        if (held_ + bytes > kMaxHeldBytes) {
            fftw_free(p);
            return;
        }
        free_[bytes].push_back(p);
        held_ += bytes;
    }

  private:
    static constexpr size_t kMaxHeldBytes = size_t(768) << 20;
    std::mutex mutex_;
    std::map<size_t, std::vector<void*>> free_;
    size_t held_ = 0;
};

template <class T>
struct FftwBuffer {
    explicit FftwBuffer(size_t count) : size(count) {
        ptr = static_cast<T*>(BufferPool::instance().acquire(sizeof(T) * count));
    }
    ~FftwBuffer() { BufferPool::instance().release(ptr, sizeof(T) * size); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    T* ptr;
    size_t size;
};

class PlanCache {
  public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan c2r_plan(int n) { return get(n, 0); }
    fftw_plan r2c_plan(int n) { return get(n, 1); }
    fftw_plan c2c_plan(int n, bool forward) { return get(n, forward ? 2 : 3); }

  private:
    fftw_plan get(int n, int kind) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(n, kind);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        // Scratch arrays only for planning; execution uses the new-array API.
        fftw_plan p = nullptr;
        if (kind <= 1) {
            size_t half = size_t(n) * n * (n / 2 + 1);
            FftwBuffer<fftw_complex> spec(half);
            FftwBuffer<double> real(size_t(n) * n * n);
            p = kind == 0 ? fftw_plan_dft_c2r_3d(n, n, n, spec.ptr, real.ptr, FFTW_ESTIMATE)
                          : fftw_plan_dft_r2c_3d(n, n, n, real.ptr, spec.ptr, FFTW_ESTIMATE);
        } else {
            FftwBuffer<fftw_complex> a(size_t(n) * n * n);
            p = fftw_plan_dft_3d(n, n, n, a.ptr, a.ptr, kind == 2 ? FFTW_FORWARD : FFTW_BACKWARD,
                                 FFTW_ESTIMATE);
        }
        if (!p) fail(Errc::grid_too_small, "fftw plan creation failed");
        plans_[key] = p;
        return p;
    }

    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

}  // namespace detail

// Dense spectral scratch pad: scatter Hermitian-symmetrized modes, run the
// inverse transform, read real samples at x_j = -pi + 2*pi*j/n.
class DenseSynthesizer {
  public:
    explicit DenseSynthesizer(int n)
        : n_(n), half_(size_t(n) * n * (n / 2 + 1)), spec_(half_), real_(size_t(n) * n * n) {
        if (n < 1 || n % 2 == 0) fail(Errc::grid_too_small, "grid size must be odd and positive");
        clear();
    }

    int n() const { return n_; }
    size_t npoints() const { return real_.size; }

    void clear() {
        for (size_t i = 0; i < half_; ++i) spec_.ptr[i][0] = spec_.ptr[i][1] = 0.0;
    }

    // Accumulate mode k with coefficient c.  Each mode deposits half of its
    // weight into the slot representing its conjugate pair, so the stored
    // half-spectrum is exactly the Hermitian symmetrization of the input
    // (modes lacking a partner synthesize at the symmetrized amplitude).
    void scatter(const IVec3& k, cplx c) {
        if (2 * linf_norm(k) >= n_) fail(Errc::grid_too_small, "mode exceeds grid Nyquist limit");
        // phase for the -pi grid origin
        if ((k[0] + k[1] + k[2]) & 1) c = -c;
        cplx h = 0.5 * c;
        if (k[2] > 0) {
            add(slot(k), h);
        } else if (k[2] < 0) {
            add(slot(-k), std::conj(h));
        } else {
            // the k2 = 0 plane is stored in full and must be Hermitian in
            // (k0,k1) for the transform to be exact
            add(slot(k), h);
            add(slot(-k), std::conj(h));
        }
    }

    // Execute the c2r transform; output is the real sample cube in
    // row-major (x0 slow, x2 fast) order.
    const double* synthesize() {
        fftw_execute_dft_c2r(detail::PlanCache::instance().c2r_plan(n_), spec_.ptr, real_.ptr);
        return real_.ptr;
    }

    const double* values() const { return real_.ptr; }

  private:
    size_t slot(const IVec3& k) const {
        int i0 = k[0] >= 0 ? k[0] : k[0] + n_;
        int i1 = k[1] >= 0 ? k[1] : k[1] + n_;
        int i2 = k[2];  // k2 >= 0 here
        return (size_t(i0) * n_ + i1) * (n_ / 2 + 1) + i2;
    }
    void add(size_t s, cplx v) {
        spec_.ptr[s][0] += v.real();
        spec_.ptr[s][1] += v.imag();
    }

    int n_;
    size_t half_;
    detail::FftwBuffer<fftw_complex> spec_;
    detail::FftwBuffer<double> real_;
};

// Complex cube transforms for products of fields without conjugate
// symmetry (per-direction intermediates).  In-place, unnormalized backward
// synthesis / forward analysis with the -pi origin phase handled here.
class ComplexCube {
  public:
    explicit ComplexCube(int n) : n_(n), data_(size_t(n) * n * n) {
        if (n < 1 || n % 2 == 0) fail(Errc::grid_too_small, "grid size must be odd and positive");
        clear();
    }
    int n() const { return n_; }
    size_t npoints() const { return data_.size; }
    fftw_complex* data() { return data_.ptr; }

    void clear() {
        for (size_t i = 0; i < data_.size; ++i) data_.ptr[i][0] = data_.ptr[i][1] = 0.0;
    }
    void scatter(const IVec3& k, cplx c) {
        if (2 * linf_norm(k) >= n_) fail(Errc::grid_too_small, "mode exceeds grid Nyquist limit");
        if ((k[0] + k[1] + k[2]) & 1) c = -c;
        size_t s = slot(k);
        data_.ptr[s][0] += c.real();
        data_.ptr[s][1] += c.imag();
    }
    void synthesize() {  // values at grid nodes, in place
        fftw_execute_dft(detail::PlanCache::instance().c2c_plan(n_, false), data_.ptr, data_.ptr);
    }
    void analyze() {  // back to (unnormalized) coefficients
        fftw_execute_dft(detail::PlanCache::instance().c2c_plan(n_, true), data_.ptr, data_.ptr);
    }
    cplx coeff(const IVec3& k) const {  // after analyze()
        cplx v(data_.ptr[slot(k)][0], data_.ptr[slot(k)][1]);
        double scale = 1.0 / (double(n_) * n_ * n_);
        if ((k[0] + k[1] + k[2]) & 1) scale = -scale;
        return v * scale;
    }

  private:
    size_t slot(const IVec3& k) const {
        int i0 = k[0] >= 0 ? k[0] : k[0] + n_;
        int i1 = k[1] >= 0 ? k[1] : k[1] + n_;
        int i2 = k[2] >= 0 ? k[2] : k[2] + n_;
        return (size_t(i0) * n_ + i1) * n_ + i2;
    }
    int n_;
    detail::FftwBuffer<fftw_complex> data_;
};

// Forward transform of a real cube; gathers coefficients for |k|_inf <= K.
class DenseAnalyzer {
  public:
    explicit DenseAnalyzer(int n)
        : n_(n), half_(size_t(n) * n * (n / 2 + 1)), spec_(half_), real_(size_t(n) * n * n) {
        if (n < 1 || n % 2 == 0) fail(Errc::grid_too_small, "grid size must be odd and positive");
    }

    int n() const { return n_; }
    double* real_data() { return real_.ptr; }

    void analyze() {
        fftw_execute_dft_r2c(detail::PlanCache::instance().r2c_plan(n_), real_.ptr, spec_.ptr);
    }

    // Coefficient of e^{ik.x} after analyze(); valid for 2|k|_inf < n.
    cplx coeff(const IVec3& k) const {
        bool flip = k[2] < 0;
        IVec3 q = flip ? -k : k;
        int i0 = q[0] >= 0 ? q[0] : q[0] + n_;
        int i1 = q[1] >= 0 ? q[1] : q[1] + n_;
        size_t s = (size_t(i0) * n_ + i1) * (n_ / 2 + 1) + q[2];
        cplx v(spec_.ptr[s][0], spec_.ptr[s][1]);
        if (flip) v = std::conj(v);
        double scale = 1.0 / (double(n_) * n_ * n_);
        if ((k[0] + k[1] + k[2]) & 1) scale = -scale;
        return v * scale;
    }

    // Largest coefficient magnitude over the whole spectrum (cheap linear
    // scan of the raw half-spectrum).
    double max_abs_coeff() const {
        double m2 = 0.0;
        for (size_t i = 0; i < half_; ++i) {
            double re = spec_.ptr[i][0], im = spec_.ptr[i][1];
            double v = re * re + im * im;
            if (v > m2) m2 = v;
        }
        return std::sqrt(m2) / (double(n_) * n_ * n_);
    }

  private:
    int n_;
    size_t half_;
    detail::FftwBuffer<fftw_complex> spec_;
    detail::FftwBuffer<double> real_;
};

}  // namespace ciflow
