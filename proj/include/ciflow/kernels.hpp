#pragma once
// Kernel-synthesis route to L1 operator norms: the l1-ball Dirichlet kernel
// D1_N and the 1-D Fejer kernel, power/log model fits, and tail bounds for
// radial-in-|k|_1 multipliers through the shell (Abel summation)
// decomposition f - f_N = sum_{j>N} (m_j - m_{j+1}) D1_j + ...

#include <map>
#include <optional>

#include <Eigen/Dense>

#include "ciflow/fft.hpp"
#include "ciflow/multiplier.hpp"
#include "ciflow/parallel.hpp"

namespace ciflow {

struct KernelConfig {
    double oversample = 2.0;   // grid factor relative to 2N+1
    int max_grid = 405;        // cap per dimension
    double coarse_factor = 0.7;  // secondary grid for the quadrature error bound
};

struct KernelReport {
    int64_t N = 0;
    double l1_norm = 0.0;
    double quad_error = 0.0;   // |fine - coarse| quadrature difference
    double fitted_a = 0.0;     // model C * N^a * log^b(N)
    double fitted_b = 0.0;
    std::string model = "C*N^a*log^b(N)";
};

namespace detail {

// L1 norm (normalized measure) of the l1-ball Dirichlet kernel on an n-grid.
inline double dirichlet_l1_on_grid(int64_t N, int n) {
    DenseSynthesizer synth(n);
    for (int32_t a = -int32_t(N); a <= N; ++a)
        for (int32_t b = -int32_t(N - std::abs<int64_t>(a)); b <= N - std::abs<int64_t>(a); ++b) {
            int32_t cmax = int32_t(N - std::abs<int64_t>(a) - std::abs<int64_t>(b));
            for (int32_t c = -cmax; c <= cmax; ++c) synth.scatter({a, b, c}, cplx(1.0, 0.0));
        }
    const double* v = synth.synthesize();
    size_t plane = size_t(n) * n;
    double total = 0.0;
    for (int z = 0; z < n; ++z) {
        double partial = 0.0;
        const double* p = v + size_t(z) * plane;
        for (size_t i = 0; i < plane; ++i) partial += std::abs(p[i]);
        total += partial;
    }
    return total / (double(n) * n * n);
}

inline int kernel_grid(int64_t N, const KernelConfig& cfg, double factor) {
    int64_t minimal = 2 * N + 1;
    int64_t want = int64_t(double(minimal) * factor);
    if (want < minimal) want = minimal;
    if (want > cfg.max_grid) want = std::max<int64_t>(minimal, cfg.max_grid);
    return next_odd_smooth(int(want));
}

}  // namespace detail

// L1 norm of D1_N(x) = sum_{|k|_1 <= N} e^{ik.x} with a refinement-based
// quadrature error bound.
inline KernelReport dirichlet_l1_kernel(int64_t N, const KernelConfig& cfg = {}) {
    if (N < 0) fail(Errc::param_violation, "dirichlet_l1_kernel needs N >= 0");
    KernelReport rep;
    rep.N = N;
    if (N == 0) {  // kernel identically 1
        rep.l1_norm = 1.0;
        return rep;
    }
    int n = detail::kernel_grid(N, cfg, cfg.oversample);
    if (n < 2 * N + 1) fail(Errc::grid_too_small, "dirichlet kernel exceeds grid capacity");
    rep.l1_norm = detail::dirichlet_l1_on_grid(N, n);
    int nc = detail::kernel_grid(N, cfg, cfg.oversample * cfg.coarse_factor);
    if (nc < n && nc >= 2 * N + 1)
        rep.quad_error = std::abs(rep.l1_norm - detail::dirichlet_l1_on_grid(N, nc));
    return rep;
}

// 1-D Fejer kernel F(y) = sum_{|j|<=r} (1-|j|/(r+1)) e^{ijy}: L1 and L2 norms
// by quadrature on an oversampled 1-D grid.
struct FejerReport {
    int64_t r = 0;
    double l1_norm = 0.0;
    double l2_norm = 0.0;
    double min_value = 0.0;  // Fejer kernels are nonnegative
};

inline FejerReport fejer_kernel_1d(int64_t r, int n_points = 0) {
    if (r < 0) fail(Errc::param_violation, "fejer_kernel_1d needs r >= 0");
    FejerReport rep;
    rep.r = r;
    int n = n_points > 0 ? n_points : std::max<int>(4 * int(2 * r + 1) + 1, 2049);
    if (n % 2 == 0) ++n;
    double s1 = 0.0, s2 = 0.0, mn = 1e300;
    for (int i = 0; i < n; ++i) {
        double y = -3.141592653589793238462643383279 + 2.0 * 3.141592653589793238462643383279 * i / n;
        double v = 1.0;
        for (int64_t j = 1; j <= r; ++j)
            v += 2.0 * (1.0 - double(j) / double(r + 1)) * std::cos(double(j) * y);
        s1 += std::abs(v);
        s2 += v * v;
        mn = std::min(mn, v);
    }
    rep.l1_norm = s1 / n;
    rep.l2_norm = std::sqrt(s2 / n);
    rep.min_value = mn;
    return rep;
}

// ---------------------------------------------------------------------------
// Least-squares fit of log(v) = log(C) + a log(N) + b log(log(N)).

struct PowerLogFit {
    double log_c = 0.0;
    double a = 0.0;
    double b = 0.0;
    double max_residual = 0.0;  // in log space

    double eval(double N) const {
        return std::exp(log_c + a * std::log(N) + b * std::log(std::log(N)));
    }
};

inline PowerLogFit fit_power_log(const std::vector<double>& Ns, const std::vector<double>& vals,
                                 std::optional<double> fix_a = std::nullopt) {
    if (Ns.size() != vals.size() || Ns.size() < 2)
        fail(Errc::param_violation, "fit_power_log needs matching series with >= 2 points");
    const int rows = int(Ns.size());
    const int cols = fix_a ? 2 : 3;
    Eigen::MatrixXd A(rows, cols);
    Eigen::VectorXd y(rows);
    for (int i = 0; i < rows; ++i) {
        double N = Ns[size_t(i)];
        if (N <= 1.0 || vals[size_t(i)] <= 0.0)
            fail(Errc::param_violation, "fit_power_log needs N > 1 and positive values");
        double ln = std::log(N);
        A(i, 0) = 1.0;
        if (fix_a) {
            A(i, 1) = std::log(ln);
            y(i) = std::log(vals[size_t(i)]) - *fix_a * ln;
        } else {
            A(i, 1) = ln;
            A(i, 2) = std::log(ln);
            y(i) = std::log(vals[size_t(i)]);
        }
    }
    Eigen::VectorXd sol = A.colPivHouseholderQr().solve(y);
    PowerLogFit fit;
    fit.log_c = sol(0);
    if (fix_a) {
        fit.a = *fix_a;
        fit.b = sol(1);
    } else {
        fit.a = sol(1);
        fit.b = sol(2);
    }
    Eigen::VectorXd res = A * sol - y;
    fit.max_residual = res.cwiseAbs().maxCoeff();
    return fit;
}

// Dirichlet L1 series with the log-model fit attached to every row.
inline std::vector<KernelReport> dirichlet_l1_series(const std::vector<int64_t>& Ns,
                                                     const KernelConfig& cfg = {},
                                                     std::optional<double> fix_a = 0.0) {
    std::vector<KernelReport> rows(Ns.size());
    parallel_for(int(Ns.size()), [&](int i) { rows[size_t(i)] = dirichlet_l1_kernel(Ns[size_t(i)], cfg); });
    std::vector<double> xs, vs;
    for (const auto& r : rows)
        if (r.N >= 2) {
            xs.push_back(double(r.N));
            vs.push_back(r.l1_norm);
        }
    if (xs.size() >= 2) {
        PowerLogFit fit = fit_power_log(xs, vs, fix_a);
        for (auto& r : rows) {
            r.fitted_a = fit.a;
            r.fitted_b = fit.b;
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Measured-or-modelled table of ||D1_j||_{L1}: quadrature values on a sparse
// geometric ladder, log-log interpolation between them, and the fitted
// log^b model beyond the last measured point.

class DirichletNormTable {
  public:
    explicit DirichletNormTable(int64_t measure_max = 64, const KernelConfig& cfg = {}) {
        std::vector<int64_t> ladder;
        for (int64_t j = 1; j <= measure_max;) {
            ladder.push_back(j);
            int64_t next = j <= 2 ? j + 1 : (j * 3) / 2;
            if (next == j) ++next;
            j = next;
        }
        if (ladder.back() != measure_max) ladder.push_back(measure_max);
        values_.resize(ladder.size());
        std::vector<KernelReport> reps(ladder.size());
        parallel_for(int(ladder.size()), [&](int i) { reps[size_t(i)] = dirichlet_l1_kernel(ladder[size_t(i)], cfg); });
        for (size_t i = 0; i < ladder.size(); ++i) values_[i] = {ladder[i], reps[i].l1_norm};
        std::vector<double> xs, vs;
        for (auto& [j, v] : values_)
            if (j >= 3) {
                xs.push_back(double(j));
                vs.push_back(v);
            }
        fit_ = fit_power_log(xs, vs, 0.0);  // ||D1_j|| ~ C log^b(j)
    }

    double operator()(int64_t j) const {
        if (j <= 0) return 1.0;
        if (j <= values_.back().first) {
            // exact hit or log-log interpolation between ladder points
            for (size_t i = 0; i < values_.size(); ++i) {
                if (values_[i].first == j) return values_[i].second;
                if (values_[i].first > j) {
                    auto [j0, v0] = values_[i - 1];
                    auto [j1, v1] = values_[i];
                    double t = (std::log(double(j)) - std::log(double(j0))) /
                               (std::log(double(j1)) - std::log(double(j0)));
                    return std::exp((1.0 - t) * std::log(v0) + t * std::log(v1));
                }
            }
        }
        return fit_.eval(double(j));
    }

    const PowerLogFit& fit() const { return fit_; }
    int64_t measured_max() const { return values_.back().first; }

  private:
    std::vector<std::pair<int64_t, double>> values_;
    PowerLogFit fit_;
};

struct TailConfig {
    int64_t shell_start_M = 0;       // 0: auto (4N)
    int64_t shell_cap = 16'000'000;  // hard cap on the shell cutoff
    double convergence_tol = 0.05;   // doubling must change the value by less
};

struct TailEstimate {
    double value = 0.0;
    int64_t N = 0;
    int64_t truncation_M = 0;
    bool converged = false;
};

// Upper bound for ||P_{|k|_1 > N} T_m||_{L(L1,L1)} via the synthesized tail
// kernel: using f_M - f_N = sum_{j=N+1}^{M-1} (m_j - m_{j+1}) D1_j
// + m_M D1_M - m_{N+1} D1_N, the L1 triangle inequality gives
//   ||f - f_N||_{L1} <= sum (m_j - m_{j+1}) ||D1_j|| + m_M ||D1_M||
//                        + m_{N+1} ||D1_N||.
// Requires the symbol to be radial and nonincreasing in |k|_1.
inline TailEstimate tail_multiplier_norm(const MultiplierSymbol& m, int64_t N,
                                         const DirichletNormTable& table,
                                         const TailConfig& cfg = {}) {
    if (N < 1) fail(Errc::param_violation, "tail_multiplier_norm needs N >= 1");
    auto profile = [&](int64_t j) { return m(IVec3{int32_t(j), 0, 0}).real(); };
    // radial nonincreasing sanity probe
    for (int64_t j : {N, N + 1, 2 * N, 4 * N}) {
        if (profile(j) < profile(j + 1) - 1e-15)
            fail(Errc::param_violation, "tail_multiplier_norm needs a nonincreasing radial profile");
    }
    TailEstimate est;
    est.N = N;
    auto value_at = [&](int64_t M) {
        double sum = profile(N + 1) * table(N);
        for (int64_t j = N + 1; j < M; ++j) sum += (profile(j) - profile(j + 1)) * table(j);
        sum += profile(M) * table(M);
        return sum;
    };
    int64_t M = cfg.shell_start_M > 0 ? cfg.shell_start_M : 4 * N;
    double prev = value_at(M);
    for (;;) {
        int64_t M2 = 2 * M;
        if (M2 > cfg.shell_cap) break;
        double next = value_at(M2);
        M = M2;
        if (std::abs(next - prev) <= cfg.convergence_tol * std::max(next, 1e-300)) {
            est.converged = true;
            prev = next;
            break;
        }
        prev = next;
    }
    est.value = prev;
    est.truncation_M = M;
    if (!est.converged)
        fail(Errc::truncation_too_coarse,
             "tail bound did not converge within the shell cap (successive doublings differ by > tolerance)");
    return est;
}

}  // namespace ciflow
