#pragma once
// Core value types shared by every module: integer frequency vectors,
// packed mode keys, field ranks, shell intervals and the error taxonomy.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace ciflow {

using cplx = std::complex<double>;

inline constexpr const char* kLibraryName = "ciflow";
inline constexpr const char* kLibraryVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Integer frequency vectors

using IVec3 = std::array<int32_t, 3>;

inline IVec3 operator+(const IVec3& a, const IVec3& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline IVec3 operator-(const IVec3& a, const IVec3& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline IVec3 operator-(const IVec3& a) { return {-a[0], -a[1], -a[2]}; }
inline IVec3 operator*(int s, const IVec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

inline int64_t l1_norm(const IVec3& k) {
    return std::abs<int64_t>(k[0]) + std::abs<int64_t>(k[1]) + std::abs<int64_t>(k[2]);
}
inline int64_t linf_norm(const IVec3& k) {
    int64_t m = std::abs<int64_t>(k[0]);
    m = std::max(m, std::abs<int64_t>(k[1]));
    return std::max(m, std::abs<int64_t>(k[2]));
}
inline double l2_norm(const IVec3& k) {
    double x = k[0], y = k[1], z = k[2];
    return std::sqrt(x * x + y * y + z * z);
}
inline int64_t l2_norm_sq(const IVec3& k) {
    int64_t x = k[0], y = k[1], z = k[2];
    return x * x + y * y + z * z;
}
inline int64_t dot(const IVec3& a, const IVec3& b) {
    return int64_t(a[0]) * b[0] + int64_t(a[1]) * b[1] + int64_t(a[2]) * b[2];
}

// Packed key: each component shifted into 21 bits, lexicographic order on
// (k0,k1,k2) is preserved.  Components must stay within +-2^20.
using ModeKey = int64_t;
inline constexpr int32_t kKeyBias = 1 << 20;

inline ModeKey pack_key(const IVec3& k) {
    return (int64_t(k[0] + kKeyBias) << 42) | (int64_t(k[1] + kKeyBias) << 21) |
           int64_t(k[2] + kKeyBias);
}
inline IVec3 unpack_key(ModeKey key) {
    return {int32_t((key >> 42) & 0x1FFFFF) - kKeyBias,
            int32_t((key >> 21) & 0x1FFFFF) - kKeyBias,
            int32_t(key & 0x1FFFFF) - kKeyBias};
}
inline ModeKey negate_key(ModeKey key) { return pack_key(-unpack_key(key)); }
inline bool key_in_range(const IVec3& k) {
    return linf_norm(k) < kKeyBias - 1;
}

// ---------------------------------------------------------------------------
// Field ranks

enum class Rank { scalar, vector3, tensor3x3_symmetric, tensor3x3 };

inline int component_count(Rank r) {
    switch (r) {
        case Rank::scalar: return 1;
        case Rank::vector3: return 3;
        case Rank::tensor3x3_symmetric: return 6;
        case Rank::tensor3x3: return 9;
    }
    return 0;
}

inline const char* rank_name(Rank r) {
    switch (r) {
        case Rank::scalar: return "scalar";
        case Rank::vector3: return "vector3";
        case Rank::tensor3x3_symmetric: return "tensor3x3-symmetric";
        case Rank::tensor3x3: return "tensor3x3";
    }
    return "?";
}

// Symmetric tensors store the upper triangle (11,12,13,22,23,33).
inline int sym_index(int i, int j) {
    if (i > j) std::swap(i, j);
    static constexpr int idx[3][3] = {{0, 1, 2}, {-1, 3, 4}, {-1, -1, 5}};
    return idx[i][j];
}
inline int full_index(int i, int j) { return 3 * i + j; }

// ---------------------------------------------------------------------------
// Shell intervals for the l1-frequency projector P_I

struct ShellInterval {
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    bool lo_inclusive = true;
    bool hi_inclusive = false;

    bool contains(int64_t l1) const {
        double x = double(l1);
        if (lo_inclusive ? x < lo : x <= lo) return false;
        if (hi_inclusive ? x > hi : x >= hi) return false;
        return true;
    }
    static ShellInterval all() { return {0.0, std::numeric_limits<double>::infinity(), true, false}; }
    static ShellInterval nonzero() { return {0.0, std::numeric_limits<double>::infinity(), false, false}; }
    static ShellInterval at_most(double hi) { return {0.0, hi, true, true}; }
    static ShellInterval at_least(double lo) { return {lo, std::numeric_limits<double>::infinity(), true, false}; }
    static ShellInterval greater(double lo) { return {lo, std::numeric_limits<double>::infinity(), false, false}; }
    static ShellInterval half_open(double lo, double hi) { return {lo, hi, true, false}; }

    ShellInterval intersect(const ShellInterval& o) const {
        ShellInterval r;
        if (lo > o.lo) { r.lo = lo; r.lo_inclusive = lo_inclusive; }
        else if (lo < o.lo) { r.lo = o.lo; r.lo_inclusive = o.lo_inclusive; }
        else { r.lo = lo; r.lo_inclusive = lo_inclusive && o.lo_inclusive; }
        if (hi < o.hi) { r.hi = hi; r.hi_inclusive = hi_inclusive; }
        else if (hi > o.hi) { r.hi = o.hi; r.hi_inclusive = o.hi_inclusive; }
        else { r.hi = hi; r.hi_inclusive = hi_inclusive && o.hi_inclusive; }
        return r;
    }
};

// ---------------------------------------------------------------------------
// Errors

enum class Errc {
    grid_too_small,
    rank_mismatch,
    out_of_time_range,
    param_violation,
    non_integer_modes,
    support_violation,
    outside_geometric_ball,
    geometric_ball_violation,
    support_too_wide,
    truncation_too_coarse,
    consistency_failure,
    infeasible,
    not_divergence_free,
    nonzero_mean,
    format_error,
    io_error,
    config_error,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::grid_too_small: return "GridTooSmall";
        case Errc::rank_mismatch: return "RankMismatch";
        case Errc::out_of_time_range: return "OutOfTimeRange";
        case Errc::param_violation: return "ParamViolation";
        case Errc::non_integer_modes: return "NonIntegerModes";
        case Errc::support_violation: return "SupportViolation";
        case Errc::outside_geometric_ball: return "OutsideGeometricBall";
        case Errc::geometric_ball_violation: return "GeometricBallViolation";
        case Errc::support_too_wide: return "SupportTooWide";
        case Errc::truncation_too_coarse: return "TruncationTooCoarse";
        case Errc::consistency_failure: return "ConsistencyFailure";
        case Errc::infeasible: return "Infeasible";
        case Errc::not_divergence_free: return "NotDivergenceFree";
        case Errc::nonzero_mean: return "NonzeroMean";
        case Errc::format_error: return "FormatError";
        case Errc::io_error: return "IoError";
        case Errc::config_error: return "ConfigError";
    }
    return "Error";
}

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
    Errc code() const { return code_; }

  private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace ciflow
