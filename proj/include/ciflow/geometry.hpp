#pragma once
// The direction set Lambda = Lambda+ u Lambda- (12 unit vectors with 5*xi in
// Z^3), orthonormal rational frames (xi, A_xi, xi x A_xi), complex
// polarizations B_xi, and the geometric decomposition of symmetric matrices
// near the identity as positive combinations of I - xi (x) xi.

#include <Eigen/Dense>

#include "ciflow/core.hpp"
#include "ciflow/rng.hpp"

namespace ciflow {

using Vec3d = Eigen::Vector3d;
using Mat3d = Eigen::Matrix3d;
using Vec3c = Eigen::Vector3cd;

struct Direction {
    IVec3 xi5;   // 5 * xi (integer)
    IVec3 a5;    // 5 * A_xi (integer; A is a canonical basis vector)
    IVec3 x5;    // 5 * (xi x A_xi) (integer)
    int positive_index;  // index into Lambda+ of xi or -xi

    Vec3d xi() const { return Vec3d(xi5[0], xi5[1], xi5[2]) / 5.0; }
    Vec3d frame_a() const { return Vec3d(a5[0], a5[1], a5[2]) / 5.0; }
    Vec3d frame_x() const { return Vec3d(x5[0], x5[1], x5[2]) / 5.0; }
    // B = (A + i xi x A)/sqrt(2)
    Vec3c polarization() const {
        Vec3c b;
        for (int i = 0; i < 3; ++i)
            b(i) = cplx(a5[size_t(i)] / 5.0, x5[size_t(i)] / 5.0) / std::sqrt(2.0);
        return b;
    }
    bool is_positive() const { return sign > 0; }
    int sign = +1;  // +1 for Lambda+, -1 for Lambda-
};

// Frame choice: A = e3 for +-(3e1 +- 4e2)/5, A = e1 for +-(3e2 +- 4e3)/5,
// A = e2 for +-(3e3 +- 4e1)/5; then 5 (xi x A) is integral and A_{-xi} = A.
class DirectionSet {
  public:
    DirectionSet() {
        const IVec3 plus5[6] = {{3, 4, 0}, {3, -4, 0}, {0, 3, 4}, {0, 3, -4}, {4, 0, 3}, {-4, 0, 3}};
        const IVec3 frames5[6] = {{0, 0, 5}, {0, 0, 5}, {5, 0, 0}, {5, 0, 0}, {0, 5, 0}, {0, 5, 0}};
        for (int i = 0; i < 6; ++i) {
            Direction d;
            d.xi5 = plus5[i];
            d.a5 = frames5[i];
            d.x5 = cross(plus5[i], frames5[i]);  // 25 * (xi x A) / 5 = 5 * (xi x A)
            d.positive_index = i;
            d.sign = +1;
            dirs_.push_back(d);
        }
        for (int i = 0; i < 6; ++i) {
            Direction d = dirs_[size_t(i)];
            d.xi5 = -d.xi5;
            d.x5 = -d.x5;  // (-xi) x A = -(xi x A); A_{-xi} = A_xi
            d.sign = -1;
            dirs_.push_back(d);
        }
    }

    const std::vector<Direction>& all() const { return dirs_; }
    size_t size() const { return dirs_.size(); }
    const Direction& at(size_t i) const { return dirs_[i]; }
    const Direction& positive(size_t i) const { return dirs_[i]; }      // i < 6
    const Direction& negative(size_t i) const { return dirs_[i + 6]; }  // partner of positive(i)

  private:
    static IVec3 cross(const IVec3& a, const IVec3& b) {
        // a, b are 5x unit vectors; result is 25 * (xi x A), divide by 5
        IVec3 c{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
        return {c[0] / 5, c[1] / 5, c[2] / 5};
    }
    std::vector<Direction> dirs_;
};

inline const DirectionSet& direction_set() {
    static DirectionSet ds;
    return ds;
}

// Frobenius-isometric vectorization of symmetric 3x3 matrices.
inline Eigen::Matrix<double, 6, 1> sym_vec(const Mat3d& S) {
    const double r2 = std::sqrt(2.0);
    Eigen::Matrix<double, 6, 1> v;
    v << S(0, 0), S(1, 1), S(2, 2), r2 * S(0, 1), r2 * S(0, 2), r2 * S(1, 2);
    return v;
}
inline Mat3d sym_unvec(const Eigen::Matrix<double, 6, 1>& v) {
    const double r2 = std::sqrt(2.0);
    Mat3d S;
    S << v(0), v(3) / r2, v(4) / r2, v(3) / r2, v(1), v(5) / r2, v(4) / r2, v(5) / r2, v(2);
    return S;
}

struct GammaCoefficients {
    std::array<double, 6> c;      // basis coefficients, one per Lambda+ direction
    std::array<double, 6> gamma;  // sqrt(2 c)
};

// Solves R = sum_{Lambda+} c_xi * basis_scale * (I - xi (x) xi); gamma is
// defined so that gamma(I3) = sqrt(1/2) at basis_scale = 1.
class GammaSolver {
  public:
    explicit GammaSolver(double basis_scale = 1.0) : scale_(basis_scale) {
        const DirectionSet& ds = direction_set();
        for (int j = 0; j < 6; ++j) {
            Vec3d xi = ds.positive(size_t(j)).xi();
            Mat3d B = scale_ * (Mat3d::Identity() - xi * xi.transpose());
            basis_.col(j) = sym_vec(B);
        }
        lu_ = basis_.partialPivLu();
        Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>> svd(basis_);
        condition_ = svd.singularValues()(0) / svd.singularValues()(5);
        inv_ = basis_.inverse();
    }

    double basis_scale() const { return scale_; }
    double condition_number() const { return condition_; }
    // the point with all coefficients equal to 1/4 (the identity for the
    // unscaled basis)
    Mat3d natural_center() const { return scale_ * Mat3d::Identity(); }

    std::array<double, 6> coefficients(const Mat3d& R) const {
        Eigen::Matrix<double, 6, 1> c = lu_.solve(sym_vec(R));
        std::array<double, 6> out;
        for (int j = 0; j < 6; ++j) out[size_t(j)] = c(j);
        return out;
    }

    // gamma_xi = sqrt(2 c_xi); throws OutsideGeometricBall if any c <= 0.
    GammaCoefficients solve(const Mat3d& R) const {
        GammaCoefficients out;
        out.c = coefficients(R);
        for (int j = 0; j < 6; ++j) {
            if (!(out.c[size_t(j)] > 0.0))
                fail(Errc::outside_geometric_ball,
                     "nonpositive coefficient in geometric decomposition");
            out.gamma[size_t(j)] = std::sqrt(2.0 * out.c[size_t(j)]);
        }
        return out;
    }

    Mat3d reconstruct(const std::array<double, 6>& c) const {
        Eigen::Matrix<double, 6, 1> v = Eigen::Matrix<double, 6, 1>::Zero();
        for (int j = 0; j < 6; ++j) v += c[size_t(j)] * basis_.col(j);
        return sym_unvec(v);
    }

    double reconstruction_residual(const Mat3d& R) const {
        return (reconstruct(coefficients(R)) - R).norm();
    }

    // Exact certified radius around the natural center: coefficients stay
    // positive for ||R - C||_F < c0 / max_row_norm(inverse).
    double exact_epsilon() const {
        double c0 = 0.25;  // coefficients at the natural center
        double worst = 0.0;
        for (int j = 0; j < 6; ++j) worst = std::max(worst, inv_.row(j).norm());
        return c0 / worst;
    }

  private:
    double scale_;
    Eigen::Matrix<double, 6, 6> basis_;
    Eigen::PartialPivLU<Eigen::Matrix<double, 6, 6>> lu_;
    Eigen::Matrix<double, 6, 6> inv_;
    double condition_ = 0.0;
};

struct EpsilonEstimate {
    double value = 0.0;
    int samples = 0;
    int bisection_steps = 0;
};

// Sampled estimate of the geometric-ball radius: bisection on rho such that
// every sampled R with ||R - center||_F = rho keeps all coefficients
// positive.  Directions are drawn uniformly on the unit sphere of symmetric
// matrices with a fixed seed.
inline EpsilonEstimate estimate_epsilon_lambda(const GammaSolver& solver, int nsamples = 2000,
                                               uint64_t seed = 2024) {
    Rng rng(seed);
    std::vector<std::array<double, 6>> dirs;
    dirs.reserve(size_t(nsamples));
    Mat3d C = solver.natural_center();
    for (int s = 0; s < nsamples; ++s) {
        Eigen::Matrix<double, 6, 1> v;
        for (int j = 0; j < 6; ++j) v(j) = rng.normal();
        v.normalize();
        Mat3d E = sym_unvec(v);
        // coefficient direction induced by E
        std::array<double, 6> base = solver.coefficients(C);
        std::array<double, 6> pert = solver.coefficients(C + E);
        std::array<double, 6> d;
        for (int j = 0; j < 6; ++j) d[size_t(j)] = pert[size_t(j)] - base[size_t(j)];
        dirs.push_back(d);
    }
    std::array<double, 6> c0 = solver.coefficients(C);
    auto all_positive = [&](double rho) {
        for (const auto& d : dirs)
            for (int j = 0; j < 6; ++j)
                if (c0[size_t(j)] + rho * d[size_t(j)] <= 0.0) return false;
        return true;
    };
    double lo = 0.0, hi = 1.0;
    while (all_positive(hi) && hi < 1e6) hi *= 2.0;
    EpsilonEstimate out;
    out.samples = nsamples;
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        (all_positive(mid) ? lo : hi) = mid;
        ++out.bisection_steps;
    }
    out.value = lo;
    return out;
}

}  // namespace ciflow
