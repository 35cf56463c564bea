#pragma once

#include <array>
#include <complex>

#include "qpkam/errors.hpp"

namespace qpkam::mat2 {

using cplx = std::complex<double>;

enum class GroupTag { SL2R, SL2C, SU11, GL2C };
enum class AlgebraTag { sl2R, su11, sl2C };

/// 2x2 matrix, row-major entries, tagged by the group it is supposed to
/// live in.  Determinant-one tags are normalized on demand, not enforced
/// on every arithmetic op.
struct Mat2 {
    std::array<cplx, 4> a{};
    GroupTag tag = GroupTag::GL2C;

    Mat2() = default;
    Mat2(cplx a11, cplx a12, cplx a21, cplx a22, GroupTag t = GroupTag::GL2C)
        : a{a11, a12, a21, a22}, tag(t) {}

    static Mat2 identity(GroupTag t = GroupTag::SL2R) { return Mat2(1, 0, 0, 1, t); }

    cplx det() const { return a[0] * a[3] - a[1] * a[2]; }
    cplx trace() const { return a[0] + a[3]; }

    Mat2 inverse() const;

    Mat2 operator*(const Mat2& o) const;
    Mat2 operator+(const Mat2& o) const;
    Mat2 operator-(const Mat2& o) const;
    Mat2 operator*(cplx s) const { return Mat2(a[0] * s, a[1] * s, a[2] * s, a[3] * s, tag); }
};

/// Traceless 2x2 matrix (Lie algebra element).
struct Alg2 {
    std::array<cplx, 4> a{};
    AlgebraTag tag = AlgebraTag::sl2C;

    Alg2() = default;
    Alg2(cplx a11, cplx a12, cplx a21, cplx a22, AlgebraTag t = AlgebraTag::sl2C)
        : a{a11, a12, a21, a22}, tag(t) {}

    static Alg2 zero(AlgebraTag t = AlgebraTag::sl2R) { return Alg2(0, 0, 0, 0, t); }

    cplx trace() const { return a[0] + a[3]; }
    cplx det() const { return a[0] * a[3] - a[1] * a[2]; }

    Alg2 operator+(const Alg2& o) const;
    Alg2 operator-(const Alg2& o) const;
    Alg2 operator*(cplx s) const { return Alg2(a[0] * s, a[1] * s, a[2] * s, a[3] * s, tag); }
    Alg2 operator-() const { return *this * cplx(-1.0); }
};

/// [X, Y] = XY - YX.
Alg2 commutator(const Alg2& x, const Alg2& y);

/// Operator 2-norm (largest singular value), closed form for 2x2.
double op_norm(const Mat2& m);
double op_norm(const Alg2& x);

enum class AngleKind { elliptic, hyperbolic, parabolic };

/// Eigenvalue data of an SL(2) matrix: e^{i rho} (elliptic, rho in (-pi,pi]),
/// e^{+-lambda} (hyperbolic, stored value = lambda > 0), or parabolic (0).
struct EigenAngle {
    AngleKind kind = AngleKind::parabolic;
    double value = 0.0;
};

/// Trace band around |tr| = 2 classified as parabolic.
inline constexpr double kParabolicBand = 1e-9;

Mat2 exp_alg(const Alg2& x);
Alg2 log_group(const Mat2& m);
Alg2 log_product_bch(const Alg2& x, const Alg2& y, int order = 4);

Alg2 to_su11(const Alg2& x);
Mat2 to_su11(const Mat2& m);
Alg2 to_sl2r(const Alg2& x);
Mat2 to_sl2r(const Mat2& m);

EigenAngle eigen_angle(const Mat2& m);

struct SchurResult {
    Mat2 U;      // unitary, det 1
    cplx gamma;  // diagonal of U A U^{-1} is (e^{gamma}, e^{-gamma})
    cplx c;      // upper-right entry
};

SchurResult schur_triangularize(const Mat2& m);

/// Frobenius distance, handy in tests and invariant checks.
double dist(const Mat2& x, const Mat2& y);
double dist(const Alg2& x, const Alg2& y);

/// Largest |entry| deviation from the su(1,1) pattern [[it, v],[conj v, -it]].
double su11_pattern_defect(const Mat2& m);
double su11_pattern_defect(const Alg2& x);

/// Largest imaginary part over entries (reality defect for SL(2,R)/sl(2,R)).
double reality_defect(const Mat2& m);
double reality_defect(const Alg2& x);

/// Rotation by angle t: [[cos t, -sin t],[sin t, cos t]].
Mat2 rotation(double t);

/// Rescale so that det = 1 exactly-ish; throws if det is near zero or the
/// drift exceeds `tol`.
Mat2 normalize_det(const Mat2& m, double tol = 1e-6);

}  // namespace qpkam::mat2
