#include "qpkam/mat2.hpp"

#include <algorithm>
#include <cmath>

namespace qpkam::mat2 {

namespace {

GroupTag join(GroupTag x, GroupTag y) {
    if (x == y) return x;
    if (x == GroupTag::GL2C || y == GroupTag::GL2C) return GroupTag::GL2C;
    return GroupTag::SL2C;
}

AlgebraTag join(AlgebraTag x, AlgebraTag y) { return x == y ? x : AlgebraTag::sl2C; }

// sqrt(t^2 - 1) and log(t + sqrt(t^2 - 1)) with principal branches.
struct AcoshPair {
    cplx s;    // sqrt(t^2 - 1)
    cplx phi;  // acosh(t); e^{phi} = t + s, e^{-phi} = t - s
};

AcoshPair acosh_pair(cplx t) {
    cplx s = std::sqrt(t * t - cplx(1.0));
    // Pick the branch with |t + s| >= 1 so that phi has nonnegative real part.
    if (std::abs(t + s) < 1.0) s = -s;
    return {s, std::log(t + s)};
}

// phi / sinh(phi) given sinh(phi) = s; even function of phi, series for small s.
cplx phi_over_sinh(const AcoshPair& p) {
    if (std::abs(p.s) < 1e-4) {
        // phi = asinh(s) + (branch shift that only occurs at trace ~ -2,
        // which callers exclude); asinh(s)/s = 1 - s^2/6 + 3 s^4/40 - ...
        cplx s2 = p.s * p.s;
        return cplx(1.0) - s2 / 6.0 + 3.0 * s2 * s2 / 40.0;
    }
    return p.phi / p.s;
}

}  // namespace

Mat2 Mat2::inverse() const {
    cplx d = det();
    if (std::abs(d) < 1e-300) throw Error("Mat2::inverse: singular matrix");
    cplx id = cplx(1.0) / d;
    return Mat2(a[3] * id, -a[1] * id, -a[2] * id, a[0] * id, tag);
}

Mat2 Mat2::operator*(const Mat2& o) const {
    return Mat2(a[0] * o.a[0] + a[1] * o.a[2], a[0] * o.a[1] + a[1] * o.a[3],
                a[2] * o.a[0] + a[3] * o.a[2], a[2] * o.a[1] + a[3] * o.a[3], join(tag, o.tag));
}

Mat2 Mat2::operator+(const Mat2& o) const {
    return Mat2(a[0] + o.a[0], a[1] + o.a[1], a[2] + o.a[2], a[3] + o.a[3], join(tag, o.tag));
}

Mat2 Mat2::operator-(const Mat2& o) const {
    return Mat2(a[0] - o.a[0], a[1] - o.a[1], a[2] - o.a[2], a[3] - o.a[3], join(tag, o.tag));
}

Alg2 Alg2::operator+(const Alg2& o) const {
    return Alg2(a[0] + o.a[0], a[1] + o.a[1], a[2] + o.a[2], a[3] + o.a[3], join(tag, o.tag));
}

Alg2 Alg2::operator-(const Alg2& o) const {
    return Alg2(a[0] - o.a[0], a[1] - o.a[1], a[2] - o.a[2], a[3] - o.a[3], join(tag, o.tag));
}

Alg2 commutator(const Alg2& x, const Alg2& y) {
    auto mul = [](const std::array<cplx, 4>& p, const std::array<cplx, 4>& q) {
        return std::array<cplx, 4>{p[0] * q[0] + p[1] * q[2], p[0] * q[1] + p[1] * q[3],
                                   p[2] * q[0] + p[3] * q[2], p[2] * q[1] + p[3] * q[3]};
    };
    auto xy = mul(x.a, y.a);
    auto yx = mul(y.a, x.a);
    return Alg2(xy[0] - yx[0], xy[1] - yx[1], xy[2] - yx[2], xy[3] - yx[3], join(x.tag, y.tag));
}

namespace {
double op_norm_entries(const std::array<cplx, 4>& a) {
    double f = std::norm(a[0]) + std::norm(a[1]) + std::norm(a[2]) + std::norm(a[3]);
    double d = std::abs(a[0] * a[3] - a[1] * a[2]);
    double disc = f * f - 4.0 * d * d;
    if (disc < 0.0) disc = 0.0;
    return std::sqrt(0.5 * (f + std::sqrt(disc)));
}
}  // namespace

double op_norm(const Mat2& m) { return op_norm_entries(m.a); }
double op_norm(const Alg2& x) { return op_norm_entries(x.a); }

Mat2 exp_alg(const Alg2& x) {
    if (std::abs(x.trace()) > 1e-9)
        throw InvalidAlgebraElement("exp_alg: input is not traceless");
    // X^2 = -det(X) I for traceless X; exp(X) = cosh(d) I + sinh(d)/d X,
    // d^2 = -det X.
    cplx d2 = -x.det();
    cplx d = std::sqrt(d2);
    cplx ch, shd;  // cosh(d), sinh(d)/d
    if (std::abs(d) < 1e-4) {
        cplx d4 = d2 * d2;
        ch = cplx(1.0) + d2 / 2.0 + d4 / 24.0 + d4 * d2 / 720.0;
        shd = cplx(1.0) + d2 / 6.0 + d4 / 120.0 + d4 * d2 / 5040.0;
    } else {
        ch = std::cosh(d);
        shd = std::sinh(d) / d;
    }
    GroupTag t = GroupTag::SL2C;
    if (x.tag == AlgebraTag::sl2R) t = GroupTag::SL2R;
    if (x.tag == AlgebraTag::su11) t = GroupTag::SU11;
    return Mat2(ch + shd * x.a[0], shd * x.a[1], shd * x.a[2], ch + shd * x.a[3], t);
}

Alg2 log_group(const Mat2& m_in) {
    Mat2 m = normalize_det(m_in);
    cplx t = m.trace() * 0.5;

    AlgebraTag at = AlgebraTag::sl2C;
    if (m.tag == GroupTag::SL2R) at = AlgebraTag::sl2R;
    if (m.tag == GroupTag::SU11) at = AlgebraTag::su11;

    // Traceless part N = m - t I; log = (phi / sinh phi) N with cosh phi = t.
    Alg2 n(m.a[0] - t, m.a[1], m.a[2], m.a[3] - t, at);

    if (std::abs(t + cplx(1.0)) < 1e-7) {
        // trace ~ -2: -I has no distinguished log, and the non-central
        // parabolic matrices with trace -2 have no traceless log at all.
        throw LogBranchUndefined("log_group: trace at the -2 branch point");
    }
    if (std::abs(t - cplx(1.0)) < 1e-9) {
        // Parabolic at +2: m = I + N with N nilpotent, log = N exactly.
        return n;
    }
    AcoshPair p = acosh_pair(t);
    cplx f = phi_over_sinh(p);
    return Alg2(n.a[0] * f, n.a[1] * f, n.a[2] * f, n.a[3] * f, at);
}

Alg2 log_product_bch(const Alg2& x, const Alg2& y, int order) {
    if (order < 1 || order > 4) throw Error("log_product_bch: order must be in 1..4");
    double s = op_norm(x) + op_norm(y);
    if (!(s < 0.6931471805599453)) throw BchDivergence("log_product_bch: ||X|| + ||Y|| >= ln 2");
    Alg2 z = x + y;
    if (order >= 2) {
        Alg2 c = commutator(x, y);
        z = z + c * cplx(0.5);
        if (order >= 3) {
            Alg2 xxy = commutator(x, c);   // [X,[X,Y]]
            Alg2 yyx = commutator(y, -c);  // [Y,[Y,X]]
            z = z + (xxy + yyx) * cplx(1.0 / 12.0);
            if (order >= 4) {
                z = z - commutator(y, xxy) * cplx(1.0 / 24.0);
            }
        }
    }
    z.tag = x.tag == y.tag ? x.tag : AlgebraTag::sl2C;
    return z;
}

namespace {
// M = (1/(1+i)) [[1, -i],[1, i]], det M = 1; M^{-1} = (1/(1+i)) [[i, i],[-1, 1]].
const cplx kI(0.0, 1.0);
const cplx kK = cplx(1.0) / cplx(1.0, 1.0);

const std::array<cplx, 4> kM = {kK, -kI * kK, kK, kI * kK};
const std::array<cplx, 4> kMinv = {kI * kK, kI * kK, -kK, kK};

std::array<cplx, 4> conj_entries(const std::array<cplx, 4>& p, const std::array<cplx, 4>& pinv,
                                 const std::array<cplx, 4>& x) {
    std::array<cplx, 4> px = {p[0] * x[0] + p[1] * x[2], p[0] * x[1] + p[1] * x[3],
                              p[2] * x[0] + p[3] * x[2], p[2] * x[1] + p[3] * x[3]};
    return {px[0] * pinv[0] + px[1] * pinv[2], px[0] * pinv[1] + px[1] * pinv[3],
            px[2] * pinv[0] + px[3] * pinv[2], px[2] * pinv[1] + px[3] * pinv[3]};
}
}  // namespace

Alg2 to_su11(const Alg2& x) {
    if (x.tag != AlgebraTag::sl2R) throw TagMismatch("to_su11: expected sl2R algebra element");
    Alg2 r;
    r.a = conj_entries(kM, kMinv, x.a);
    r.tag = AlgebraTag::su11;
    return r;
}

Mat2 to_su11(const Mat2& m) {
    if (m.tag != GroupTag::SL2R) throw TagMismatch("to_su11: expected SL2R group element");
    Mat2 r;
    r.a = conj_entries(kM, kMinv, m.a);
    r.tag = GroupTag::SU11;
    return r;
}

Alg2 to_sl2r(const Alg2& x) {
    if (x.tag != AlgebraTag::su11) throw TagMismatch("to_sl2r: expected su11 algebra element");
    Alg2 r;
    r.a = conj_entries(kMinv, kM, x.a);
    // Entries are real up to roundoff; keep the tiny imaginary dust, callers
    // validate against the 1e-12 invariant.
    r.tag = AlgebraTag::sl2R;
    return r;
}

Mat2 to_sl2r(const Mat2& m) {
    if (m.tag != GroupTag::SU11) throw TagMismatch("to_sl2r: expected SU11 group element");
    Mat2 r;
    r.a = conj_entries(kMinv, kM, m.a);
    r.tag = GroupTag::SL2R;
    return r;
}

EigenAngle eigen_angle(const Mat2& m_in) {
    Mat2 m = normalize_det(m_in);
    cplx trc = m.trace();
    double tr = trc.real();

    if (std::abs(std::abs(tr) - 2.0) <= kParabolicBand) return {AngleKind::parabolic, 0.0};
    if (std::abs(tr) > 2.0) return {AngleKind::hyperbolic, std::acosh(std::abs(tr) * 0.5)};

    double rho = std::acos(std::clamp(tr * 0.5, -1.0, 1.0));
    double sgn;
    if (m.tag == GroupTag::SU11) {
        return eigen_angle(to_sl2r(m));
    }
    // Sign of the rotation part: antisymmetric component (2,1) - (1,2).
    double anti = (m.a[2] - m.a[1]).real();
    sgn = anti >= 0.0 ? 1.0 : -1.0;
    return {AngleKind::elliptic, sgn * rho};
}

SchurResult schur_triangularize(const Mat2& m_in) {
    Mat2 m = normalize_det(m_in);
    double scale = std::max(op_norm(m), 1.0);

    if (std::abs(m.a[2]) <= 1e-14 * scale) {
        SchurResult r;
        r.U = Mat2::identity(GroupTag::SL2C);
        r.gamma = std::log(m.a[0]);
        r.c = m.a[1];
        return r;
    }

    cplx t = m.trace() * 0.5;
    AcoshPair p = acosh_pair(t);
    cplx mu = t + p.s;  // |mu| >= 1 by branch choice
    cplx gamma = p.phi;
    if (std::abs(std::abs(mu) - 1.0) < 1e-13 && mu.imag() < 0.0) {
        mu = std::conj(mu);
        gamma = std::log(mu);
    }

    // Eigenvector for mu from the larger of the two candidate rows.
    cplx v1, v2;
    cplx c1n = std::norm(m.a[1]) + std::norm(mu - m.a[0]);
    cplx c2n = std::norm(mu - m.a[3]) + std::norm(m.a[2]);
    if (c1n.real() >= c2n.real()) {
        v1 = m.a[1];
        v2 = mu - m.a[0];
    } else {
        v1 = mu - m.a[3];
        v2 = m.a[2];
    }
    double nv = std::sqrt(std::norm(v1) + std::norm(v2));
    if (nv < 1e-300) {
        v1 = 1.0;
        v2 = 0.0;
        nv = 1.0;
    }
    v1 /= nv;
    v2 /= nv;

    // Unitary with first column v (so U maps v to e1): rows (conj v) and
    // the orthogonal complement.
    Mat2 u(std::conj(v1), std::conj(v2), -v2, v1, GroupTag::SL2C);
    Mat2 t2 = u * m * Mat2(v1, -std::conj(v2), v2, std::conj(v1), GroupTag::SL2C);

    SchurResult r;
    r.U = u;
    r.gamma = gamma;
    r.c = t2.a[1];
    return r;
}

double dist(const Mat2& x, const Mat2& y) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += std::norm(x.a[i] - y.a[i]);
    return std::sqrt(s);
}

double dist(const Alg2& x, const Alg2& y) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += std::norm(x.a[i] - y.a[i]);
    return std::sqrt(s);
}

namespace {
double su11_defect_entries(const std::array<cplx, 4>& a) {
    double d = std::abs(a[3] - std::conj(a[0]));
    d = std::max(d, std::abs(a[2] - std::conj(a[1])));
    return d;
}
}  // namespace

double su11_pattern_defect(const Mat2& m) { return su11_defect_entries(m.a); }
double su11_pattern_defect(const Alg2& x) {
    // su(1,1): [[it, v],[conj v, -it]] with t real, i.e. a11 purely imaginary.
    double d = std::abs(x.a[0].real());
    d = std::max(d, std::abs(x.a[3] + x.a[0]));
    return std::max(d, std::abs(x.a[2] - std::conj(x.a[1])));
}

double reality_defect(const Mat2& m) {
    double d = 0.0;
    for (const auto& e : m.a) d = std::max(d, std::abs(e.imag()));
    return d;
}

double reality_defect(const Alg2& x) {
    double d = 0.0;
    for (const auto& e : x.a) d = std::max(d, std::abs(e.imag()));
    return d;
}

Mat2 rotation(double t) {
    return Mat2(std::cos(t), -std::sin(t), std::sin(t), std::cos(t), GroupTag::SL2R);
}

Mat2 normalize_det(const Mat2& m, double tol) {
    if (m.tag == GroupTag::GL2C) return m;
    cplx d = m.det();
    if (std::abs(d - cplx(1.0)) < 1e-15) return m;
    if (std::abs(d - cplx(1.0)) > tol)
        throw PreconditionFailed("normalize_det: determinant drifted away from 1");
    cplx s = cplx(1.0) / std::sqrt(d);
    Mat2 r = m * s;
    r.tag = m.tag;
    return r;
}

}  // namespace qpkam::mat2
