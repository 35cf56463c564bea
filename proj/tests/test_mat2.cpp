#include <cmath>

#include "doctest.h"
#include "qpkam/mat2.hpp"
#include "test_util.hpp"

using namespace qpkam;
using namespace qpkam::mat2;
using qpkam::testutil::Rng;

namespace {
const double kPi = 3.14159265358979323846;
}

TEST_CASE("exp_alg: identity and rotation generators") {
    Mat2 e = exp_alg(Alg2::zero());
    CHECK(dist(e, Mat2::identity()) < 1e-15);

    double t = kPi / 3.0;
    Alg2 gen(0, -t, t, 0, AlgebraTag::sl2R);
    CHECK(dist(exp_alg(gen), rotation(t)) < 1e-14);
}

TEST_CASE("exp_alg matches the truncated Taylor oracle") {
    Rng rng(101);
    for (int i = 0; i < 200; ++i) {
        Alg2 x = testutil::random_sl2r_alg(rng, 0.5);
        Mat2 a = exp_alg(x);
        Mat2 b = testutil::exp_taylor(x, 30);
        CHECK(dist(a, b) < 1e-12);
        CHECK(std::abs(a.det() - cplx(1.0)) < 1e-12);
    }
}

TEST_CASE("exp_alg(-X) inverts exp_alg(X)") {
    Rng rng(102);
    for (int i = 0; i < 100; ++i) {
        Alg2 x = testutil::random_sl2r_alg(rng, 1.0);
        Mat2 p = exp_alg(x) * exp_alg(-x);
        CHECK(dist(p, Mat2::identity()) < 1e-12);
    }
}

TEST_CASE("exp_alg rejects non-traceless input") {
    Alg2 bad(1.0, 0, 0, 0.5, AlgebraTag::sl2C);
    CHECK_THROWS_AS(exp_alg(bad), InvalidAlgebraElement);
}

TEST_CASE("log_group: pinned values") {
    CHECK(dist(log_group(Mat2::identity()), Alg2::zero()) < 1e-15);

    Alg2 l = log_group(rotation(0.3));
    CHECK(std::abs(l.a[0]) < 1e-14);
    CHECK(std::abs(l.a[1] - cplx(-0.3)) < 1e-14);
    CHECK(std::abs(l.a[2] - cplx(0.3)) < 1e-14);

    Mat2 d(2.0, 0, 0, 0.5, GroupTag::SL2R);
    Alg2 ld = log_group(d);
    CHECK(std::abs(ld.a[0] - cplx(std::log(2.0))) < 1e-14);
    CHECK(std::abs(ld.a[3] + cplx(std::log(2.0))) < 1e-14);
    CHECK(dist(exp_alg(ld), d) < 1e-12);
}

TEST_CASE("log_group round-trips through exp_alg") {
    Rng rng(103);
    for (int i = 0; i < 200; ++i) {
        Mat2 a = testutil::random_elliptic(rng, 0.05, 2.8);
        Alg2 l = log_group(a);
        CHECK(dist(exp_alg(l), a) < 1e-10 * std::max(1.0, op_norm(a)));
    }
}

TEST_CASE("log_group branch point") {
    Mat2 minus_id(-1, 0, 0, -1, GroupTag::SL2R);
    CHECK_THROWS_AS(log_group(minus_id), LogBranchUndefined);
    // trace -2, not -I: no traceless logarithm exists either
    Mat2 neg_parab(-1, 1, 0, -1, GroupTag::SL2R);
    CHECK_THROWS_AS(log_group(neg_parab), LogBranchUndefined);
    // trace +2 parabolic has the nilpotent log
    Mat2 parab(1, 5, 0, 1, GroupTag::SL2R);
    Alg2 l = log_group(parab);
    CHECK(std::abs(l.a[1] - cplx(5.0)) < 1e-12);
}

TEST_CASE("log_product_bch: commuting and trivial cases") {
    Alg2 x(0.2, 0, 0, -0.2, AlgebraTag::sl2R);
    Alg2 y(0.1, 0, 0, -0.1, AlgebraTag::sl2R);
    CHECK(dist(log_product_bch(x, y, 4), x + y) < 1e-15);
}

TEST_CASE("log_product_bch order 4 matches the exact product log") {
    Rng rng(104);
    auto rand_capped = [&rng](double cap) {
        Alg2 x = testutil::random_sl2r_alg(rng, 1.0);
        double n = op_norm(x);
        return x * cplx(rng.uniform(0.2, 1.0) * cap / n);
    };
    for (int i = 0; i < 100; ++i) {
        Alg2 x = rand_capped(0.025);  // ||X|| + ||Y|| <= 0.05
        Alg2 y = rand_capped(0.025);
        Alg2 exact = log_group(exp_alg(x) * exp_alg(y));
        Alg2 approx = log_product_bch(x, y, 4);
        CHECK(dist(exact, approx) < 1e-9);
    }
    Alg2 x = rand_capped(0.05);
    CHECK(dist(log_product_bch(x, Alg2::zero(), 4), x) < 1e-15);
}

TEST_CASE("log_product_bch rejects out-of-domain norms") {
    Alg2 x(0.5, 0, 0, -0.5, AlgebraTag::sl2R);
    Alg2 y(0.3, 0.4, 0.4, -0.3, AlgebraTag::sl2R);
    CHECK_THROWS_AS(log_product_bch(x, y, 4), BchDivergence);
}

TEST_CASE("to_su11: displayed conjugation identity") {
    // [[x, y+z],[y-z, -x]] -> [[iz, x-iy],[x+iy, -iz]] at (x,y,z) = (1,2,3)
    Alg2 x(1, 2 + 3, 2 - 3, -1, AlgebraTag::sl2R);
    Alg2 u = to_su11(x);
    CHECK(std::abs(u.a[0] - cplx(0, 3)) < 1e-14);
    CHECK(std::abs(u.a[1] - cplx(1, -2)) < 1e-14);
    CHECK(std::abs(u.a[2] - cplx(1, 2)) < 1e-14);
    CHECK(std::abs(u.a[3] - cplx(0, -3)) < 1e-14);
    CHECK(su11_pattern_defect(u) < 1e-14);

    CHECK(dist(to_su11(Alg2::zero(AlgebraTag::sl2R)), Alg2::zero()) < 1e-15);
}

TEST_CASE("to_su11 round-trip and exp compatibility") {
    Rng rng(105);
    for (int i = 0; i < 100; ++i) {
        Alg2 x = testutil::random_sl2r_alg(rng, 1.0);
        CHECK(dist(to_sl2r(to_su11(x)), x) < 1e-14);
        Mat2 lhs = to_su11(exp_alg(x));
        Mat2 rhs = exp_alg(to_su11(x));
        CHECK(dist(lhs, rhs) < 1e-12);
    }
    Mat2 bad = Mat2::identity(GroupTag::SL2C);
    CHECK_THROWS_AS(to_su11(bad), TagMismatch);
}

TEST_CASE("eigen_angle: pinned values and sign convention") {
    EigenAngle e = eigen_angle(Mat2::identity());
    CHECK(e.kind == AngleKind::parabolic);
    CHECK(e.value == 0.0);

    e = eigen_angle(rotation(0.7));
    CHECK(e.kind == AngleKind::elliptic);
    CHECK(e.value == doctest::Approx(0.7).epsilon(1e-12));

    e = eigen_angle(rotation(-0.7));
    CHECK(e.value == doctest::Approx(-0.7).epsilon(1e-12));

    e = eigen_angle(Mat2(3.0, 0, 0, 1.0 / 3.0, GroupTag::SL2R));
    CHECK(e.kind == AngleKind::hyperbolic);
    CHECK(e.value == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("eigen_angle is conjugation invariant") {
    Rng rng(106);
    for (int i = 0; i < 100; ++i) {
        Mat2 a = testutil::random_elliptic(rng);
        Mat2 p = testutil::random_sl2r(rng, 5.0);
        EigenAngle e1 = eigen_angle(a);
        EigenAngle e2 = eigen_angle(p * a * p.inverse());
        CHECK(e1.kind == e2.kind);
        CHECK(std::abs(std::abs(e1.value) - std::abs(e2.value)) < 1e-9);
    }
}

TEST_CASE("schur_triangularize: pinned values") {
    auto r = schur_triangularize(Mat2::identity());
    CHECK(dist(r.U, Mat2::identity()) < 1e-14);
    CHECK(std::abs(r.gamma) < 1e-14);
    CHECK(std::abs(r.c) < 1e-14);

    auto r2 = schur_triangularize(Mat2(1, 5, 0, 1, GroupTag::SL2R));
    CHECK(std::abs(r2.gamma) < 1e-14);
    CHECK(std::abs(r2.c - cplx(5.0)) < 1e-14);
}

TEST_CASE("schur_triangularize reconstructs and bounds c") {
    Rng rng(107);
    for (int i = 0; i < 200; ++i) {
        Mat2 a = testutil::random_elliptic(rng);
        auto r = schur_triangularize(a);
        // unitarity
        Mat2 uut = r.U * Mat2(std::conj(r.U.a[0]), std::conj(r.U.a[2]), std::conj(r.U.a[1]),
                              std::conj(r.U.a[3]), GroupTag::SL2C);
        CHECK(dist(uut, Mat2::identity()) < 1e-12);
        // reconstruction A = U^{-1} T U
        Mat2 t(std::exp(r.gamma), r.c, 0, std::exp(-r.gamma), GroupTag::SL2C);
        Mat2 back = r.U.inverse() * t * r.U;
        CHECK(dist(back, a) < 1e-12 * std::max(1.0, op_norm(a)));
    }
}

TEST_CASE("schur_triangularize c-bound on random SL(2,R)") {
    Rng rng(108);
    for (int i = 0; i < 10000; ++i) {
        Mat2 a = testutil::random_sl2r(rng, 10.0);
        auto r = schur_triangularize(a);
        CHECK(std::abs(r.c) <= 2.0 * op_norm(a) + 1e-12);
    }
}

TEST_CASE("op_norm agrees with the singular-value formula") {
    Mat2 d(3.0, 0, 0, 1.0 / 3.0, GroupTag::SL2R);
    CHECK(op_norm(d) == doctest::Approx(3.0));
    CHECK(op_norm(rotation(1.1)) == doctest::Approx(1.0));
}
