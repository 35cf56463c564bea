#include <cmath>

#include "doctest.h"
#include "qpkam/torusmap.hpp"
#include "test_util.hpp"

using namespace qpkam;
using namespace qpkam::torusmap;
using mat2::Alg2;
using mat2::AlgebraTag;
using mat2::cplx;
using mat2::Mat2;
using qpkam::testutil::Rng;

namespace {

const double kTwoPi = 6.283185307179586476925286766559;

TorusPoly random_real_poly(Rng& rng, int max_mode, double scale) {
    TorusPoly f = TorusPoly::zero_alg(1, AlgebraTag::sl2R);
    for (int n = 0; n <= max_mode; ++n) {
        Alg2 x = testutil::random_sl2r_alg(rng, scale);
        if (n == 0) {
            f.add_coeff({0}, x.a);
        } else {
            cplx ph = std::polar(1.0, rng.uniform(0, kTwoPi));
            std::array<cplx, 4> v, vc;
            for (int i = 0; i < 4; ++i) {
                v[i] = 0.5 * x.a[i] * ph;
                vc[i] = std::conj(v[i]);
            }
            f.add_coeff({n}, v);
            f.add_coeff({-n}, vc);
        }
    }
    return f;
}

}  // namespace

TEST_CASE("eval: constants and single modes") {
    Alg2 c(0.5, 1.0, 1.0, -0.5, AlgebraTag::sl2R);
    TorusPoly f = TorusPoly::constant_alg(c);
    for (double th : {0.0, 1.0, 2.5}) {
        CHECK(mat2::dist(eval_alg(f, {th}), c) < 1e-15);
    }
    TorusPoly g = TorusPoly::zero_alg(1, AlgebraTag::sl2C);
    g.set_coeff({3}, c.a);
    CHECK(mat2::dist(eval_alg(g, {0.0}), Alg2(c.a[0], c.a[1], c.a[2], c.a[3], AlgebraTag::sl2C)) <
          1e-15);
}

TEST_CASE("synthesize matches direct DFT evaluation") {
    Rng rng(201);
    TorusPoly f = random_real_poly(rng, 7, 1.0);
    int G = 256;
    auto vals = synthesize(f, G);
    for (int k = 0; k < G; k += 17) {
        std::vector<double> theta{kTwoPi * k / G};
        auto direct = eval_entries(f, theta);
        for (int i = 0; i < 4; ++i) CHECK(std::abs(direct[i] - vals[k][i]) < 1e-12);
    }
}

TEST_CASE("analyze inverts synthesize") {
    Rng rng(202);
    TorusPoly f = random_real_poly(rng, 9, 1.0);
    auto vals = synthesize(f, 128);
    TorusPoly g = analyze(vals, f, 128, 1e-14);
    CHECK(reality_defect(g) < 1e-12);
    for (const auto& [n, v] : f.coeffs) {
        const auto* w = g.coeff(n);
        REQUIRE(w != nullptr);
        for (int i = 0; i < 4; ++i) CHECK(std::abs(v[i] - (*w)[i]) < 1e-13);
    }
}

TEST_CASE("truncate splits by frequency and is a projection pair") {
    TorusPoly f = TorusPoly::zero_alg(1, AlgebraTag::sl2C);
    Alg2 c(1, 0, 0, -1, AlgebraTag::sl2C);
    for (int n : {1, 3, 5}) f.set_coeff({n}, c.a);

    auto p = truncate(f, 4.0);
    CHECK(p.low.mode_count() == 2);
    CHECK(p.tail.mode_count() == 1);
    CHECK(p.low.coeff({1}) != nullptr);
    CHECK(p.low.coeff({3}) != nullptr);
    CHECK(p.tail.coeff({5}) != nullptr);

    auto p2 = truncate(f, 100.0);
    CHECK(p2.low.mode_count() == f.mode_count());
    CHECK(p2.tail.mode_count() == 0);

    f.set_coeff({0}, c.a);
    auto p3 = truncate(f, 1e-9);
    CHECK(p3.low.mode_count() == 1);  // the mean survives |0| < N
    CHECK(p3.low.coeff({0}) != nullptr);

    auto q = truncate(p.low, 4.0);
    CHECK(q.low.mode_count() == p.low.mode_count());
    auto q2 = truncate(p.tail, 4.0);
    CHECK(q2.tail.mode_count() == p.tail.mode_count());
}

TEST_CASE("strip_norm: constants, single modes, and kind ordering") {
    Alg2 c(0.3, -0.7, 0.7, -0.3, AlgebraTag::sl2R);
    TorusPoly f = TorusPoly::constant_alg(c);
    for (double r : {0.0, 0.2, 1.0}) {
        CHECK(strip_norm(f, r, NormKind::coefficient_upper_bound).value ==
              doctest::Approx(mat2::op_norm(c)));
        CHECK(strip_norm(f, r, NormKind::exact_grid_sup, 64).value ==
              doctest::Approx(mat2::op_norm(c)).epsilon(1e-9));
    }

    TorusPoly g = TorusPoly::zero_alg(1, AlgebraTag::sl2C);
    g.set_coeff({4}, c.a);
    CHECK(strip_norm_ub(g, 0.5) == doctest::Approx(mat2::op_norm(c) * std::exp(0.5 * 4)));

    Rng rng(203);
    TorusPoly h = random_real_poly(rng, 6, 0.8);
    for (double r : {0.05, 0.1, 0.3}) {
        double ub = strip_norm_ub(h, r);
        double gs = strip_norm(h, r, NormKind::exact_grid_sup, 512).value;
        CHECK(ub >= gs - 1e-12);
    }
    // monotone in r
    CHECK(strip_norm_ub(h, 0.3) >= strip_norm_ub(h, 0.05));
}

TEST_CASE("ck_norm: constants, single modes, finite differences") {
    Alg2 c(0.3, -0.7, 0.7, -0.3, AlgebraTag::sl2R);
    TorusPoly f = TorusPoly::constant_alg(c);
    for (int k : {0, 1, 3}) CHECK(ck_norm(f, k, 64) == doctest::Approx(mat2::op_norm(c)));

    TorusPoly g = TorusPoly::zero_alg(1, AlgebraTag::sl2C);
    g.set_coeff({1}, c.a);
    CHECK(ck_norm(g, 1, 256) == doctest::Approx(mat2::op_norm(c)).epsilon(1e-9));

    // second derivative against central finite differences on a 4096 grid
    Rng rng(204);
    TorusPoly h = random_real_poly(rng, 5, 0.5);
    const int G = 4096;
    auto vals = synthesize(h, G);
    double hstep = kTwoPi / G;
    double fd_sup = 0.0, fd1_sup = 0.0, sup0 = 0.0;
    for (int i = 0; i < G; ++i) {
        int ip = (i + 1) % G, im = (i + G - 1) % G;
        int ip2 = (i + 2) % G, im2 = (i + G - 2) % G;
        std::array<cplx, 4> d2, d1;
        for (int t = 0; t < 4; ++t) {
            d2[t] = (-vals[ip2][t] + 16.0 * vals[ip][t] - 30.0 * vals[i][t] +
                     16.0 * vals[im][t] - vals[im2][t]) /
                    (12.0 * hstep * hstep);
            d1[t] = (-vals[ip2][t] + 8.0 * vals[ip][t] - 8.0 * vals[im][t] + vals[im2][t]) /
                    (12.0 * hstep);
        }
        fd_sup = std::max(fd_sup, mat2::op_norm(Mat2(d2[0], d2[1], d2[2], d2[3])));
        fd1_sup = std::max(fd1_sup, mat2::op_norm(Mat2(d1[0], d1[1], d1[2], d1[3])));
        sup0 = std::max(sup0, mat2::op_norm(Mat2(vals[i][0], vals[i][1], vals[i][2], vals[i][3])));
    }
    double fd_norm = std::max({fd_sup, fd1_sup, sup0});
    CHECK(ck_norm(h, 2, G) == doctest::Approx(fd_norm).epsilon(1e-6));
    CHECK(ck_norm(h, 2, G) >= ck_norm(h, 1, G) - 1e-12);
}

TEST_CASE("smooth_approx: low modes pass, zero stays zero") {
    Rng rng(205);
    TorusPoly f = random_real_poly(rng, 5, 1.0);  // support <= j/4 for j = 20
    TorusPoly fj = smooth_approx(f, 20);
    CHECK(strip_norm_ub(sub(fj, f), 0.0) < 1e-10);

    TorusPoly z = TorusPoly::zero_alg(1, AlgebraTag::sl2R);
    CHECK(smooth_approx(z, 3).mode_count() == 0);
}

TEST_CASE("smooth_approx: single far mode is crushed on the 1/j strip") {
    Alg2 c(0, 1, 1, 0, AlgebraTag::sl2R);
    TorusPoly f = TorusPoly::zero_alg(1, AlgebraTag::sl2R);
    std::array<cplx, 4> half;
    for (int i = 0; i < 4; ++i) half[i] = 0.5 * c.a[i];
    f.set_coeff({20}, half);
    f.set_coeff({-20}, half);
    TorusPoly f2 = smooth_approx(f, 2);
    for (int k : {2, 5}) {
        double fk = ck_norm(f, k, 512);
        double lhs = strip_norm_ub(f2, 0.5);
        // kernel weight exp(-9*((20-2)/2)^2) crushes the strip factor e^{10}
        CHECK(lhs <= 1e-6 * fk);
    }
}

TEST_CASE("smooth_approx: measured constants behave across j in [2,64]") {
    Rng rng(206);
    TorusPoly f = random_real_poly(rng, 24, 1.0);
    for (int k : {2, 5}) {
        auto c = measure_approx_constants(f, k, 2, 64);
        CHECK(c.c_strip > 0.0);
        CHECK(c.c_strip < 50.0);
        CHECK(c.c_telescope < 2e4);
        CHECK(c.ck_residual < 1e-12 * std::max(1.0, ck_norm(f, k)));
    }
}

TEST_CASE("cauchy_ck_bound: formula and domination of ck_norm") {
    CHECK(cauchy_ck_bound(0.37, 0.5, 0) == doctest::Approx(0.37));
    CHECK(cauchy_ck_bound(1.0, 0.25, 1) == doctest::Approx(4.0));
    CHECK_THROWS_AS(cauchy_ck_bound(1.0, 0.0, 1), DegenerateStrip);

    Rng rng(207);
    for (int i = 0; i < 100; ++i) {
        TorusPoly f = random_real_poly(rng, 6, 0.5);
        double r = rng.uniform(0.05, 0.4);
        int k0 = static_cast<int>(rng.uniform(0, 3.999));
        double bound = cauchy_ck_bound(strip_norm_ub(f, r), r, k0);
        CHECK(ck_norm(f, k0, 512) <= bound * (1.0 + 1e-12) + 1e-12);
    }
}

TEST_CASE("tail decay bound matches the coefficient chain") {
    // coefficients exactly eps * e^{-r|n|}: the truncation tail at N obeys
    // |R_N f|_{r'} <= eps e^{-N(r-r')} * (number of tail modes)
    double eps = 1e-3, r = 0.4, rp = 0.15;
    int K = 40, N = 25;
    TorusPoly f = TorusPoly::zero_alg(1, AlgebraTag::sl2C);
    for (int n = 1; n <= K; ++n) {
        double w = eps * std::exp(-r * n);
        f.set_coeff({n}, {cplx(w), 0, 0, cplx(-w)});
    }
    auto pr = truncate(f, double(N));
    double lhs = strip_norm_ub(pr.tail, rp);
    double count = double(K - N + 1);
    CHECK(lhs <= eps * std::exp(-N * (r - rp)) * count);
    CHECK(lhs > 0.0);
}

TEST_CASE("pointwise exp/log/mul round-trips") {
    Rng rng(208);
    TorusPoly f = random_real_poly(rng, 4, 0.05);
    TorusPoly g = exp_pointwise(f);
    CHECK(!g.is_algebra());
    TorusPoly l = log_pointwise(g);
    CHECK(strip_norm_ub(sub(l, f), 0.0) < 1e-12);

    TorusPoly ginv = inverse_pointwise(g);
    TorusPoly id = mul_pointwise(g, ginv);
    Mat2 at_pt = eval_grp(id, {0.37});
    CHECK(mat2::dist(at_pt, Mat2::identity()) < 1e-12);
}

TEST_CASE("shift evaluates as translation") {
    Rng rng(209);
    TorusPoly f = random_real_poly(rng, 5, 1.0);
    std::vector<double> alpha{0.6180339887498949};
    TorusPoly g = shift(f, alpha);
    for (double th : {0.0, 1.1, 4.4}) {
        Alg2 a = eval_alg(g, {th});
        Alg2 b = eval_alg(f, {th + kTwoPi * alpha[0]});
        CHECK(mat2::dist(a, b) < 1e-12);
    }
}

TEST_CASE("period-2 lift keeps values and doubles stored modes") {
    Rng rng(210);
    TorusPoly f = random_real_poly(rng, 3, 1.0);
    TorusPoly g = lift_period2(f);
    CHECK(g.period == 2);
    for (double th : {0.3, 2.9}) {
        CHECK(mat2::dist(eval_alg(f, {th}), eval_alg(g, {th})) < 1e-13);
    }
    CHECK(g.support_radius() == doctest::Approx(f.support_radius()));
}

TEST_CASE("serialization round-trips bit-exactly") {
    Rng rng(211);
    TorusPoly f = random_real_poly(rng, 6, 1.2345678901234567);
    std::string text = to_text(f);
    TorusPoly g = from_text(text);
    CHECK(g.dim == f.dim);
    CHECK(g.period == f.period);
    CHECK(g.mode_count() == f.mode_count());
    for (const auto& [n, v] : f.coeffs) {
        const auto* w = g.coeff(n);
        REQUIRE(w != nullptr);
        for (int i = 0; i < 4; ++i) {
            CHECK(v[i].real() == (*w)[i].real());
            CHECK(v[i].imag() == (*w)[i].imag());
        }
    }
    CHECK(to_text(g) == text);
}

TEST_CASE("reality defect flags broken symmetry") {
    Rng rng(212);
    TorusPoly f = random_real_poly(rng, 4, 1.0);
    CHECK(reality_defect(f) < 1e-14);
    f.add_coeff({2}, {cplx(0.5), 0, 0, cplx(-0.5)});
    CHECK(reality_defect(f) > 0.1);
}
