#include <cmath>

#include "doctest.h"
#include "qpkam/dynamics.hpp"
#include "qpkam/kam.hpp"
#include "test_util.hpp"

using namespace qpkam;
using namespace qpkam::kam;
using mat2::Alg2;
using mat2::AlgebraTag;
using mat2::cplx;
using mat2::GroupTag;
using mat2::Mat2;
using torusmap::FreqVec;
using torusmap::TorusPoly;
using qpkam::testutil::Rng;

namespace {

const double kPi = 3.14159265358979323846;
const double kTwoPi = 6.283185307179586476925286766559;

arith::DiophantineFrequency golden_dc(long long nmax = 2000000) {
    auto res = arith::verify_dc({arith::golden_mean()}, 0.2, 1.5, nmax);
    REQUIRE(res.passed);
    return res.frequency.value();
}

TorusPoly random_pert(Rng& rng, int max_mode, double target_strip, double r) {
    TorusPoly f = TorusPoly::zero_alg(1, AlgebraTag::sl2R);
    for (int n = 1; n <= max_mode; ++n) {
        Alg2 x = testutil::random_sl2r_alg(rng, 1.0);
        cplx ph = std::polar(0.5, rng.uniform(0, kTwoPi));
        std::array<cplx, 4> v, vc;
        for (int i = 0; i < 4; ++i) {
            v[i] = x.a[i] * ph;
            vc[i] = std::conj(v[i]);
        }
        f.add_coeff({n}, v);
        f.add_coeff({-n}, vc);
    }
    double s = torusmap::strip_norm_ub(f, r);
    return torusmap::scale(f, cplx(target_strip / s));
}

// Direct grid check of e^{Y(.+a)} A e^{g} e^{-Y} = A e^{g_re}.
double lemma_defect(const Mat2& a, const TorusPoly& g, const TorusPoly& y, const TorusPoly& g_re,
                    const std::vector<double>& alpha) {
    int grid = 512;
    auto yv = torusmap::synthesize(y, grid);
    auto ysv = torusmap::synthesize(torusmap::shift(y, alpha), grid);
    auto gv = torusmap::synthesize(g, grid);
    auto rv = torusmap::synthesize(g_re, grid);
    double worst = 0;
    for (int i = 0; i < grid; ++i) {
        auto wrap = [&](const std::array<cplx, 4>& e) {
            return Alg2(e[0], e[1], e[2], e[3], AlgebraTag::su11);
        };
        Mat2 lhs = mat2::exp_alg(wrap(ysv[i])) * a * mat2::exp_alg(wrap(gv[i])) *
                   mat2::exp_alg(wrap(yv[i]) * cplx(-1.0));
        Mat2 rhs = a * mat2::exp_alg(wrap(rv[i]));
        worst = std::max(worst, mat2::dist(lhs, rhs));
    }
    return worst;
}

}  // namespace

TEST_CASE("nonresonant_reduce: zero perturbation is a fixed point") {
    auto dc = golden_dc(10000);
    Mat2 a = mat2::to_su11(mat2::rotation(0.7));
    TorusPoly g = torusmap::to_su11(TorusPoly::zero_alg(1, AlgebraTag::sl2R));
    NreMask mask;
    mask.kind = NreMask::Kind::sigma_floor;
    KamParams params = KamParams::desk_defaults();
    auto red = nonresonant_reduce(a, g, 0.2, 0.01, 1e-8, dc, mask, params);
    CHECK(red.Y.mode_count() == 0);
    CHECK(torusmap::strip_norm_ub(red.g_re, 0.2) < 1e-14);
}

TEST_CASE("nonresonant_reduce: single far-from-resonance mode") {
    auto dc = golden_dc(10000);
    Mat2 a = mat2::to_su11(mat2::rotation(0.7));
    double r = 0.2, eps = 1e-8;

    TorusPoly f = TorusPoly::zero_alg(1, AlgebraTag::sl2R);
    Alg2 x(0.3, 0.5, 0.5, -0.3, AlgebraTag::sl2R);
    std::array<cplx, 4> v, vc;
    for (int i = 0; i < 4; ++i) {
        v[i] = 0.5 * x.a[i];
        vc[i] = std::conj(v[i]);
    }
    f.add_coeff({3}, v);
    f.add_coeff({-3}, vc);
    f = torusmap::scale(f, cplx(eps / torusmap::strip_norm_ub(f, r)));
    TorusPoly g = torusmap::to_su11(f);

    NreMask mask;
    mask.kind = NreMask::Kind::band;
    mask.band_n = 10.0;
    KamParams params = KamParams::desk_defaults();
    double eta = 13.0001 * std::sqrt(eps);
    auto red = nonresonant_reduce(a, g, r, eta, eps, dc, mask, params);

    CHECK(torusmap::strip_norm_ub(red.g_re, r) <= 2.0 * eps);
    CHECK(torusmap::strip_norm_ub(red.Y, r) <= std::sqrt(eps));
    CHECK(red.diag.residual <= 1e-12);       // residual band empty
    CHECK(red.diag.iterations <= 3);          // first correction already quadratic
    CHECK(lemma_defect(a, g, red.Y, red.g_re, dc.alpha) < 1e-12);
    CHECK(torusmap::reality_defect(red.Y) < 1e-12);
}

TEST_CASE("nonresonant_reduce: resonant mode is untouched") {
    auto dc = golden_dc(10000);
    double alpha = dc.alpha[0];
    long double frac3 = 3.0L * alpha - std::floor(3.0L * alpha);
    double rho = kPi * static_cast<double>(frac3);
    Mat2 a(std::polar(1.0, rho), 0.0, 0.0, std::polar(1.0, -rho), GroupTag::SU11);

    // su(1,1) map with only the off-diagonal resonant mode n* = 3
    TorusPoly g = TorusPoly::zero_alg(1, AlgebraTag::su11);
    cplx vv(1e-8, 3e-9);
    g.add_coeff({3}, {0, vv, 0, 0});
    g.add_coeff({-3}, {0, 0, std::conj(vv), 0});

    NreMask mask;
    mask.kind = NreMask::Kind::resonant_pair;
    mask.angle_floor = 2e-3;
    KamParams params = KamParams::desk_defaults();
    auto red = nonresonant_reduce(a, g, 0.2, 2e-3, 2e-8, dc, mask, params);

    CHECK(red.Y.mode_count() == 0);  // nothing removable
    const auto* kept = red.g_re.coeff({3});
    REQUIRE(kept != nullptr);
    CHECK(std::abs((*kept)[1] - vv) < 1e-20);
}

TEST_CASE("nonresonant_reduce rejects bad hypotheses") {
    auto dc = golden_dc(1000);
    Mat2 a = mat2::to_su11(mat2::rotation(0.7));
    TorusPoly g = torusmap::to_su11(TorusPoly::zero_alg(1, AlgebraTag::sl2R));
    NreMask mask;
    KamParams params = KamParams::desk_defaults();
    CHECK_THROWS_AS(nonresonant_reduce(a, g, 0.2, 1e-9, 1e-8, dc, mask, params),
                    PreconditionFailed);  // eta below 13 ||A||^2 sqrt(eps)
    CHECK_THROWS_AS(nonresonant_reduce(a, g, 0.2, 0.5, 0.5, dc, mask, params),
                    PreconditionFailed);  // eps above (4||A||)^{-4}
}

TEST_CASE("kam_step: zero perturbation is trivial") {
    auto dc = golden_dc(1000);
    KamParams params = KamParams::desk_defaults();
    Mat2 a = mat2::rotation(0.9);
    TorusPoly f = TorusPoly::zero_alg(1, AlgebraTag::sl2R);
    auto step = kam_step(a, f, 0.1, 0.05, params, dc);
    CHECK(step.branch == Branch::nonresonant);
    CHECK(mat2::dist(step.A_plus, a) < 1e-15);
    CHECK(step.f_plus.mode_count() == 0);
    CHECK(torusmap::sup_norm_grid(torusmap::sub(step.B, TorusPoly::constant_grp(
                                                            Mat2::identity(GroupTag::SL2R), 1)),
                                  64) < 1e-15);
}

TEST_CASE("kam_step non-resonant branch certificates at desk scale") {
    auto dc = golden_dc();
    Rng rng(601);
    KamParams params = KamParams::desk_defaults();
    double r = 0.6, rp = 0.3;

    // rotation angle screened for a healthy resonance margin over the band
    auto margin_at = [&](double rho, int nmax) {
        double worst = 1e9;
        for (int n = -nmax; n <= nmax; ++n) {
            if (n == 0) continue;
            worst = std::min(worst, arith::angle_dist(2.0L * rho -
                                                      kTwoPi * 1.0L * n * dc.alpha[0]));
        }
        return worst;
    };
    // only the content-bearing modes (input support plus its spillover) need
    // a margin; the three-gap structure of the golden angles caps what is
    // achievable over wider bands
    double rho0 = 0.0, best = 0.0;
    for (double cand = 0.3; cand < 1.5; cand += 0.005) {
        double m = margin_at(cand, 24);
        if (m > best) {
            best = m;
            rho0 = cand;
        }
    }
    REQUIRE(best > 0.05);

    for (double eps : {1e-6, 2e-6, 3e-6}) {
        Mat2 a = mat2::rotation(rho0);
        TorusPoly f = random_pert(rng, 6, eps, r);
        auto step = kam_step(a, f, r, rp, params, dc);
        CHECK(step.branch == Branch::nonresonant);
        double sigma = params.sigma;
        CHECK(step.certs.a_change <= 2.0 * mat2::op_norm(a) * eps * 1.000001);
        CHECK(step.certs.f_plus_strip <= 4.0 * std::pow(eps, 3.0 - 2.0 * sigma));
        CHECK(step.certs.b_strip_rp <= std::sqrt(eps) * 1.000001);
        CHECK(step.certs.conj_defect <=
              1e-8 * (1.0 + step.certs.b_sup * step.certs.b_sup));
        CHECK(step.certs.paper_bounds_ok);
    }
}

TEST_CASE("kam_step resonant branch on an engineered resonance") {
    auto dc = golden_dc();
    double alpha = dc.alpha[0];
    KamParams params = KamParams::desk_defaults();
    double r = 0.6, rp = 0.3;
    double eps = 1e-6;

    // A = R(rho) with 2 rho = 2 pi <n*, alpha> mod 2 pi at n* = 3
    long double frac3 = 3.0L * alpha - std::floor(3.0L * alpha);
    double rho = kPi * static_cast<double>(frac3);
    Mat2 a = mat2::rotation(rho);

    Rng rng(602);
    TorusPoly f = random_pert(rng, 4, eps, r);
    auto step = kam_step(a, f, r, rp, params, dc);

    CHECK(step.branch == Branch::resonant);
    REQUIRE(step.resonance.has_value());
    CHECK(std::abs((*step.resonance->site)[0]) == 3);
    double sigma = params.sigma;
    CHECK(step.certs.a_dd_norm <= 2.0 * std::pow(eps, sigma));
    CHECK(step.certs.b_sup <= std::pow(eps, -sigma / 10.0));
    CHECK(step.B.period == 2);
    CHECK(step.certs.conj_defect <= 1e-8 * (1.0 + step.certs.b_sup * step.certs.b_sup));
    // A_+ is parabolic-adjacent: within 2 eps^sigma of sign * identity
    Mat2 signed_a = step.A_plus * cplx(static_cast<double>(step.certs.sign));
    CHECK(mat2::op_norm(Mat2(signed_a - Mat2::identity())) <= 2.0 * std::pow(eps, sigma));
    // f_+ collapses to the far tail
    CHECK(step.certs.f_plus_strip <= 0.5 * std::pow(eps, 2.5));
}

TEST_CASE("kam_loop: zero perturbation gives an identity certificate") {
    auto dc = golden_dc(10000);
    KamParams params = KamParams::desk_defaults();
    auto sched = ScaleSchedule::make(params, 3);
    Mat2 a = mat2::rotation(0.9);
    TorusPoly f = TorusPoly::zero_alg(1, AlgebraTag::sl2R);
    auto cert = kam_loop(a, f, sched, params, dc, 3);
    CHECK(cert.final_case == FinalCase::almost_reduced);
    CHECK(cert.records.size() == 3);
    for (const auto& rec : cert.records) {
        CHECK(rec.f_in_strip == 0.0);
        CHECK(rec.b_sup == doctest::Approx(1.0));
        CHECK(rec.sharp_product < 1e-12);
    }
}

TEST_CASE("kam_loop: three desk scales contract and satisfy the sharp bound") {
    auto dc = golden_dc();
    KamParams params = KamParams::desk_defaults();
    auto sched = ScaleSchedule::make(params, 3);
    REQUIRE(sched.scales() == 3);

    Rng rng(603);
    Mat2 a = mat2::rotation(1.1);
    TorusPoly f = random_pert(rng, 8, 0.5 * sched.eps[0], sched.radius[0]);
    auto cert = kam_loop(a, f, sched, params, dc, 3);

    CHECK(cert.final_case == FinalCase::almost_reduced);
    REQUIRE(cert.records.size() == 3);
    CHECK(cert.sharp_bound_ok());
    // perturbation strictly decreasing along scales
    CHECK(cert.records[1].f_in_strip < cert.records[0].f_in_strip);
    CHECK(cert.records[2].f_in_strip < cert.records[1].f_in_strip);
    for (const auto& rec : cert.records) {
        CHECK(rec.conj_defect <= 1e-8 * (1.0 + rec.b_sup * rec.b_sup));
        CHECK(rec.a_norm <= 2.0 * cert.A0_norm + 1e-9);
    }

    // the composed conjugacy satisfies the global identity
    TorusPoly bl = torusmap::lift_period2(cert.B_total);
    TorusPoly fl = torusmap::lift_period2(f);
    int grid = torusmap::auto_grid(bl, &fl, 2048);
    auto bv = torusmap::synthesize(torusmap::shift(bl, dc.alpha), grid);
    auto b0 = torusmap::synthesize(bl, grid);
    auto fv = torusmap::synthesize(fl, grid);
    auto fpv = torusmap::synthesize(torusmap::lift_period2(cert.steps.back().f_plus), grid);
    double worst = 0;
    for (int i = 0; i < grid; ++i) {
        Mat2 bs(bv[i][0], bv[i][1], bv[i][2], bv[i][3], GroupTag::SL2R);
        Mat2 bb(b0[i][0], b0[i][1], b0[i][2], b0[i][3], GroupTag::SL2R);
        Mat2 lhs = bs * (a * mat2::exp_alg(Alg2(fv[i][0], fv[i][1], fv[i][2], fv[i][3],
                                                AlgebraTag::sl2C))) * bb.inverse();
        Mat2 rhs = cert.A_final * mat2::exp_alg(Alg2(fpv[i][0], fpv[i][1], fpv[i][2], fpv[i][3],
                                                     AlgebraTag::sl2C));
        worst = std::max(worst, mat2::dist(lhs, rhs));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("kam_loop: engineered near-resonant start takes a resonant step") {
    auto dc = golden_dc();
    KamParams params = KamParams::desk_defaults();
    auto sched = ScaleSchedule::make(params, 2);
    double alpha = dc.alpha[0];
    long double frac = 2.0L * alpha - std::floor(2.0L * alpha);
    Mat2 a = mat2::rotation(kPi * static_cast<double>(frac) + 1e-9);

    Rng rng(604);
    TorusPoly f = random_pert(rng, 4, 0.3 * sched.eps[0], sched.radius[0]);
    auto cert = kam_loop(a, f, sched, params, dc, 2);
    REQUIRE(!cert.records.empty());
    CHECK(cert.records[0].branch == Branch::resonant);
    double eps0 = cert.records[0].f_in_strip;
    CHECK(cert.records[0].b_sup <= std::pow(eps0, -params.sigma / 10.0) * (1.0 + 1e-6));
}

TEST_CASE("kam_loop_ck: trivial input and C^k decay across scales") {
    auto dc = golden_dc();
    KamParams params = KamParams::desk_defaults();
    auto sched = ScaleSchedule::make(params, 3);

    Mat2 a = mat2::rotation(1.1);
    TorusPoly z = TorusPoly::zero_alg(1, AlgebraTag::sl2R);
    auto trivial = kam_loop_ck(a, z, params, sched, dc, 3);
    CHECK(trivial.final_case == FinalCase::almost_reduced);
    for (const auto& rec : trivial.records) CHECK(rec.f_tilde_sup < 1e-14);

    // C^k-type data: modes beyond l_1 = 10 so the smoothing sequence is
    // nontrivial, with a coefficient profile matching a C^k function
    Rng rng(605);
    TorusPoly f = TorusPoly::zero_alg(1, AlgebraTag::sl2R);
    for (int n = 1; n <= 25; ++n) {
        Alg2 x = testutil::random_sl2r_alg(rng, 1.0);
        double w = 1.0 / std::pow(1.0 + n, 17);
        std::array<cplx, 4> v, vc;
        for (int i = 0; i < 4; ++i) {
            v[i] = 0.5 * w * x.a[i];
            vc[i] = std::conj(v[i]);
        }
        f.add_coeff({n}, v);
        f.add_coeff({-n}, vc);
    }
    double target = 0.4 * sched.eps[0];
    f = torusmap::scale(f, cplx(target / torusmap::strip_norm_ub(f, sched.radius[0])));

    auto cert = kam_loop_ck(a, f, params, sched, dc, 3);
    CHECK(cert.final_case == FinalCase::almost_reduced);
    REQUIRE(cert.records.size() == 3);
    CHECK(cert.sharp_bound_ok());
    CHECK(cert.records[0].f_tilde_sup > cert.records[1].f_tilde_sup);
    CHECK(cert.records[1].f_tilde_sup > cert.records[2].f_tilde_sup);
    for (const auto& rec : cert.records)
        CHECK(rec.f_tilde_sup <= std::pow(rec.eps_scale, 0.25));

    // C^{k0} decay at least as fast as the 1/l^2 shape
    double c6 = cert.records[0].f_tilde_ck * cert.records[0].l * cert.records[0].l;
    for (const auto& rec : cert.records)
        CHECK(rec.f_tilde_ck * rec.l * rec.l <= 10.0 * c6 + 1e-12);
}

TEST_CASE("kam_loop_ck detects uniform hyperbolicity and dynamics agrees") {
    auto dc = golden_dc();
    KamParams params = KamParams::desk_defaults();
    params.A_norm_cap = 1.4;
    auto sched = ScaleSchedule::make(params, 3);

    Mat2 a(std::exp(0.3), 0.1, 0.0, std::exp(-0.3), GroupTag::SL2R);
    Rng rng(606);
    TorusPoly f = random_pert(rng, 6, 0.3 * sched.eps[0], sched.radius[0]);

    auto cert = kam_loop_ck(a, f, params, sched, dc, 3);
    CHECK(cert.final_case == FinalCase::uniformly_hyperbolic_detected);

    // cone-field cross-check on the actual cocycle A e^{f}
    TorusPoly ef = torusmap::exp_pointwise(f);
    TorusPoly map = torusmap::mul_pointwise(TorusPoly::constant_grp(a, 1), ef);
    dynamics::Cocycle c;
    c.alpha = dc.alpha;
    c.map = map;
    c.domain = dynamics::DomainKind::real;
    auto uh = dynamics::is_uniformly_hyperbolic(c, 256, 1024);
    CHECK(uh.verdict == dynamics::Verdict::UH);
}

TEST_CASE("verify_scale_ledger: proof-scale constants hold through j = 20") {
    KamParams params = KamParams::paper_defaults(1.5, 1.0);
    CHECK(params.k >= 5 * params.D * 1.5 - 1e-9);
    LedgerInputs in;
    in.tau = 1.5;
    in.a_norm = 1.0;
    auto rep = verify_scale_ledger(params, in, 20);
    CHECK(rep.all_ok);
    CHECK(rep.seed_scan_ok);
    for (const auto& chain : rep.chains) CHECK(chain.size() == 20);
    // pure arithmetic: rerunning gives identical verdicts
    auto rep2 = verify_scale_ledger(params, in, 20);
    for (int c = 0; c < 4; ++c)
        for (std::size_t j = 0; j < rep.chains[c].size(); ++j)
            CHECK(rep.chains[c][j].slack == rep2.chains[c][j].slack);
}

TEST_CASE("verify_scale_ledger: window chain fails for small k") {
    KamParams params = KamParams::paper_defaults(1.5, 1.0);
    params.k = 8;  // below the covering threshold for the default window pair
    LedgerInputs in;
    auto rep = verify_scale_ledger(params, in, 10);
    CHECK(!rep.all_ok);
    CHECK(rep.first_fail_chain >= 0);
    bool window_fail = false;
    for (const auto& row : rep.chains[3]) window_fail = window_fail || !row.ok;
    CHECK(window_fail);
}

TEST_CASE("verify_scale_ledger: removal chain crossover at eps = 13^{-5}") {
    // sigma = 1/10, ||A|| = 1: eps^{3/10} >= 13 eps^{1/2} iff eps <= 13^{-5}
    KamParams params = KamParams::desk_defaults(1.0);  // small exponents keep eps representable
    LedgerInputs in;
    // place eps_{l_1} on either side of the crossover by tuning c_small
    double cross = std::pow(13.0, -5.0);
    double base = std::pow(2.0, params.D) * std::pow(params.M, params.k / 4.0);
    params.c_small = cross * base * 0.99;
    auto ok = verify_scale_ledger(params, in, 1);
    CHECK(ok.chains[2][0].ok);
    params.c_small = cross * base * 1.01;
    auto bad = verify_scale_ledger(params, in, 1);
    CHECK(!bad.chains[2][0].ok);
}

TEST_CASE("holder_window: endpoints, midpoints, covering") {
    // paper-sized constants: only the first right endpoint is representable
    WindowParams paper;  // C0 = 100, c = 0.01, k = 825, M = 1e10
    double right1 = paper.c * std::pow(paper.M, -paper.k / 40.0);
    CHECK(holder_window(right1, paper) == 1);
    CHECK_THROWS_AS(holder_window(right1 * 10.0, paper), TooLarge);

    // desk-sized window: several intervals fit inside double precision
    WindowParams w{2.0, 1.0, 36.0, 10.0};
    CHECK(holder_window(w.c * std::pow(w.M, -w.k / 40.0), w) == 1);

    long double log_l2 = 2.0L * std::log(static_cast<long double>(w.M));
    long double left2 = std::log(static_cast<long double>(w.C0)) - (w.k / 16.0L) * log_l2;
    long double right2 = std::log(static_cast<long double>(w.c)) - (w.k / 40.0L) * log_l2;
    double mid2 = std::exp(static_cast<double>((left2 + right2) / 2.0L));
    CHECK(holder_window(mid2, w) == 2);

    // no gaps across j = 1..15 for both windows, in the log domain
    for (const auto& win : {paper, w}) {
        for (int j = 1; j <= 15; ++j) {
            long double lj = std::scalbln(std::log(static_cast<long double>(win.M)), j - 1);
            long double lj1 = 2.0L * lj;
            long double left_j = std::log(static_cast<long double>(win.C0)) - (win.k / 16.0L) * lj;
            long double right_j1 =
                std::log(static_cast<long double>(win.c)) - (win.k / 40.0L) * lj1;
            CHECK(static_cast<double>(right_j1 - left_j) >= 0.0);
        }
    }
}

TEST_CASE("rescale_triangular: pinned bounds") {
    Mat2 a = Mat2::identity();
    auto r0 = rescale_triangular(a, 0.0, 1.0, cplx(0.0), 1e-6);
    CHECK(r0.z_norm_bound == doctest::Approx(1.0));
    CHECK(r0.le_bound == doctest::Approx(0.0));

    // saturated sharp bound: ||B||^2 |c| = 8 ||A||, eps = 1e-6
    double a_norm = 1.0, b_norm = 10.0;
    cplx c_j(8.0 * a_norm / (b_norm * b_norm), 0.0);
    auto r1 = rescale_triangular(a, 0.0, b_norm, c_j, 1e-6);
    CHECK(r1.bound12 <= 8.0 * a_norm * 1e-3 + 1e-15);
    CHECK(r1.bound12 == doctest::Approx(8.0 * a_norm * std::sqrt(1e-6)));

    CHECK_THROWS_AS(rescale_triangular(a, 0.0, 1e4, cplx(0.0), 1.0), WindowMismatch);
}

TEST_CASE("rescale_triangular bounds the Lyapunov exponent of the rescaled cocycle") {
    auto dc = golden_dc();
    KamParams params = KamParams::desk_defaults();
    auto sched = ScaleSchedule::make(params, 2);
    Rng rng(607);
    Mat2 a = mat2::rotation(1.3);
    TorusPoly f = random_pert(rng, 6, 0.4 * sched.eps[0], sched.radius[0]);
    auto cert = kam_loop_ck(a, f, params, sched, dc, 2);
    REQUIRE(cert.final_case == FinalCase::almost_reduced);
    const auto& rec = cert.records.back();

    double eps = std::min(1e-4, std::pow(rec.b_sup, -4.0) * 0.5);
    auto rep = rescale_triangular(cert.A_final, rec.f_tilde_sup, rec.b_sup, rec.c_offdiag, eps);
    CHECK(rep.le_bound >= 0.0);

    // build W = D U B_total and measure the finite-scale LE of W(.+a)(A e^{f})W^{-1}
    auto schur = mat2::schur_triangularize(cert.A_final);
    Mat2 d(rep.d, 0, 0, 1.0 / rep.d, GroupTag::SL2C);
    Mat2 w = d * schur.U;
    TorusPoly wb = cert.B_total;
    for (auto& [n, v] : wb.coeffs) {
        Mat2 m(v[0], v[1], v[2], v[3], GroupTag::SL2C);
        v = (w * m).a;
    }
    wb.grp_tag = GroupTag::SL2C;
    TorusPoly ef = torusmap::exp_pointwise(f);
    TorusPoly map = torusmap::mul_pointwise(TorusPoly::constant_grp(a, 1), ef);
    TorusPoly z = torusmap::mul_pointwise(torusmap::shift(wb, dc.alpha),
                                          torusmap::mul_pointwise(torusmap::lift_period2(map),
                                                                  torusmap::inverse_pointwise(wb)));
    dynamics::Cocycle zc;
    zc.alpha = dc.alpha;
    zc.map = z;
    zc.domain = dynamics::DomainKind::complex;
    auto le = dynamics::lyapunov(zc, 20000, 4, 13);
    CHECK(le.value <= rep.le_bound + 5.0 * le.error_bar + 1e-3);
}

TEST_CASE("certificate serialization is reproducible byte for byte") {
    auto dc = golden_dc();
    KamParams params = KamParams::desk_defaults();
    auto sched = ScaleSchedule::make(params, 2);
    Rng rng(611);
    Mat2 a = mat2::rotation(0.95);
    TorusPoly f = random_pert(rng, 6, 0.4 * sched.eps[0], sched.radius[0]);
    auto c1 = kam_loop(a, f, sched, params, dc, 2);
    auto c2 = kam_loop(a, f, sched, params, dc, 2);
    CHECK(c1.to_text() == c2.to_text());
    CHECK(c1.to_text().find("reducibility_certificate v1") == 0);
}
