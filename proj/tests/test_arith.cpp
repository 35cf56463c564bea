#include <cmath>

#include "doctest.h"
#include "qpkam/arith.hpp"
#include "test_util.hpp"

using namespace qpkam;
using namespace qpkam::arith;
using qpkam::testutil::Rng;

namespace {
const double kPi = 3.14159265358979323846;
}

TEST_CASE("verify_dc rejects rationals with the violating site") {
    CHECK_THROWS_AS(verify_dc({0.5}, 0.1, 1.2, 100), NotDiophantine);
    CHECK_THROWS_AS(verify_dc({0.25}, 0.1, 1.2, 100), NotDiophantine);
}

TEST_CASE("verify_dc golden mean: convergents dominate the scan") {
    double a = golden_mean();
    auto res = verify_dc({a}, 0.2, 1.2, 10000);
    CHECK(res.cf_consistent);
    CHECK(res.passed);  // golden mean is the hardest-to-approximate number
    CHECK(res.largest_admissible_kappa > 0.2);

    // worst site must be a convergent denominator (Fibonacci number)
    auto convs = convergents(a, 10000);
    bool found = false;
    for (const auto& c : convs) found = found || (c.q == res.worst_n[0]);
    CHECK(found);

    // with kappa above the admissible value the condition fails
    auto res2 = verify_dc({a}, res.largest_admissible_kappa * 1.01, 1.2, 10000);
    CHECK(!res2.passed);
}

TEST_CASE("verify_dc sqrt(2): exhaustive and convergent scans agree") {
    double a = std::sqrt(2.0) - 1.0;
    auto res = verify_dc({a}, 1e-3, 1.5, 1000);
    CHECK(res.cf_consistent);
    CHECK(res.passed);
}

TEST_CASE("verify_dc serial and parallel agree") {
    double a = golden_mean();
    auto r1 = verify_dc({a}, 0.2, 1.5, 20000, Exec::serial);
    auto r2 = verify_dc({a}, 0.2, 1.5, 20000, Exec::parallel);
    CHECK(r1.largest_admissible_kappa == r2.largest_admissible_kappa);
    CHECK(r1.worst_n == r2.worst_n);
    CHECK(r1.worst_dist == r2.worst_dist);
}

TEST_CASE("find_resonance: constructed site is found exactly") {
    double a = golden_mean();
    auto dc = verify_dc({a}, 0.2, 1.2, 100000).frequency.value();

    long double frac3 = 3.0L * a - std::floor(3.0L * a);
    mat2::EigenAngle rho{mat2::AngleKind::elliptic, kPi * static_cast<double>(frac3)};
    auto rep = find_resonance(rho, dc, 10.0, 1e-6);
    REQUIRE(rep.site.has_value());
    CHECK((*rep.site)[0] == 3);
    CHECK(rep.margin < 1e-12);
    CHECK(rep.unique_within > 10.0);
}

TEST_CASE("find_resonance: no site when margin exceeds threshold") {
    double a = golden_mean();
    auto dc = verify_dc({a}, 0.2, 1.2, 100000).frequency.value();
    mat2::EigenAngle rho{mat2::AngleKind::elliptic, 0.3};
    auto rep = find_resonance(rho, dc, 100.0, 1e-3);

    // independent brute-force scan over the band
    double best = 1e300;
    int best_n = 0;
    for (int n = -100; n <= 100; ++n) {
        if (n == 0) continue;
        double m = angle_dist(2.0L * 0.3L - 2.0L * kPi * n * static_cast<long double>(a));
        if (m < best) {
            best = m;
            best_n = n;
        }
    }
    CHECK(rep.margin == doctest::Approx(best).epsilon(1e-12));
    if (best < 1e-3) {
        REQUIRE(rep.site.has_value());
        CHECK((*rep.site)[0] == best_n);
    } else {
        CHECK(!rep.site.has_value());
    }
}

TEST_CASE("find_resonance: non-elliptic input never reports a site") {
    double a = golden_mean();
    auto dc = verify_dc({a}, 0.2, 1.2, 1000).frequency.value();
    mat2::EigenAngle hyp{mat2::AngleKind::hyperbolic, 0.5};
    auto rep = find_resonance(hyp, dc, 50.0, 0.5);
    CHECK(!rep.site.has_value());
}

TEST_CASE("find_resonance: inconsistent kappa triggers the claim check") {
    double a = golden_mean();
    DiophantineFrequency dc;
    dc.alpha = {a};
    dc.kappa = 5.0;  // far above the true admissible value
    dc.tau = 1.5;
    dc.verified_up_to = 1000000;
    mat2::EigenAngle rho{mat2::AngleKind::elliptic, kPi * 0.61803398874989};
    CHECK_THROWS_AS(find_resonance(rho, dc, 3.0, 0.8), ClaimViolation);
}

TEST_CASE("small_divisor_floor: golden pinned value and DC lower bound") {
    double a = golden_mean();
    auto dc = verify_dc({a}, 0.2, 1.2, 100000).frequency.value();
    double f1 = small_divisor_floor(dc, 1);
    CHECK(f1 == doctest::Approx(1.0 - a).epsilon(1e-12));

    for (long long n : {10LL, 100LL, 5000LL}) {
        double fl = small_divisor_floor(dc, n);
        CHECK(fl >= dc.kappa / std::pow(double(n), dc.tau));
    }
    CHECK_THROWS_AS(small_divisor_floor(dc, 200000), UnverifiedRange);
}

TEST_CASE("small_divisor_floor minimizer bound holds for random verified frequencies") {
    Rng rng(301);
    int tested = 0;
    for (int i = 0; i < 1000 && tested < 200; ++i) {
        double a = rng.uniform(0.05, 0.95);
        DcScanResult res;
        try {
            res = verify_dc({a}, 1e-6, 2.0, 2000);
        } catch (const NotDiophantine&) {
            continue;
        }
        if (!res.passed) continue;
        ++tested;
        auto dc = res.frequency.value();
        long long n = 1 + static_cast<long long>(rng.uniform(1, 1999));
        double fl = small_divisor_floor(dc, n);
        CHECK(fl >= dc.kappa / std::pow(double(n), dc.tau));
    }
    CHECK(tested > 50);
}

TEST_CASE("small_divisor_floor minimizer is a convergent denominator") {
    double a = std::sqrt(3.0) - 1.0;
    auto res = verify_dc({a}, 1e-4, 1.5, 5000);
    REQUIRE(res.passed);
    auto dc = res.frequency.value();
    long long N = 3000;
    double fl = small_divisor_floor(dc, N);
    double best = 1e300;
    long long best_q = 0;
    for (const auto& c : convergents(a, N)) {
        if (c.q < 1) continue;
        double d = dist_to_int(static_cast<long double>(c.q) * a);
        if (d < best) {
            best = d;
            best_q = c.q;
        }
    }
    CHECK(fl == doctest::Approx(best).epsilon(1e-12));
    CHECK(best_q > 0);
}

TEST_CASE("continued fraction of the golden mean is all ones") {
    auto convs = convergents(golden_mean(), 1000);
    REQUIRE(convs.size() > 5);
    // denominators are Fibonacci numbers
    CHECK(convs[1].q == 1);
    CHECK(convs[2].q == 2);
    CHECK(convs[3].q == 3);
    CHECK(convs[4].q == 5);
    CHECK(convs[5].q == 8);
}

TEST_CASE("find_resonance: shrinking thresholds eventually clear every site") {
    double a = golden_mean();
    auto dc = verify_dc({a}, 0.2, 1.2, 100000).frequency.value();
    mat2::EigenAngle rho{mat2::AngleKind::elliptic, 0.437};  // not of the form <n,alpha>/2
    bool cleared = false;
    for (double thr : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-9}) {
        auto rep = find_resonance(rho, dc, 50.0, thr);
        if (!rep.site.has_value()) {
            cleared = true;
            break;
        }
    }
    CHECK(cleared);
}
