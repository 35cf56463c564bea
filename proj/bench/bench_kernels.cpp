// Serial-reference vs OpenMP-kernel comparison for the data-parallel
// estimators: Lyapunov exponent, rotation number, spectral sweep, and the
// Diophantine lattice scan.
#include <chrono>
#include <cstdio>

#include "qpkam/schrodinger.hpp"

using namespace qpkam;
using schrodinger::SchrodingerModel;

namespace {

double now_run(void (*)(void)) { return 0; }

template <typename F>
double timed(F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void row(const char* name, double serial, double parallel, bool identical) {
    std::printf("%-28s %9.3f s %9.3f s   x%-6.2f  identical=%s\n", name, serial, parallel,
                serial / parallel, identical ? "yes" : "NO");
}

}  // namespace

int main() {
    (void)now_run;
    auto dcres = arith::verify_dc({arith::golden_mean()}, 0.2, 1.5, 2000000);
    auto dc = dcres.frequency.value();
    auto amo = SchrodingerModel::amo(0.5, dc);
    auto c = schrodinger::schrodinger_cocycle(amo, 0.4);

    std::printf("%-28s %11s %11s   %-8s\n", "kernel", "serial", "parallel", "speedup");

    {
        dynamics::LyapunovEstimate a, b;
        double ts = timed([&] { a = dynamics::lyapunov(c, 200000, 64, 7, Exec::serial); });
        double tp = timed([&] { b = dynamics::lyapunov(c, 200000, 64, 7, Exec::parallel); });
        row("lyapunov (64 samples)", ts, tp, a.value == b.value);
    }
    {
        double a = 0, b = 0;
        double ts =
            timed([&] { a = dynamics::rotation_number(c, true, 200000, 64, 7, Exec::serial); });
        double tp =
            timed([&] { b = dynamics::rotation_number(c, true, 200000, 64, 7, Exec::parallel); });
        row("rotation number (64)", ts, tp, a == b);
    }
    {
        // reference (lifted-angle, generic evaluation) vs optimized kernel
        double a = 0, b = 0;
        double tr = timed([&] { a = dynamics::rotation_number_reference(c, 200000, 8, 7); });
        double tf =
            timed([&] { b = dynamics::rotation_number(c, true, 200000, 8, 7, Exec::serial); });
        row("rot: reference vs fast", tr, tf, std::abs(a - b) < 1e-4);
    }
    {
        std::vector<double> grid(128);
        for (int i = 0; i < 128; ++i) grid[i] = -3.0 + 6.0 * i / 127;
        schrodinger::SweepBudget budget;
        budget.n_iters = 100000;
        budget.samples = 2;
        budget.with_uh = false;
        schrodinger::SpectralCurve s1, s2;
        double ts = timed([&] { s1 = schrodinger::spectral_sweep(amo, grid, budget, Exec::serial); });
        double tp =
            timed([&] { s2 = schrodinger::spectral_sweep(amo, grid, budget, Exec::parallel); });
        row("spectral sweep (128 E)", ts, tp, s1.to_csv() == s2.to_csv());
    }
    {
        arith::DcScanResult r1, r2;
        double ts = timed([&] { r1 = arith::verify_dc({arith::golden_mean()}, 0.2, 1.2,
                                                      20000000, Exec::serial); });
        double tp = timed([&] { r2 = arith::verify_dc({arith::golden_mean()}, 0.2, 1.2,
                                                      20000000, Exec::parallel); });
        row("DC lattice scan (2e7)", ts, tp,
            r1.largest_admissible_kappa == r2.largest_admissible_kappa);
    }
    return 0;
}
