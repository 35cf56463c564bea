#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qpkam/arith.hpp"
#include "qpkam/dynamics.hpp"

namespace qpkam::schrodinger {

using arith::DiophantineFrequency;
using mat2::cplx;

/// Quasi-periodic Schrodinger model H u_n = u_{n+1} + u_{n-1} + lambda V(theta + n alpha) u_n.
/// V is a real scalar trigonometric polynomial stored in entry 0 of a TorusPoly.
struct SchrodingerModel {
    torusmap::TorusPoly V;
    double lambda = 0.0;
    DiophantineFrequency alpha;

    static SchrodingerModel amo(double lambda, const DiophantineFrequency& dc);   // V = 2 cos
    static SchrodingerModel free_model(const DiophantineFrequency& dc);           // V = 0

    double v_inf() const;  // min of V over the grid
    double v_sup() const;
    /// Spectrum search window [-2 + inf(lambda V), 2 + sup(lambda V)].
    std::pair<double, double> spectrum_window() const;
};

/// Transfer cocycle S_E = [[lambda V - E, -1],[1, 0]] over the rotation.
dynamics::Cocycle schrodinger_cocycle(const SchrodingerModel& m, cplx energy);

/// Integrated density of states through the rotation-number bridge.
double ids(const SchrodingerModel& m, double energy, long long n_iters, int samples,
           std::uint64_t seed = 1, Exec exec = Exec::parallel);

struct SpectralCurve {
    std::vector<double> energies;
    std::vector<double> L, L_err, N;
    std::vector<dynamics::Verdict> uh;
    std::vector<std::string> flags;  // e.g. monotonicity violations (never repaired)
    std::string to_csv() const;
};

struct SweepBudget {
    long long n_iters = 100000;
    int samples = 4;
    bool with_uh = true;
    int uh_horizon = 256;
    int uh_grid = 1024;
    std::uint64_t seed = 1;
};

SpectralCurve spectral_sweep(const SchrodingerModel& m, const std::vector<double>& e_grid,
                             const SweepBudget& budget, Exec exec = Exec::parallel);

struct ThoulessResult {
    double L_direct = 0.0;
    double L_thouless = 0.0;
    double defect = 0.0;
};

/// Thouless formula L(E) = int ln|E - E'| dN(E'), evaluated from the sampled
/// curve by cellwise exact integration of the logarithm (the singularity is
/// integrable; N is continuous).
ThoulessResult thouless_check(const SpectralCurve& curve, double energy,
                              double coarse_tol = 0.05);

enum class HolderTarget { IDS, LE_imag };

struct HolderFit {
    double E0 = 0.0;
    HolderTarget target = HolderTarget::IDS;
    double beta = 0.0;  // fitted exponent of eps
    double C = 0.0;     // fitted prefactor
    std::vector<double> residuals;
    double residual_rms = 0.0;
    int n_points = 0;
    int dropped = 0;
    bool locally_constant = false;  // inside-gap sentinel (beta = infinity)
    std::string to_json() const;
};

struct FitBudget {
    long long n_iters = 1000000;
    int samples = 2;
    std::uint64_t seed = 1;
    double noise_floor = 1e-7;  // differences below this are dropped
};

/// log-log regression of N(E0+eps) - N(E0-eps) (target IDS) or
/// L(E0+i eps) - L(E0) (target LE_imag) over the eps grid.
HolderFit holder_fit(const SchrodingerModel& m, double e0, const std::vector<double>& eps_grid,
                     HolderTarget target, const FitBudget& budget, Exec exec = Exec::parallel);

struct GapEdge {
    double energy = 0.0;   // refined edge location
    double gap_label = 0.0;  // N value on the gap plateau
    double le_inside = 0.0;  // LE estimate just inside the gap
};

/// Bisection refinement of a spectral-gap edge between a point inside the gap
/// and one in the spectrum, driven by the Lyapunov exponent with rotation-
/// number plateau cross-checks.
GapEdge locate_gap_edge(const SchrodingerModel& m, double inside_e, double outside_e,
                        double tol_e = 1e-8, long long n_iters = 2000000,
                        std::uint64_t seed = 1, Exec exec = Exec::parallel);

/// Free-operator closed forms (test oracles and presets).
double free_ids_exact(double energy);
double free_le_exact(cplx energy);

/// Two-panel SVG of (E, N) and (E, L) with UH verdicts shaded as gaps.
std::string curve_svg(const SpectralCurve& curve);

}  // namespace qpkam::schrodinger
