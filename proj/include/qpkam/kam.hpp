#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "qpkam/arith.hpp"
#include "qpkam/torusmap.hpp"

namespace qpkam::kam {

using arith::DiophantineFrequency;
using arith::ResonanceReport;
using mat2::cplx;
using mat2::Mat2;
using torusmap::TorusPoly;

enum class Mode { paper_faithful, desk };

/// Scheme parameters.  paper_faithful enforces every smallness threshold of
/// the analytic scheme (those thresholds are astronomically small, so that
/// mode is exercised through the exact-arithmetic ledger); desk runs the same
/// mechanism at reachable magnitudes and records certificate violations as
/// flags instead of refusing to step.
struct KamParams {
    double sigma = 0.1;
    int D = 2;
    double c_small = 1.0;
    int k = 16;
    int k0 = 2;
    double M = 10.0;
    double A_norm_cap = 1.0;  // ||A|| entering the epsilon schedule
    Mode mode = Mode::desk;
    int max_newton = 20;
    double newton_tol_scale = 1e-13;

    static KamParams desk_defaults(double a_norm = 1.0);
    static KamParams paper_defaults(double tau, double a_norm = 1.0);

    /// eps_m = c / ((2||A||)^D m^{k/4})
    double eps_schedule(double m) const;
    /// smallness bound c ||A||^{-D} (r - r')^{D tau}
    double eps_smallness(double a_norm, double r_gap, double tau) const;
};

struct ScaleSchedule {
    std::vector<double> l;       // l_j = M^{2^{j-1}}
    std::vector<double> eps;     // eps_{l_j}
    std::vector<double> radius;  // r_j = 1/l_j, one extra entry r_{J+1}
    int scales() const { return static_cast<int>(l.size()); }
    static ScaleSchedule make(const KamParams& p, int scales);
};

enum class Branch { nonresonant, resonant };

struct StepCertificates {
    double eps_in = 0;        // |f|_r on entry
    double n_band = 0;        // truncation/search band N
    double b_strip_rp = 0;    // |B|_{r'} (resonant) or |B - Id|_{r'} (non-resonant)
    double b_sup = 0;         // ||B||_0
    double f_plus_strip = 0;  // |f_+|_{r'}
    double a_change = 0;      // ||A_+ - A|| (non-resonant branch)
    double a_dd_norm = 0;     // ||A''|| with A_+ = sign * e^{A''} (resonant branch)
    int sign = 1;
    double conj_defect = 0;   // pointwise verification of the conjugacy identity
    bool paper_bounds_ok = true;
    std::vector<std::string> flags;
};

struct StepResult {
    Branch branch = Branch::nonresonant;
    TorusPoly B;       // group-valued conjugacy; period 2 after a resonant step
    Mat2 A_plus;
    TorusPoly f_plus;  // algebra-valued on the shrunk strip
    std::optional<ResonanceReport> resonance;
    StepCertificates certs;
};

struct NewtonDiag {
    int iterations = 0;
    double residual = 0;   // masked residual, C^0 grid norm
    double y_strip = 0;    // |Y|_r
    double gre_strip = 0;  // |g_re|_r
};

/// Which part of the algebra the homological equation removes.
struct NreMask {
    enum class Kind {
        sigma_floor,   // whole modes with sigma_min(linearized op) >= eta
        band,          // whole modes 0 < |n| < band_n (Lambda_N)
        resonant_pair  // diagonal on Lambda_1, off-diagonal on Lambda_2 (A diagonal)
    };
    Kind kind = Kind::sigma_floor;
    double band_n = 0;       // band / resonant_pair search bound
    double angle_floor = 0;  // resonant_pair angle threshold (eps^sigma)
};

struct NonresonantResult {
    TorusPoly Y;
    TorusPoly g_re;
    NewtonDiag diag;
};

/// Newton removal of the non-resonant part: finds Y supported on the mask
/// with e^{Y(.+alpha)} A e^{g} e^{-Y} = A e^{g_re} and the masked part of
/// g_re at the Newton tolerance.
NonresonantResult nonresonant_reduce(const Mat2& a, const TorusPoly& g, double r, double eta,
                                     double eps, const DiophantineFrequency& dc,
                                     const NreMask& mask, const KamParams& params);

/// One almost-reducibility step from strip r to r' (both branches).
StepResult kam_step(const Mat2& a, const TorusPoly& f, double r, double r_prime,
                    const KamParams& params, const DiophantineFrequency& dc);

struct ScaleRecord {
    int j = 0;
    double l = 0;
    Branch branch = Branch::nonresonant;
    double eps_scale = 0;        // schedule value at this scale
    double f_in_strip = 0;       // |f|_{r_j} entering the step
    double f_prime_strip = 0;    // |f'_{l_j}|_{r_{j+1}}
    double b_sup = 0;            // ||B_{l_j}||_0 (composed)
    double b_strip = 0;          // |B_{l_j}|_{r_{j+1}}
    double f_tilde_sup = 0;      // ||F~_{l_j}||_0 (ck runs)
    double f_tilde_ck = 0;       // direct C^{k0} norm of F~
    double f_tilde_ck_cauchy = 0;  // Cauchy-estimate bound for it
    cplx gamma{};
    cplx c_offdiag{};
    double sharp_product = 0;    // |c_j| ||B||_0^2, must stay <= 8 ||A||
    double a_norm = 0;
    double lambda_abs = 0;       // |ln |mu|| of A_{l_j}
    double conj_defect = 0;
    bool cert_ok = true;
    std::vector<std::string> flags;
};

enum class FinalCase { almost_reduced, uniformly_hyperbolic_detected, stalled };

struct ReducibilityCertificate {
    std::vector<StepResult> steps;
    std::vector<ScaleRecord> records;
    TorusPoly B_total;
    Mat2 A_final;
    FinalCase final_case = FinalCase::stalled;
    double A0_norm = 1.0;

    bool sharp_bound_ok() const;  // |c_j| ||B||_0^2 <= 8||A|| at every scale
    std::string to_text() const;
};

/// Analytic multi-scale loop along the schedule radii.
ReducibilityCertificate kam_loop(const Mat2& a, const TorusPoly& f, const ScaleSchedule& sched,
                                 const KamParams& params, const DiophantineFrequency& dc,
                                 int max_steps);

/// C^k entry point: drives kam_loop through the analytic approximations,
/// re-absorbing the approximation increments, tracking the additive defect
/// F~_{l_j} against the full map, and running the hyperbolicity exclusion.
ReducibilityCertificate kam_loop_ck(const Mat2& a, const TorusPoly& f_ck, const KamParams& params,
                                    const ScaleSchedule& sched, const DiophantineFrequency& dc,
                                    int max_steps);

// --- exact-arithmetic inequality ledger --------------------------------------

struct LedgerRow {
    int j = 0;
    double slack = 0;  // log-domain margin, >= 0 means the inequality holds
    bool ok = false;
};

struct LedgerReport {
    // chains: 0 = schedule seed, 1 = induction step, 2 = removal hypothesis,
    // 3 = Hoelder window covering
    std::array<std::vector<LedgerRow>, 4> chains;
    bool seed_scan_ok = true;  // seed inequality over all integers m >= 10
    int first_fail_chain = -1;
    int first_fail_j = -1;
    bool all_ok = true;
    std::string to_text() const;
};

struct LedgerInputs {
    double tau = 1.5;
    double a_norm = 1.0;
    double C0 = 100.0;      // window upper constant (symbolic in the source)
    double c_cover = 0.01;  // window lower constant
};

/// Pure log-domain arithmetic verification of the scale-by-scale inequality
/// chains; no floating tolerance games, evaluation order independent.
LedgerReport verify_scale_ledger(const KamParams& params, const LedgerInputs& in, int j_max);

struct WindowParams {
    double C0 = 100.0;
    double c = 0.01;
    double k = 825.0;
    double M = 1e10;
};

/// Index j with C0 l_j^{-k/16} <= eps <= c l_j^{-k/40}.
int holder_window(double eps, const WindowParams& w);

struct RescaleReport {
    double d = 0;             // ||B||_0 eps^{1/4}
    double bound12 = 0;       // d^2 (|c_j| + F)
    double bound21 = 0;       // d^{-2} F
    double bound_diag = 0;    // F
    double z_norm_bound = 0;  // 1 + ||q-block|| bound
    double le_bound = 0;      // ln z_norm_bound
};

/// Diagonal rescaling of the triangularized normal form (the 1/2-Hoelder
/// mechanism): bounds the conjugated cocycle norm and hence the Lyapunov
/// exponent.
RescaleReport rescale_triangular(const Mat2& a_lj, double f_norm, double b_norm, cplx c_j,
                                 double eps);

}  // namespace qpkam::kam
