#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qpkam/mat2.hpp"

namespace qpkam::torusmap {

using mat2::Alg2;
using mat2::cplx;
using mat2::Mat2;

/// Stored integer frequency vector; the true frequency is stored/period,
/// so period-2 maps (conjugacies on the double torus) carry half-integer
/// modes as odd stored entries.
using FreqVec = std::vector<int>;

enum class ValueKind { algebra, group };
enum class NormKind { exact_grid_sup, coefficient_upper_bound };

inline constexpr int kDefaultGrid = 4096;  // 2^12 points per dimension

struct StripNorm {
    double radius = 0.0;
    double value = 0.0;
    NormKind kind = NormKind::coefficient_upper_bound;
};

/// Trigonometric polynomial T^d (or 2T^d) -> 2x2 matrices, stored as a
/// finite map from frequency vectors to entry values.  The angle variable
/// lives in [0, 2*pi*period)^d and a stored mode m contributes
/// e^{i <m, theta> / period}.
struct TorusPoly {
    int dim = 1;
    int period = 1;
    ValueKind kind = ValueKind::algebra;
    mat2::AlgebraTag alg_tag = mat2::AlgebraTag::sl2R;
    mat2::GroupTag grp_tag = mat2::GroupTag::SL2R;
    std::map<FreqVec, std::array<cplx, 4>> coeffs;

    static TorusPoly zero_alg(int dim, mat2::AlgebraTag tag, int period = 1);
    static TorusPoly constant_alg(const Alg2& v, int dim = 1, int period = 1);
    static TorusPoly constant_grp(const Mat2& v, int dim = 1, int period = 1);

    bool is_algebra() const { return kind == ValueKind::algebra; }

    void set_coeff(const FreqVec& n, const std::array<cplx, 4>& v);
    void add_coeff(const FreqVec& n, const std::array<cplx, 4>& v);
    const std::array<cplx, 4>* coeff(const FreqVec& n) const;

    Alg2 as_alg(const std::array<cplx, 4>& v) const { return Alg2(v[0], v[1], v[2], v[3], alg_tag); }
    Mat2 as_grp(const std::array<cplx, 4>& v) const { return Mat2(v[0], v[1], v[2], v[3], grp_tag); }

    /// l1 norm of the true frequency of a stored vector.
    double freq_l1(const FreqVec& n) const;

    /// Largest true |n|_1 over the support (0 for constants).
    double support_radius() const;

    std::size_t mode_count() const { return coeffs.size(); }
};

/// f(theta + i * im_shift); theta and im_shift are in angle units (radians).
std::array<cplx, 4> eval_entries(const TorusPoly& f, const std::vector<double>& theta,
                                 const std::vector<double>* im_shift = nullptr);
Alg2 eval_alg(const TorusPoly& f, const std::vector<double>& theta,
              const std::vector<double>* im_shift = nullptr);
Mat2 eval_grp(const TorusPoly& f, const std::vector<double>& theta,
              const std::vector<double>* im_shift = nullptr);

struct TruncatePair {
    TorusPoly low;   // true |n|_1 < N
    TorusPoly tail;  // true |n|_1 >= N
};
TruncatePair truncate(const TorusPoly& f, double N);

StripNorm strip_norm(const TorusPoly& f, double r,
                     NormKind kind = NormKind::coefficient_upper_bound,
                     int grid = kDefaultGrid);

/// Shorthand for the rigorous coefficient upper bound value.
double strip_norm_ub(const TorusPoly& f, double r);

/// sup-norm over a real grid (C^0 norm estimate).
double sup_norm_grid(const TorusPoly& f, int grid = kDefaultGrid);

double ck_norm(const TorusPoly& f, int k, int grid = kDefaultGrid);

/// Analytic smoothing f_j: Fourier multiplier equal to 1 on |n| <= j and
/// exp(-s ((|n|-j)/j)^2) beyond, giving a map analytic on a strip of width
/// 1/j regardless of the smoothness class of f.
TorusPoly smooth_approx(const TorusPoly& f, long long j);

/// Empirical constants for the three smoothing inequalities, measured on f.
struct ApproxConstants {
    double c_strip = 0.0;      // sup_j |f_j|_{1/j} / ||f||_k
    double c_telescope = 0.0;  // sup_j |f_{j+1}-f_j|_{1/(j+1)} j^k / ||f||_k
    double ck_residual = 0.0;  // ||f_{jmax} - f||_k
};
ApproxConstants measure_approx_constants(const TorusPoly& f, int k, long long j_min,
                                         long long j_max);

double cauchy_ck_bound(double strip_value, double r, int k0);

// --- structural operations -------------------------------------------------

TorusPoly add(const TorusPoly& a, const TorusPoly& b);
TorusPoly sub(const TorusPoly& a, const TorusPoly& b);
TorusPoly scale(const TorusPoly& a, cplx s);

/// f(theta + 2*pi*alpha); alpha is the frequency vector in (0,1)^d.
TorusPoly shift(const TorusPoly& f, const std::vector<double>& alpha);

/// P f(theta) P^{-1} coefficientwise.
TorusPoly conj_by_const(const Mat2& p, const TorusPoly& f);

/// Reinterpret on the double torus (stored frequencies doubled).
TorusPoly lift_period2(const TorusPoly& f);

TorusPoly to_su11(const TorusPoly& f);
TorusPoly to_sl2r(const TorusPoly& f);

/// Pointwise operations routed through a synthesis grid.  `grid` is the
/// number of points per dimension; pass 0 to auto-size from the supports.
TorusPoly mul_pointwise(const TorusPoly& a, const TorusPoly& b, int grid = 0);

/// Coefficient-space (convolution) product.  Slower than the grid route for
/// wide supports but free of grid dust: absent modes stay exactly absent and
/// every coefficient keeps relative precision, which the analytic-norm
/// certificates rely on.  `rel_prune` drops result modes below the given
/// fraction of the largest one.
TorusPoly mul_coeff(const TorusPoly& a, const TorusPoly& b, double rel_prune = 1e-22);
TorusPoly exp_pointwise(const TorusPoly& f, int grid = 0);
TorusPoly log_pointwise(const TorusPoly& g, int grid = 0);
TorusPoly inverse_pointwise(const TorusPoly& g, int grid = 0);

void prune(TorusPoly& f, double tol);

/// Deviation from the reality structure of the value type: coefficientwise
/// c(-n) == conj(c(n)) for sl2R, and the su(1,1) pairing for su11.
double reality_defect(const TorusPoly& f);

/// Orthogonal projection onto the reality structure of the tagged real form
/// (pointwise real part for sl2R values, su(1,1) part for su11 values).
TorusPoly reality_project(const TorusPoly& f);

/// Halve the stored frequencies of a period-2 map whose odd modes are dust;
/// the dropped odd-mode mass is reported through `odd_mass`.
TorusPoly compress_period(const TorusPoly& f, double* odd_mass = nullptr);

// --- grid machinery ----------------------------------------------------------

/// Values on the product grid theta_k = 2*pi*period*k/G per dimension,
/// flattened with the first dimension fastest.
std::vector<std::array<cplx, 4>> synthesize(const TorusPoly& f, int grid);

/// Inverse of synthesize;  keeps modes with entry magnitude above prune_tol
/// (relative to the largest coefficient).
TorusPoly analyze(const std::vector<std::array<cplx, 4>>& values, const TorusPoly& prototype,
                  int grid, double prune_tol = 1e-18);

int auto_grid(const TorusPoly& a, const TorusPoly* b = nullptr, int min_grid = 256,
              int max_grid = 1 << 16);

// --- serialization -----------------------------------------------------------

std::string to_text(const TorusPoly& f);
TorusPoly from_text(const std::string& text);

}  // namespace qpkam::torusmap
