#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qpkam/parallel.hpp"
#include "qpkam/torusmap.hpp"

namespace qpkam::dynamics {

using mat2::Mat2;
using torusmap::TorusPoly;

enum class DomainKind { real, complex };

/// Quasi-periodic cocycle (alpha, A): (theta, v) -> (theta + alpha, A(theta) v).
struct Cocycle {
    std::vector<double> alpha;  // frequency in (0,1)^d
    TorusPoly map;              // group-valued
    DomainKind domain = DomainKind::real;

    static Cocycle constant(const std::vector<double>& alpha, const Mat2& a);
};

struct LyapunovEstimate {
    double value = 0.0;
    long long n_iters = 0;
    int theta_samples = 0;
    std::vector<std::pair<long long, double>> convergence_tail;
    double error_bar = 0.0;
};

/// Finite-scale Lyapunov exponent: mean over theta samples of
/// (1/n) ln ||A_n(theta)||, with periodic renormalization of the product.
/// Samples combine Kronecker orbit segments with a uniform grid.
LyapunovEstimate lyapunov(const Cocycle& c, long long n_iters, int theta_samples,
                          std::uint64_t seed, Exec exec = Exec::parallel);

/// Same estimator for complexified cocycles (Im E >= 0 side); for uniformly
/// hyperbolic complex cocycles fewer iterates suffice and n is auto-tuned
/// down when the tail has converged.
LyapunovEstimate lyapunov_complex_energy(const Cocycle& c, long long n_iters, int theta_samples,
                                         std::uint64_t seed, Exec exec = Exec::parallel);

/// Fibered rotation number in [0, 1/2] (projective winding, symmetry-folded).
double rotation_number(const Cocycle& c, bool homotopic_to_identity, long long n_iters,
                       int theta_samples, std::uint64_t seed = 1, Exec exec = Exec::parallel);

enum class Verdict { UH, not_UH, inconclusive };

struct UhResult {
    Verdict verdict = Verdict::inconclusive;
    int witness_n = 0;            // product length of the invariant cone (UH only)
    double cone_center = 0.0;     // direction mod pi
    double cone_halfwidth = 0.0;  // aperture
    double le_estimate = 0.0;
};

/// Cone-field criterion for uniform hyperbolicity: searches product lengths
/// n <= horizon for a constant cone family strictly invariant (margin 1.05)
/// over every grid point.
UhResult is_uniformly_hyperbolic(const Cocycle& c, int horizon = 1024, int grid = 4096,
                                 Exec exec = Exec::parallel);

// --- serial reference implementations ---------------------------------------
// Straightforward single-threaded estimators kept as the comparison baseline
// for the optimized kernels (bitwise-testable, used in tests and benchmarks).

LyapunovEstimate lyapunov_reference(const Cocycle& c, long long n_iters, int theta_samples,
                                    std::uint64_t seed);
double rotation_number_reference(const Cocycle& c, long long n_iters, int theta_samples,
                                 std::uint64_t seed = 1);

/// Winding degree of theta -> A(theta) e_1 (d = 1); nonzero degree means the
/// cocycle is not homotopic to a constant.
int column_degree(const Cocycle& c, int grid = 2048);

}  // namespace qpkam::dynamics
