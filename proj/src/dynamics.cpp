#include "qpkam/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "qpkam/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qpkam::dynamics {

using mat2::cplx;
using torusmap::TorusPoly;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr long double kTwoPiL = 6.283185307179586476925286766559L;
constexpr int kRenormStride = 32;
constexpr int kTailSlots = 16;

double op_norm_real(double a, double b, double c, double d) {
    double f = a * a + b * b + c * c + d * d;
    double det = std::fabs(a * d - b * c);
    double disc = f * f - 4.0 * det * det;
    if (disc < 0.0) disc = 0.0;
    return std::sqrt(0.5 * (f + std::sqrt(disc)));
}

double op_norm_cplx(const cplx m[4]) {
    double f = std::norm(m[0]) + std::norm(m[1]) + std::norm(m[2]) + std::norm(m[3]);
    double det = std::abs(m[0] * m[3] - m[1] * m[2]);
    double disc = f * f - 4.0 * det * det;
    if (disc < 0.0) disc = 0.0;
    return std::sqrt(0.5 * (f + std::sqrt(disc)));
}

// Dense evaluation plan for one-dimensional cocycle maps: the angle variable
// advances by 2*pi*alpha per iterate and A(x) = c0 + sum_m cp[m] z^m +
// cm[m] conj(z)^m with z = e^{i x / period}.
struct ModePlan {
    bool d1 = false;
    bool real_ok = false;
    bool sturm = false;  // Schrodinger structure [[*, -1],[1, 0]]
    int period = 1;
    int max_m = 0;
    std::array<cplx, 4> c0{};
    std::vector<std::array<cplx, 4>> cp, cm;  // index 1..max_m
    double alpha1 = 0.0;

    const TorusPoly* poly = nullptr;
    std::vector<double> alpha_vec;

    static ModePlan build(const Cocycle& c) {
        ModePlan p;
        p.poly = &c.map;
        p.alpha_vec = c.alpha;
        p.period = c.map.period;
        if (c.map.dim != 1) return p;
        p.d1 = true;
        p.alpha1 = c.alpha[0];
        for (const auto& [n, v] : c.map.coeffs) p.max_m = std::max(p.max_m, std::abs(n[0]));
        p.cp.assign(p.max_m + 1, std::array<cplx, 4>{});
        p.cm.assign(p.max_m + 1, std::array<cplx, 4>{});
        for (const auto& [n, v] : c.map.coeffs) {
            int m = n[0];
            if (m == 0)
                p.c0 = v;
            else if (m > 0)
                p.cp[m] = v;
            else
                p.cm[-m] = v;
        }
        p.real_ok = c.domain == DomainKind::real && torusmap::reality_defect(c.map) < 1e-9;

        // transfer-matrix structure: rows (a(theta), -1) / (1, 0); for these
        // the oscillation count is monotone (Sturm), which stays valid in the
        // strongly hyperbolic region where per-step winding reaches pi
        if (p.real_ok) {
            bool s = std::abs(p.c0[1] - cplx(-1.0)) < 1e-12 &&
                     std::abs(p.c0[2] - cplx(1.0)) < 1e-12 && std::abs(p.c0[3]) < 1e-12;
            for (int m = 1; m <= p.max_m && s; ++m) {
                s = std::abs(p.cp[m][1]) < 1e-15 && std::abs(p.cp[m][2]) < 1e-15 &&
                    std::abs(p.cp[m][3]) < 1e-15 && std::abs(p.cm[m][1]) < 1e-15 &&
                    std::abs(p.cm[m][2]) < 1e-15 && std::abs(p.cm[m][3]) < 1e-15;
            }
            p.sturm = s;
        }
        return p;
    }

    inline void eval_real(const cplx& z, double out[4]) const {
        out[0] = c0[0].real();
        out[1] = c0[1].real();
        out[2] = c0[2].real();
        out[3] = c0[3].real();
        cplx zp(1.0);
        for (int m = 1; m <= max_m; ++m) {
            zp *= z;
            // reality pairs: cm[m] = conj(cp[m]); contribution 2 Re(cp[m] z^m)
            for (int i = 0; i < 4; ++i)
                out[i] += 2.0 * (cp[m][i].real() * zp.real() - cp[m][i].imag() * zp.imag());
        }
    }

    inline void eval_cplx(const cplx& z, cplx out[4]) const {
        for (int i = 0; i < 4; ++i) out[i] = c0[i];
        cplx zp(1.0);
        for (int m = 1; m <= max_m; ++m) {
            zp *= z;
            cplx zc = std::conj(zp);
            for (int i = 0; i < 4; ++i) out[i] += cp[m][i] * zp + cm[m][i] * zc;
        }
    }
};

// Phase recurrence z_{k+1} = z_k * w with periodic resync from the exact
// long-double phase; keeps 1e9-step orbits accurate to ~1e-10 rad.
struct PhaseState {
    long double base = 0.0L;   // theta0 / (2 pi period)
    long double step = 0.0L;   // alpha / period
    long long k = 0;
    cplx z{1.0, 0.0}, w{1.0, 0.0};

    void init(double theta0, double alpha, int period) {
        base = static_cast<long double>(theta0) / (kTwoPiL * period);
        base -= std::floor(static_cast<double>(base));
        step = static_cast<long double>(alpha) / period;
        k = 0;
        w = std::polar(1.0, kTwoPi * alpha / period);
        resync();
    }
    void resync() {
        long double u = base + step * k;
        u -= std::floor(static_cast<double>(u));
        z = std::polar(1.0, kTwoPi * static_cast<double>(u));
    }
    inline void advance() {
        ++k;
        if ((k & 0xFFFF) == 0)
            resync();
        else
            z *= w;
    }
};

std::vector<std::vector<double>> sample_points(const Cocycle& c, int samples, long long n,
                                               std::uint64_t seed) {
    const int d = static_cast<int>(c.alpha.size());
    const double span = kTwoPi * c.map.period;
    std::vector<std::vector<double>> pts;
    pts.reserve(samples);
    std::vector<double> base(d);
    for (int j = 0; j < d; ++j) base[j] = span * seed_to_unit(split_seed(seed, j));
    int orbit = (samples + 1) / 2;
    for (int i = 0; i < orbit; ++i) {
        // consecutive segments of one Kronecker orbit
        std::vector<double> t(d);
        for (int j = 0; j < d; ++j) {
            long double x = static_cast<long double>(base[j]) / span +
                            static_cast<long double>(c.alpha[j]) / c.map.period *
                                static_cast<long double>(n) * i;
            x -= std::floor(static_cast<double>(x));
            t[j] = span * static_cast<double>(x);
        }
        pts.push_back(std::move(t));
    }
    for (int i = 0; static_cast<int>(pts.size()) < samples; ++i) {
        std::vector<double> t(d);
        for (int j = 0; j < d; ++j)
            t[j] = span * ((i + 0.5) / (samples - orbit) + 0.25 * j / d);
        for (auto& x : t) x = std::fmod(x, span);
        pts.push_back(std::move(t));
    }
    return pts;
}

struct SampleResult {
    double value = 0.0;
    std::array<double, kTailSlots> tail{};
};

// --- Lyapunov kernels --------------------------------------------------------

SampleResult le_kernel_d1_real(const ModePlan& plan, double theta0, long long n) {
    SampleResult out;
    PhaseState ph;
    ph.init(theta0, plan.alpha1, plan.period);
    double m00 = 1, m01 = 0, m10 = 0, m11 = 1;
    Kahan logsum;
    long long stride = std::max<long long>(1, n / kTailSlots);
    int slot = 0;
    double a[4];
    for (long long k = 0; k < n; ++k) {
        plan.eval_real(ph.z, a);
        double t00 = a[0] * m00 + a[1] * m10;
        double t01 = a[0] * m01 + a[1] * m11;
        double t10 = a[2] * m00 + a[3] * m10;
        double t11 = a[2] * m01 + a[3] * m11;
        m00 = t00;
        m01 = t01;
        m10 = t10;
        m11 = t11;
        if (((k + 1) & (kRenormStride - 1)) == 0) {
            double s = std::sqrt(m00 * m00 + m01 * m01 + m10 * m10 + m11 * m11);
            if (!(s > 0.0) || !std::isfinite(s))
                throw NumericOverflow("lyapunov: product renormalization failed");
            logsum.add(std::log(s));
            double inv = 1.0 / s;
            m00 *= inv;
            m01 *= inv;
            m10 *= inv;
            m11 *= inv;
        }
        if ((k + 1) % stride == 0 && slot < kTailSlots) {
            double ln = logsum.sum + std::log(op_norm_real(m00, m01, m10, m11));
            out.tail[slot++] = ln / static_cast<double>(k + 1);
        }
        ph.advance();
    }
    out.value = (logsum.sum + std::log(op_norm_real(m00, m01, m10, m11))) / static_cast<double>(n);
    while (slot < kTailSlots) out.tail[slot++] = out.value;
    return out;
}

SampleResult le_kernel_d1_cplx(const ModePlan& plan, double theta0, long long n) {
    SampleResult out;
    PhaseState ph;
    ph.init(theta0, plan.alpha1, plan.period);
    cplx m[4] = {1, 0, 0, 1};
    Kahan logsum;
    long long stride = std::max<long long>(1, n / kTailSlots);
    int slot = 0;
    cplx a[4];
    for (long long k = 0; k < n; ++k) {
        plan.eval_cplx(ph.z, a);
        cplx t0 = a[0] * m[0] + a[1] * m[2];
        cplx t1 = a[0] * m[1] + a[1] * m[3];
        cplx t2 = a[2] * m[0] + a[3] * m[2];
        cplx t3 = a[2] * m[1] + a[3] * m[3];
        m[0] = t0;
        m[1] = t1;
        m[2] = t2;
        m[3] = t3;
        if (((k + 1) & (kRenormStride - 1)) == 0) {
            double s = std::sqrt(std::norm(m[0]) + std::norm(m[1]) + std::norm(m[2]) +
                                 std::norm(m[3]));
            if (!(s > 0.0) || !std::isfinite(s))
                throw NumericOverflow("lyapunov: product renormalization failed");
            logsum.add(std::log(s));
            double inv = 1.0 / s;
            for (auto& e : m) e *= inv;
        }
        if ((k + 1) % stride == 0 && slot < kTailSlots) {
            double ln = logsum.sum + std::log(op_norm_cplx(m));
            out.tail[slot++] = ln / static_cast<double>(k + 1);
        }
        ph.advance();
    }
    out.value = (logsum.sum + std::log(op_norm_cplx(m))) / static_cast<double>(n);
    while (slot < kTailSlots) out.tail[slot++] = out.value;
    return out;
}

// Generic-dimension reference path: straightforward per-step evaluation.
SampleResult le_kernel_generic(const Cocycle& c, const std::vector<double>& theta0, long long n) {
    SampleResult out;
    std::vector<double> th = theta0;
    cplx m[4] = {1, 0, 0, 1};
    Kahan logsum;
    long long stride = std::max<long long>(1, n / kTailSlots);
    int slot = 0;
    for (long long k = 0; k < n; ++k) {
        auto a = torusmap::eval_entries(c.map, th);
        cplx t0 = a[0] * m[0] + a[1] * m[2];
        cplx t1 = a[0] * m[1] + a[1] * m[3];
        cplx t2 = a[2] * m[0] + a[3] * m[2];
        cplx t3 = a[2] * m[1] + a[3] * m[3];
        m[0] = t0;
        m[1] = t1;
        m[2] = t2;
        m[3] = t3;
        double s = std::sqrt(std::norm(m[0]) + std::norm(m[1]) + std::norm(m[2]) + std::norm(m[3]));
        if (!(s > 0.0) || !std::isfinite(s))
            throw NumericOverflow("lyapunov: product renormalization failed");
        logsum.add(std::log(s));
        double inv = 1.0 / s;
        for (auto& e : m) e *= inv;
        if ((k + 1) % stride == 0 && slot < kTailSlots) {
            double ln = logsum.sum + std::log(op_norm_cplx(m));
            out.tail[slot++] = ln / static_cast<double>(k + 1);
        }
        for (std::size_t j = 0; j < th.size(); ++j) {
            th[j] += kTwoPi * c.alpha[j];
            if (th[j] > kTwoPi * c.map.period) th[j] -= kTwoPi * c.map.period;
        }
    }
    out.value = (logsum.sum + std::log(op_norm_cplx(m))) / static_cast<double>(n);
    while (slot < kTailSlots) out.tail[slot++] = out.value;
    return out;
}

// --- rotation kernels --------------------------------------------------------

// Optimized: crossings of the vertical projective direction.  Transfer
// cocycles count unsigned (Sturm oscillation: nodes never unwind, correct
// through the hyperbolic region); generic real cocycles use the orientation
// of the crossing segment.
double rot_kernel_d1_fast(const ModePlan& plan, double theta0, long long n) {
    PhaseState ph;
    ph.init(theta0, plan.alpha1, plan.period);
    double vx = 1.0, vy = 0.0;
    long long cross = 0;
    double a[4];
    for (long long k = 0; k < n; ++k) {
        plan.eval_real(ph.z, a);
        double nx = a[0] * vx + a[1] * vy;
        double ny = a[2] * vx + a[3] * vy;
        if (nx < 0.0) {
            if (plan.sturm) {
                ++cross;
            } else {
                // near-collinear flips are exact half turns, oriented +pi to
                // extend the elliptic side continuously; the deadband keeps
                // rounding noise from flapping the count
                double cr = vx * ny - vy * nx;
                double scale = 1e-12 * (vx * vx + vy * vy + nx * nx + ny * ny);
                cross += cr >= -scale ? 1 : -1;
            }
            nx = -nx;
            ny = -ny;
        }
        if (((k + 1) & 15) == 0) {
            double s = 1.0 / std::sqrt(nx * nx + ny * ny);
            nx *= s;
            ny *= s;
        }
        vx = nx;
        vy = ny;
        ph.advance();
    }
    double r = std::fabs(static_cast<double>(cross)) / (2.0 * static_cast<double>(n));
    return std::min(r, 0.5);
}

// Reference: continuously lifted angle increments on the projective line.
double rot_kernel_generic(const Cocycle& c, const std::vector<double>& theta0, long long n) {
    std::vector<double> th = theta0;
    double vx = 1.0, vy = 0.0;
    Kahan wind;
    for (long long k = 0; k < n; ++k) {
        auto a = torusmap::eval_entries(c.map, th);
        double a0 = a[0].real(), a1 = a[1].real(), a2 = a[2].real(), a3 = a[3].real();
        double nx = a0 * vx + a1 * vy;
        double ny = a2 * vx + a3 * vy;
        wind.add(std::atan2(vx * ny - vy * nx, vx * nx + vy * ny));
        double s = 1.0 / std::sqrt(nx * nx + ny * ny);
        vx = nx * s;
        vy = ny * s;
        for (std::size_t j = 0; j < th.size(); ++j) {
            th[j] += kTwoPi * c.alpha[j];
            if (th[j] > kTwoPi * c.map.period) th[j] -= kTwoPi * c.map.period;
        }
    }
    double r = std::fabs(wind.sum) / (kTwoPi * static_cast<double>(n));
    return std::min(r, 0.5);
}

LyapunovEstimate assemble_le(const std::vector<SampleResult>& rs, long long n, int samples) {
    LyapunovEstimate est;
    est.n_iters = n;
    est.theta_samples = samples;
    Kahan mean;
    for (const auto& r : rs) mean.add(r.value);
    est.value = mean.sum / samples;

    long long stride = std::max<long long>(1, n / kTailSlots);
    for (int s = 0; s < kTailSlots; ++s) {
        Kahan m;
        for (const auto& r : rs) m.add(r.tail[s]);
        est.convergence_tail.emplace_back(stride * (s + 1), m.sum / samples);
    }
    double lo = est.value, hi = est.value;
    for (int s = kTailSlots - 4; s < kTailSlots; ++s) {
        lo = std::min(lo, est.convergence_tail[s].second);
        hi = std::max(hi, est.convergence_tail[s].second);
    }
    double var = 0.0;
    for (const auto& r : rs) var += (r.value - est.value) * (r.value - est.value);
    var /= std::max(1, samples - 1);
    est.error_bar = 0.5 * (hi - lo) + std::sqrt(var / samples);
    return est;
}

}  // namespace

Cocycle Cocycle::constant(const std::vector<double>& alpha, const Mat2& a) {
    Cocycle c;
    c.alpha = alpha;
    c.map = TorusPoly::constant_grp(a, static_cast<int>(alpha.size()));
    c.domain = a.tag == mat2::GroupTag::SL2R ? DomainKind::real : DomainKind::complex;
    return c;
}

LyapunovEstimate lyapunov(const Cocycle& c, long long n_iters, int theta_samples,
                          std::uint64_t seed, Exec exec) {
    if (n_iters < 1) throw Error("lyapunov: n_iters must be >= 1");
    theta_samples = std::max(1, theta_samples);
    ModePlan plan = ModePlan::build(c);
    auto pts = sample_points(c, theta_samples, n_iters, seed);
    std::vector<SampleResult> rs(pts.size());
    std::exception_ptr err;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
#endif
    for (std::size_t i = 0; i < pts.size(); ++i) {
        try {
            if (plan.d1 && plan.real_ok)
                rs[i] = le_kernel_d1_real(plan, pts[i][0], n_iters);
            else if (plan.d1)
                rs[i] = le_kernel_d1_cplx(plan, pts[i][0], n_iters);
            else
                rs[i] = le_kernel_generic(c, pts[i], n_iters);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return assemble_le(rs, n_iters, theta_samples);
}

LyapunovEstimate lyapunov_complex_energy(const Cocycle& c, long long n_iters, int theta_samples,
                                         std::uint64_t seed, Exec exec) {
    return lyapunov(c, n_iters, theta_samples, seed, exec);
}

LyapunovEstimate lyapunov_reference(const Cocycle& c, long long n_iters, int theta_samples,
                                    std::uint64_t seed) {
    theta_samples = std::max(1, theta_samples);
    auto pts = sample_points(c, theta_samples, n_iters, seed);
    std::vector<SampleResult> rs(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) rs[i] = le_kernel_generic(c, pts[i], n_iters);
    return assemble_le(rs, n_iters, theta_samples);
}

double rotation_number(const Cocycle& c, bool homotopic_to_identity, long long n_iters,
                       int theta_samples, std::uint64_t seed, Exec exec) {
    if (c.domain != DomainKind::real)
        throw PreconditionFailed("rotation_number: real cocycle required");
    if (!homotopic_to_identity && c.map.dim == 1 && c.map.mode_count() > 1) {
        if (column_degree(c) != 0)
            throw HomotopyObstruction("rotation_number: cocycle not homotopic to a constant");
    }
    theta_samples = std::max(1, theta_samples);
    ModePlan plan = ModePlan::build(c);
    auto pts = sample_points(c, theta_samples, n_iters, seed);
    std::vector<double> vals(pts.size(), 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
#endif
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (plan.d1 && plan.real_ok)
            vals[i] = rot_kernel_d1_fast(plan, pts[i][0], n_iters);
        else
            vals[i] = rot_kernel_generic(c, pts[i], n_iters);
    }
    Kahan mean;
    for (double v : vals) mean.add(v);
    return mean.sum / static_cast<double>(vals.size());
}

double rotation_number_reference(const Cocycle& c, long long n_iters, int theta_samples,
                                 std::uint64_t seed) {
    if (c.domain != DomainKind::real)
        throw PreconditionFailed("rotation_number: real cocycle required");
    theta_samples = std::max(1, theta_samples);
    auto pts = sample_points(c, theta_samples, n_iters, seed);
    Kahan mean;
    for (const auto& p : pts) mean.add(rot_kernel_generic(c, p, n_iters));
    return mean.sum / static_cast<double>(pts.size());
}

int column_degree(const Cocycle& c, int grid) {
    if (c.map.dim != 1) throw Error("column_degree: implemented for d = 1");
    double span = kTwoPi * c.map.period;
    double px = 0, py = 0;
    Kahan wind;
    for (int g = 0; g <= grid; ++g) {
        auto v = torusmap::eval_entries(c.map, {span * g / grid});
        double x = v[0].real(), y = v[2].real();
        if (g > 0) wind.add(std::atan2(px * y - py * x, px * x + py * y));
        px = x;
        py = y;
    }
    return static_cast<int>(std::lround(wind.sum / kTwoPi));
}

namespace {

inline double proj_angle(double x, double y) {
    double a = std::atan2(y, x);
    if (a < 0.0) a += 3.14159265358979323846;
    if (a >= 3.14159265358979323846) a -= 3.14159265358979323846;
    return a;
}

inline double proj_dist(double a, double b) {
    double d = std::fabs(a - b);
    d = std::fmod(d, 3.14159265358979323846);
    return std::min(d, 3.14159265358979323846 - d);
}

}  // namespace

UhResult is_uniformly_hyperbolic(const Cocycle& c, int horizon, int grid, Exec exec) {
    if (c.domain != DomainKind::real)
        throw PreconditionFailed("is_uniformly_hyperbolic: real cocycle required");
    if (horizon < 1) throw Error("is_uniformly_hyperbolic: horizon must be >= 1");
    constexpr double kPi = 3.14159265358979323846;
    constexpr double kMargin = 1.05;

    ModePlan plan = ModePlan::build(c);
    const double span = kTwoPi * c.map.period;
    UhResult res;

    std::vector<std::array<double, 4>> prod(grid);
    std::vector<double> udir(grid);

    for (int n = 1; n <= horizon; n *= 2) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
#endif
        for (int g = 0; g < grid; ++g) {
            // cone images only need the product up to positive scale, so the
            // running product is renormalized freely
            double m00 = 1, m01 = 0, m10 = 0, m11 = 1;
            for (int k = 0; k < n; ++k) {
                long double u = static_cast<long double>(g) / grid +
                                static_cast<long double>(c.alpha[0]) / c.map.period * k;
                u -= std::floor(static_cast<double>(u));
                double x = span * static_cast<double>(u);
                double a[4];
                if (plan.d1 && plan.real_ok) {
                    plan.eval_real(std::polar(1.0, x / c.map.period), a);
                } else {
                    auto v = torusmap::eval_entries(c.map, {x});
                    a[0] = v[0].real();
                    a[1] = v[1].real();
                    a[2] = v[2].real();
                    a[3] = v[3].real();
                }
                double t00 = a[0] * m00 + a[1] * m10;
                double t01 = a[0] * m01 + a[1] * m11;
                double t10 = a[2] * m00 + a[3] * m10;
                double t11 = a[2] * m01 + a[3] * m11;
                m00 = t00;
                m01 = t01;
                m10 = t10;
                m11 = t11;
                if (((k + 1) & 15) == 0) {
                    double s = 1.0 / std::sqrt(m00 * m00 + m01 * m01 + m10 * m10 + m11 * m11);
                    m00 *= s;
                    m01 *= s;
                    m10 *= s;
                    m11 *= s;
                }
            }
            prod[g] = {m00, m01, m10, m11};
            // leading right-singular direction of M via M^T M
            double p = m00 * m00 + m10 * m10;
            double q = m00 * m01 + m10 * m11;
            double r = m01 * m01 + m11 * m11;
            double half = 0.5 * (p - r);
            double lam = half + std::sqrt(half * half + q * q);  // shift of largest eigenvalue
            double ex, ey;
            if (std::fabs(q) > 1e-300) {
                ex = lam;
                ey = q;
                double s = std::hypot(ex, ey);
                ex /= s;
                ey /= s;
            } else {
                ex = p >= r ? 1.0 : 0.0;
                ey = p >= r ? 0.0 : 1.0;
            }
            double wx = m00 * ex + m01 * ey;
            double wy = m10 * ex + m11 * ey;
            udir[g] = proj_angle(wx, wy);
        }

        // circular mean of doubled angles (serial, deterministic)
        double cs = 0.0, sn = 0.0;
        for (int g = 0; g < grid; ++g) {
            cs += std::cos(2.0 * udir[g]);
            sn += std::sin(2.0 * udir[g]);
        }
        double center = 0.5 * std::atan2(sn, cs);
        if (center < 0.0) center += kPi;
        double dev = 0.0;
        for (int g = 0; g < grid; ++g) dev = std::max(dev, proj_dist(udir[g], center));

        for (double w : {dev * 1.5 + 0.01, dev * 3.0 + 0.05, kPi / 4.0, kPi / 3.0}) {
            if (w >= kPi / 2.0) continue;
            bool ok = true;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(&& : ok) if (exec == Exec::parallel)
#endif
            for (int g = 0; g < grid; ++g) {
                if (!ok) continue;
                bool local = true;
                for (double off : {-w, -0.5 * w, 0.0, 0.5 * w, w}) {
                    double d = center + off;
                    double dx = std::cos(d), dy = std::sin(d);
                    double ix = prod[g][0] * dx + prod[g][1] * dy;
                    double iy = prod[g][2] * dx + prod[g][3] * dy;
                    if (proj_dist(proj_angle(ix, iy), center) > w / kMargin) {
                        local = false;
                        break;
                    }
                }
                ok = ok && local;
            }
            if (ok) {
                res.verdict = Verdict::UH;
                res.witness_n = n;
                res.cone_center = center;
                res.cone_halfwidth = w;
                return res;
            }
        }
    }

    long long n_le = std::max<long long>(4000, 16LL * horizon);
    res.le_estimate = lyapunov(c, n_le, 8, 12345, exec).value;
    double thresh = std::max(0.02, 3.0 * std::log(static_cast<double>(grid)) / horizon);
    res.verdict = res.le_estimate < thresh ? Verdict::not_UH : Verdict::inconclusive;
    return res;
}

}  // namespace qpkam::dynamics
