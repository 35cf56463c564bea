#include "qpkam/torusmap.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <mutex>
#include <sstream>

namespace qpkam::torusmap {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kSmoothShape = 9.0;  // fixed kernel shape, independent of k

int stored_l1(const FreqVec& n) {
    int s = 0;
    for (int v : n) s += std::abs(v);
    return s;
}

std::mutex g_fftw_mutex;

// In-place d-dimensional complex DFT, FFTW row-major layout (last index
// contiguous).  sign = FFTW_BACKWARD synthesizes e^{+2 pi i mk/G} sums.
void fft_inplace(std::vector<cplx>& buf, const std::vector<int>& dims, int sign) {
    std::lock_guard<std::mutex> lk(g_fftw_mutex);
    fftw_plan plan =
        fftw_plan_dft(static_cast<int>(dims.size()), dims.data(),
                      reinterpret_cast<fftw_complex*>(buf.data()),
                      reinterpret_cast<fftw_complex*>(buf.data()), sign, FFTW_ESTIMATE);
    if (!plan) throw Error("fftw plan creation failed");
    fftw_execute(plan);
    fftw_destroy_plan(plan);
}

std::size_t grid_size(int dim, int grid) {
    std::size_t t = 1;
    for (int i = 0; i < dim; ++i) t *= static_cast<std::size_t>(grid);
    return t;
}

// Multi-indices beta with |beta|_1 <= total (includes beta = 0).
void for_each_multiindex(int dim, int total, std::vector<int>& beta, int coord,
                         const std::function<void(const std::vector<int>&)>& fn) {
    if (coord == dim) {
        fn(beta);
        return;
    }
    int used = 0;
    for (int i = 0; i < coord; ++i) used += beta[i];
    for (int v = 0; v + used <= total; ++v) {
        beta[coord] = v;
        for_each_multiindex(dim, total, beta, coord + 1, fn);
    }
    beta[coord] = 0;
}

mat2::GroupTag grp_from_alg(mat2::AlgebraTag t) {
    switch (t) {
        case mat2::AlgebraTag::sl2R: return mat2::GroupTag::SL2R;
        case mat2::AlgebraTag::su11: return mat2::GroupTag::SU11;
        default: return mat2::GroupTag::SL2C;
    }
}

mat2::AlgebraTag alg_from_grp(mat2::GroupTag t) {
    switch (t) {
        case mat2::GroupTag::SL2R: return mat2::AlgebraTag::sl2R;
        case mat2::GroupTag::SU11: return mat2::AlgebraTag::su11;
        default: return mat2::AlgebraTag::sl2C;
    }
}

double entries_max_abs(const std::array<cplx, 4>& v) {
    double m = 0.0;
    for (const auto& e : v) m = std::max(m, std::abs(e));
    return m;
}

}  // namespace

TorusPoly TorusPoly::zero_alg(int dim, mat2::AlgebraTag tag, int period) {
    TorusPoly f;
    f.dim = dim;
    f.period = period;
    f.kind = ValueKind::algebra;
    f.alg_tag = tag;
    f.grp_tag = grp_from_alg(tag);
    return f;
}

TorusPoly TorusPoly::constant_alg(const Alg2& v, int dim, int period) {
    TorusPoly f = zero_alg(dim, v.tag, period);
    f.set_coeff(FreqVec(dim, 0), v.a);
    return f;
}

TorusPoly TorusPoly::constant_grp(const Mat2& v, int dim, int period) {
    TorusPoly f;
    f.dim = dim;
    f.period = period;
    f.kind = ValueKind::group;
    f.grp_tag = v.tag;
    f.alg_tag = alg_from_grp(v.tag);
    f.set_coeff(FreqVec(dim, 0), v.a);
    return f;
}

void TorusPoly::set_coeff(const FreqVec& n, const std::array<cplx, 4>& v) {
    if (static_cast<int>(n.size()) != dim) throw Error("TorusPoly: frequency dimension mismatch");
    coeffs[n] = v;
}

void TorusPoly::add_coeff(const FreqVec& n, const std::array<cplx, 4>& v) {
    if (static_cast<int>(n.size()) != dim) throw Error("TorusPoly: frequency dimension mismatch");
    auto& c = coeffs[n];
    for (int i = 0; i < 4; ++i) c[i] += v[i];
}

const std::array<cplx, 4>* TorusPoly::coeff(const FreqVec& n) const {
    auto it = coeffs.find(n);
    return it == coeffs.end() ? nullptr : &it->second;
}

double TorusPoly::freq_l1(const FreqVec& n) const {
    return static_cast<double>(stored_l1(n)) / period;
}

double TorusPoly::support_radius() const {
    double r = 0.0;
    for (const auto& [n, v] : coeffs) r = std::max(r, freq_l1(n));
    return r;
}

std::array<cplx, 4> eval_entries(const TorusPoly& f, const std::vector<double>& theta,
                                 const std::vector<double>* im_shift) {
    if (static_cast<int>(theta.size()) != f.dim) throw Error("eval: theta dimension mismatch");
    std::array<cplx, 4> out{};
    for (const auto& [n, v] : f.coeffs) {
        double ph = 0.0, decay = 0.0;
        for (int j = 0; j < f.dim; ++j) {
            ph += n[j] * theta[j];
            if (im_shift) decay += n[j] * (*im_shift)[j];
        }
        ph /= f.period;
        decay /= f.period;
        cplx w = std::polar(std::exp(-decay), ph);
        for (int i = 0; i < 4; ++i) out[i] += v[i] * w;
    }
    return out;
}

Alg2 eval_alg(const TorusPoly& f, const std::vector<double>& theta,
              const std::vector<double>* im_shift) {
    auto v = eval_entries(f, theta, im_shift);
    return Alg2(v[0], v[1], v[2], v[3], f.alg_tag);
}

Mat2 eval_grp(const TorusPoly& f, const std::vector<double>& theta,
              const std::vector<double>* im_shift) {
    auto v = eval_entries(f, theta, im_shift);
    return Mat2(v[0], v[1], v[2], v[3], f.grp_tag);
}

TruncatePair truncate(const TorusPoly& f, double N) {
    TruncatePair p;
    p.low = f;
    p.low.coeffs.clear();
    p.tail = p.low;
    for (const auto& [n, v] : f.coeffs) {
        if (f.freq_l1(n) < N)
            p.low.coeffs.emplace(n, v);
        else
            p.tail.coeffs.emplace(n, v);
    }
    return p;
}

StripNorm strip_norm(const TorusPoly& f, double r, NormKind kind, int grid) {
    if (r < 0.0) throw Error("strip_norm: negative radius");
    StripNorm out{r, 0.0, kind};
    if (kind == NormKind::coefficient_upper_bound) {
        double s = 0.0;
        for (const auto& [n, v] : f.coeffs)
            s += mat2::op_norm(Mat2(v[0], v[1], v[2], v[3])) * std::exp(r * f.freq_l1(n));
        out.value = s;
        return out;
    }
    // Exact grid sup: evaluate on the real grid and on imaginary-shift
    // corners of magnitude r (1 - 1e-6).
    double best = 0.0;
    double rr = r * (1.0 - 1e-6);
    int corners = 1 << f.dim;
    for (int mask = -1; mask < corners; ++mask) {
        TorusPoly weighted = f;
        if (mask >= 0 && rr > 0.0) {
            for (auto& [n, v] : weighted.coeffs) {
                double decay = 0.0;
                for (int j = 0; j < f.dim; ++j)
                    decay += n[j] * (((mask >> j) & 1) ? rr : -rr);
                double w = std::exp(-decay / f.period);
                for (auto& e : v) e *= w;
            }
        } else if (mask >= 0) {
            continue;  // rr == 0 shifts duplicate the real grid
        }
        auto vals = synthesize(weighted, grid);
        for (const auto& v : vals)
            best = std::max(best, mat2::op_norm(Mat2(v[0], v[1], v[2], v[3])));
    }
    out.value = best;
    return out;
}

double strip_norm_ub(const TorusPoly& f, double r) {
    return strip_norm(f, r, NormKind::coefficient_upper_bound).value;
}

double sup_norm_grid(const TorusPoly& f, int grid) {
    return strip_norm(f, 0.0, NormKind::exact_grid_sup, grid).value;
}

double ck_norm(const TorusPoly& f, int k, int grid) {
    if (k < 0) throw Error("ck_norm: negative order");
    double best = 0.0;
    std::vector<int> beta(f.dim, 0);
    for_each_multiindex(f.dim, k, beta, 0, [&](const std::vector<int>& b) {
        TorusPoly d = f;
        for (auto& [n, v] : d.coeffs) {
            cplx w(1.0);
            for (int j = 0; j < f.dim; ++j) {
                cplx im(0.0, static_cast<double>(n[j]) / f.period);
                for (int t = 0; t < b[j]; ++t) w *= im;
            }
            for (auto& e : v) e *= w;
        }
        auto vals = synthesize(d, grid);
        for (const auto& v : vals)
            best = std::max(best, mat2::op_norm(Mat2(v[0], v[1], v[2], v[3])));
    });
    return best;
}

TorusPoly smooth_approx(const TorusPoly& f, long long j) {
    if (j < 1) throw Error("smooth_approx: j must be positive");
    if (!f.is_algebra()) throw PreconditionFailed("smooth_approx: algebra-valued input required");
    TorusPoly out = f;
    for (auto& [n, v] : out.coeffs) {
        double x = f.freq_l1(n) / static_cast<double>(j);
        if (x <= 1.0) continue;
        double w = std::exp(-kSmoothShape * (x - 1.0) * (x - 1.0));
        for (auto& e : v) e *= w;
    }
    prune(out, 1e-300);
    return out;
}

ApproxConstants measure_approx_constants(const TorusPoly& f, int k, long long j_min,
                                         long long j_max) {
    ApproxConstants r;
    double fk = ck_norm(f, k);
    if (fk == 0.0) return r;
    TorusPoly prev = smooth_approx(f, j_min);
    for (long long j = j_min; j < j_max; ++j) {
        r.c_strip = std::max(r.c_strip, strip_norm_ub(prev, 1.0 / j) / fk);
        TorusPoly next = smooth_approx(f, j + 1);
        double tele = strip_norm_ub(sub(next, prev), 1.0 / (j + 1));
        r.c_telescope = std::max(r.c_telescope, tele * std::pow(double(j), k) / fk);
        prev = std::move(next);
    }
    r.c_strip = std::max(r.c_strip, strip_norm_ub(prev, 1.0 / j_max) / fk);
    r.ck_residual = ck_norm(sub(prev, f), k);
    return r;
}

double cauchy_ck_bound(double strip_value, double r, int k0) {
    if (!(r > 0.0)) throw DegenerateStrip("cauchy_ck_bound: r must be positive");
    if (k0 < 0) throw Error("cauchy_ck_bound: negative order");
    return std::tgamma(static_cast<double>(k0) + 1.0) * std::pow(r, -k0) * strip_value;
}

namespace {
void check_compatible(const TorusPoly& a, const TorusPoly& b) {
    if (a.dim != b.dim) throw Error("TorusPoly: dimension mismatch");
    if (a.kind != b.kind) throw Error("TorusPoly: value kind mismatch");
}
}  // namespace

TorusPoly add(const TorusPoly& a, const TorusPoly& b) {
    check_compatible(a, b);
    if (a.period != b.period) {
        if (a.period == 1) return add(lift_period2(a), b);
        return add(a, lift_period2(b));
    }
    TorusPoly out = a;
    for (const auto& [n, v] : b.coeffs) out.add_coeff(n, v);
    out.alg_tag = a.alg_tag == b.alg_tag ? a.alg_tag : mat2::AlgebraTag::sl2C;
    out.grp_tag = a.grp_tag == b.grp_tag ? a.grp_tag : mat2::GroupTag::GL2C;
    return out;
}

TorusPoly sub(const TorusPoly& a, const TorusPoly& b) { return add(a, scale(b, cplx(-1.0))); }

TorusPoly scale(const TorusPoly& a, cplx s) {
    TorusPoly out = a;
    for (auto& [n, v] : out.coeffs)
        for (auto& e : v) e *= s;
    return out;
}

TorusPoly shift(const TorusPoly& f, const std::vector<double>& alpha) {
    if (static_cast<int>(alpha.size()) != f.dim) throw Error("shift: alpha dimension mismatch");
    TorusPoly out = f;
    for (auto& [n, v] : out.coeffs) {
        long double x = 0.0L;
        for (int j = 0; j < f.dim; ++j) x += static_cast<long double>(n[j]) * alpha[j];
        x /= f.period;
        x -= std::floor(static_cast<double>(x));  // reduce before multiplying by 2 pi
        cplx w = std::polar(1.0, kTwoPi * static_cast<double>(x));
        for (auto& e : v) e *= w;
    }
    return out;
}

TorusPoly conj_by_const(const Mat2& p, const TorusPoly& f) {
    Mat2 pinv = p.inverse();
    TorusPoly out = f;
    for (auto& [n, v] : out.coeffs) {
        Mat2 m(v[0], v[1], v[2], v[3]);
        Mat2 r = p * m * pinv;
        v = r.a;
    }
    return out;
}

TorusPoly lift_period2(const TorusPoly& f) {
    if (f.period == 2) return f;
    TorusPoly out = f;
    out.period = 2;
    out.coeffs.clear();
    for (const auto& [n, v] : f.coeffs) {
        FreqVec m = n;
        for (auto& x : m) x *= 2;
        out.coeffs.emplace(std::move(m), v);
    }
    return out;
}

TorusPoly to_su11(const TorusPoly& f) {
    bool ok = f.is_algebra() ? f.alg_tag == mat2::AlgebraTag::sl2R
                             : f.grp_tag == mat2::GroupTag::SL2R;
    if (!ok) throw TagMismatch("torusmap::to_su11: expected sl2R-valued map");
    const cplx i(0.0, 1.0);
    const cplx k = cplx(1.0) / cplx(1.0, 1.0);
    Mat2 m(k, -i * k, k, i * k, mat2::GroupTag::SL2C);
    TorusPoly out = conj_by_const(m, f);
    out.alg_tag = mat2::AlgebraTag::su11;
    out.grp_tag = mat2::GroupTag::SU11;
    return out;
}

TorusPoly to_sl2r(const TorusPoly& f) {
    bool ok = f.is_algebra() ? f.alg_tag == mat2::AlgebraTag::su11
                             : f.grp_tag == mat2::GroupTag::SU11;
    if (!ok) throw TagMismatch("torusmap::to_sl2r: expected su11-valued map");
    const cplx i(0.0, 1.0);
    const cplx k = cplx(1.0) / cplx(1.0, 1.0);
    Mat2 minv(i * k, i * k, -k, k, mat2::GroupTag::SL2C);
    TorusPoly out = conj_by_const(minv, f);
    out.alg_tag = mat2::AlgebraTag::sl2R;
    out.grp_tag = mat2::GroupTag::SL2R;
    return out;
}

int auto_grid(const TorusPoly& a, const TorusPoly* b, int min_grid, int max_grid) {
    int period = std::max(a.period, b ? b->period : 1);
    double s = a.support_radius() * period;
    if (b) s += b->support_radius() * period;
    // Supports add under products and grow slowly under exp/log; resolve
    // four times over.
    double need = 4.0 * s + 8.0;
    int g = min_grid;
    while (g < need && g < max_grid) g <<= 1;
    if (g < need) throw TooLarge("auto_grid: support exceeds the maximum grid");
    return g;
}

std::vector<std::array<cplx, 4>> synthesize(const TorusPoly& f, int grid) {
    if (grid < 2) throw Error("synthesize: grid too small");
    std::size_t total = grid_size(f.dim, grid);
    std::vector<int> dims(f.dim, grid);
    std::vector<std::array<cplx, 4>> out(total, std::array<cplx, 4>{});
    std::vector<cplx> buf(total);
    for (int ch = 0; ch < 4; ++ch) {
        std::fill(buf.begin(), buf.end(), cplx(0.0));
        for (const auto& [n, v] : f.coeffs) {
            if (v[ch] == cplx(0.0)) continue;
            std::size_t idx = 0;
            for (int j = 0; j < f.dim; ++j) {
                int m = n[j];
                if (m <= -grid / 2 || m >= grid / 2)
                    throw TooLarge("synthesize: mode outside grid bandwidth");
                int pos = m >= 0 ? m : m + grid;
                idx = idx * grid + static_cast<std::size_t>(pos);
            }
            buf[idx] += v[ch];
        }
        fft_inplace(buf, dims, FFTW_BACKWARD);
        for (std::size_t i = 0; i < total; ++i) out[i][ch] = buf[i];
    }
    return out;
}

TorusPoly analyze(const std::vector<std::array<cplx, 4>>& values, const TorusPoly& prototype,
                  int grid, double prune_tol) {
    std::size_t total = grid_size(prototype.dim, grid);
    if (values.size() != total) throw Error("analyze: value count does not match grid");
    std::vector<int> dims(prototype.dim, grid);
    std::vector<std::vector<cplx>> chans(4, std::vector<cplx>(total));
    double scale_inv = 1.0 / static_cast<double>(total);
    for (int ch = 0; ch < 4; ++ch) {
        auto& buf = chans[ch];
        for (std::size_t i = 0; i < total; ++i) buf[i] = values[i][ch];
        fft_inplace(buf, dims, FFTW_FORWARD);
        for (auto& e : buf) e *= scale_inv;
    }
    double maxmag = 0.0;
    for (int ch = 0; ch < 4; ++ch)
        for (const auto& e : chans[ch]) maxmag = std::max(maxmag, std::abs(e));
    double floor_abs = std::max(maxmag * prune_tol, 1e-300);

    TorusPoly out = prototype;
    out.coeffs.clear();
    FreqVec n(prototype.dim, 0);
    std::vector<int> idx(prototype.dim, 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (int j = prototype.dim - 1; j >= 0; --j) {
            idx[j] = static_cast<int>(rem % grid);
            rem /= grid;
        }
        std::array<cplx, 4> v{chans[0][flat], chans[1][flat], chans[2][flat], chans[3][flat]};
        if (entries_max_abs(v) <= floor_abs) continue;
        for (int j = 0; j < prototype.dim; ++j)
            n[j] = idx[j] < grid / 2 ? idx[j] : idx[j] - grid;
        out.coeffs.emplace(n, v);
    }
    return out;
}

namespace {
TorusPoly pointwise_binary(const TorusPoly& a, const TorusPoly& b, int grid,
                           ValueKind out_kind) {
    if (a.dim != b.dim) throw Error("pointwise: dimension mismatch");
    if (a.period != b.period) {
        if (a.period == 1) return pointwise_binary(lift_period2(a), b, grid, out_kind);
        return pointwise_binary(a, lift_period2(b), grid, out_kind);
    }
    if (grid == 0) grid = auto_grid(a, &b);
    auto va = synthesize(a, grid);
    auto vb = synthesize(b, grid);
    for (std::size_t i = 0; i < va.size(); ++i) {
        Mat2 x(va[i][0], va[i][1], va[i][2], va[i][3]);
        Mat2 y(vb[i][0], vb[i][1], vb[i][2], vb[i][3]);
        va[i] = (x * y).a;
    }
    TorusPoly proto = a;
    proto.kind = out_kind;
    proto.grp_tag = a.grp_tag == b.grp_tag ? a.grp_tag : mat2::GroupTag::GL2C;
    return analyze(va, proto, grid, 3e-16);
}
}  // namespace

TorusPoly mul_pointwise(const TorusPoly& a, const TorusPoly& b, int grid) {
    return pointwise_binary(a, b, grid, ValueKind::group);
}

TorusPoly mul_coeff(const TorusPoly& a, const TorusPoly& b, double rel_prune) {
    if (a.dim != b.dim) throw Error("mul_coeff: dimension mismatch");
    if (a.period != b.period) {
        if (a.period == 1) return mul_coeff(lift_period2(a), b, rel_prune);
        return mul_coeff(a, lift_period2(b), rel_prune);
    }
    TorusPoly out = a;
    out.coeffs.clear();
    out.grp_tag = a.grp_tag == b.grp_tag ? a.grp_tag : mat2::GroupTag::GL2C;
    out.alg_tag = a.alg_tag == b.alg_tag ? a.alg_tag : mat2::AlgebraTag::sl2C;
    FreqVec n(a.dim);
    for (const auto& [na, va] : a.coeffs) {
        for (const auto& [nb, vb] : b.coeffs) {
            for (int j = 0; j < a.dim; ++j) n[j] = na[j] + nb[j];
            std::array<cplx, 4> prod = {va[0] * vb[0] + va[1] * vb[2], va[0] * vb[1] + va[1] * vb[3],
                                        va[2] * vb[0] + va[3] * vb[2], va[2] * vb[1] + va[3] * vb[3]};
            out.add_coeff(n, prod);
        }
    }
    double maxmag = 0.0;
    for (const auto& [nn, v] : out.coeffs) maxmag = std::max(maxmag, entries_max_abs(v));
    prune(out, std::max(maxmag * rel_prune, 1e-300));
    return out;
}

TorusPoly exp_pointwise(const TorusPoly& f, int grid) {
    if (!f.is_algebra()) throw PreconditionFailed("exp_pointwise: algebra-valued input required");
    if (grid == 0) grid = auto_grid(f);
    auto vals = synthesize(f, grid);
    for (auto& v : vals) {
        Mat2 m = mat2::exp_alg(Alg2(v[0], v[1], v[2], v[3], f.alg_tag));
        v = m.a;
    }
    TorusPoly proto = f;
    proto.kind = ValueKind::group;
    proto.grp_tag = grp_from_alg(f.alg_tag);
    return analyze(vals, proto, grid, 3e-16);
}

TorusPoly log_pointwise(const TorusPoly& g, int grid) {
    if (g.is_algebra()) throw PreconditionFailed("log_pointwise: group-valued input required");
    if (grid == 0) grid = auto_grid(g);
    auto vals = synthesize(g, grid);
    for (auto& v : vals) {
        Alg2 x = mat2::log_group(Mat2(v[0], v[1], v[2], v[3], g.grp_tag));
        v = x.a;
    }
    TorusPoly proto = g;
    proto.kind = ValueKind::algebra;
    proto.alg_tag = alg_from_grp(g.grp_tag);
    return analyze(vals, proto, grid, 3e-16);
}

TorusPoly inverse_pointwise(const TorusPoly& g, int grid) {
    if (g.is_algebra()) throw PreconditionFailed("inverse_pointwise: group-valued input required");
    if (grid == 0) grid = auto_grid(g);
    auto vals = synthesize(g, grid);
    for (auto& v : vals) {
        Mat2 m = Mat2(v[0], v[1], v[2], v[3], g.grp_tag).inverse();
        v = m.a;
    }
    return analyze(vals, g, grid, 3e-16);
}

void prune(TorusPoly& f, double tol) {
    for (auto it = f.coeffs.begin(); it != f.coeffs.end();) {
        if (entries_max_abs(it->second) <= tol)
            it = f.coeffs.erase(it);
        else
            ++it;
    }
}

double reality_defect(const TorusPoly& f) {
    double d = 0.0;
    FreqVec neg;
    bool su11 = f.is_algebra() ? f.alg_tag == mat2::AlgebraTag::su11
                               : f.grp_tag == mat2::GroupTag::SU11;
    for (const auto& [n, v] : f.coeffs) {
        neg = n;
        for (auto& x : neg) x = -x;
        const auto* w = f.coeff(neg);
        std::array<cplx, 4> wz{};
        if (!w) w = &wz;
        if (su11) {
            if (f.is_algebra()) {
                // [[it, v],[conj v, -it]]: a11(-n) = -conj(a11(n)), a22 = -a11,
                // a21(n) = conj(a12(-n)).
                d = std::max(d, std::abs(v[0] + std::conj((*w)[0])));
                d = std::max(d, std::abs(v[3] + v[0]));
                d = std::max(d, std::abs(v[2] - std::conj((*w)[1])));
            } else {
                // [[a, b],[conj b, conj a]]: a22(n) = conj(a11(-n)), a21(n) = conj(a12(-n)).
                d = std::max(d, std::abs(v[3] - std::conj((*w)[0])));
                d = std::max(d, std::abs(v[2] - std::conj((*w)[1])));
            }
        } else {
            for (int i = 0; i < 4; ++i) d = std::max(d, std::abs(v[i] - std::conj((*w)[i])));
        }
    }
    return d;
}

TorusPoly reality_project(const TorusPoly& f) {
    bool su11 = f.is_algebra() ? f.alg_tag == mat2::AlgebraTag::su11
                               : f.grp_tag == mat2::GroupTag::SU11;
    TorusPoly out = f;
    out.coeffs.clear();
    FreqVec neg;
    for (const auto& [n, v] : f.coeffs) {
        neg = n;
        for (auto& x : neg) x = -x;
        const auto* w = f.coeff(neg);
        std::array<cplx, 4> wz{};
        if (!w) w = &wz;
        std::array<cplx, 4> s;
        if (su11 && f.is_algebra()) {
            // fixed points of X -> -G X^* G pointwise (G = diag(1,-1))
            s[0] = 0.5 * (v[0] - std::conj((*w)[0]));
            s[1] = 0.5 * (v[1] + std::conj((*w)[2]));
            s[2] = 0.5 * (v[2] + std::conj((*w)[1]));
            s[3] = 0.5 * (v[3] - std::conj((*w)[3]));
        } else if (su11) {
            // group span [[a, b],[conj b, conj a]]: fixed points of swap-conj
            s[0] = 0.5 * (v[0] + std::conj((*w)[3]));
            s[1] = 0.5 * (v[1] + std::conj((*w)[2]));
            s[2] = 0.5 * (v[2] + std::conj((*w)[1]));
            s[3] = 0.5 * (v[3] + std::conj((*w)[0]));
        } else {
            for (int i = 0; i < 4; ++i) s[i] = 0.5 * (v[i] + std::conj((*w)[i]));
        }
        out.coeffs.emplace(n, s);
    }
    prune(out, 1e-300);
    return out;
}

TorusPoly compress_period(const TorusPoly& f, double* odd_mass) {
    if (odd_mass) *odd_mass = 0.0;
    if (f.period != 2) return f;
    TorusPoly out = f;
    out.period = 1;
    out.coeffs.clear();
    for (const auto& [n, v] : f.coeffs) {
        bool even = true;
        for (int x : n) even = even && (x % 2 == 0);
        if (!even) {
            if (odd_mass) *odd_mass = std::max(*odd_mass, entries_max_abs(v));
            continue;
        }
        FreqVec half = n;
        for (auto& x : half) x /= 2;
        out.coeffs.emplace(std::move(half), v);
    }
    return out;
}

std::string to_text(const TorusPoly& f) {
    std::ostringstream os;
    os << "torus_poly v1\n";
    os << "dim " << f.dim << "\n";
    os << "period " << f.period << "\n";
    os << "kind " << (f.is_algebra() ? "algebra" : "group") << "\n";
    const char* tag = nullptr;
    if (f.is_algebra()) {
        switch (f.alg_tag) {
            case mat2::AlgebraTag::sl2R: tag = "sl2R"; break;
            case mat2::AlgebraTag::su11: tag = "su11"; break;
            case mat2::AlgebraTag::sl2C: tag = "sl2C"; break;
        }
    } else {
        switch (f.grp_tag) {
            case mat2::GroupTag::SL2R: tag = "SL2R"; break;
            case mat2::GroupTag::SU11: tag = "SU11"; break;
            case mat2::GroupTag::SL2C: tag = "SL2C"; break;
            case mat2::GroupTag::GL2C: tag = "GL2C"; break;
        }
    }
    os << "tag " << tag << "\n";
    os << "modes " << f.coeffs.size() << "\n";
    char num[32];
    for (const auto& [n, v] : f.coeffs) {
        for (int j = 0; j < f.dim; ++j) os << n[j] << " ";
        for (int i = 0; i < 4; ++i) {
            std::snprintf(num, sizeof num, "%.17g", v[i].real());
            os << " " << num;
            std::snprintf(num, sizeof num, "%.17g", v[i].imag());
            os << " " << num;
        }
        os << "\n";
    }
    return os.str();
}

TorusPoly from_text(const std::string& text) {
    std::istringstream is(text);
    std::string word, word2;
    is >> word >> word2;
    if (word != "torus_poly" || word2 != "v1") throw ParseError("torus_poly: bad header");
    TorusPoly f;
    std::size_t modes = 0;
    is >> word >> f.dim >> word2 >> f.period;
    if (word != "dim" || word2 != "period") throw ParseError("torus_poly: bad header fields");
    std::string kind, tag;
    is >> word >> kind >> word2 >> tag;
    if (word != "kind" || word2 != "tag") throw ParseError("torus_poly: bad kind/tag fields");
    f.kind = kind == "algebra" ? ValueKind::algebra : ValueKind::group;
    if (tag == "sl2R") f.alg_tag = mat2::AlgebraTag::sl2R;
    else if (tag == "su11") f.alg_tag = mat2::AlgebraTag::su11;
    else if (tag == "sl2C") f.alg_tag = mat2::AlgebraTag::sl2C;
    else if (tag == "SL2R") f.grp_tag = mat2::GroupTag::SL2R;
    else if (tag == "SU11") f.grp_tag = mat2::GroupTag::SU11;
    else if (tag == "SL2C") f.grp_tag = mat2::GroupTag::SL2C;
    else if (tag == "GL2C") f.grp_tag = mat2::GroupTag::GL2C;
    else throw ParseError("torus_poly: unknown tag " + tag);
    if (f.is_algebra())
        f.grp_tag = grp_from_alg(f.alg_tag);
    else
        f.alg_tag = alg_from_grp(f.grp_tag);
    is >> word >> modes;
    if (word != "modes") throw ParseError("torus_poly: bad modes field");
    for (std::size_t k = 0; k < modes; ++k) {
        FreqVec n(f.dim);
        for (int j = 0; j < f.dim; ++j) is >> n[j];
        std::array<cplx, 4> v;
        for (int i = 0; i < 4; ++i) {
            double re, im;
            is >> re >> im;
            v[i] = cplx(re, im);
        }
        if (!is) throw ParseError("torus_poly: truncated mode table");
        f.coeffs.emplace(std::move(n), v);
    }
    return f;
}

}  // namespace qpkam::torusmap
