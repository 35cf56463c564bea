#include "qpkam/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace qpkam::schrodinger {

using dynamics::Cocycle;
using dynamics::Verdict;
using mat2::GroupTag;
using torusmap::TorusPoly;
using torusmap::ValueKind;

namespace {
char g_num[64];
const char* num17(double v) {
    std::snprintf(g_num, sizeof g_num, "%.17g", v);
    return g_num;
}
const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::UH: return "UH";
        case Verdict::not_UH: return "not_UH";
        default: return "inconclusive";
    }
}
}  // namespace

SchrodingerModel SchrodingerModel::amo(double lambda, const DiophantineFrequency& dc) {
    SchrodingerModel m;
    m.lambda = lambda;
    m.alpha = dc;
    m.V = TorusPoly::zero_alg(1, mat2::AlgebraTag::sl2R);
    // 2 cos x = e^{ix} + e^{-ix}
    m.V.set_coeff({1}, {cplx(1.0), 0, 0, 0});
    m.V.set_coeff({-1}, {cplx(1.0), 0, 0, 0});
    return m;
}

SchrodingerModel SchrodingerModel::free_model(const DiophantineFrequency& dc) {
    SchrodingerModel m;
    m.lambda = 0.0;
    m.alpha = dc;
    m.V = TorusPoly::zero_alg(1, mat2::AlgebraTag::sl2R);
    return m;
}

namespace {
std::pair<double, double> scalar_range(const TorusPoly& v, int grid = 4096) {
    if (v.mode_count() == 0) return {0.0, 0.0};
    auto vals = torusmap::synthesize(v, grid);
    double lo = 1e300, hi = -1e300;
    for (const auto& e : vals) {
        lo = std::min(lo, e[0].real());
        hi = std::max(hi, e[0].real());
    }
    return {lo, hi};
}
}  // namespace

double SchrodingerModel::v_inf() const { return scalar_range(V).first; }
double SchrodingerModel::v_sup() const { return scalar_range(V).second; }

std::pair<double, double> SchrodingerModel::spectrum_window() const {
    auto [lo, hi] = scalar_range(V);
    double a = lambda >= 0 ? lambda * lo : lambda * hi;
    double b = lambda >= 0 ? lambda * hi : lambda * lo;
    return {-2.0 + a, 2.0 + b};
}

Cocycle schrodinger_cocycle(const SchrodingerModel& m, cplx energy) {
    TorusPoly map;
    map.dim = m.V.dim;
    map.period = 1;
    map.kind = ValueKind::group;
    bool real_e = energy.imag() == 0.0;
    map.grp_tag = real_e ? GroupTag::SL2R : GroupTag::SL2C;
    map.set_coeff(torusmap::FreqVec(map.dim, 0), {-energy, cplx(-1.0), cplx(1.0), cplx(0.0)});
    for (const auto& [n, v] : m.V.coeffs) {
        if (std::abs(v[0]) == 0.0) continue;
        map.add_coeff(n, {m.lambda * v[0], 0, 0, 0});
    }
    Cocycle c;
    c.alpha = m.alpha.alpha;
    c.map = std::move(map);
    c.domain = real_e ? dynamics::DomainKind::real : dynamics::DomainKind::complex;
    return c;
}

double ids(const SchrodingerModel& m, double energy, long long n_iters, int samples,
           std::uint64_t seed, Exec exec) {
    Cocycle c = schrodinger_cocycle(m, energy);
    double rho = dynamics::rotation_number(c, true, n_iters, samples, seed, exec);
    return std::clamp(2.0 * rho, 0.0, 1.0);
}

SpectralCurve spectral_sweep(const SchrodingerModel& m, const std::vector<double>& e_grid,
                             const SweepBudget& budget, Exec exec) {
    for (std::size_t i = 1; i < e_grid.size(); ++i)
        if (!(e_grid[i] > e_grid[i - 1])) throw Error("spectral_sweep: E grid must be sorted");

    SpectralCurve out;
    out.energies = e_grid;
    std::size_t n = e_grid.size();
    out.L.assign(n, 0.0);
    out.L_err.assign(n, 0.0);
    out.N.assign(n, 0.0);
    out.uh.assign(n, Verdict::inconclusive);

    std::vector<std::string> errs(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
#endif
    for (std::size_t i = 0; i < n; ++i) {
        try {
            Cocycle c = schrodinger_cocycle(m, e_grid[i]);
            auto le = dynamics::lyapunov(c, budget.n_iters, budget.samples,
                                         split_seed(budget.seed, 2 * i), Exec::serial);
            out.L[i] = le.value;
            out.L_err[i] = le.error_bar;
            double rho = dynamics::rotation_number(c, true, budget.n_iters, budget.samples,
                                                   split_seed(budget.seed, 2 * i + 1),
                                                   Exec::serial);
            out.N[i] = std::clamp(2.0 * rho, 0.0, 1.0);
            if (budget.with_uh)
                out.uh[i] = dynamics::is_uniformly_hyperbolic(c, budget.uh_horizon,
                                                              budget.uh_grid, Exec::serial)
                                .verdict;
        } catch (const std::exception& e) {
            errs[i] = e.what();
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!errs[i].empty())
            out.flags.push_back("point " + std::to_string(i) + " failed: " + errs[i]);

    // monotonicity post-check: flag, never repair
    for (std::size_t i = 1; i < n; ++i) {
        if (out.N[i] < out.N[i - 1] - 1e-6)
            out.flags.push_back("ids_monotonicity_violation at E=" +
                                std::to_string(e_grid[i]));
    }
    return out;
}

std::string SpectralCurve::to_csv() const {
    std::ostringstream os;
    os << "E,L,L_err,N,uh_verdict\n";
    for (std::size_t i = 0; i < energies.size(); ++i) {
        os << num17(energies[i]) << ",";
        os << num17(L[i]) << ",";
        os << num17(L_err[i]) << ",";
        os << num17(N[i]) << ",";
        os << verdict_name(uh[i]) << "\n";
    }
    return os.str();
}

ThoulessResult thouless_check(const SpectralCurve& curve, double energy, double coarse_tol) {
    const auto& e = curve.energies;
    if (e.size() < 3) throw GridTooCoarse("thouless_check: curve too short");

    // local spacing near E must resolve the log singularity
    double spacing = 0.0;
    for (std::size_t i = 1; i < e.size(); ++i) {
        if ((e[i - 1] <= energy && energy <= e[i]) ||
            std::fabs(e[i] - energy) < 2.0 * (e[i] - e[i - 1]))
            spacing = std::max(spacing, e[i] - e[i - 1]);
    }
    if (energy >= e.front() && energy <= e.back() && spacing > coarse_tol)
        throw GridTooCoarse("thouless_check: grid spacing above tolerance near E");

    // sum over cells: dN uniform on each cell, log integrated exactly;
    // antiderivative of ln|E - t| in t is -( (E-t) ln|E-t| - (E-t) )
    auto prim = [energy](double t) {
        double x = energy - t;
        if (x == 0.0) return 0.0;
        return -(x * std::log(std::fabs(x)) - x);
    };
    Kahan acc;
    for (std::size_t i = 1; i < e.size(); ++i) {
        double dn = curve.N[i] - curve.N[i - 1];
        if (dn == 0.0) continue;
        double cell = (prim(e[i]) - prim(e[i - 1])) / (e[i] - e[i - 1]);
        acc.add(dn * cell);
    }

    ThoulessResult r;
    r.L_thouless = acc.sum;
    // direct value: linear interpolation of the sampled L
    if (energy <= e.front()) {
        r.L_direct = curve.L.front();
    } else if (energy >= e.back()) {
        r.L_direct = curve.L.back();
    } else {
        auto it = std::upper_bound(e.begin(), e.end(), energy);
        std::size_t i = static_cast<std::size_t>(it - e.begin());
        double t = (energy - e[i - 1]) / (e[i] - e[i - 1]);
        r.L_direct = (1.0 - t) * curve.L[i - 1] + t * curve.L[i];
    }
    r.defect = std::fabs(r.L_direct - r.L_thouless);
    return r;
}

HolderFit holder_fit(const SchrodingerModel& m, double e0, const std::vector<double>& eps_grid,
                     HolderTarget target, const FitBudget& budget, Exec exec) {
    if (eps_grid.size() < 3) throw Error("holder_fit: need at least three eps points");
    double span = eps_grid.back() / eps_grid.front();
    if (!(span >= 100.0 || span <= 0.01))
        throw PreconditionFailed("holder_fit: eps grid must span at least two decades");

    HolderFit fit;
    fit.E0 = e0;
    fit.target = target;

    std::size_t n = eps_grid.size();
    std::vector<double> diff(n, 0.0);
    double l_base = 0.0;
    if (target == HolderTarget::LE_imag) {
        l_base = dynamics::lyapunov(schrodinger_cocycle(m, e0), budget.n_iters, budget.samples,
                                    split_seed(budget.seed, 999), exec)
                     .value;
    }

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
#endif
    for (std::size_t i = 0; i < n; ++i) {
        double eps = eps_grid[i];
        if (target == HolderTarget::IDS) {
            double np = ids(m, e0 + eps, budget.n_iters, budget.samples,
                            split_seed(budget.seed, 2 * i), Exec::serial);
            double nm = ids(m, e0 - eps, budget.n_iters, budget.samples,
                            split_seed(budget.seed, 2 * i + 1), Exec::serial);
            diff[i] = np - nm;
        } else {
            auto le = dynamics::lyapunov_complex_energy(
                schrodinger_cocycle(m, cplx(e0, eps)), budget.n_iters, budget.samples,
                split_seed(budget.seed, 2 * i), Exec::serial);
            diff[i] = le.value - l_base;
        }
    }

    // inside a gap the IDS differences vanish identically
    if (target == HolderTarget::IDS) {
        bool flat = true;
        for (double d : diff) flat = flat && std::fabs(d) <= 1e-8;
        if (flat) {
            fit.locally_constant = true;
            fit.beta = std::numeric_limits<double>::infinity();
            fit.n_points = 0;
            fit.dropped = static_cast<int>(n);
            return fit;
        }
    }

    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < n; ++i) {
        if (diff[i] <= budget.noise_floor) {
            ++fit.dropped;
            continue;
        }
        lx.push_back(std::log(eps_grid[i]));
        ly.push_back(std::log(diff[i]));
    }
    if (lx.size() < 3)
        throw SignalBelowNoise("holder_fit: fewer than three points above the noise floor " +
                               std::to_string(budget.noise_floor));

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    double k = static_cast<double>(lx.size());
    double beta = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    double b0 = (sy - beta * sx) / k;
    fit.beta = beta;
    fit.C = std::exp(b0);
    fit.n_points = static_cast<int>(lx.size());
    double rss = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        double res = ly[i] - (beta * lx[i] + b0);
        fit.residuals.push_back(res);
        rss += res * res;
    }
    fit.residual_rms = std::sqrt(rss / k);
    return fit;
}

std::string HolderFit::to_json() const {
    std::ostringstream os;
    os << "{\"E0\": " << num17(E0);
    os << ", \"target\": \"" << (target == HolderTarget::IDS ? "IDS" : "LE_imag") << "\"";
    if (locally_constant) {
        os << ", \"beta\": \"infinity\", \"locally_constant\": true";
    } else {
        os << ", \"beta\": " << num17(beta);
        os << ", \"C\": " << num17(C);
    }
    os << ", \"n_points\": " << n_points;
    os << ", \"dropped\": " << dropped;
    os << ", \"residual_rms\": " << num17(residual_rms);
    os << "}";
    return os.str();
}

GapEdge locate_gap_edge(const SchrodingerModel& m, double inside_e, double outside_e,
                        double tol_e, long long n_iters, std::uint64_t seed, Exec exec) {
    // gap predicate: positive Lyapunov exponent beyond the noise band
    auto le_at = [&](double e, long long n) {
        return dynamics::lyapunov(schrodinger_cocycle(m, e), n, 2, seed, exec).value;
    };
    GapEdge edge;
    edge.le_inside = le_at(inside_e, n_iters / 4);
    edge.gap_label = ids(m, inside_e, n_iters / 4, 2, seed, exec);
    double floor0 = std::max(1e-4, 0.05 * edge.le_inside);

    double a = inside_e, b = outside_e;
    while (std::fabs(b - a) > tol_e) {
        double mid = 0.5 * (a + b);
        // escalate iterations as the bracket narrows (the LE shrinks like
        // sqrt of the distance into the gap)
        double dist = std::fabs(b - a);
        long long n = std::min<long long>(
            8 * n_iters, static_cast<long long>(n_iters * std::max(1.0, 1e-3 / dist)));
        double le = le_at(mid, std::max<long long>(n_iters / 4, n));
        if (le > floor0 * std::sqrt(std::fabs(mid - b) / std::max(std::fabs(inside_e - b), 1e-300)))
            a = mid;  // still inside the gap
        else
            b = mid;
    }
    edge.energy = 0.5 * (a + b);

    // plateau cross-check: N just inside must match the gap label
    double n_in = ids(m, a, n_iters, 2, seed + 1, exec);
    if (std::fabs(n_in - edge.gap_label) > 5e-4)
        throw Error("locate_gap_edge: rotation-number plateau lost during refinement");
    return edge;
}

double free_ids_exact(double energy) {
    if (energy <= -2.0) return 0.0;
    if (energy >= 2.0) return 1.0;
    return std::acos(-energy / 2.0) / 3.14159265358979323846;
}

double free_le_exact(cplx energy) {
    cplx s = std::sqrt(energy * energy - 4.0);
    cplx mu = (energy + s) / 2.0;
    if (std::abs(mu) < 1.0) mu = (energy - s) / 2.0;
    return std::max(0.0, std::log(std::abs(mu)));
}

std::string curve_svg(const SpectralCurve& curve) {
    const int w = 900, h = 620, pad = 50, panel = 250;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\">\n";
    if (curve.energies.empty()) {
        os << "</svg>\n";
        return os.str();
    }
    double e0 = curve.energies.front(), e1 = curve.energies.back();
    double lmax = 1e-9;
    for (double v : curve.L) lmax = std::max(lmax, v);
    auto xmap = [&](double e) { return pad + (e - e0) / (e1 - e0) * (w - 2 * pad); };

    // gap shading from UH verdicts (both panels)
    for (int p = 0; p < 2; ++p) {
        int top = pad + p * (panel + 60);
        for (std::size_t i = 0; i + 1 < curve.energies.size(); ++i) {
            if (curve.uh[i] == Verdict::UH) {
                os << "<rect x=\"" << xmap(curve.energies[i]) << "\" y=\"" << top << "\" width=\""
                   << xmap(curve.energies[i + 1]) - xmap(curve.energies[i]) << "\" height=\""
                   << panel << "\" fill=\"#f4d9d9\"/>\n";
            }
        }
        os << "<rect x=\"" << pad << "\" y=\"" << top << "\" width=\"" << w - 2 * pad
           << "\" height=\"" << panel << "\" fill=\"none\" stroke=\"#444\"/>\n";
    }

    auto polyline = [&](const std::vector<double>& ys, int top, double ymax, const char* color) {
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < curve.energies.size(); ++i) {
            double y = top + panel - std::clamp(ys[i] / ymax, 0.0, 1.0) * panel;
            os << xmap(curve.energies[i]) << "," << y << " ";
        }
        os << "\"/>\n";
    };
    polyline(curve.N, pad, 1.0, "#1f77b4");
    polyline(curve.L, pad + panel + 60, lmax, "#d62728");
    os << "<text x=\"" << pad << "\" y=\"" << pad - 10 << "\">N(E)</text>\n";
    os << "<text x=\"" << pad << "\" y=\"" << pad + panel + 50 << "\">L(E), max "
       << lmax << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

}  // namespace qpkam::schrodinger
