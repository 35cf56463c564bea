#include "qpkam/presets.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace qpkam::presets {

using mat2::Alg2;
using mat2::AlgebraTag;
using mat2::cplx;
using mat2::GroupTag;
using mat2::Mat2;
using schrodinger::SchrodingerModel;
using torusmap::TorusPoly;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

struct Rng {
    std::uint64_t state, counter = 0;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    double unit() { return seed_to_unit(split_seed(state, counter++)); }
    double uniform(double a, double b) { return a + (b - a) * unit(); }
    double log_uniform(double a, double b) {
        return std::exp(uniform(std::log(a), std::log(b)));
    }
    int pick(int n) { return static_cast<int>(unit() * n) % n; }
};

void add_check(SuiteResult& r, const std::string& name, double value, double bound,
               bool less_equal = true) {
    CheckLine c;
    c.name = name;
    c.value = value;
    c.bound = bound;
    c.pass = less_equal ? value <= bound : value >= bound;
    r.checks.push_back(c);
}

Alg2 random_sl2r_alg(Rng& rng) {
    double x = rng.uniform(-1, 1), y = rng.uniform(-1, 1), z = rng.uniform(-1, 1);
    return Alg2(x, y + z, y - z, -x, AlgebraTag::sl2R);
}

TorusPoly random_real_poly(Rng& rng, int max_mode, double target_strip, double r) {
    TorusPoly f = TorusPoly::zero_alg(1, AlgebraTag::sl2R);
    for (int n = 1; n <= max_mode; ++n) {
        Alg2 x = random_sl2r_alg(rng);
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

Mat2 random_sl2r_mat(Rng& rng, double max_norm) {
    double a = rng.uniform(0, kTwoPi), b = rng.uniform(0, kTwoPi);
    double lam = rng.uniform(0.0, std::log(max_norm));
    Mat2 d(std::exp(lam), 0, 0, std::exp(-lam), GroupTag::SL2R);
    Mat2 m = mat2::rotation(a) * d * mat2::rotation(b);
    m.tag = GroupTag::SL2R;
    return m;
}

std::vector<double> geom_grid(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i)
        v[i] = a * std::pow(b / a, static_cast<double>(i) / (n - 1));
    return v;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

// rotation angles whose resonance margin over |n| <= band clears `floor`
std::vector<double> screened_angles(const arith::DiophantineFrequency& dc, int band,
                                    double floor_margin) {
    std::vector<double> out;
    for (double cand = 0.3; cand < 1.5; cand += 0.003) {
        double worst = 1e9;
        for (int n = -band; n <= band; ++n) {
            if (n == 0) continue;
            worst = std::min(worst, arith::angle_dist(2.0L * cand -
                                                      kTwoPi * 1.0L * n *
                                                          static_cast<long double>(dc.alpha[0])));
        }
        if (worst > floor_margin) out.push_back(cand);
    }
    return out;
}

}  // namespace

arith::DiophantineFrequency golden_dc(long long nmax) {
    auto res = arith::verify_dc({arith::golden_mean()}, 0.2, 1.5, nmax);
    if (!res.passed) throw Error("golden_dc: verification failed");
    return res.frequency.value();
}

SuiteResult removal_lemma_suite(int instances, std::uint64_t seed) {
    Timer timer;
    SuiteResult r;
    r.name = "removal_lemma_contracts";
    auto dc = golden_dc(100000);
    Rng rng(seed);
    kam::KamParams params = kam::KamParams::desk_defaults();

    double worst_y = 0, worst_gre = 0, worst_defect = 0;
    int converged = 0;
    for (int inst = 0; inst < instances; ++inst) {
        double eps = rng.log_uniform(1e-12, 1e-6);
        double radius = rng.uniform(0.05, 0.5);
        Mat2 a = mat2::to_su11(random_sl2r_mat(rng, 2.0));
        double a_norm = mat2::op_norm(a);
        double eta = 13.0 * a_norm * a_norm * std::sqrt(eps);
        TorusPoly g =
            torusmap::to_su11(random_real_poly(rng, 2 + rng.pick(8), eps, radius));

        kam::NreMask mask;  // sigma-floor at eta
        mask.kind = kam::NreMask::Kind::sigma_floor;
        auto red = kam::nonresonant_reduce(a, g, radius, eta, eps, dc, mask, params);
        ++converged;
        worst_y = std::max(worst_y, red.diag.y_strip / std::sqrt(eps));
        worst_gre = std::max(worst_gre, red.diag.gre_strip / (2.0 * eps));

        // direct grid oracle for the conjugacy identity
        int grid = 512;
        auto yv = torusmap::synthesize(red.Y, grid);
        auto ysv = torusmap::synthesize(torusmap::shift(red.Y, dc.alpha), grid);
        auto gv = torusmap::synthesize(g, grid);
        auto rv = torusmap::synthesize(red.g_re, grid);
        for (int i = 0; i < grid; ++i) {
            auto wrap = [](const std::array<cplx, 4>& e) {
                return Alg2(e[0], e[1], e[2], e[3], AlgebraTag::su11);
            };
            Mat2 lhs = mat2::exp_alg(wrap(ysv[i])) * a * mat2::exp_alg(wrap(gv[i])) *
                       mat2::exp_alg(wrap(yv[i]) * cplx(-1.0));
            Mat2 rhs = a * mat2::exp_alg(wrap(rv[i]));
            worst_defect = std::max(worst_defect, mat2::dist(lhs, rhs));
        }
    }
    add_check(r, "instances converged", converged, instances, false);
    add_check(r, "max |Y|_r / eps^{1/2}", worst_y, 1.0);
    add_check(r, "max |g_re|_r / (2 eps)", worst_gre, 1.0);
    add_check(r, "max conjugacy defect", worst_defect, 1e-10);
    r.seconds = timer.seconds();
    add_check(r, "runtime seconds", r.seconds, 60.0);
    return r;
}

SuiteResult step_certificate_suite(int steps, std::uint64_t seed) {
    Timer timer;
    SuiteResult r;
    r.name = "step_branch_certificates";
    auto dc = golden_dc();
    Rng rng(seed);
    kam::KamParams params = kam::KamParams::desk_defaults();
    const double sigma = params.sigma;

    auto angles = screened_angles(dc, 24, 0.05);
    if (angles.empty()) throw Error("step_certificate_suite: no screened angles");

    int n_res = steps * 3 / 10;
    int n_non = steps - n_res;

    double worst_fplus = 0, worst_achange = 0, worst_bdev = 0, worst_defect = 0;
    int non_ok = 0;
    for (int i = 0; i < n_non; ++i) {
        double eps = rng.log_uniform(1e-6, 3e-6);
        double radius = 0.4 + 0.2 * rng.unit();
        double rp = radius / 2.0;
        Mat2 a = mat2::rotation(angles[rng.pick(static_cast<int>(angles.size()))]);
        TorusPoly f = random_real_poly(rng, 6, eps, radius);
        auto step = kam::kam_step(a, f, radius, rp, params, dc);
        if (step.branch != kam::Branch::nonresonant) continue;
        ++non_ok;
        double e_in = step.certs.eps_in;
        worst_fplus = std::max(worst_fplus, step.certs.f_plus_strip /
                                                (4.0 * std::pow(e_in, 3.0 - 2.0 * sigma)));
        worst_achange =
            std::max(worst_achange, step.certs.a_change / (2.0 * mat2::op_norm(a) * e_in));
        worst_bdev = std::max(worst_bdev, step.certs.b_strip_rp / std::sqrt(e_in));
        worst_defect = std::max(
            worst_defect,
            step.certs.conj_defect / (1e-8 * (1.0 + step.certs.b_sup * step.certs.b_sup)));
    }

    double worst_bsup = 0, worst_add = 0, worst_ftail = 0;
    int res_ok = 0;
    for (int i = 0; i < n_res; ++i) {
        double eps = rng.log_uniform(1e-6, 3e-6);
        double radius = 0.5, rp = 0.25;
        int site = 1 + rng.pick(5);
        if (rng.unit() < 0.5) site = -site;
        long double frac = site * static_cast<long double>(dc.alpha[0]);
        frac -= std::floor(static_cast<double>(frac));
        double rho = kPi * static_cast<double>(frac);
        // keep the constant safely elliptic
        if (std::fabs(std::sin(rho)) < 0.15) {
            --i;
            continue;
        }
        double delta = (rng.unit() < 0.4 ? 0.0 : rng.uniform(-1, 1) * std::pow(eps, 1.2));
        Mat2 a = mat2::rotation(rho + delta / 2.0);
        TorusPoly f = random_real_poly(rng, std::abs(site) + 1, eps, radius);
        auto step = kam::kam_step(a, f, radius, rp, params, dc);
        if (step.branch != kam::Branch::resonant) continue;
        ++res_ok;
        double e_in = step.certs.eps_in;
        worst_bsup = std::max(worst_bsup, step.certs.b_sup / std::pow(e_in, -sigma / 10.0));
        worst_add = std::max(worst_add, step.certs.a_dd_norm / (2.0 * std::pow(e_in, sigma)));
        worst_ftail =
            std::max(worst_ftail, step.certs.f_plus_strip / (0.5 * std::pow(e_in, 2.5)));
        worst_defect = std::max(
            worst_defect,
            step.certs.conj_defect / (1e-8 * (1.0 + step.certs.b_sup * step.certs.b_sup)));
    }

    add_check(r, "non-resonant steps taken", non_ok, n_non * 9 / 10, false);
    add_check(r, "max |f_+|_{r'} / 4 eps^{3-2s}", worst_fplus, 1.0);
    add_check(r, "max ||A_+ - A|| / 2||A||eps", worst_achange, 1.0);
    add_check(r, "max |B-Id|_{r'} / eps^{1/2}", worst_bdev, 1.0);
    add_check(r, "resonant steps taken", res_ok, n_res * 9 / 10, false);
    add_check(r, "max ||B||_0 / eps^{-s/10}", worst_bsup, 1.0);
    add_check(r, "max ||A''|| / 2 eps^s", worst_add, 1.0);
    add_check(r, "max |f_+| / (eps^{5/2}/2)", worst_ftail, 1.0);
    add_check(r, "max defect / allowance", worst_defect, 1.0);
    r.seconds = timer.seconds();
    add_check(r, "runtime seconds", r.seconds, 120.0);
    return r;
}

SuiteResult ledger_suite(int j_max) {
    Timer timer;
    SuiteResult r;
    r.name = "scale_ledger_paper_constants";
    kam::KamParams params = kam::KamParams::paper_defaults(1.5, 1.0);
    kam::LedgerInputs in;
    in.tau = 1.5;
    in.a_norm = 1.0;
    auto rep = kam::verify_scale_ledger(params, in, j_max);
    add_check(r, "k >= 5 D tau", params.k, 5.0 * params.D * in.tau, false);
    add_check(r, "seed scan over m >= 10", rep.seed_scan_ok ? 1 : 0, 1, false);
    static const char* names[4] = {"seed", "induction", "removal", "window"};
    for (int c = 0; c < 4; ++c) {
        double worst = 1e300;
        for (const auto& row : rep.chains[c]) worst = std::min(worst, row.slack);
        add_check(r, std::string("chain ") + names[c] + " min slack", worst, 0.0, false);
    }
    // window covering has no gaps <=> chain (iv) nonnegative, already checked
    r.artifacts.push_back(rep.to_text());
    r.seconds = timer.seconds();
    add_check(r, "runtime seconds", r.seconds, 1.0);
    return r;
}

SuiteResult multiscale_suite(std::uint64_t seed) {
    Timer timer;
    SuiteResult r;
    r.name = "multiscale_sharp_bound";
    auto dc = golden_dc();
    Rng rng(seed);
    kam::KamParams params = kam::KamParams::desk_defaults();
    auto sched = kam::ScaleSchedule::make(params, 3);

    int runs_done = 0;
    double worst_sharp = 0;
    bool decreasing = true;
    for (double rho : {1.1, 0.8, 1.3}) {
        Mat2 a = mat2::rotation(rho);
        TorusPoly f = TorusPoly::zero_alg(1, AlgebraTag::sl2R);
        for (int n = 1; n <= 25; ++n) {
            Alg2 x = random_sl2r_alg(rng);
            double w = 1.0 / std::pow(1.0 + n, 17);
            std::array<cplx, 4> v, vc;
            for (int k = 0; k < 4; ++k) {
                v[k] = 0.5 * w * x.a[k];
                vc[k] = std::conj(v[k]);
            }
            f.add_coeff({n}, v);
            f.add_coeff({-n}, vc);
        }
        double target = 0.4 * sched.eps[0];
        f = torusmap::scale(f, cplx(target / torusmap::strip_norm_ub(f, sched.radius[0])));

        auto cert = kam::kam_loop_ck(a, f, params, sched, dc, 3);
        if (cert.final_case != kam::FinalCase::almost_reduced ||
            cert.records.size() < 3)
            continue;
        ++runs_done;
        for (const auto& rec : cert.records)
            worst_sharp = std::max(worst_sharp, rec.sharp_product / (8.0 * cert.A0_norm));
        for (std::size_t j = 1; j < cert.records.size(); ++j)
            decreasing =
                decreasing && cert.records[j].f_tilde_sup < cert.records[j - 1].f_tilde_sup;
        r.artifacts.push_back(cert.to_text());
    }
    add_check(r, "completed runs (>= 3 scales)", runs_done, 3, false);
    add_check(r, "max |c_j| ||B||_0^2 / 8||A||", worst_sharp, 1.0);
    add_check(r, "||F~||_0 strictly decreasing", decreasing ? 1 : 0, 1, false);
    r.seconds = timer.seconds();
    add_check(r, "runtime seconds", r.seconds, 300.0);
    return r;
}

SuiteResult dynamics_oracles_suite() {
    Timer timer;
    SuiteResult r;
    r.name = "dynamics_oracles";
    auto dc = golden_dc(100000);

    auto diag = dynamics::Cocycle::constant(dc.alpha, Mat2(2, 0, 0, 0.5, GroupTag::SL2R));
    add_check(r, "|L(diag) - ln 2|",
              std::fabs(dynamics::lyapunov(diag, 4096, 4, 7).value - std::log(2.0)), 1e-9);
    auto rot = dynamics::Cocycle::constant(dc.alpha, mat2::rotation(1.234));
    add_check(r, "|L(rotation)|", std::fabs(dynamics::lyapunov(rot, 4096, 4, 7).value), 1e-9);

    auto free_m = SchrodingerModel::free_model(dc);
    auto c3 = schrodinger::schrodinger_cocycle(free_m, 3.0);
    double expect = std::log((3.0 + std::sqrt(5.0)) / 2.0);
    add_check(r, "|L(free,3) - ln((3+sqrt5)/2)| at 1e5 iterates",
              std::fabs(dynamics::lyapunov(c3, 100000, 4, 11).value - expect), 1e-4);

    auto grid = linspace(-3.0, 3.0, 101);
    schrodinger::SweepBudget budget;
    budget.n_iters = 300000;
    budget.samples = 2;
    budget.with_uh = false;
    auto curve = schrodinger::spectral_sweep(free_m, grid, budget);
    double sup = 0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        sup = std::max(sup, std::fabs(curve.N[i] - schrodinger::free_ids_exact(grid[i])));
    add_check(r, "sup |N - arccos(-E/2)/pi| on 101 points", sup, 1e-3);
    r.seconds = timer.seconds();
    add_check(r, "runtime seconds", r.seconds, 120.0);
    return r;
}

SuiteResult thouless_suite(Exec exec) {
    Timer timer;
    SuiteResult r;
    r.name = "thouless_consistency";
    auto dc = golden_dc();

    auto free_m = SchrodingerModel::free_model(dc);
    auto grid = linspace(-3.2, 3.2, 3201);
    schrodinger::SweepBudget budget;
    budget.n_iters = 200000;
    budget.samples = 2;
    budget.with_uh = false;
    auto curve = schrodinger::spectral_sweep(free_m, grid, budget, exec);
    add_check(r, "free defect at E=0", schrodinger::thouless_check(curve, 0.0).defect, 1e-2);
    add_check(r, "free defect at E=3", schrodinger::thouless_check(curve, 3.0).defect, 1e-2);

    auto amo = SchrodingerModel::amo(0.5, dc);
    auto curve2 = schrodinger::spectral_sweep(amo, grid, budget, exec);
    double worst = 0;
    for (double e : linspace(-2.5, 2.5, 50))
        worst = std::max(worst, schrodinger::thouless_check(curve2, e).defect);
    add_check(r, "AMO(0.5) max defect on 50 test energies", worst, 5e-2);
    r.seconds = timer.seconds();
    add_check(r, "runtime seconds", r.seconds, 600.0);
    return r;
}

namespace {

schrodinger::GapEdge amo_largest_gap_edge(const SchrodingerModel& amo, Exec exec) {
    // the widest gap of the half-coupling model carries the label alpha;
    // bracket it from a coarse curve, then refine by Lyapunov bisection
    auto grid = linspace(0.0, 1.6, 161);
    schrodinger::SweepBudget budget;
    budget.n_iters = 100000;
    budget.samples = 2;
    budget.with_uh = false;
    auto curve = schrodinger::spectral_sweep(amo, grid, budget, exec);
    double label = arith::golden_mean();
    double plateau_hi = 0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (std::fabs(curve.N[i] - label) < 1e-3) plateau_hi = grid[i];
    if (plateau_hi == 0) throw Error("amo gap edge: plateau not found");
    return schrodinger::locate_gap_edge(amo, plateau_hi - 0.02, plateau_hi + 0.25, 1e-8,
                                        2000000, 1, exec);
}

}  // namespace

SuiteResult sharp_exponent_suite(Exec exec) {
    Timer timer;
    SuiteResult r;
    r.name = "sharp_half_exponent";
    auto dc = golden_dc();

    // free band edge: exact location E0 = 2
    auto free_m = SchrodingerModel::free_model(dc);
    schrodinger::FitBudget budget;
    budget.n_iters = 4000000;
    budget.samples = 2;
    budget.noise_floor = 1e-6;
    auto fit_free = schrodinger::holder_fit(free_m, 2.0, geom_grid(1e-6, 1e-3, 13),
                                            schrodinger::HolderTarget::IDS, budget, exec);
    add_check(r, "|beta_free - 0.5|", std::fabs(fit_free.beta - 0.5), 0.05);
    r.artifacts.push_back(fit_free.to_json());

    // AMO half coupling, largest gap edge
    auto amo = SchrodingerModel::amo(0.5, dc);
    auto edge = amo_largest_gap_edge(amo, exec);
    auto fit_amo = schrodinger::holder_fit(amo, edge.energy, geom_grid(1e-6, 1e-3, 13),
                                           schrodinger::HolderTarget::IDS, budget, exec);
    add_check(r, "beta_amo lower", fit_amo.beta, 0.4, false);
    add_check(r, "beta_amo upper", fit_amo.beta, 0.6);
    r.artifacts.push_back(fit_amo.to_json());
    r.seconds = timer.seconds();
    add_check(r, "runtime seconds", r.seconds, 1200.0);
    return r;
}

SuiteResult le_halfline_suite(Exec exec) {
    Timer timer;
    SuiteResult r;
    r.name = "le_imaginary_halfline";
    auto dc = golden_dc();
    auto amo = SchrodingerModel::amo(0.25, dc);

    // ten spectrum energies: smallest finite-scale L across the window
    auto grid = linspace(-2.2, 2.2, 221);
    schrodinger::SweepBudget budget;
    budget.n_iters = 100000;
    budget.samples = 2;
    budget.with_uh = false;
    auto curve = schrodinger::spectral_sweep(amo, grid, budget, exec);
    std::vector<double> picks;
    for (int bin = 0; bin < 10; ++bin) {
        int lo = bin * 22, hi = lo + 22;
        double best = 1e9, arg = 0;
        for (int i = lo; i < hi && i < 221; ++i) {
            if (curve.L[i] < best) {
                best = curve.L[i];
                arg = grid[i];
            }
        }
        if (best < 5e-3) picks.push_back(arg);
    }
    add_check(r, "spectrum energies found", picks.size(), 10, false);

    schrodinger::FitBudget fitb;
    fitb.n_iters = 2000000;
    fitb.samples = 2;
    fitb.noise_floor = 1e-6;
    double min_slope = 1e9;
    std::ostringstream art;
    art << "E,slope\n";
    for (double e0 : picks) {
        auto fit = schrodinger::holder_fit(amo, e0, geom_grid(1e-4, 1e-2, 9),
                                           schrodinger::HolderTarget::LE_imag, fitb, exec);
        min_slope = std::min(min_slope, fit.beta);
        char line[64];
        std::snprintf(line, sizeof line, "%.6f,%.6f\n", e0, fit.beta);
        art << line;
    }
    add_check(r, "min fitted slope", min_slope, 0.45, false);
    r.artifacts.push_back(art.str());
    r.seconds = timer.seconds();
    add_check(r, "runtime seconds", r.seconds, 1200.0);
    return r;
}

SuiteResult determinism_suite() {
    Timer timer;
    SuiteResult r;
    r.name = "artifact_determinism";
    auto dc = golden_dc(100000);
    auto amo = SchrodingerModel::amo(0.25, dc);
    auto grid = linspace(-1.0, 1.0, 33);
    schrodinger::SweepBudget budget;
    budget.n_iters = 30000;
    budget.samples = 4;
    budget.with_uh = false;

    set_thread_cap(1);
    std::string csv1 = schrodinger::spectral_sweep(amo, grid, budget, Exec::parallel).to_csv();
    set_thread_cap(8);
    std::string csv8 = schrodinger::spectral_sweep(amo, grid, budget, Exec::parallel).to_csv();
    std::string csv8b = schrodinger::spectral_sweep(amo, grid, budget, Exec::parallel).to_csv();

    schrodinger::FitBudget fitb;
    fitb.n_iters = 50000;
    fitb.samples = 2;
    set_thread_cap(1);
    std::string js1 = schrodinger::holder_fit(amo, 0.1, geom_grid(1e-3, 1e-1, 7),
                                              schrodinger::HolderTarget::IDS, fitb)
                          .to_json();
    set_thread_cap(8);
    std::string js8 = schrodinger::holder_fit(amo, 0.1, geom_grid(1e-3, 1e-1, 7),
                                              schrodinger::HolderTarget::IDS, fitb)
                          .to_json();

    add_check(r, "csv identical across {1,8} threads", csv1 == csv8 ? 1 : 0, 1, false);
    add_check(r, "csv identical across repeat runs", csv8 == csv8b ? 1 : 0, 1, false);
    add_check(r, "json identical across {1,8} threads", js1 == js8 ? 1 : 0, 1, false);
    r.seconds = timer.seconds();
    add_check(r, "runtime seconds", r.seconds, 120.0);
    return r;
}

ReproResult repro_thm12(const std::string& preset, Exec exec) {
    ReproResult out;
    auto dc = golden_dc();
    schrodinger::FitBudget budget;
    budget.n_iters = 4000000;
    budget.samples = 2;
    budget.noise_floor = 1e-6;
    char line[160];

    if (preset == "free") {
        auto fit = schrodinger::holder_fit(SchrodingerModel::free_model(dc), 2.0,
                                           geom_grid(1e-6, 1e-3, 13),
                                           schrodinger::HolderTarget::IDS, budget, exec);
        out.artifacts.push_back({"holder_free_edge.json", fit.to_json() + "\n"});
        out.pass = std::fabs(fit.beta - 0.5) <= 0.05;
        std::snprintf(line, sizeof line, "free band edge: beta = %.4f (target 0.50 +- 0.05)",
                      fit.beta);
        out.summary = line;
    } else if (preset == "amo-half") {
        auto amo = SchrodingerModel::amo(0.5, dc);
        auto edge = amo_largest_gap_edge(amo, exec);
        auto fit = schrodinger::holder_fit(amo, edge.energy, geom_grid(1e-6, 1e-3, 13),
                                           schrodinger::HolderTarget::IDS, budget, exec);
        out.artifacts.push_back({"holder_amo_half_edge.json", fit.to_json() + "\n"});
        out.pass = fit.beta >= 0.4 && fit.beta <= 0.6;
        std::snprintf(line, sizeof line,
                      "amo lambda=0.5 gap edge E0 = %.8f: beta = %.4f (target [0.4, 0.6])",
                      edge.energy, fit.beta);
        out.summary = line;
        auto grid = linspace(-3.0, 3.0, 601);
        schrodinger::SweepBudget sb;
        sb.n_iters = 100000;
        sb.samples = 2;
        sb.with_uh = true;
        sb.uh_horizon = 128;
        sb.uh_grid = 512;
        auto curve = schrodinger::spectral_sweep(amo, grid, sb, exec);
        out.artifacts.push_back({"amo_half_curve.csv", curve.to_csv()});
        out.artifacts.push_back({"amo_half_curve.svg", schrodinger::curve_svg(curve)});
    } else {
        throw Error("repro thm12: unknown preset " + preset);
    }
    return out;
}

ReproResult repro_thm11(const std::string& preset, Exec exec) {
    if (preset != "amo-quarter") throw Error("repro thm11: unknown preset " + preset);
    auto res = le_halfline_suite(exec);
    ReproResult out;
    out.pass = res.pass();
    out.summary = "amo lambda=0.25: min LE-imaginary slope across 10 spectrum energies";
    out.artifacts.push_back(
        {"le_halfline_slopes.csv", res.artifacts.empty() ? "" : res.artifacts[0]});
    std::ostringstream os;
    os << "{\"criterion\": \"le_halfline\", \"pass\": " << (out.pass ? "true" : "false")
       << "}\n";
    out.artifacts.push_back({"le_halfline_verdict.json", os.str()});
    return out;
}

std::string format_report(const SuiteResult& r) {
    std::ostringstream os;
    os << "== " << r.name << " ==\n";
    for (const auto& c : r.checks) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "  %-44s  %12.6g  vs  %-12.6g  %s\n", c.name.c_str(),
                      c.value, c.bound, c.pass ? "ok" : "FAIL");
        os << buf;
    }
    return os.str();
}

}  // namespace qpkam::presets
