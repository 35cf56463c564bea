// Experiment runner: Diophantine checks, cocycle estimators, KAM runs, and
// the canned reproduction presets.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "qpkam/presets.hpp"

using namespace qpkam;
using schrodinger::SchrodingerModel;

namespace {

struct GlobalOpts {
    std::string out = ".";
    int threads = 0;
    std::uint64_t seed = 1;
};

struct ModelOpts {
    std::string model = "amo";
    double lambda = 0.5;
    double alpha = arith::golden_mean();
    double kappa = 0.2;
    double tau = 1.5;
    long long nmax = 2000000;

    SchrodingerModel build() const {
        auto res = arith::verify_dc({alpha}, kappa, tau, nmax);
        if (!res.passed)
            throw Error("model: alpha failed DC(kappa,tau) up to nmax; admissible kappa = " +
                        std::to_string(res.largest_admissible_kappa));
        if (model == "amo") return SchrodingerModel::amo(lambda, res.frequency.value());
        if (model == "free") return SchrodingerModel::free_model(res.frequency.value());
        throw Error("model: unknown preset " + model);
    }
};

std::uint64_t fnv_hash(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string g_config_line;  // canonical option string, hashed into artifacts

void write_artifact(const GlobalOpts& g, const std::string& name, const std::string& payload,
                    bool hash_comment = true) {
    std::filesystem::create_directories(g.out);
    std::filesystem::path p = std::filesystem::path(g.out) / name;
    std::ofstream os(p, std::ios::binary);
    if (!os) throw Error("cannot open output file " + p.string());
    char head[64];
    std::snprintf(head, sizeof head, "%016llx",
                  static_cast<unsigned long long>(fnv_hash(g_config_line)));
    if (hash_comment) {
        if (name.size() > 4 && name.substr(name.size() - 4) == ".svg")
            os << "<!-- config_hash " << head << " -->\n";
        else if (name.size() > 5 && name.substr(name.size() - 5) == ".json")
            os << "{\"config_hash\": \"" << head << "\"}\n";
        else
            os << "# config_hash " << head << "\n";
    }
    os << payload;
    std::cout << "wrote " << p.string() << "\n";
}

void add_model_opts(CLI::App* cmd, ModelOpts& m) {
    cmd->add_option("--model", m.model, "model preset: amo | free")->capture_default_str();
    cmd->add_option("--lambda", m.lambda, "coupling constant")->capture_default_str();
    cmd->add_option("--alpha", m.alpha, "frequency in (0,1)")->capture_default_str();
    cmd->add_option("--kappa", m.kappa, "Diophantine kappa")->capture_default_str();
    cmd->add_option("--tau", m.tau, "Diophantine tau")->capture_default_str();
    cmd->add_option("--nmax", m.nmax, "DC verification range")->capture_default_str();
}

std::vector<double> make_grid(double lo, double hi, int count) {
    if (count < 2 || !(hi > lo)) throw Error("grid: need count >= 2 and max > min");
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i) g[i] = lo + (hi - lo) * i / (count - 1);
    return g;
}

std::vector<double> make_geom_grid(double lo, double hi, int count) {
    if (count < 2 || !(hi > lo) || !(lo > 0)) throw Error("grid: need positive geometric range");
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i)
        g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
    return g;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantitative KAM almost reducibility for quasi-periodic SL(2,R) cocycles"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from an INI file");

    GlobalOpts g;
    app.add_option("--out", g.out, "artifact directory")->capture_default_str();
    app.add_option("--threads", g.threads, "worker thread cap (0 = library default)");
    app.add_option("--seed", g.seed, "master seed")->capture_default_str();

    int exit_code = 0;

    // ---- arith dc ----
    auto* arith_cmd = app.add_subcommand("arith", "Diophantine arithmetic");
    arith_cmd->fallthrough();
    auto* dc_cmd = arith_cmd->add_subcommand("dc", "verify DC(kappa,tau) up to nmax");
    dc_cmd->fallthrough();
    struct {
        double alpha = arith::golden_mean();
        double kappa = 0.2, tau = 1.5;
        long long nmax = 100000;
    } dco;
    dc_cmd->add_option("--alpha", dco.alpha)->capture_default_str();
    dc_cmd->add_option("--kappa", dco.kappa)->capture_default_str();
    dc_cmd->add_option("--tau", dco.tau)->capture_default_str();
    dc_cmd->add_option("--nmax", dco.nmax)->capture_default_str();
    auto run_dc = [&] {
        auto res = arith::verify_dc({dco.alpha}, dco.kappa, dco.tau, dco.nmax);
        std::cout << (res.passed ? "DC holds" : "DC FAILS") << "  alpha=" << dco.alpha
                  << " kappa=" << dco.kappa << " tau=" << dco.tau << " nmax=" << dco.nmax
                  << "  worst n=" << res.worst_n[0] << " dist=" << res.worst_dist
                  << " admissible_kappa=" << res.largest_admissible_kappa
                  << (res.cf_consistent ? "" : "  [convergent scan mismatch]") << "\n";
        if (!res.passed) exit_code = 1;
    };

    // ---- dyn le | rot | uh ----
    auto* dyn_cmd = app.add_subcommand("dyn", "cocycle estimators");
    dyn_cmd->fallthrough();
    ModelOpts dyn_model;
    struct {
        double emin = -3, emax = 3;
        int ecount = 61;
        long long n = 100000;
        int samples = 4;
        int horizon = 256, grid = 1024;
    } dyno;
    for (const char* sub : {"le", "rot", "uh"}) {
        auto* c = dyn_cmd->add_subcommand(sub);
        c->fallthrough();
        add_model_opts(c, dyn_model);
        c->add_option("--emin", dyno.emin)->capture_default_str();
        c->add_option("--emax", dyno.emax)->capture_default_str();
        c->add_option("--ecount", dyno.ecount)->capture_default_str();
        c->add_option("--n", dyno.n)->capture_default_str();
        c->add_option("--samples", dyno.samples)->capture_default_str();
        if (std::string(sub) == "uh") {
            c->add_option("--horizon", dyno.horizon)->capture_default_str();
            c->add_option("--grid", dyno.grid)->capture_default_str();
        }
    }
    auto run_dyn = [&] {
        auto model = dyn_model.build();
        auto grid = make_grid(dyno.emin, dyno.emax, dyno.ecount);
        std::ostringstream csv;
        csv << "parameter,value,error_bar,n_iters\n";
        char buf[160];
        for (std::size_t i = 0; i < grid.size(); ++i) {
            auto c = schrodinger::schrodinger_cocycle(model, grid[i]);
            if (dyn_cmd->got_subcommand("le")) {
                auto est = dynamics::lyapunov(c, dyno.n, dyno.samples, split_seed(g.seed, i));
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%lld\n", grid[i], est.value,
                              est.error_bar, est.n_iters);
            } else if (dyn_cmd->got_subcommand("rot")) {
                double rho = dynamics::rotation_number(c, true, dyno.n, dyno.samples,
                                                       split_seed(g.seed, i));
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,0,%lld\n", grid[i], rho, dyno.n);
            } else {
                auto v = dynamics::is_uniformly_hyperbolic(c, dyno.horizon, dyno.grid);
                std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%d\n", grid[i],
                              static_cast<int>(v.verdict), v.le_estimate, v.witness_n);
            }
            csv << buf;
        }
        const char* name = dyn_cmd->got_subcommand("le")
                               ? "dyn_le.csv"
                               : (dyn_cmd->got_subcommand("rot") ? "dyn_rot.csv" : "dyn_uh.csv");
        write_artifact(g, name, csv.str());
    };

    // ---- kam step | loop | ck ----
    auto* kam_cmd = app.add_subcommand("kam", "almost-reducibility runs");
    kam_cmd->fallthrough();
    struct {
        double rho = 1.1;
        double pert = 0.0;  // 0 = half of the first schedule epsilon
        int modes = 8;
        int scales = 3;
        std::string mode = "desk";
        double alpha = arith::golden_mean();
        double kappa = 0.2, tau = 1.5;
    } kamo;
    for (const char* sub : {"step", "loop", "ck"}) {
        auto* c = kam_cmd->add_subcommand(sub);
        c->fallthrough();
        c->add_option("--rho", kamo.rho, "rotation angle of the constant part")
            ->capture_default_str();
        c->add_option("--pert-eps", kamo.pert, "perturbation size (0 = schedule default)");
        c->add_option("--pert-modes", kamo.modes)->capture_default_str();
        c->add_option("--scales", kamo.scales)->capture_default_str();
        c->add_option("--mode", kamo.mode, "desk | paper-faithful")->capture_default_str();
        c->add_option("--alpha", kamo.alpha)->capture_default_str();
        c->add_option("--kappa", kamo.kappa)->capture_default_str();
        c->add_option("--tau", kamo.tau)->capture_default_str();
    }
    auto run_kam = [&] {
        auto res = arith::verify_dc({kamo.alpha}, kamo.kappa, kamo.tau, 2000000);
        if (!res.passed) throw Error("kam: frequency failed the DC check");
        auto dc = res.frequency.value();
        kam::KamParams params = kam::KamParams::desk_defaults();
        if (kamo.mode == "paper-faithful") params.mode = kam::Mode::paper_faithful;
        auto sched = kam::ScaleSchedule::make(params, kamo.scales);
        mat2::Mat2 a = mat2::rotation(kamo.rho);

        // deterministic seed-driven trigonometric perturbation
        torusmap::TorusPoly f = torusmap::TorusPoly::zero_alg(1, mat2::AlgebraTag::sl2R);
        for (int n = 1; n <= kamo.modes; ++n) {
            double w = seed_to_unit(split_seed(g.seed, 2 * n));
            double ph = 6.283185307179586 * seed_to_unit(split_seed(g.seed, 2 * n + 1));
            mat2::cplx val = std::polar(0.5 * w / std::pow(n, 2.0), ph);
            f.add_coeff({n}, {val, val * 0.5, val * 0.5, -val});
            f.add_coeff({-n}, {std::conj(val), std::conj(val * 0.5), std::conj(val * 0.5),
                               -std::conj(val)});
        }
        double target = kamo.pert > 0 ? kamo.pert : 0.5 * sched.eps[0];
        f = torusmap::scale(f, mat2::cplx(target / torusmap::strip_norm_ub(f, sched.radius[0])));

        if (kam_cmd->got_subcommand("step")) {
            auto step = kam::kam_step(a, f, sched.radius[0], sched.radius[1], params, dc);
            std::ostringstream os;
            os << "kam_step branch="
               << (step.branch == kam::Branch::resonant ? "resonant" : "nonresonant")
               << " eps_in=" << step.certs.eps_in << " B_sup=" << step.certs.b_sup
               << " f_plus=" << step.certs.f_plus_strip << " defect=" << step.certs.conj_defect
               << "\n";
            write_artifact(g, "kam_step.txt", os.str());
        } else {
            auto cert = kam_cmd->got_subcommand("loop")
                            ? kam::kam_loop(a, f, sched, params, dc, kamo.scales)
                            : kam::kam_loop_ck(a, f, params, sched, dc, kamo.scales);
            write_artifact(g, "certificate.txt", cert.to_text());
            if (!cert.sharp_bound_ok()) exit_code = 1;
        }
    };

    // ---- ledger ----
    auto* ledger_cmd = app.add_subcommand("ledger", "exact-arithmetic inequality chains");
    ledger_cmd->fallthrough();
    struct {
        std::string preset = "paper-faithful";
        int jmax = 20;
        double tau = 1.5;
    } ledo;
    ledger_cmd->add_option("--preset", ledo.preset, "paper-faithful | desk")
        ->capture_default_str();
    ledger_cmd->add_option("--jmax", ledo.jmax)->capture_default_str();
    ledger_cmd->add_option("--tau", ledo.tau)->capture_default_str();
    auto run_ledger = [&] {
        kam::KamParams params = ledo.preset == "desk"
                                    ? kam::KamParams::desk_defaults()
                                    : kam::KamParams::paper_defaults(ledo.tau);
        kam::LedgerInputs in;
        in.tau = ledo.tau;
        auto rep = kam::verify_scale_ledger(params, in, ledo.jmax);
        write_artifact(g, "ledger.txt", rep.to_text());
        std::cout << (rep.all_ok ? "all chains hold" : "LEDGER FAILURE") << " for j <= "
                  << ledo.jmax << "\n";
        if (!rep.all_ok) exit_code = 1;
    };

    // ---- spec sweep | thouless | holder ----
    auto* spec_cmd = app.add_subcommand("spec", "spectral experiments");
    spec_cmd->fallthrough();
    ModelOpts spec_model;
    struct {
        double emin = -3, emax = 3;
        int ecount = 241;
        long long n = 100000;
        int samples = 2;
        bool uh = true;
        double e0 = 0.0;
        std::string target = "ids";
        double eps_min = 1e-5, eps_max = 1e-2;
        int eps_count = 10;
        std::vector<double> test_e;
    } spo;
    for (const char* sub : {"sweep", "thouless", "holder"}) {
        auto* c = spec_cmd->add_subcommand(sub);
        c->fallthrough();
        add_model_opts(c, spec_model);
        c->add_option("--n", spo.n)->capture_default_str();
        c->add_option("--samples", spo.samples)->capture_default_str();
        if (std::string(sub) != "holder") {
            c->add_option("--emin", spo.emin)->capture_default_str();
            c->add_option("--emax", spo.emax)->capture_default_str();
            c->add_option("--ecount", spo.ecount)->capture_default_str();
        }
        if (std::string(sub) == "sweep") c->add_flag("--uh,!--no-uh", spo.uh, "run UH verdicts");
        if (std::string(sub) == "thouless")
            c->add_option("--test-e", spo.test_e, "energies to check")->expected(-1);
        if (std::string(sub) == "holder") {
            c->add_option("--e0", spo.e0)->required();
            c->add_option("--target", spo.target, "ids | le-imag")->capture_default_str();
            c->add_option("--eps-min", spo.eps_min)->capture_default_str();
            c->add_option("--eps-max", spo.eps_max)->capture_default_str();
            c->add_option("--eps-count", spo.eps_count)->capture_default_str();
        }
    }
    auto run_spec = [&] {
        auto model = spec_model.build();
        if (spec_cmd->got_subcommand("holder")) {
            schrodinger::FitBudget budget;
            budget.n_iters = spo.n;
            budget.samples = spo.samples;
            budget.seed = g.seed;
            auto fit = schrodinger::holder_fit(
                model, spo.e0, make_geom_grid(spo.eps_min, spo.eps_max, spo.eps_count),
                spo.target == "le-imag" ? schrodinger::HolderTarget::LE_imag
                                        : schrodinger::HolderTarget::IDS,
                budget);
            write_artifact(g, "holder.json", fit.to_json() + "\n");
            return;
        }
        schrodinger::SweepBudget budget;
        budget.n_iters = spo.n;
        budget.samples = spo.samples;
        budget.with_uh = spec_cmd->got_subcommand("sweep") && spo.uh;
        budget.seed = g.seed;
        auto curve =
            schrodinger::spectral_sweep(model, make_grid(spo.emin, spo.emax, spo.ecount), budget);
        if (spec_cmd->got_subcommand("sweep")) {
            write_artifact(g, "sweep.csv", curve.to_csv());
            write_artifact(g, "sweep.svg", schrodinger::curve_svg(curve));
            for (const auto& fl : curve.flags) std::cout << "flag: " << fl << "\n";
        } else {
            std::ostringstream os;
            os << "E,L_direct,L_thouless,defect\n";
            std::vector<double> tests = spo.test_e;
            if (tests.empty()) tests = {0.0};
            char buf[160];
            for (double e : tests) {
                auto t = schrodinger::thouless_check(curve, e);
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", e, t.L_direct,
                              t.L_thouless, t.defect);
                os << buf;
            }
            write_artifact(g, "thouless.csv", os.str());
        }
    };

    // ---- repro thm11 | thm12 ----
    auto* repro_cmd = app.add_subcommand("repro", "canned acceptance reproductions");
    repro_cmd->fallthrough();
    std::string repro_preset = "amo-half";
    for (const char* sub : {"thm11", "thm12"}) {
        auto* c = repro_cmd->add_subcommand(sub);
        c->fallthrough();
        c->add_option("--preset", repro_preset,
                      "thm12: free | amo-half; thm11: amo-quarter")
            ->capture_default_str();
    }
    auto run_repro = [&] {
        presets::ReproResult res;
        if (repro_cmd->got_subcommand("thm12")) {
            if (repro_preset == "amo-quarter") repro_preset = "amo-half";
            res = presets::repro_thm12(repro_preset);
        } else {
            res = presets::repro_thm11("amo-quarter");
        }
        for (const auto& a : res.artifacts) write_artifact(g, a.filename, a.payload);
        std::cout << res.summary << "\n"
                  << (res.pass ? "acceptance: PASS" : "acceptance: FAIL") << "\n";
        if (!res.pass) exit_code = 1;
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    // apply globals, record the canonical config line, then dispatch
    if (const char* env = std::getenv("QPKAM_THREADS"); env && g.threads == 0)
        g.threads = std::atoi(env);
    if (g.threads > 0) set_thread_cap(g.threads);
    {
        std::ostringstream cfg;
        for (int i = 1; i < argc; ++i) cfg << argv[i] << " ";
        g_config_line = cfg.str();
    }

    try {
        if (dc_cmd->parsed()) run_dc();
        if (dyn_cmd->parsed()) run_dyn();
        if (kam_cmd->parsed()) run_kam();
        if (ledger_cmd->parsed()) run_ledger();
        if (spec_cmd->parsed()) run_spec();
        if (repro_cmd->parsed()) run_repro();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
