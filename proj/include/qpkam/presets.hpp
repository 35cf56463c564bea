#pragma once

#include <string>
#include <vector>

#include "qpkam/kam.hpp"
#include "qpkam/schrodinger.hpp"

namespace qpkam::presets {

/// One acceptance-style check: a named quantity, its bound, and the verdict.
struct CheckLine {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct SuiteResult {
    std::string name;
    std::vector<CheckLine> checks;
    double seconds = 0.0;
    std::vector<std::string> artifacts;  // file payloads are returned by name
    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

arith::DiophantineFrequency golden_dc(long long nmax = 2000000);

/// Removal-lemma contract on random instances: ||A|| <= 2,
/// |g|_r = eps in [1e-12, 1e-6], eta = 13 ||A||^2 sqrt(eps).
SuiteResult removal_lemma_suite(int instances = 200, std::uint64_t seed = 2024);

/// One-step branch certificates in desk mode: screened non-resonant steps and
/// engineered resonant ones.
SuiteResult step_certificate_suite(int steps = 100, std::uint64_t seed = 2025);

/// Exact-arithmetic inequality ledger at the proof-scale constants.
SuiteResult ledger_suite(int j_max = 20);

/// Multi-scale runs: sharp product and decreasing defect across >= 3 scales.
SuiteResult multiscale_suite(std::uint64_t seed = 2026);

/// Constant-cocycle and free-model estimator oracles.
SuiteResult dynamics_oracles_suite();

/// Thouless consistency for the free model and the half-coupling AMO.
SuiteResult thouless_suite(Exec exec = Exec::parallel);

/// Sharp 1/2 exponent: free band edge and the AMO largest-gap edge.
SuiteResult sharp_exponent_suite(Exec exec = Exec::parallel);

/// 1/2-Hoelder LE mechanism in the imaginary direction, AMO quarter coupling.
SuiteResult le_halfline_suite(Exec exec = Exec::parallel);

/// Byte-identical artifacts across repeated runs and worker counts {1, 8}.
SuiteResult determinism_suite();

/// Canned experiment surface for the CLI: returns named artifact payloads
/// plus the acceptance verdict of the reproduced criterion.
struct Artifact {
    std::string filename;
    std::string payload;
};
struct ReproResult {
    std::vector<Artifact> artifacts;
    bool pass = false;
    std::string summary;
};
ReproResult repro_thm12(const std::string& preset, Exec exec = Exec::parallel);
ReproResult repro_thm11(const std::string& preset, Exec exec = Exec::parallel);

std::string format_report(const SuiteResult& r);

}  // namespace qpkam::presets
