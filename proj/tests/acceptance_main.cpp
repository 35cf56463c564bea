// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  An optional argument list selects criteria by number.
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "qpkam/presets.hpp"

using namespace qpkam;

namespace {

struct Criterion {
    int id;
    const char* title;
    presets::SuiteResult (*run)();
};

presets::SuiteResult c1() { return presets::removal_lemma_suite(200, 2024); }
presets::SuiteResult c2() { return presets::step_certificate_suite(100, 2025); }
presets::SuiteResult c3() { return presets::ledger_suite(20); }
presets::SuiteResult c4() { return presets::multiscale_suite(2026); }
presets::SuiteResult c5() { return presets::dynamics_oracles_suite(); }
presets::SuiteResult c6() { return presets::thouless_suite(); }
presets::SuiteResult c7() { return presets::sharp_exponent_suite(); }
presets::SuiteResult c8() { return presets::le_halfline_suite(); }
presets::SuiteResult c9() { return presets::determinism_suite(); }

const Criterion kCriteria[] = {
    {1, "removal-lemma contracts (200 random instances)", c1},
    {2, "one-step branch certificates (100 desk steps)", c2},
    {3, "exact-arithmetic scale ledger, proof-scale constants, j <= 20", c3},
    {4, "multi-scale sharp bound and defect decay (>= 3 scales)", c4},
    {5, "dynamics oracles: constant cocycles, free LE and IDS", c5},
    {6, "Thouless consistency: free and half-coupling AMO", c6},
    {7, "sharp 1/2 exponent at band/gap edges", c7},
    {8, "1/2-Hoelder LE mechanism on the imaginary half-line", c8},
    {9, "artifact determinism across runs and worker counts", c9},
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

    bool all_pass = true;
    for (const auto& crit : kCriteria) {
        if (!selected.empty() &&
            std::find(selected.begin(), selected.end(), crit.id) == selected.end())
            continue;
        presets::SuiteResult res;
        bool threw = false;
        std::string err;
        try {
            res = crit.run();
        } catch (const std::exception& e) {
            threw = true;
            err = e.what();
        }
        bool pass = !threw && res.pass();
        all_pass = all_pass && pass;
        std::printf("%s  [%d] %s  (%.1f s)\n", pass ? "PASS" : "FAIL", crit.id, crit.title,
                    res.seconds);
        if (threw) {
            std::printf("      exception: %s\n", err.c_str());
        } else {
            std::fputs(presets::format_report(res).c_str(), stdout);
        }
        std::fflush(stdout);
    }
    return all_pass ? 0 : 1;
}
