#pragma once

#include <optional>
#include <vector>

#include "qpkam/mat2.hpp"
#include "qpkam/parallel.hpp"

namespace qpkam::arith {

/// Frequency vector alpha in (0,1)^d with a verified Diophantine condition
/// dist(<n,alpha>, Z) > kappa / |n|^tau for all 0 < |n|_1 <= verified_up_to.
struct DiophantineFrequency {
    std::vector<double> alpha;
    double kappa = 0.0;
    double tau = 0.0;
    long long verified_up_to = 0;

    int dim() const { return static_cast<int>(alpha.size()); }
};

struct DcScanResult {
    bool passed = false;
    std::vector<int> worst_n;          // minimizer of |n|^tau * dist(<n,alpha>,Z)
    double worst_dist = 0.0;           // dist at the worst site
    double largest_admissible_kappa = 0.0;  // min_n |n|^tau * dist
    bool cf_consistent = true;         // d = 1: convergent scan agrees
    std::optional<DiophantineFrequency> frequency;  // set iff passed
};

DcScanResult verify_dc(const std::vector<double>& alpha, double kappa, double tau,
                       long long n_max, Exec exec = Exec::parallel);

/// Resonant-site search result.  `margin` is the achieved minimum of
/// |2 rho - 2 pi <n,alpha>| mod 2 pi over the band (the site's value when a
/// site is found); `unique_within` is the radius up to which no second
/// resonant site can exist.
struct ResonanceReport {
    std::optional<std::vector<int>> site;
    double margin = 0.0;
    double threshold = 0.0;
    double search_bound = 0.0;
    double unique_within = 0.0;
};

ResonanceReport find_resonance(const mat2::EigenAngle& rho, const DiophantineFrequency& dc,
                               double n_bound, double threshold, Exec exec = Exec::parallel);

/// min over 0 < |n|_1 <= N of dist(<n,alpha>, Z); guaranteed >= kappa/N^tau
/// for verified frequencies.
double small_divisor_floor(const DiophantineFrequency& dc, long long n_bound,
                           Exec exec = Exec::parallel);

/// Continued-fraction convergents p/q of a real number, q <= q_max.
struct Convergent {
    long long p = 0;
    long long q = 1;
};
std::vector<Convergent> convergents(double x, long long q_max);

/// Distance of x to the nearest integer.
double dist_to_int(long double x);

/// Distance of x to the nearest multiple of 2 pi.
double angle_dist(long double x);

/// (sqrt(5)-1)/2, the default experiment frequency.
double golden_mean();

}  // namespace qpkam::arith
