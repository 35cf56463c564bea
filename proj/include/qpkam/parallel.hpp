#pragma once

#include <cstdint>

namespace qpkam {

/// Execution policy for the data-parallel kernels.  `serial` runs the
/// reference implementation on one thread; `parallel` uses OpenMP with
/// indexed writes, so results are identical for any worker count.
enum class Exec { serial, parallel };

/// Counter-based seed splitter (splitmix64); one master seed plus a task
/// index gives independent per-task streams deterministically.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Uniform double in [0,1) from a 64-bit word.
inline double seed_to_unit(std::uint64_t z) {
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

/// Kahan compensated accumulator.
struct Kahan {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        double y = x - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

int max_threads();
void set_thread_cap(int n);

}  // namespace qpkam
