#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace adass {

/// Closed real interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    double length() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
    bool degenerate() const { return !(lo < hi); }
};

inline bool same_interval(const Interval& a, const Interval& b) {
    const double tol = 1e-12 * std::max({1.0, std::abs(a.lo), std::abs(a.hi)});
    return std::abs(a.lo - b.lo) <= tol && std::abs(a.hi - b.hi) <= tol;
}

/// Runtime error carrying a stable machine-readable code. The CLI surfaces
/// the code on stderr as `ERROR <code>: <message>`.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Derives the seed of a named substream from a base seed, so that every
/// consumer of randomness (generation, folds, search, ...) owns an
/// independent, reproducible generator.
std::uint64_t derive_seed(std::uint64_t base, std::string_view stream, std::uint64_t index = 0);

/// Runs body(i) for i in [0, count) on up to `threads` worker threads.
/// Results must be written to disjoint slots; the first exception thrown by
/// any worker is rethrown after all workers join.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

/// Shortest round-trip decimal representation of v (used for all CSV and
/// text output so reruns are byte-identical).
std::string format_number(double v);

}  // namespace adass
