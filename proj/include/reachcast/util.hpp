#ifndef REACHCAST_UTIL_HPP
#define REACHCAST_UTIL_HPP

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <new>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace reachcast {

// 1 ft = 0.3048 m exactly; used for file-unit conversion in both directions
// so that m -> ft -> m is involutive.
inline constexpr double kMetresPerFoot = 0.3048;
// Reporting factor used for feet-denominated error summaries.
inline constexpr double kFeetPerMetre = 3.28084;

inline constexpr double kSecondsPerHour = 3600.0;

/// Malformed input file or text; carries a 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Invalid configuration or argument combination (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure during a run (divergence, instability; CLI exit code 2).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg, long step = -1)
        : std::runtime_error(msg), step_(step) {}
    long step() const { return step_; }

private:
    long step_;
};

/**
 * Fixed 64-byte alignment for every numeric buffer that SIMD kernels touch.
 * Vectorized loop peeling depends on pointer alignment at runtime; pinning
 * the alignment makes floating-point results bit-reproducible across runs
 * regardless of heap layout (the training determinism contract).
 */
template <class T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::size_t alignment = 64;

    AlignedAllocator() = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U>&) {}

    T* allocate(std::size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t(alignment)));
    }
    void deallocate(T* p, std::size_t) {
        ::operator delete(p, std::align_val_t(alignment));
    }
    template <class U>
    bool operator==(const AlignedAllocator<U>&) const { return true; }
};

template <class T>
using AVector = std::vector<T, AlignedAllocator<T>>;

/// Parallelism cap: REACH_SURROGATE_THREADS if set (>=1), else hardware threads.
inline int thread_cap() {
    if (const char* env = std::getenv("REACH_SURROGATE_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<int>(v);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

} // namespace reachcast

#endif // REACHCAST_UTIL_HPP
