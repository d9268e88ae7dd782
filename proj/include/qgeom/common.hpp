#pragma once

#include <Eigen/Core>
#include <complex>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace qgeom {

using Complex = std::complex<double>;
using Matrix  = Eigen::MatrixXcd;
using Matrix2 = Eigen::Matrix2d;
using Vector2 = Eigen::Vector2d;

inline constexpr double pi     = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// ---- errors ----------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : Error {
    using Error::Error;
};

struct NearDegeneracyError : Error {
    double gap;
    NearDegeneracyError(const std::string& msg, double g) : Error(msg), gap(g) {}
};

struct NumericalBreakdownError : Error {
    double trace_k;
    NumericalBreakdownError(const std::string& msg, double t) : Error(msg), trace_k(t) {}
};

struct StencilCrossingError : Error {
    using Error::Error;
};

struct HermiticityError : Error {
    double residue;
    HermiticityError(const std::string& msg, double r) : Error(msg), residue(r) {}
};

struct SingularMetricError : Error {
    double det_g;
    SingularMetricError(const std::string& msg, double d) : Error(msg), det_g(d) {}
};

struct RankZeroError : Error {
    using Error::Error;
};

struct PreconditionError : Error {
    using Error::Error;
};

struct PoisonedGridError : Error {
    std::vector<std::size_t> indices;
    PoisonedGridError(const std::string& msg, std::vector<std::size_t> idx)
        : Error(msg), indices(std::move(idx)) {}
};

struct NonConvergenceError : Error {
    double residual;
    NonConvergenceError(const std::string& msg, double r) : Error(msg), residual(r) {}
};

struct IntegrationInconsistencyError : Error {
    using Error::Error;
};

struct TopologyMismatchError : Error {
    using Error::Error;
};

struct RootRefinementError : Error {
    using Error::Error;
};

struct CuspProximityError : Error {
    using Error::Error;
};

struct DegenerateDenominatorError : Error {
    using Error::Error;
};

struct MalformedCurveError : Error {
    using Error::Error;
};

// ---- worker pool size ------------------------------------------------

// Worker count for grid sampling; capped by the QGEOM_THREADS environment
// variable when set.
inline unsigned worker_count() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("QGEOM_THREADS")) {
        long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned>(cap) < n) n = static_cast<unsigned>(cap);
    }
    return n;
}

// Runs fn(begin, end) over a partition of [0, n) on worker threads.
// Exceptions from workers are rethrown on the calling thread.
inline void parallel_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    unsigned workers = worker_count();
    if (workers <= 1 || n < 2) {
        fn(0, n);
        return;
    }
    if (workers > n) workers = static_cast<unsigned>(n);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end   = std::min(n, begin + chunk);
        pool.emplace_back([&, w, begin, end] {
            try {
                if (begin < end) fn(begin, end);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

// Pairwise (cascade) summation; deterministic for a fixed value order.
inline double pairwise_sum(const double* data, std::size_t n) {
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(v.data(), v.size());
}

}  // namespace qgeom
