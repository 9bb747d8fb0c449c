#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Core>

namespace glnframes {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Matrix not invertible at the working tolerance.
struct SingularMatrixError : Error {
    using Error::Error;
};

struct DimensionError : Error {
    using Error::Error;
};

// Dyadic exponent left the configured guard range.
struct RangeError : Error {
    using Error::Error;
};

// Sample sits within the boundary tolerance of a tile face.
struct BoundaryError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct GridError : Error {
    using Error::Error;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
};

// splitmix64; used to derive independent per-block seeds from a user seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline int default_workers() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs body(block_index, begin, end) over [0,total) split into fixed-size
// blocks. Blocks are indexed deterministically, so per-block results (and
// per-block derived seeds) do not depend on the worker count.
void parallel_blocks(std::int64_t total, std::int64_t block_size, int workers,
                     const std::function<void(std::int64_t, std::int64_t, std::int64_t)>& body);

}  // namespace glnframes
