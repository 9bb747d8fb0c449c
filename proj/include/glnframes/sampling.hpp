#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include "glnframes/iwasawa.hpp"

namespace glnframes {

using Rng = std::mt19937_64;

// Haar-distributed element of O_n: orthogonalize i.i.d. standard normals
// with a positive triangular diagonal, then flip the sign of the first
// column with probability 1/2 so both components of O_n are covered.
Mat random_orthogonal(int n, Rng& rng);

// Entries i.i.d. uniform[-2,2], rejecting |det| < min_abs_det.
GroupElement random_well_conditioned(int n, Rng& rng, double min_abs_det = 1e-3);

// Random valid factors: s, w_i log-uniform in [0.1, 10], y_{i,j} in [-5, 5],
// k Haar on O_n.
IwasawaFactors random_factors(int n, Rng& rng);

struct MCEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t samples = 0;
};

// Coordinate box in (s, w, y); the k-marginal is always the full O_n with
// normalized Haar mass 1.
struct CoordBox {
    Interval s;
    std::vector<Interval> w;        // size n-1
    std::vector<Interval> y;        // strict upper entries, row-major
    int n = 2;

    static CoordBox fundamental(int n);                   // F: [1,2) x [0,1)
    static CoordBox widened(int n, double eps);            // F_o ranges
    double volume() const;
    bool empty() const;
};

// Monte-Carlo estimate of the Haar measure (Iwasawa-coordinate density,
// normalized k-marginal) of the set {a : region(a)} inside the sampling box.
// Deterministic for a fixed seed and independent of the worker count.
MCEstimate haar_measure_mc(const CoordBox& box,
                           const std::function<bool(const IwasawaFactors&)>& region,
                           std::int64_t n_samples, std::uint64_t seed, int workers = 0);

// Convenience overload: measure of the box itself.
MCEstimate haar_measure_mc(const CoordBox& box, std::int64_t n_samples,
                           std::uint64_t seed, int workers = 0);

}  // namespace glnframes
