#pragma once

#include "glnframes/window.hpp"

namespace glnframes {

// Sum over p' of window(b * p'^{-1})^2; the overlap enumeration is complete
// because the window vanishes outside the widened tile. Throws BoundaryError
// for boundary-flagged b.
double calderon_sum(const GroupElement& b, const WindowSpec& spec, double eps, double eta);

// Same sum reusing an already computed overlap report.
double calderon_sum(const OverlapReport& overlap, const WindowSpec& spec);

struct FrameBoundReport {
    int n = 0;
    double eps = 0.0;
    std::string window_kind;
    std::int64_t samples = 0;
    std::int64_t boundary_rejected = 0;
    double min_sum = 0.0;   // min sampled Calderon sum
    double max_sum = 0.0;   // max sampled Calderon sum
    double cube_volume = 0.0;
    double a_emp = 0.0;     // cube_volume * min_sum
    double b_emp = 0.0;     // cube_volume * max_sum
    double cond = 0.0;      // b_emp / a_emp
    std::int64_t theoretical_bound = 0;
    int refined_bound = 0;  // 0 when not applicable
    std::vector<double> min_sample;  // row-major entries of the extremal points
    std::vector<double> max_sample;
};

// Empirical frame bounds from seeded sampling (scan points drawn by
// sample_scan_point). a_emp = |R| * min sum, b_emp = |R| * max sum.
// When rows is non-null it receives one entry per accepted sample, the n^2
// matrix entries followed by the sum, in deterministic block order.
FrameBoundReport frame_bound_scan(int n, const WindowSpec& spec, double eps,
                                  std::int64_t n_samples, std::uint64_t seed,
                                  double cube_volume, int workers = 0,
                                  std::vector<std::vector<double>>* rows = nullptr);

}  // namespace glnframes
