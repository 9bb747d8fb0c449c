#pragma once

#include <map>

#include "glnframes/tiling.hpp"

namespace glnframes {

// Integers beta with [alpha, alpha+L] meeting the open interval
// (beta - eps, beta + 1 + eps); direct interval arithmetic.
std::vector<std::int64_t> count_integer_hits(double alpha, double L, double eps);

// 3^n * 6^(n(n-1)/2)
std::int64_t theoretical_M_bound(int n);

// n = 2 refinement: 33 for eps < 1/4, 36 for 1/4 <= eps < 1/2.
int refined_M_bound_n2(double eps);

struct Contributor {
    TileIndex index;
    IwasawaFactors rel;  // factors of b * p'^{-1}
};

struct OverlapReport {
    TileIndex base;
    std::vector<Contributor> contributors;
    std::int64_t theoretical_bound = 0;
    int count() const { return static_cast<int>(contributors.size()); }
};

// Candidate indices p' allowed by the diagonal range conditions and the
// widened floor recursion (y' window (-eps, 1+eps), several integers per
// entry). Includes the base index. Candidates still need a membership
// confirmation against F_o(eps).
std::vector<TileIndex> enumerate_overlap_candidates(const Assignment& base, double eps);

// All p' in P with b * p'^{-1} inside F_o(eps). Throws BoundaryError when
// the base assignment of b is boundary-flagged at tolerance eta.
OverlapReport pointwise_overlap(const GroupElement& b, double eps, double eta);

// Reference enumeration over a padded index hull (exponent offsets in
// [-2,2], mu windows padded by +-2) with the same confirmation rule.
OverlapReport pointwise_overlap_bruteforce(const GroupElement& b, double eps, double eta);

struct OverlapScanSummary {
    int n = 0;
    double eps = 0.0;
    std::int64_t samples = 0;
    std::int64_t boundary_rejected = 0;
    int max_count = 0;
    int min_count = 0;
    std::map<int, std::int64_t> histogram;
    std::int64_t theoretical_bound = 0;
    int refined_bound = 0;  // 0 when not applicable
    std::vector<double> max_sample;  // row-major entries of a point attaining max_count
};

OverlapScanSummary overlap_scan(int n, double eps, std::int64_t n_samples,
                                std::uint64_t seed, int workers = 0);

// Scan-point sampler shared by the overlap and Calderon scans: Iwasawa
// coordinates uniform over a widened box (s, w in [1/2, 4], y in [-2, 3],
// k Haar) pushed through recompose, then composed with a random translate
// whose index entries are i.i.d. in [-2, 2].
GroupElement sample_scan_point(int n, Rng& rng);

}  // namespace glnframes
