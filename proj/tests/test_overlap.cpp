#include <doctest.h>

#include <cmath>

#include "glnframes/calderon.hpp"

using namespace glnframes;

namespace {

// direct sweep far beyond the candidate range
std::vector<std::int64_t> brute_integer_hits(double alpha, double L, double eps) {
    std::vector<std::int64_t> out;
    const std::int64_t lo = static_cast<std::int64_t>(std::floor(alpha)) - 10;
    const std::int64_t hi = static_cast<std::int64_t>(std::ceil(alpha + L)) + 10;
    for (std::int64_t b = lo; b <= hi; ++b) {
        // [alpha, alpha+L] vs (b-eps, b+1+eps)
        const double open_lo = b - eps, open_hi = b + 1 + eps;
        if (open_lo < alpha + L && open_hi > alpha) out.push_back(b);
    }
    return out;
}

}  // namespace

TEST_CASE("integer hit counting matches the stated cases") {
    CHECK(count_integer_hits(0.0, 4.0, 0.5) ==
          std::vector<std::int64_t>{-1, 0, 1, 2, 3, 4});
    CHECK(count_integer_hits(0.0, 1.0, 0.2) == std::vector<std::int64_t>{-1, 0, 1});
    CHECK(count_integer_hits(0.0, 0.25, 0.2) == std::vector<std::int64_t>{-1, 0});
}

TEST_CASE("integer hit counting matches brute force and stays bounded") {
    Rng rng(11);
    std::uniform_real_distribution<double> alpha_dist(-50.0, 50.0);
    std::uniform_real_distribution<double> eps_dist(1e-6, 0.5);
    std::uniform_real_distribution<double> len_dist(0.0, 5.0);
    int six_attained = 0;
    for (int i = 0; i < 20000; ++i) {
        const double alpha = alpha_dist(rng);
        const double eps = eps_dist(rng);
        const double L = i % 3 == 0 ? 4.0 : len_dist(rng);
        const auto fast = count_integer_hits(alpha, L, eps);
        CHECK(fast == brute_integer_hits(alpha, L, eps));
        CHECK(static_cast<double>(fast.size()) <= std::floor(L + 2 * eps) + 2);
        if (L == 4.0) {
            CHECK(fast.size() <= 6);
            if (fast.size() == 6) ++six_attained;
        }
    }
    CHECK(six_attained > 0);
}

TEST_CASE("theoretical multiplicity bounds") {
    CHECK(theoretical_M_bound(2) == 54);
    CHECK(theoretical_M_bound(3) == 5832);
    CHECK(theoretical_M_bound(4) == 3779136);
}

TEST_CASE("refined n=2 bound switches at a quarter") {
    CHECK(refined_M_bound_n2(0.2) == 33);
    CHECK(refined_M_bound_n2(0.3) == 36);
    CHECK(refined_M_bound_n2(0.25) == 36);
    CHECK_THROWS_AS(refined_M_bound_n2(0.5), ConfigError);
    CHECK_THROWS_AS(refined_M_bound_n2(0.0), ConfigError);
}

TEST_CASE("deep interior points see exactly their own tile") {
    // all coordinates on the plateau and far from every neighbor window
    TileCoords c;
    c.s = 1.4;
    c.w = {1.4};
    c.y = {0.5};
    c.k = Mat::Identity(2, 2);
    const GroupElement b = tile_point(TileIndex::zero(2), c);
    const OverlapReport rep = pointwise_overlap(b, 0.2, 1e-9);
    REQUIRE(rep.count() == 1);
    CHECK(rep.contributors[0].index == TileIndex::zero(2));
}

TEST_CASE("interior points always contain the assigned tile") {
    Rng rng(21);
    for (int trial = 0; trial < 400; ++trial) {
        const int n = 2 + trial % 2;
        const GroupElement b = sample_scan_point(n, rng);
        try {
            const Assignment asg = tile_assign(b, 1e-9);
            const OverlapReport rep = pointwise_overlap(b, 0.2, 1e-9);
            CHECK(rep.count() >= 1);
            bool found = false;
            for (const Contributor& c : rep.contributors) {
                if (c.index == asg.index) found = true;
            }
            CHECK(found);
        } catch (const BoundaryError&) {
            continue;
        } catch (const RangeError&) {
            continue;
        }
    }
}

TEST_CASE("fast enumeration equals the brute force sweep") {
    Rng rng(31);
    std::int64_t checked = 0;
    while (checked < 300) {
        const GroupElement b = sample_scan_point(2, rng);
        try {
            const OverlapReport fast = pointwise_overlap(b, 0.2, 1e-9);
            const OverlapReport brute = pointwise_overlap_bruteforce(b, 0.2, 1e-9);
            REQUIRE(fast.count() == brute.count());
            for (int i = 0; i < fast.count(); ++i) {
                CHECK(fast.contributors[static_cast<std::size_t>(i)].index ==
                      brute.contributors[static_cast<std::size_t>(i)].index);
            }
            ++checked;
        } catch (const BoundaryError&) {
            continue;
        }
    }
}

TEST_CASE("boundary points raise an explicit error") {
    Mat m(2, 2);
    m << 2, 0, 0, 2;  // s exactly on a dyadic face
    CHECK_THROWS_AS(pointwise_overlap(GroupElement(std::move(m)), 0.2, 1e-9), BoundaryError);
}

TEST_CASE("overlap scan stays within the published bounds") {
    const OverlapScanSummary s2 = overlap_scan(2, 0.2, 4000, 17);
    CHECK(s2.max_count <= 33);
    CHECK(s2.min_count >= 1);
    CHECK(s2.refined_bound == 33);
    CHECK(s2.theoretical_bound == 54);
    std::int64_t counted = s2.boundary_rejected;
    for (const auto& [count, freq] : s2.histogram) counted += freq;
    CHECK(counted == s2.samples);

    const OverlapScanSummary s3 = overlap_scan(3, 0.2, 500, 17);
    CHECK(s3.max_count <= 5832);
    CHECK(s3.min_count >= 1);

    const OverlapScanSummary empty = overlap_scan(2, 0.2, 0, 17);
    CHECK(empty.histogram.empty());
    CHECK(empty.max_count == 0);
}

TEST_CASE("sup bound chain on sampled points") {
    // observed pointwise max <= refined bound (n=2) <= 54
    const OverlapScanSummary s = overlap_scan(2, 0.3, 3000, 19);
    CHECK(s.max_count <= s.refined_bound);
    CHECK(s.refined_bound == 36);
    CHECK(s.refined_bound <= 54);
}
