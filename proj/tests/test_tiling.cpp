#include <doctest.h>

#include <cmath>

#include "glnframes/overlap.hpp"

using namespace glnframes;

namespace {

Mat mat2(double a, double b, double c, double d) {
    Mat m(2, 2);
    m << a, b, c, d;
    return m;
}

TileCoords random_interior_coords(int n, Rng& rng, double margin = 1e-6) {
    std::uniform_real_distribution<double> sw(1.0 + margin, 2.0 - margin);
    std::uniform_real_distribution<double> yu(margin, 1.0 - margin);
    TileCoords c;
    c.s = sw(rng);
    c.w.resize(static_cast<std::size_t>(n - 1));
    for (auto& w : c.w) w = sw(rng);
    c.y.resize(static_cast<std::size_t>(n * (n - 1) / 2));
    for (auto& y : c.y) y = yu(rng);
    c.k = random_orthogonal(n, rng);
    return c;
}

TileIndex random_index(int n, Rng& rng, std::int64_t radius) {
    std::uniform_int_distribution<std::int64_t> idx(-radius, radius);
    TileIndex p = TileIndex::zero(n);
    p.lambda = idx(rng);
    for (auto& k : p.kappa) k = idx(rng);
    for (auto& m : p.mu) m = idx(rng);
    return p;
}

}  // namespace

TEST_CASE("tile assignment of reference matrices") {
    // identity
    {
        const Assignment a = tile_assign(GroupElement::identity(3));
        CHECK(a.index == TileIndex::zero(3));
        CHECK(a.coords.s == 1.0);
        CHECK(a.coords.w[0] == 1.0);
        CHECK(a.coords.w[1] == 1.0);
        for (double y : a.coords.y) CHECK(y == 0.0);
    }
    // diag(4,1): lambda = 1, kappa = 1
    {
        const Assignment a = tile_assign(GroupElement(mat2(4, 0, 0, 1)));
        CHECK(a.index.lambda == 1);
        CHECK(a.index.kappa[0] == 1);
        CHECK(a.index.mu[0] == 0);
        CHECK(a.coords.s == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(a.coords.w[0] == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(a.coords.y[0] == doctest::Approx(0.0).epsilon(1e-14));
    }
    // shear 1.5: mu = 1, y = 0.5
    {
        const Assignment a = tile_assign(GroupElement(mat2(1, 1.5, 0, 1)));
        CHECK(a.index.lambda == 0);
        CHECK(a.index.kappa[0] == 0);
        CHECK(a.index.mu[0] == 1);
        CHECK(a.coords.s == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(a.coords.w[0] == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(a.coords.y[0] == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("tile index matrix layout") {
    // entry (i,j) = 2^(lambda+kappa_j) mu_ij, diagonal 2^(lambda+kappa_i)
    TileIndex p = TileIndex::zero(2);
    p.lambda = 1;
    p.kappa[0] = 1;  // kappa_2 = -1
    p.mu[0] = 3;
    const Mat m = p.to_matrix();
    CHECK(m(0, 0) == 4.0);   // 2^(1+1)
    CHECK(m(1, 1) == 1.0);   // 2^(1-1)
    CHECK(m(0, 1) == 3.0);   // 2^(1-1) * 3
    CHECK(m(1, 0) == 0.0);
}

TEST_CASE("generate from known tile and recover exactly") {
    for (int n = 2; n <= 3; ++n) {
        Rng rng(300 + static_cast<unsigned>(n));
        for (int trial = 0; trial < 2000; ++trial) {
            const TileCoords c = random_interior_coords(n, rng);
            const TileIndex p = random_index(n, rng, 3);
            const GroupElement a = tile_point(p, c);
            const Assignment got = tile_assign(a);
            REQUIRE(got.index == p);
            CHECK(got.coords.s == doctest::Approx(c.s).epsilon(1e-9));
            for (std::size_t i = 0; i < c.w.size(); ++i) {
                CHECK(got.coords.w[i] == doctest::Approx(c.w[i]).epsilon(1e-9));
            }
            for (std::size_t i = 0; i < c.y.size(); ++i) {
                CHECK(got.coords.y[i] == doctest::Approx(c.y[i]).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("determinant bookkeeping of tile points") {
    Rng rng(55);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 2 + trial % 2;
        const TileCoords c = random_interior_coords(n, rng);
        const TileIndex p = random_index(n, rng, 3);
        const GroupElement a = tile_point(p, c);
        const double expected = std::pow(c.s * std::ldexp(1.0, static_cast<int>(p.lambda)), n);
        CHECK(std::abs(a.det()) == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("membership classifies the three regions") {
    // plateau point: inside all three regions
    TileCoords c;
    c.s = 1.5;
    c.w = {1.5};
    c.y = {0.5};
    c.k = Mat::Identity(2, 2);
    const GroupElement a = tile_point(TileIndex::zero(2), c);
    CHECK(membership(a, RegionKind::F(), 1e-9) == Location::inside);
    CHECK(membership(a, RegionKind::closure(), 1e-9) == Location::inside);
    CHECK(membership(a, RegionKind::open(0.2), 1e-9) == Location::inside);

    // s = 2 exactly: outside F, inside closure, inside F_o
    c.s = 2.0;
    const GroupElement b = tile_point(TileIndex::zero(2), c);
    CHECK(membership(b, RegionKind::F(), 0.0) == Location::outside);
    CHECK(membership(b, RegionKind::closure(), 0.0) == Location::inside);
    CHECK(membership(b, RegionKind::open(0.2), 0.0) == Location::inside);

    // s = 1 - eps: endpoint of the open interval is outside at eta = 0
    c.s = 1.0 - 0.2;
    const GroupElement d = tile_point(TileIndex::zero(2), c);
    CHECK(membership(d, RegionKind::open(0.2), 0.0) == Location::outside);
}

TEST_CASE("region monotonicity") {
    Rng rng(66);
    for (int trial = 0; trial < 300; ++trial) {
        const GroupElement a = random_well_conditioned(2, rng);
        const Location in_f = membership(a, RegionKind::F(), 0.0);
        if (in_f != Location::inside) continue;
        CHECK(membership(a, RegionKind::closure(), 0.0) == Location::inside);
        for (double eps : {0.1, 0.25, 0.5}) {
            CHECK(membership(a, RegionKind::open(eps), 0.0) == Location::inside);
        }
    }
}

TEST_CASE("closure points sit next to interior points") {
    // box-closure identification: a point on a closed face has an F point
    // within delta
    TileCoords c;
    c.s = 2.0;  // closed endpoint
    c.w = {1.3};
    c.y = {0.4};
    c.k = Mat::Identity(2, 2);
    const GroupElement a = tile_point(TileIndex::zero(2), c);
    REQUIRE(membership(a, RegionKind::closure(), 0.0) == Location::inside);
    const double delta = 1e-7;
    TileCoords nudged = c;
    nudged.s = 2.0 - delta;
    const GroupElement b = tile_point(TileIndex::zero(2), nudged);
    CHECK(membership(b, RegionKind::F(), 0.0) == Location::inside);
    CHECK((a.entries() - b.entries()).cwiseAbs().maxCoeff() < 10 * delta);
}

TEST_CASE("boundary samples are flagged") {
    // s exactly on the dyadic face 2 * 2^lambda
    const Assignment a = tile_assign(GroupElement(mat2(2, 0, 0, 2)));
    CHECK(a.boundary);
    // interior sample is not flagged
    TileCoords c;
    c.s = 1.37;
    c.w = {1.22};
    c.y = {0.41};
    c.k = Mat::Identity(2, 2);
    const Assignment b = tile_assign(tile_point(TileIndex::zero(2), c));
    CHECK_FALSE(b.boundary);
}

TEST_CASE("dyadic overflow guard") {
    TileIndex p = TileIndex::zero(2);
    p.lambda = kDyadicGuard + 1;
    TileCoords c;
    c.s = 1.5;
    c.w = {1.5};
    c.y = {0.5};
    c.k = Mat::Identity(2, 2);
    CHECK_THROWS_AS(tile_point(p, c), RangeError);
}

TEST_CASE("equivariance of the assignment under tile translates") {
    for (int n = 2; n <= 3; ++n) {
        Rng rng(400 + static_cast<unsigned>(n));
        for (int trial = 0; trial < 500; ++trial) {
            const TileCoords c = random_interior_coords(n, rng);
            const GroupElement f = tile_point(TileIndex::zero(n), c);
            const TileIndex p = random_index(n, rng, 3);
            const GroupElement fp = f * GroupElement(p.to_matrix());
            const Assignment got = tile_assign(fp);
            CHECK(got.index == p);
            CHECK(got.coords.s == doctest::Approx(c.s).epsilon(1e-9));
        }
    }
}

TEST_CASE("pointwise disjointness away from boundaries") {
    Rng rng(88);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + trial % 2;
        const GroupElement a = random_well_conditioned(n, rng);
        Assignment asg;
        try {
            asg = tile_assign(a, 1e-9);
        } catch (const RangeError&) {
            continue;
        }
        if (asg.boundary) continue;
        int inside_count = 0;
        for (const TileIndex& q : enumerate_overlap_candidates(asg, 1e-6)) {
            const GroupElement qm(q.to_matrix());
            if (membership(a * qm.inverse(), RegionKind::F(), 1e-9) == Location::inside) {
                ++inside_count;
            }
        }
        CHECK(inside_count == 1);
    }
}

TEST_CASE("coverage check runs clean") {
    const CoverageReport r2 = coverage_check(2, 5000, 99);
    CHECK(r2.ok());
    CHECK(r2.max_roundtrip_error < 1e-10);
    const CoverageReport r3 = coverage_check(3, 1000, 99);
    CHECK(r3.ok());
}
