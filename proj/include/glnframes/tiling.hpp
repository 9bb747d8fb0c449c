#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glnframes/sampling.hpp"

namespace glnframes {

// Discrete tile parameters: the matrix 2^lambda * U(mu) * diag(2^kappa_i)
// with unit upper triangular U(mu) and kappa_n = -sum kappa_i. Entry (i,j)
// of the product is 2^(lambda+kappa_j) mu_{i,j} for i < j and
// 2^(lambda+kappa_i) on the diagonal.
struct TileIndex {
    int n = 2;
    std::int64_t lambda = 0;
    std::vector<std::int64_t> kappa;  // kappa_1 .. kappa_{n-1}
    std::vector<std::int64_t> mu;     // strict upper entries, row-major

    static TileIndex zero(int n);
    std::int64_t kappa_at(int i) const;  // i in [0, n), last implied
    std::int64_t mu_at(int i, int j) const;
    std::int64_t& mu_ref(int i, int j);
    Mat to_matrix() const;
    bool operator==(const TileIndex& o) const;
    std::string str() const;
};

// Tile-local coordinates: s, w_i in [1,2), y_{i,j} in [0,1), k in O_n.
struct TileCoords {
    double s = 1.0;
    std::vector<double> w;    // n-1 entries
    std::vector<double> y;    // strict upper entries, row-major
    Mat k;

    int n() const { return static_cast<int>(k.rows()); }
    double y_at(int i, int j) const;
    IwasawaFactors to_factors() const;
};

struct Assignment {
    TileIndex index;
    TileCoords coords;
    // Set when a floor argument or an interval coordinate lies within the
    // boundary tolerance of a tile face; the values themselves stay valid.
    bool boundary = false;
};

// |lambda| or |kappa_i| beyond this raises RangeError (keeps 2^lambda
// comfortably inside double range).
inline constexpr std::int64_t kDyadicGuard = 512;

// Unique solution of a = s k w y * p restricted to the fundamental ranges
// (Euclidean part solved by a diagonal pass plus a diagonal-by-diagonal
// floor recursion).
Assignment tile_assign(const GroupElement& a, double eta = 1e-9);

GroupElement tile_point(const TileIndex& index, const TileCoords& coords);

enum class Location { inside, outside, boundary };

struct RegionKind {
    enum class Tag { F, FClosure, FOpen } tag = Tag::F;
    double epsilon = 0.0;  // only meaningful for FOpen

    static RegionKind F() { return {Tag::F, 0.0}; }
    static RegionKind closure() { return {Tag::FClosure, 0.0}; }
    static RegionKind open(double eps);
};

// Classifies a against the region's coordinate intervals; "boundary" when
// any coordinate is within eta of an interval endpoint and none is clearly
// outside.
Location membership(const GroupElement& a, const RegionKind& region, double eta);
Location membership(const IwasawaFactors& f, const RegionKind& region, double eta);

struct CoverageReport {
    int n = 0;
    std::int64_t samples = 0;
    std::int64_t assignment_failures = 0;   // assign/round-trip/membership defects
    std::int64_t disjointness_failures = 0; // neighbor tile also claimed the point
    std::int64_t boundary_rejected = 0;
    double max_roundtrip_error = 0.0;
    std::vector<double> first_failure;      // row-major entries of a failing sample
    bool ok() const { return assignment_failures == 0 && disjointness_failures == 0; }
};

// For N random invertible matrices: assignment succeeds, tile_point
// round-trips, the assigned translate contains the point and no neighbor
// translate does. Boundary-flagged samples are excluded and counted.
CoverageReport coverage_check(int n, std::int64_t n_samples, std::uint64_t seed,
                              double eta = 1e-9, int workers = 0);

// Exact coordinate bounding box of the translate F * p (s and w bounds are
// dyadic shifts of [1,2); y bounds by interval arithmetic on the affine map
// of the y-box). Used to Monte-Carlo the measure of F * p directly.
CoordBox coord_box_of_translate(const TileIndex& p);

}  // namespace glnframes
