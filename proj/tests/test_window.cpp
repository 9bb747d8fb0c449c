#include <doctest.h>

#include <cmath>

#include "glnframes/window.hpp"

using namespace glnframes;

namespace {

IwasawaFactors coords_factors(double s, double w, double y) {
    IwasawaFactors f;
    f.s = s;
    f.w = {w};
    f.k = Mat::Identity(2, 2);
    f.y = Mat::Identity(2, 2);
    f.y(0, 1) = y;
    return f;
}

}  // namespace

TEST_CASE("window plateau, support endpoint and half ramp") {
    const WindowSpec spec = WindowSpec::smooth(0.2);
    CHECK(window_eval(spec, coords_factors(1.5, 1.5, 0.5)) == 1.0);
    CHECK(window_eval(spec, coords_factors(1.0 - 0.2, 1.5, 0.5)) == 0.0);
    CHECK(window_eval(spec, coords_factors(1.0 - 0.1, 1.5, 0.5)) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("sandwich between the closed and widened indicators") {
    Rng rng(5);
    std::uniform_real_distribution<double> sw(0.3, 2.8);
    std::uniform_real_distribution<double> yy(-0.8, 1.8);
    const WindowSpec spec = WindowSpec::smooth(0.2);
    for (int i = 0; i < 100000; ++i) {
        const double s = sw(rng), w = sw(rng), y = yy(rng);
        const double v = window_eval(spec, coords_factors(s, w, y));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        const bool in_closure = s >= 1.0 && s <= 2.0 && w >= 1.0 && w <= 2.0 && y >= 0.0 && y <= 1.0;
        const bool in_open = s > 0.8 && s < 2.2 && w > 0.8 && w < 2.2 && y > -0.2 && y < 1.2;
        if (in_closure) CHECK(v == 1.0);
        if (!in_open) CHECK(v == 0.0);
    }
}

TEST_CASE("window value depends only on the coordinates") {
    Rng rng(8);
    const WindowSpec spec = WindowSpec::smooth(0.25);
    for (int i = 0; i < 200; ++i) {
        const GroupElement a = random_well_conditioned(2, rng);
        const double direct = window_eval(spec, a);
        // rotating on the left only changes k
        Mat kp = random_orthogonal(2, rng);
        const GroupElement rotated(Mat(kp * a.entries()));
        CHECK(window_eval(spec, rotated) == doctest::Approx(direct).epsilon(1e-10));
        // two factorization routes of the same matrix
        const IwasawaFactors f = iwasawa_decompose(a);
        const double via_factors = window_eval(spec, f);
        CHECK(via_factors == doctest::Approx(direct).epsilon(1e-10));
    }
}

TEST_CASE("indicator admissibility matches the closed form") {
    const double exact = 1.5 * std::log(2.0);
    const QuadResult q = admissibility_integral_coords(WindowSpec::indicator(0.2), 2);
    CHECK(std::abs(q.value - exact) < 1e-8);
}

TEST_CASE("degenerate profile integrates to zero") {
    const QuadResult q = quad_axis([](double) { return 0.0; }, {0.8, 1.0, 2.0, 2.2}, -1, 64);
    CHECK(q.value == 0.0);
}

TEST_CASE("smooth admissibility is squeezed between the two indicators") {
    const double lower = 1.5 * std::log(2.0);  // measure of F
    const double eps = 0.2;
    const double upper = std::log(2.2 / 0.8) * 0.5 * (2.2 * 2.2 - 0.8 * 0.8) * 1.4;
    const QuadResult q = admissibility_integral_coords(WindowSpec::smooth(eps), 2);
    CHECK(q.value > lower);
    CHECK(q.value < upper);
}

TEST_CASE("normalization produces a unit integral") {
    // indicator: c = ((3/2) ln 2)^{-1/2}
    const NormalizedWindow ind = normalize_to_wavelet(WindowSpec::indicator(0.2), 2);
    CHECK(ind.scale == doctest::Approx(1.0 / std::sqrt(1.5 * std::log(2.0))).epsilon(1e-10));

    const NormalizedWindow sm = normalize_to_wavelet(WindowSpec::smooth(0.2), 2);
    const QuadResult q = admissibility_integral_coords(sm.spec, 2);
    CHECK(sm.scale * sm.scale * q.value == doctest::Approx(1.0).epsilon(1e-8));

    // already normalized: rescaling the scaled window is a no-op
    const double again = 1.0 / std::sqrt(sm.scale * sm.scale * q.value);
    CHECK(again == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("entry-box monte carlo brackets the coordinate quadrature") {
    // the two conventions differ by the O_n normalization constant; the
    // ratio must not depend on the region
    const WindowSpec spec = WindowSpec::indicator(0.2);
    const QuadResult coords = admissibility_integral_coords(spec, 2);
    const MCEstimate base = admissibility_integral_entry_mc(spec, 400000, 7);

    TileIndex shift = TileIndex::zero(2);  // s-range doubled: lambda = 1
    shift.lambda = 1;
    const MCEstimate shifted = admissibility_entry_mc_translated(spec, shift, 400000, 8);

    const double r1 = base.value / coords.value;
    const double r2 = shifted.value / coords.value;
    const double sigma = (base.std_error + shifted.std_error) / coords.value;
    CHECK(std::abs(r1 - r2) < 3.0 * sigma);
    // sanity: the constant is positive and order one x pi-ish
    CHECK(r1 > 1.0);
    CHECK(r1 < 100.0);
}

TEST_CASE("window spec names round trip") {
    CHECK(window_kind_from_name("indicator") == WindowSpec::Kind::indicator);
    CHECK(window_kind_from_name("smooth") == WindowSpec::Kind::smooth);
    CHECK_THROWS_AS(window_kind_from_name("boxcar"), ConfigError);
    CHECK_THROWS_AS(WindowSpec::smooth(0.6), ConfigError);
}
