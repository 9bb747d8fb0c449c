#include "glnframes/frame2d.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <Eigen/Dense>
#include <fftw3.h>

namespace glnframes {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

void dft4(std::vector<Cplx>& data, const std::array<int, 4>& n, int sign) {
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        plan = fftw_plan_dft(4, n.data(), reinterpret_cast<fftw_complex*>(data.data()),
                             reinterpret_cast<fftw_complex*>(data.data()), sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        fftw_destroy_plan(plan);
    }
}

// Tile coordinates of a 2x2 matrix without the full factorization:
// s = sqrt|det|, w = |col1|/s, y = <col1, col2>/|col1|^2.
struct Coords2 {
    double s, w, y;
    bool invertible;
};

Coords2 coords2x2(double a00, double a01, double a10, double a11) {
    const double det = a00 * a11 - a01 * a10;
    const double c1sq = a00 * a00 + a10 * a10;
    Coords2 c{0.0, 0.0, 0.0, false};
    if (std::abs(det) < 1e-14 || c1sq <= 0.0) return c;
    c.s = std::sqrt(std::abs(det));
    c.w = std::sqrt(c1sq) / c.s;
    c.y = (a00 * a01 + a10 * a11) / c1sq;
    c.invertible = true;
    return c;
}

double window_eval2x2(const WindowSpec& spec, const Mat& z) {
    // |det| inside the widened support exceeds (1/2)^2; cheap pre-filter.
    const double det = z(0, 0) * z(1, 1) - z(0, 1) * z(1, 0);
    if (std::abs(det) < 0.2 || std::abs(det) > 6.5) return 0.0;
    const Coords2 c = coords2x2(z(0, 0), z(0, 1), z(1, 0), z(1, 1));
    if (!c.invertible) return 0.0;
    double v = window_profile(spec, c.s, 1.0, 2.0);
    if (v == 0.0) return 0.0;
    v *= window_profile(spec, c.w, 1.0, 2.0);
    if (v == 0.0) return 0.0;
    return v * window_profile(spec, c.y, 0.0, 1.0);
}

void check_tile_guard(const TileIndex& p) {
    if (p.n != 2) throw ConfigError("the transform pipeline is n = 2 only");
    if (std::llabs(p.lambda) > kDyadicGuard) throw RangeError("tile lambda exceeds the dyadic guard");
    for (int i = 0; i < p.n; ++i) {
        if (std::llabs(p.kappa_at(i)) > kDyadicGuard) throw RangeError("tile kappa exceeds the dyadic guard");
    }
}

// Exact inverse of the dyadic upper-triangular 2x2 tile matrix.
Mat tile_inverse(const TileIndex& p) {
    const Mat m = p.to_matrix();
    Mat q = Mat::Zero(2, 2);
    q(0, 0) = 1.0 / m(0, 0);
    q(1, 1) = 1.0 / m(1, 1);
    q(0, 1) = -m(0, 1) / (m(0, 0) * m(1, 1));
    return q;
}

}  // namespace

double CubeR::volume() const {
    double v = 1.0;
    for (int i = 0; i < 4; ++i) v *= length(i);
    return v;
}

bool CubeR::contains(const Mat& m) const {
    const double x[4] = {m(0, 0), m(0, 1), m(1, 0), m(1, 1)};
    for (int i = 0; i < 4; ++i) {
        if (x[i] < lo[static_cast<std::size_t>(i)] || x[i] > hi[static_cast<std::size_t>(i)]) return false;
    }
    return true;
}

Mat LatticeJ::gamma(const std::array<int, 4>& m) const {
    // tr(gamma b) must produce frequency m_i / length(i) on flat axis i,
    // so gamma_{11} pairs with b11, gamma_{21} with b12, gamma_{12} with
    // b21 and gamma_{22} with b22.
    Mat g(2, 2);
    g(0, 0) = frequency(0, m[0]);
    g(1, 0) = frequency(1, m[1]);
    g(0, 1) = frequency(2, m[2]);
    g(1, 1) = frequency(3, m[3]);
    return g;
}

namespace {

Cplx axis_character_integral(double lo, double hi, double freq_diff, int order) {
    // (1/L) integral over [lo,hi] of exp(2 pi i freq_diff x) dx via
    // panelled Gauss-Legendre (4 panels keep the oscillation resolved).
    std::vector<double> nodes, weights;
    gauss_legendre(order, nodes, weights);
    const int panels = 4;
    Cplx total(0.0, 0.0);
    for (int p = 0; p < panels; ++p) {
        const double a = lo + (hi - lo) * p / panels;
        const double b = lo + (hi - lo) * (p + 1) / panels;
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        Cplx sum(0.0, 0.0);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double x = mid + half * nodes[i];
            sum += weights[i] * std::polar(1.0, kTwoPi * freq_diff * x);
        }
        total += half * sum;
    }
    return total / (hi - lo);
}

}  // namespace

Cplx LatticeJ::basis_inner_product(const std::array<int, 4>& m1, const std::array<int, 4>& m2,
                                   int order) const {
    Cplx v(1.0, 0.0);
    for (int axis = 0; axis < 4; ++axis) {
        const double diff = frequency(axis, m1[static_cast<std::size_t>(axis)]) -
                            frequency(axis, m2[static_cast<std::size_t>(axis)]);
        v *= axis_character_integral(cube.lo[static_cast<std::size_t>(axis)],
                                     cube.hi[static_cast<std::size_t>(axis)], diff, order);
    }
    return v;
}

Cplx LatticeJ::basis_inner_product_transposed(const std::array<int, 4>& m1,
                                              const std::array<int, 4>& m2, int order) const {
    // Mispairing: the 1/14 steps land on the 20-length axes and vice versa.
    const int swapped[4] = {0, 2, 1, 3};
    Cplx v(1.0, 0.0);
    for (int axis = 0; axis < 4; ++axis) {
        const int src = swapped[axis];
        const double step = 1.0 / cube.length(src);
        const double diff = step * (m1[static_cast<std::size_t>(axis)] - m2[static_cast<std::size_t>(axis)]);
        v *= axis_character_integral(cube.lo[static_cast<std::size_t>(axis)],
                                     cube.hi[static_cast<std::size_t>(axis)], diff, order);
    }
    return v;
}

GridSpec GridSpec::over_cube(const CubeR& cube, int per_axis) {
    GridSpec g;
    g.lo = cube.lo;
    g.hi = cube.hi;
    g.count = {per_axis, per_axis, per_axis, per_axis};
    return g;
}

std::int64_t GridSpec::total() const {
    std::int64_t t = 1;
    for (int c : count) t *= c;
    return t;
}

double GridSpec::step(int axis) const {
    return (hi[static_cast<std::size_t>(axis)] - lo[static_cast<std::size_t>(axis)]) /
           count[static_cast<std::size_t>(axis)];
}

double GridSpec::cell_volume() const {
    double v = 1.0;
    for (int axis = 0; axis < 4; ++axis) v *= step(axis);
    return v;
}

double GridSpec::node(int axis, int k) const {
    return lo[static_cast<std::size_t>(axis)] + k * step(axis);
}

Mat GridSpec::point(const std::array<int, 4>& k) const {
    Mat m(2, 2);
    m(0, 0) = node(0, k[0]);
    m(0, 1) = node(1, k[1]);
    m(1, 0) = node(2, k[2]);
    m(1, 1) = node(3, k[3]);
    return m;
}

std::array<int, 4> GridSpec::unflatten(std::int64_t idx) const {
    std::array<int, 4> k{};
    k[3] = static_cast<int>(idx % count[3]);
    idx /= count[3];
    k[2] = static_cast<int>(idx % count[2]);
    idx /= count[2];
    k[1] = static_cast<int>(idx % count[1]);
    idx /= count[1];
    k[0] = static_cast<int>(idx);
    return k;
}

std::int64_t GridSpec::flatten(const std::array<int, 4>& k) const {
    return ((static_cast<std::int64_t>(k[0]) * count[1] + k[1]) * count[2] + k[2]) * count[3] + k[3];
}

bool GridSpec::operator==(const GridSpec& o) const {
    return lo == o.lo && hi == o.hi && count == o.count;
}

Cplx SpectralSignal::eval(const Mat& point) const {
    if (analytic) return analytic(point);
    const double x[4] = {point(0, 0), point(0, 1), point(1, 0), point(1, 1)};
    double frac[4];
    int base[4];
    for (int axis = 0; axis < 4; ++axis) {
        const double t = (x[axis] - grid.lo[static_cast<std::size_t>(axis)]) / grid.step(axis);
        if (t < -1e-9 || t > grid.count[static_cast<std::size_t>(axis)] - 1 + 1e-9) {
            return Cplx(0.0, 0.0);
        }
        double fl = std::floor(t);
        double f = t - fl;
        int b = static_cast<int>(fl);
        if (b >= grid.count[static_cast<std::size_t>(axis)] - 1) {
            b = grid.count[static_cast<std::size_t>(axis)] - 2;
            f = t - b;
        }
        if (b < 0) {
            b = 0;
            f = t;
        }
        base[axis] = b;
        frac[axis] = f;
    }
    // multilinear over the 16 cell corners
    Cplx acc(0.0, 0.0);
    for (int corner = 0; corner < 16; ++corner) {
        double wgt = 1.0;
        std::array<int, 4> k{};
        for (int axis = 0; axis < 4; ++axis) {
            const int bit = (corner >> axis) & 1;
            wgt *= bit ? frac[axis] : 1.0 - frac[axis];
            k[static_cast<std::size_t>(axis)] = base[axis] + bit;
        }
        if (wgt != 0.0) acc += wgt * values[static_cast<std::size_t>(grid.flatten(k))];
    }
    return acc;
}

double SpectralSignal::norm() const {
    double s = 0.0;
    for (const Cplx& v : values) s += std::norm(v);
    return std::sqrt(s * grid.cell_volume());
}

double relative_l2_error(const SpectralSignal& got, const SpectralSignal& want) {
    if (!(got.grid == want.grid)) throw GridError("grids do not match");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < want.values.size(); ++i) {
        num += std::norm(got.values[i] - want.values[i]);
        den += std::norm(want.values[i]);
    }
    if (den == 0.0) return std::sqrt(num);
    return std::sqrt(num / den);
}

SpectralSignal make_gaussian_signal(const GridSpec& grid, const Mat& center, double sigma,
                                    Cplx amplitude) {
    if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
    for (int c : grid.count) {
        if (c < 2) throw GridError("signal grids need at least 2 points per axis");
    }
    const double c0 = center(0, 0), c1 = center(0, 1), c2 = center(1, 0), c3 = center(1, 1);
    const double cutoff = 6.0 * sigma;
    auto form = [=](const Mat& b) {
        const double d0 = b(0, 0) - c0, d1 = b(0, 1) - c1, d2 = b(1, 0) - c2, d3 = b(1, 1) - c3;
        const double r2 = d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3;
        if (r2 > cutoff * cutoff) return Cplx(0.0, 0.0);
        return amplitude * std::exp(-0.5 * r2 / (sigma * sigma));
    };
    SpectralSignal sig;
    sig.grid = grid;
    sig.values.resize(static_cast<std::size_t>(grid.total()));
    for (std::int64_t i = 0; i < grid.total(); ++i) {
        sig.values[static_cast<std::size_t>(i)] = form(grid.point(grid.unflatten(i)));
    }
    sig.analytic = form;
    return sig;
}

std::int64_t TileCoefficients::size() const {
    std::int64_t t = 1;
    for (int axis = 0; axis < 4; ++axis) t *= m_max[static_cast<std::size_t>(axis)] - m_min[static_cast<std::size_t>(axis)] + 1;
    return t;
}

std::int64_t TileCoefficients::flatten(const std::array<int, 4>& m) const {
    std::int64_t idx = 0;
    for (int axis = 0; axis < 4; ++axis) {
        idx = idx * (m_max[static_cast<std::size_t>(axis)] - m_min[static_cast<std::size_t>(axis)] + 1) +
              (m[static_cast<std::size_t>(axis)] - m_min[static_cast<std::size_t>(axis)]);
    }
    return idx;
}

TileCoefficients analysis_coefficients(const SpectralSignal& f, const TileIndex& p,
                                       const WindowSpec& spec, const CubeR& cube,
                                       std::array<int, 4> grid_count) {
    check_tile_guard(p);
    for (int axis = 0; axis < 4; ++axis) {
        if (grid_count[static_cast<std::size_t>(axis)] <= 0) {
            // When the signal lattice is a sub-lattice of a grid spanning the
            // cube, analyze on that grid so signal nodes are sampled exactly;
            // otherwise reuse the signal's per-axis counts.
            const double step = f.grid.step(axis);
            const double n_exact = cube.length(axis) / step;
            const double offset =
                (f.grid.lo[static_cast<std::size_t>(axis)] - cube.lo[static_cast<std::size_t>(axis)]) / step;
            if (std::abs(n_exact - std::round(n_exact)) < 1e-9 &&
                std::abs(offset - std::round(offset)) < 1e-9) {
                grid_count[static_cast<std::size_t>(axis)] = static_cast<int>(std::round(n_exact));
            } else {
                grid_count[static_cast<std::size_t>(axis)] = f.grid.count[static_cast<std::size_t>(axis)];
            }
        }
        if (grid_count[static_cast<std::size_t>(axis)] < 2) {
            throw GridError("analysis grid too coarse: need at least 2 samples per axis");
        }
    }

    GridSpec rg;
    rg.lo = cube.lo;
    rg.hi = cube.hi;
    rg.count = grid_count;

    const Mat pm = p.to_matrix();
    const double det_p = std::abs(pm.determinant());

    // Phi(z) = f(z p) * window(z) on the R-grid
    std::vector<Cplx> phi(static_cast<std::size_t>(rg.total()), Cplx(0.0, 0.0));
    Mat z(2, 2), zp(2, 2);
    for (std::int64_t i = 0; i < rg.total(); ++i) {
        const std::array<int, 4> k = rg.unflatten(i);
        z(0, 0) = rg.node(0, k[0]);
        z(0, 1) = rg.node(1, k[1]);
        z(1, 0) = rg.node(2, k[2]);
        z(1, 1) = rg.node(3, k[3]);
        const double g = window_eval2x2(spec, z);
        if (g == 0.0) continue;
        zp = z * pm;
        const Cplx fv = f.eval(zp);
        if (fv != Cplx(0.0, 0.0)) phi[static_cast<std::size_t>(i)] = fv * g;
    }

    dft4(phi, rg.count, FFTW_FORWARD);

    TileCoefficients tc;
    tc.index = p;
    for (int axis = 0; axis < 4; ++axis) {
        const int n = rg.count[static_cast<std::size_t>(axis)];
        tc.m_max[static_cast<std::size_t>(axis)] = (n - 1) / 2;
        tc.m_min[static_cast<std::size_t>(axis)] = tc.m_max[static_cast<std::size_t>(axis)] - n + 1;
    }
    tc.c.assign(phi.size(), Cplx(0.0, 0.0));

    const double dvol = rg.cell_volume();
    for (std::int64_t i = 0; i < rg.total(); ++i) {
        const std::array<int, 4> bin = rg.unflatten(i);
        std::array<int, 4> m{};
        double phase = 0.0;
        for (int axis = 0; axis < 4; ++axis) {
            const int n = rg.count[static_cast<std::size_t>(axis)];
            int mm = bin[static_cast<std::size_t>(axis)];
            if (mm > (n - 1) / 2) mm -= n;
            m[static_cast<std::size_t>(axis)] = mm;
            phase -= kTwoPi * mm * rg.lo[static_cast<std::size_t>(axis)] / cube.length(axis);
        }
        tc.c[static_cast<std::size_t>(tc.flatten(m))] =
            det_p * dvol * std::polar(1.0, phase) * phi[static_cast<std::size_t>(i)];
    }

    tc.total_energy = 0.0;
    for (const Cplx& v : tc.c) tc.total_energy += std::norm(v);

    // Per-axis radius capturing all but 2.5e-7 of the energy on that axis,
    // so the joint box keeps >= 1 - 1e-6.
    for (int axis = 0; axis < 4; ++axis) {
        const int n = rg.count[static_cast<std::size_t>(axis)];
        std::vector<double> marginal(static_cast<std::size_t>(n), 0.0);
        for (std::int64_t i = 0; i < rg.total(); ++i) {
            const std::array<int, 4> bin = rg.unflatten(i);
            int mm = bin[static_cast<std::size_t>(axis)];
            if (mm > (n - 1) / 2) mm -= n;
            marginal[static_cast<std::size_t>(mm - tc.m_min[static_cast<std::size_t>(axis)])] +=
                std::norm(phi[static_cast<std::size_t>(i)]);
        }
        double total = 0.0;
        for (double v : marginal) total += v;
        int radius = 0;
        if (total > 0.0) {
            for (radius = 0; radius <= std::max(-tc.m_min[static_cast<std::size_t>(axis)],
                                                tc.m_max[static_cast<std::size_t>(axis)]);
                 ++radius) {
                double inside = 0.0;
                for (int mm = tc.m_min[static_cast<std::size_t>(axis)];
                     mm <= tc.m_max[static_cast<std::size_t>(axis)]; ++mm) {
                    if (std::abs(mm) <= radius) {
                        inside += marginal[static_cast<std::size_t>(mm - tc.m_min[static_cast<std::size_t>(axis)])];
                    }
                }
                if (inside >= total * (1.0 - 2.5e-7)) break;
            }
        }
        tc.energy_box[static_cast<std::size_t>(axis)] = radius;
    }
    return tc;
}

ParsevalCheck parseval_check(const SpectralSignal& f, const TileIndex& p, const WindowSpec& spec,
                             const CubeR& cube, const TileCoefficients& coeffs) {
    GridSpec rg;
    rg.lo = cube.lo;
    rg.hi = cube.hi;
    for (int axis = 0; axis < 4; ++axis) {
        rg.count[static_cast<std::size_t>(axis)] =
            coeffs.m_max[static_cast<std::size_t>(axis)] - coeffs.m_min[static_cast<std::size_t>(axis)] + 1;
    }
    const Mat pm = p.to_matrix();
    const double det_p = std::abs(pm.determinant());

    double quad = 0.0;
    Mat z(2, 2);
    for (std::int64_t i = 0; i < rg.total(); ++i) {
        const std::array<int, 4> k = rg.unflatten(i);
        z(0, 0) = rg.node(0, k[0]);
        z(0, 1) = rg.node(1, k[1]);
        z(1, 0) = rg.node(2, k[2]);
        z(1, 1) = rg.node(3, k[3]);
        const double g = window_eval2x2(spec, z);
        if (g == 0.0) continue;
        quad += std::norm(f.eval(z * pm)) * g * g;
    }
    ParsevalCheck out;
    out.coefficient_energy = coeffs.total_energy;
    out.windowed_energy = cube.volume() * det_p * det_p * rg.cell_volume() * quad;
    const double scale = std::max(out.coefficient_energy, out.windowed_energy);
    out.relative_gap = scale > 0.0 ? std::abs(out.coefficient_energy - out.windowed_energy) / scale : 0.0;
    return out;
}

double frame_operator_symbol(const GroupElement& b, const CubeR& cube, const WindowSpec& spec,
                             double eps, double eta) {
    return cube.volume() * calderon_sum(b, spec, eps, eta);
}

namespace {

// Deterministic nudge patterns for boundary or singular grid nodes. The
// off-diagonal parts must have a symmetric component, or the y-coordinate
// of symmetric nodes never leaves its face.
const double kNudges[4][4] = {
    {1.0, 0.0, 0.0, -1.0},
    {0.0, 1.0, 1.0, 0.0},
    {1.0, 1.0, 0.0, 1.0},
    {1.0, 0.5, 0.5, -1.0},
};

double symbol_at_node(Mat b, const CubeR& cube, const WindowSpec& spec, double eps, double eta,
                      bool& perturbed) {
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    for (int attempt = 0; attempt < 40; ++attempt) {
        try {
            GroupElement g{Mat(b)};
            return cube.volume() * calderon_sum(g, spec, eps, eta);
        } catch (const Error&) {
            perturbed = true;
            const double* nudge = kNudges[attempt % 4];
            const double step = eta * scale * std::ldexp(1.0, attempt / 4);
            b(0, 0) += step * nudge[0];
            b(0, 1) += step * nudge[1];
            b(1, 0) += step * nudge[2];
            b(1, 1) += step * nudge[3];
        }
    }
    throw Error("could not move a grid node off the boundary set");
}

}  // namespace

MultiplierField frame_operator_symbol_field(const GridSpec& grid, const CubeR& cube,
                                            const WindowSpec& spec, double eps, double eta,
                                            int workers) {
    MultiplierField field;
    field.grid = grid;
    field.symbol.assign(static_cast<std::size_t>(grid.total()), 0.0);

    const std::int64_t block = 4096;
    const std::int64_t n_blocks = (grid.total() + block - 1) / block;
    std::vector<std::vector<std::int64_t>> flagged(static_cast<std::size_t>(n_blocks));

    parallel_blocks(grid.total(), block, workers, [&](std::int64_t blk, std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) {
            bool perturbed = false;
            const Mat b = grid.point(grid.unflatten(i));
            field.symbol[static_cast<std::size_t>(i)] =
                symbol_at_node(b, cube, spec, eps, eta, perturbed);
            if (perturbed) flagged[static_cast<std::size_t>(blk)].push_back(i);
        }
    });

    for (const auto& part : flagged) {
        field.perturbed.insert(field.perturbed.end(), part.begin(), part.end());
    }
    std::sort(field.perturbed.begin(), field.perturbed.end());
    field.min_symbol = field.max_symbol = field.symbol.empty() ? 0.0 : field.symbol[0];
    for (double v : field.symbol) {
        field.min_symbol = std::min(field.min_symbol, v);
        field.max_symbol = std::max(field.max_symbol, v);
    }
    return field;
}

std::vector<TileIndex> contributing_tiles(const SpectralSignal& f, const WindowSpec& spec,
                                          double eps, double eta, int workers) {
    const std::int64_t total = f.grid.total();
    const std::int64_t block = 4096;
    const std::int64_t n_blocks = (total + block - 1) / block;
    std::vector<std::vector<TileIndex>> parts(static_cast<std::size_t>(n_blocks));

    parallel_blocks(total, block, workers, [&](std::int64_t blk, std::int64_t lo, std::int64_t hi) {
        auto& local = parts[static_cast<std::size_t>(blk)];
        for (std::int64_t i = lo; i < hi; ++i) {
            if (f.values[static_cast<std::size_t>(i)] == Cplx(0.0, 0.0)) continue;
            Mat b = f.grid.point(f.grid.unflatten(i));
            const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
            for (int attempt = 0; attempt < 40; ++attempt) {
                try {
                    OverlapReport rep = pointwise_overlap(GroupElement(Mat(b)), eps, eta);
                    for (Contributor& c : rep.contributors) local.push_back(std::move(c.index));
                    break;
                } catch (const Error&) {
                    const double* nudge = kNudges[attempt % 4];
                    const double step = eta * scale * std::ldexp(1.0, attempt / 4);
                    b(0, 0) += step * nudge[0];
                    b(0, 1) += step * nudge[1];
                    b(1, 0) += step * nudge[2];
                    b(1, 1) += step * nudge[3];
                }
            }
        }
    });

    std::vector<TileIndex> all;
    for (auto& part : parts) {
        all.insert(all.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    std::sort(all.begin(), all.end(), [](const TileIndex& a, const TileIndex& b) {
        if (a.lambda != b.lambda) return a.lambda < b.lambda;
        if (a.kappa != b.kappa) return a.kappa < b.kappa;
        return a.mu < b.mu;
    });
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return all;
}

namespace {

struct AlignedMap {
    bool aligned = false;
    // per output axis: z index = axis_shift + k (same spacing)
    std::array<std::int64_t, 4> shift{};
};

AlignedMap alignment(const GridSpec& out, const GridSpec& rg, const TileIndex& p, const Mat& q) {
    AlignedMap map;
    for (std::int64_t m : p.mu) {
        if (m != 0) return map;
    }
    for (int axis = 0; axis < 4; ++axis) {
        const double qd = (axis == 0 || axis == 2) ? q(0, 0) : q(1, 1);
        const double z_step = qd * out.step(axis);
        const double r_step = rg.step(axis);
        if (std::abs(z_step - r_step) > 1e-12 * r_step) return map;
        const double offset = (qd * out.lo[static_cast<std::size_t>(axis)] -
                               rg.lo[static_cast<std::size_t>(axis)]) / r_step;
        const double rounded = std::round(offset);
        if (std::abs(offset - rounded) > 1e-9) return map;
        map.shift[static_cast<std::size_t>(axis)] = static_cast<std::int64_t>(rounded);
    }
    map.aligned = true;
    return map;
}

}  // namespace

SpectralSignal synthesize(const std::vector<TileCoefficients>& coeffs, const WindowSpec& spec,
                          const CubeR& cube, const GridSpec& out_grid, int workers) {
    SpectralSignal out;
    out.grid = out_grid;
    out.values.assign(static_cast<std::size_t>(out_grid.total()), Cplx(0.0, 0.0));

    for (const TileCoefficients& tc : coeffs) {
        check_tile_guard(tc.index);
        if (tc.total_energy == 0.0) continue;

        const Mat pm = tc.index.to_matrix();
        const Mat q = tile_inverse(tc.index);
        const double pref = 1.0 / std::abs(pm.determinant());

        // R-grid implied by the coefficient range
        GridSpec rg;
        rg.lo = cube.lo;
        rg.hi = cube.hi;
        for (int axis = 0; axis < 4; ++axis) {
            rg.count[static_cast<std::size_t>(axis)] =
                tc.m_max[static_cast<std::size_t>(axis)] - tc.m_min[static_cast<std::size_t>(axis)] + 1;
        }

        const AlignedMap map = alignment(out_grid, rg, tc.index, q);
        if (map.aligned) {
            // Values at R-grid nodes by one inverse DFT; the offset phase of
            // the coefficients is undone first.
            std::vector<Cplx> bins(static_cast<std::size_t>(rg.total()), Cplx(0.0, 0.0));
            for (std::int64_t i = 0; i < tc.size(); ++i) {
                // unflatten in m-space
                std::int64_t rem = i;
                std::array<int, 4> m{};
                for (int axis = 3; axis >= 0; --axis) {
                    const int span = tc.m_max[static_cast<std::size_t>(axis)] -
                                     tc.m_min[static_cast<std::size_t>(axis)] + 1;
                    m[static_cast<std::size_t>(axis)] =
                        static_cast<int>(rem % span) + tc.m_min[static_cast<std::size_t>(axis)];
                    rem /= span;
                }
                double phase = 0.0;
                std::array<int, 4> bin{};
                for (int axis = 0; axis < 4; ++axis) {
                    const int n = rg.count[static_cast<std::size_t>(axis)];
                    int mm = m[static_cast<std::size_t>(axis)];
                    phase += kTwoPi * mm * rg.lo[static_cast<std::size_t>(axis)] / cube.length(axis);
                    bin[static_cast<std::size_t>(axis)] = mm >= 0 ? mm : mm + n;
                }
                bins[static_cast<std::size_t>(rg.flatten(bin))] =
                    tc.c[static_cast<std::size_t>(i)] * std::polar(1.0, phase);
            }
            dft4(bins, rg.count, FFTW_BACKWARD);

            parallel_blocks(out_grid.total(), 8192, workers, [&](std::int64_t, std::int64_t lo, std::int64_t hi) {
                Mat z(2, 2);
                for (std::int64_t j = lo; j < hi; ++j) {
                    const std::array<int, 4> k = out_grid.unflatten(j);
                    std::array<int, 4> rk{};
                    bool in_range = true;
                    for (int axis = 0; axis < 4 && in_range; ++axis) {
                        const std::int64_t idx = map.shift[static_cast<std::size_t>(axis)] +
                                                 k[static_cast<std::size_t>(axis)];
                        if (idx < 0 || idx >= rg.count[static_cast<std::size_t>(axis)]) in_range = false;
                        rk[static_cast<std::size_t>(axis)] = static_cast<int>(idx);
                    }
                    if (!in_range) continue;  // outside R, window vanishes
                    z(0, 0) = rg.node(0, rk[0]);
                    z(0, 1) = rg.node(1, rk[1]);
                    z(1, 0) = rg.node(2, rk[2]);
                    z(1, 1) = rg.node(3, rk[3]);
                    const double g = window_eval2x2(spec, z);
                    if (g == 0.0) continue;
                    out.values[static_cast<std::size_t>(j)] +=
                        pref * g * bins[static_cast<std::size_t>(rg.flatten(rk))];
                }
            });
            continue;
        }

        // General evaluation at the sheared points z = b q: the trace phase
        // splits over the two matrix rows, so the lattice sum is two complex
        // matrix products.
        const int k0 = out_grid.count[0], k1 = out_grid.count[1];
        const int k2 = out_grid.count[2], k3 = out_grid.count[3];
        const int span0 = tc.m_max[0] - tc.m_min[0] + 1;
        const int span1 = tc.m_max[1] - tc.m_min[1] + 1;
        const int span2 = tc.m_max[2] - tc.m_min[2] + 1;
        const int span3 = tc.m_max[3] - tc.m_min[3] + 1;
        for (int axis = 0; axis < 4; ++axis) {
            const int nyq = rg.count[static_cast<std::size_t>(axis)] / 2;
            if (std::max(std::abs(tc.m_min[static_cast<std::size_t>(axis)]),
                         std::abs(tc.m_max[static_cast<std::size_t>(axis)])) > nyq) {
                throw GridError("coefficient range beyond the grid Nyquist limit");
            }
        }

        Eigen::MatrixXcd e01(static_cast<Eigen::Index>(k0) * k1, static_cast<Eigen::Index>(span0) * span1);
        for (int a = 0; a < k0; ++a) {
            const double b0 = out_grid.node(0, a);
            for (int b = 0; b < k1; ++b) {
                const double b1 = out_grid.node(1, b);
                const double z0 = q(0, 0) * b0;
                const double z1 = q(0, 1) * b0 + q(1, 1) * b1;
                const Eigen::Index row = static_cast<Eigen::Index>(a) * k1 + b;
                for (int m0 = tc.m_min[0]; m0 <= tc.m_max[0]; ++m0) {
                    const double ph0 = kTwoPi * m0 * z0 / cube.length(0);
                    for (int m1 = tc.m_min[1]; m1 <= tc.m_max[1]; ++m1) {
                        const double ph = ph0 + kTwoPi * m1 * z1 / cube.length(1);
                        e01(row, static_cast<Eigen::Index>(m0 - tc.m_min[0]) * span1 + (m1 - tc.m_min[1])) =
                            std::polar(1.0, ph);
                    }
                }
            }
        }
        Eigen::MatrixXcd e23(static_cast<Eigen::Index>(k2) * k3, static_cast<Eigen::Index>(span2) * span3);
        for (int a = 0; a < k2; ++a) {
            const double b2 = out_grid.node(2, a);
            for (int b = 0; b < k3; ++b) {
                const double b3 = out_grid.node(3, b);
                const double z2 = q(0, 0) * b2;
                const double z3 = q(0, 1) * b2 + q(1, 1) * b3;
                const Eigen::Index row = static_cast<Eigen::Index>(a) * k3 + b;
                for (int m2 = tc.m_min[2]; m2 <= tc.m_max[2]; ++m2) {
                    const double ph2 = kTwoPi * m2 * z2 / cube.length(2);
                    for (int m3 = tc.m_min[3]; m3 <= tc.m_max[3]; ++m3) {
                        const double ph = ph2 + kTwoPi * m3 * z3 / cube.length(3);
                        e23(row, static_cast<Eigen::Index>(m2 - tc.m_min[2]) * span3 + (m3 - tc.m_min[3])) =
                            std::polar(1.0, ph);
                    }
                }
            }
        }
        Eigen::MatrixXcd cmat(static_cast<Eigen::Index>(span0) * span1,
                              static_cast<Eigen::Index>(span2) * span3);
        for (std::int64_t i = 0; i < tc.size(); ++i) {
            std::int64_t rem = i;
            std::array<int, 4> m{};
            for (int axis = 3; axis >= 0; --axis) {
                const int span = tc.m_max[static_cast<std::size_t>(axis)] -
                                 tc.m_min[static_cast<std::size_t>(axis)] + 1;
                m[static_cast<std::size_t>(axis)] = static_cast<int>(rem % span);
                rem /= span;
            }
            cmat(static_cast<Eigen::Index>(m[0]) * span1 + m[1],
                 static_cast<Eigen::Index>(m[2]) * span3 + m[3]) = tc.c[static_cast<std::size_t>(i)];
        }

        Eigen::MatrixXcd g = e01 * (cmat * e23.transpose());

        parallel_blocks(out_grid.total(), 8192, workers, [&](std::int64_t, std::int64_t lo, std::int64_t hi) {
            Mat z(2, 2);
            for (std::int64_t j = lo; j < hi; ++j) {
                const std::array<int, 4> k = out_grid.unflatten(j);
                const double b0 = out_grid.node(0, k[0]);
                const double b1 = out_grid.node(1, k[1]);
                const double b2 = out_grid.node(2, k[2]);
                const double b3 = out_grid.node(3, k[3]);
                z(0, 0) = q(0, 0) * b0;
                z(0, 1) = q(0, 1) * b0 + q(1, 1) * b1;
                z(1, 0) = q(0, 0) * b2;
                z(1, 1) = q(0, 1) * b2 + q(1, 1) * b3;
                const double wf = window_eval2x2(spec, z);
                if (wf == 0.0) continue;
                out.values[static_cast<std::size_t>(j)] +=
                    pref * wf *
                    g(static_cast<Eigen::Index>(k[0]) * k1 + k[1],
                      static_cast<Eigen::Index>(k[2]) * k3 + k[3]);
            }
        });
    }
    return out;
}

ReconstructionResult reconstruct_canonical_fast(const SpectralSignal& f, const WindowSpec& spec,
                                                const CubeR& cube, double eps, double eta,
                                                int workers) {
    ReconstructionResult res;
    res.symbol = frame_operator_symbol_field(f.grid, cube, spec, eps, eta, workers);
    if (res.symbol.min_symbol < cube.volume() * (1.0 - 1e-9)) {
        throw Error("frame operator symbol dipped below the lower frame bound");
    }
    res.output.grid = f.grid;
    res.output.values.resize(f.values.size());
    res.output.flagged = res.symbol.perturbed;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        const double s = res.symbol.symbol[i];
        res.output.values[i] = (s * f.values[i]) / s;
    }
    res.relative_error = relative_l2_error(res.output, f);
    return res;
}

ReconstructionResult reconstruct_canonical_full(const SpectralSignal& f, const WindowSpec& spec,
                                                const CubeR& cube, double eps, double eta,
                                                int workers) {
    ReconstructionResult res;
    res.symbol = frame_operator_symbol_field(f.grid, cube, spec, eps, eta, workers);
    if (res.symbol.min_symbol < cube.volume() * (1.0 - 1e-9)) {
        throw Error("frame operator symbol dipped below the lower frame bound");
    }
    res.tiles = contributing_tiles(f, spec, eps, eta, workers);

    std::vector<TileCoefficients> coeffs;
    coeffs.reserve(res.tiles.size());
    for (const TileIndex& p : res.tiles) {
        coeffs.push_back(analysis_coefficients(f, p, spec, cube));
    }
    SpectralSignal sf = synthesize(coeffs, spec, cube, f.grid, workers);

    res.output.grid = f.grid;
    res.output.values.resize(f.values.size());
    res.output.flagged = res.symbol.perturbed;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        res.output.values[i] = sf.values[i] / res.symbol.symbol[i];
    }
    res.relative_error = relative_l2_error(res.output, f);

    // agreement with the fast path (identical symbol, so this compares the
    // analysis/synthesis application of S against the multiplier form)
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        num += std::norm(res.output.values[i] - f.values[i]);
        den += std::norm(f.values[i]);
    }
    res.full_vs_fast = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    return res;
}

FrameAlgorithmResult reconstruct_frame_algorithm(const SpectralSignal& f, const WindowSpec& spec,
                                                 const CubeR& cube, double eps, double eta,
                                                 double bound_a, double bound_b, int iterations,
                                                 int workers) {
    if (iterations < 1) throw ConfigError("frame algorithm needs at least one iteration");
    if (!(bound_a > 0.0 && bound_b >= bound_a)) throw ConfigError("need 0 < A <= B");

    const MultiplierField field = frame_operator_symbol_field(f.grid, cube, spec, eps, eta, workers);
    FrameAlgorithmResult res;
    res.relaxation = 2.0 / (bound_a + bound_b);
    res.guaranteed_ratio = (bound_b - bound_a) / (bound_b + bound_a);

    const double fnorm = f.norm();
    if (fnorm == 0.0) {
        res.error_history.assign(static_cast<std::size_t>(iterations), 0.0);
        res.converged = true;
        return res;
    }

    std::vector<Cplx> current(f.values.size(), Cplx(0.0, 0.0));
    double prev_err = 1.0;
    for (int it = 0; it < iterations; ++it) {
        for (std::size_t i = 0; i < current.size(); ++i) {
            const Cplx residual = field.symbol[i] * (f.values[i] - current[i]);
            current[i] += res.relaxation * residual;
        }
        double num = 0.0;
        for (std::size_t i = 0; i < current.size(); ++i) num += std::norm(current[i] - f.values[i]);
        const double err = std::sqrt(num * f.grid.cell_volume()) / fnorm;
        res.error_history.push_back(err);
        if (it > 0 && prev_err > 1e-14) {
            res.max_observed_ratio = std::max(res.max_observed_ratio, err / prev_err);
        }
        if (err > prev_err * (1.0 + 1e-9) && err > 1e-13) {
            throw Error("frame algorithm diverged; the assumed bounds are violated");
        }
        prev_err = err;
    }
    res.converged = res.error_history.back() < 1.0;
    return res;
}

SpectralSignal make_plateau_signal(const GridSpec& grid, const WindowSpec& spec, double eps,
                                   std::uint64_t seed) {
    const double sigma = 0.02;
    const double radius = 6.0 * sigma;
    // coordinate zone whose points see no neighbor window: s and w clear of
    // the lambda/kappa shifts, y clear of the mu shifts
    const double sw_lo = 1.0 + 0.5 * eps, sw_hi = 2.0 - 2.0 * eps;
    const double y_lo = eps, y_hi = 1.0 - eps;
    if (!(sw_lo < sw_hi && y_lo < y_hi)) {
        throw ConfigError("widening leaves no deep plateau zone");
    }

    Rng rng(seed);
    std::uniform_real_distribution<double> amp(0.5, 1.5);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);

    struct Spike {
        double x[4];
        Cplx a;
    };
    std::vector<Spike> spikes;
    const TileIndex base = TileIndex::zero(2);
    for (std::int64_t i = 0; i < grid.total(); ++i) {
        const Mat b = grid.point(grid.unflatten(i));
        const Coords2 c = coords2x2(b(0, 0), b(0, 1), b(1, 0), b(1, 1));
        if (!c.invertible) continue;
        if (c.s <= sw_lo + radius || c.s >= sw_hi - radius) continue;
        if (c.w <= sw_lo + radius || c.w >= sw_hi - radius) continue;
        if (c.y <= y_lo + radius || c.y >= y_hi - radius) continue;
        if (!single_tile_footprint(b, radius, spec, eps, 128,
                                   seed ^ static_cast<std::uint64_t>(i))) {
            continue;
        }
        Assignment asg = tile_assign(GroupElement(Mat(b)), 1e-9);
        if (!(asg.index == base)) continue;
        Spike s;
        s.x[0] = b(0, 0);
        s.x[1] = b(0, 1);
        s.x[2] = b(1, 0);
        s.x[3] = b(1, 1);
        s.a = std::polar(amp(rng), phase(rng));
        spikes.push_back(s);
    }
    if (spikes.empty()) throw ConfigError("grid carries no deep plateau nodes");

    auto form = [spikes, sigma, radius](const Mat& b) {
        const double x0 = b(0, 0), x1 = b(0, 1), x2 = b(1, 0), x3 = b(1, 1);
        Cplx acc(0.0, 0.0);
        for (const Spike& s : spikes) {
            const double d0 = x0 - s.x[0], d1 = x1 - s.x[1];
            const double d2 = x2 - s.x[2], d3 = x3 - s.x[3];
            const double r2 = d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3;
            if (r2 > radius * radius) continue;
            acc += s.a * std::exp(-0.5 * r2 / (sigma * sigma));
        }
        return acc;
    };

    SpectralSignal sig;
    sig.grid = grid;
    sig.values.resize(static_cast<std::size_t>(grid.total()));
    for (std::int64_t i = 0; i < grid.total(); ++i) {
        sig.values[static_cast<std::size_t>(i)] = form(grid.point(grid.unflatten(i)));
    }
    sig.analytic = form;
    return sig;
}

bool single_tile_footprint(const Mat& center, double radius, const WindowSpec& spec, double eps,
                           std::int64_t probes, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    TileIndex base;
    try {
        Assignment a = tile_assign(GroupElement(Mat(center)), 1e-9);
        if (a.boundary) return false;
        base = a.index;
    } catch (const Error&) {
        return false;
    }

    for (std::int64_t i = 0; i < probes; ++i) {
        double dir[4];
        double norm = 0.0;
        for (double& d : dir) {
            d = gauss(rng);
            norm += d * d;
        }
        norm = std::sqrt(norm);
        // half the probes on the sphere, half in the ball
        const double r = (i % 2 == 0) ? radius : radius * std::pow(uni(rng), 0.25);
        Mat b = center;
        b(0, 0) += r * dir[0] / norm;
        b(0, 1) += r * dir[1] / norm;
        b(1, 0) += r * dir[2] / norm;
        b(1, 1) += r * dir[3] / norm;
        try {
            OverlapReport rep = pointwise_overlap(GroupElement(Mat(b)), eps, 1e-12);
            if (rep.count() != 1) return false;
            if (!(rep.contributors[0].index == base)) return false;
            if (window_eval(spec, rep.contributors[0].rel) != 1.0) return false;
        } catch (const Error&) {
            return false;
        }
    }
    return true;
}

}  // namespace glnframes
