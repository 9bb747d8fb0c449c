#pragma once

#include <array>
#include <complex>

#include "glnframes/calderon.hpp"

namespace glnframes {

using Cplx = std::complex<double>;

// Axis order is the row-major flattening (b11, b12, b21, b22) of a 2x2
// matrix. Defaults give |R| = 14^2 * 20^2 = 78400.
struct CubeR {
    std::array<double, 4> lo{-7.0, -10.0, -7.0, -10.0};
    std::array<double, 4> hi{7.0, 10.0, 7.0, 10.0};

    double volume() const;
    double length(int axis) const { return hi[static_cast<std::size_t>(axis)] - lo[static_cast<std::size_t>(axis)]; }
    bool contains(const Mat& m) const;
};

// Character lattice on the cube. The frequency attached to axis `i` of the
// flattened matrix is m_i / length(i); as a matrix the quadruple
// (m1,m2,m3,m4) realizes [[m1/14, m3/14], [m2/20, m4/20]] for the default
// cube, because tr(gamma b) pairs gamma_{ij} with b_{ji}.
struct LatticeJ {
    CubeR cube;

    Mat gamma(const std::array<int, 4>& m) const;
    double frequency(int axis, int m) const { return m / cube.length(axis); }
    // <e_gamma, e_gamma'> on R by per-axis Gauss-Legendre quadrature.
    Cplx basis_inner_product(const std::array<int, 4>& m1, const std::array<int, 4>& m2,
                             int order = 64) const;
    // Deliberately mispaired variant (1/14 steps on the 20-length axes);
    // exists so tests can show the transposed convention is not orthonormal.
    Cplx basis_inner_product_transposed(const std::array<int, 4>& m1,
                                        const std::array<int, 4>& m2, int order = 64) const;
};

struct GridSpec {
    std::array<double, 4> lo{};
    std::array<double, 4> hi{};
    std::array<int, 4> count{};

    static GridSpec over_cube(const CubeR& cube, int per_axis);
    std::int64_t total() const;
    double step(int axis) const;
    double cell_volume() const;
    double node(int axis, int k) const;
    Mat point(const std::array<int, 4>& k) const;
    std::array<int, 4> unflatten(std::int64_t idx) const;
    std::int64_t flatten(const std::array<int, 4>& k) const;
    bool operator==(const GridSpec& o) const;
};

// Samples of a Fourier-domain signal on a uniform grid. `analytic`, when
// set, evaluates the signal exactly off-grid (test signals keep their
// closed form); otherwise off-grid evaluation is multilinear.
struct SpectralSignal {
    GridSpec grid;
    std::vector<Cplx> values;
    std::vector<std::int64_t> flagged;  // perturbed node indices (metadata)
    std::function<Cplx(const Mat&)> analytic;

    Cplx eval(const Mat& point) const;
    double norm() const;  // grid L2 norm, sqrt(sum |v|^2 * cell volume)
};

double relative_l2_error(const SpectralSignal& got, const SpectralSignal& want);

// Gaussian bump in the Fourier domain truncated at 6 sigma, sampled on the
// grid and carrying its closed form for off-grid evaluation.
SpectralSignal make_gaussian_signal(const GridSpec& grid, const Mat& center, double sigma,
                                    Cplx amplitude = Cplx(1.0, 0.0));

struct TileCoefficients {
    TileIndex index;
    std::array<int, 4> m_min{};  // inclusive DFT range per axis
    std::array<int, 4> m_max{};
    std::vector<Cplx> c;         // row-major over (m1, m2, m3, m4)
    std::array<int, 4> energy_box{};  // per-axis |m| radius holding >= 1 - 1e-6 of the energy
    double total_energy = 0.0;   // sum |c|^2

    std::int64_t size() const;
    std::int64_t flatten(const std::array<int, 4>& m) const;
};

// Frame coefficients of one tile, computed on the R-grid: the integrand is
// pulled back to R (b -> b p^{-1}), multiplied by the window and the
// |det p| power of the quasiregular representation, and transformed with
// one 4-d DFT. grid_count axes default to the signal's own counts.
TileCoefficients analysis_coefficients(const SpectralSignal& f, const TileIndex& p,
                                       const WindowSpec& spec, const CubeR& cube,
                                       std::array<int, 4> grid_count = {0, 0, 0, 0});

// Parseval check data: sum |c|^2 and the cube-volume-weighted quadrature of
// |f(b)|^2 |window(b p^{-1})|^2 over the same R-grid.
struct ParsevalCheck {
    double coefficient_energy = 0.0;
    double windowed_energy = 0.0;  // |R| * integral
    double relative_gap = 0.0;
};
ParsevalCheck parseval_check(const SpectralSignal& f, const TileIndex& p,
                             const WindowSpec& spec, const CubeR& cube,
                             const TileCoefficients& coeffs);

// |R| * calderon_sum(b). Throws BoundaryError through the overlap layer.
double frame_operator_symbol(const GroupElement& b, const CubeR& cube, const WindowSpec& spec,
                             double eps, double eta);

struct MultiplierField {
    GridSpec grid;
    std::vector<double> symbol;
    std::vector<std::int64_t> perturbed;  // nodes nudged off boundaries/singular sets
    double min_symbol = 0.0;
    double max_symbol = 0.0;
};

// Symbol evaluated at every grid node; boundary or near-singular nodes are
// perturbed inward by eta and recorded.
MultiplierField frame_operator_symbol_field(const GridSpec& grid, const CubeR& cube,
                                            const WindowSpec& spec, double eps, double eta,
                                            int workers = 0);

// Union of the pointwise overlap sets over grid nodes carrying signal.
std::vector<TileIndex> contributing_tiles(const SpectralSignal& f, const WindowSpec& spec,
                                          double eps, double eta, int workers = 0);

// Adjoint of analysis: sum over tiles and lattice points of
// c_{p,m} |det p|^{-n/2} window(b p^{-1}) exp(2 pi i tr(b p^{-1} gamma_m)),
// evaluated on the output grid. Uses an exact inverse-DFT fast path when the
// output grid maps onto the R-grid under p^{-1} and a factorized
// matrix-product evaluation otherwise.
SpectralSignal synthesize(const std::vector<TileCoefficients>& coeffs, const WindowSpec& spec,
                          const CubeR& cube, const GridSpec& out_grid, int workers = 0);

struct ReconstructionResult {
    SpectralSignal output;
    double relative_error = 0.0;
    double full_vs_fast = 0.0;     // full path only
    std::vector<TileIndex> tiles;  // full path only
    MultiplierField symbol;
};

// Fast path: divides the multiplier identity S f = symbol * f directly.
// Fails hard if the symbol dips below |R| (1 - 1e-9) anywhere.
ReconstructionResult reconstruct_canonical_fast(const SpectralSignal& f, const WindowSpec& spec,
                                                const CubeR& cube, double eps, double eta,
                                                int workers = 0);

// Full path: analysis over the contributing tiles, synthesis, then division
// by the symbol field.
ReconstructionResult reconstruct_canonical_full(const SpectralSignal& f, const WindowSpec& spec,
                                                const CubeR& cube, double eps, double eta,
                                                int workers = 0);

struct FrameAlgorithmResult {
    std::vector<double> error_history;  // relative error per iteration
    double relaxation = 0.0;            // 2 / (A + B)
    double guaranteed_ratio = 0.0;      // (B - A) / (B + A)
    double max_observed_ratio = 0.0;
    bool converged = false;
};

// f_{k+1} = f_k + 2/(A+B) (S f - S f_k) with S the symbol multiplier.
// Error growth raises Error (it would contradict the frame bounds).
FrameAlgorithmResult reconstruct_frame_algorithm(const SpectralSignal& f, const WindowSpec& spec,
                                                 const CubeR& cube, double eps, double eta,
                                                 double bound_a, double bound_b, int iterations,
                                                 int workers = 0);

// Confirms that every sampled point of the ball supporting the signal sees
// exactly one tile at full window plateau; under this condition the
// analysis/synthesis round trip is exact on the grid.
bool single_tile_footprint(const Mat& center, double radius, const WindowSpec& spec, double eps,
                           std::int64_t probes, std::uint64_t seed);

// Sum of narrow Gaussian spikes (sigma = 0.02, truncated at 6 sigma)
// centered on grid nodes that sit deep inside the base tile plateau, with
// seeded random amplitudes. Every window but the base tile's vanishes on
// the support, so the analysis/synthesis round trip is exact on the grid.
// Throws when the grid has no deep nodes.
SpectralSignal make_plateau_signal(const GridSpec& grid, const WindowSpec& spec, double eps,
                                   std::uint64_t seed);

}  // namespace glnframes
