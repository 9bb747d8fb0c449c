#pragma once

#include <functional>

#include "glnframes/overlap.hpp"

namespace glnframes {

// Fourier-domain window parametrized in tile coordinates, constant on O_n,
// with 1 on the closed fundamental box and support inside the widened open
// box: indicator_closure <= eval <= indicator_open by construction.
struct WindowSpec {
    enum class Kind { indicator, smooth };
    enum class Ramp { raised_cosine };

    Kind kind = Kind::smooth;
    double epsilon = 0.2;
    Ramp ramp = Ramp::raised_cosine;

    static WindowSpec indicator(double eps = 0.2);
    static WindowSpec smooth(double eps);
};

// Scalar profile: 1 on [lo,hi], 0 outside (lo-eps, hi+eps), raised-cosine
// ramp sin^2(pi/2 * (t-lo+eps)/eps) rising and the mirror image falling.
// kind=indicator uses the closed-box indicator.
double window_profile(const WindowSpec& spec, double t, double lo, double hi);

// Product of the scalar profiles over s, w_i (box [1,2]) and y_{i,j}
// (box [0,1]); independent of k.
double window_eval(const WindowSpec& spec, const IwasawaFactors& f);
double window_eval(const WindowSpec& spec, const GroupElement& a);

struct QuadResult {
    double value = 0.0;
    double error = 0.0;  // refinement-difference estimate
};

// Nodes/weights of the Gauss-Legendre rule on [-1,1].
void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights);

// integral of profile(t)^2 * t^power over the support, panels split at the
// ramp breakpoints. Exposed for the per-axis factors of the admissibility
// quadrature and for tests that substitute a degenerate profile.
QuadResult quad_axis(const std::function<double(double)>& profile,
                     const std::vector<double>& breakpoints, int power, int order);

// Wavelet normalization integral of |window|^2 against the Haar density in
// tile coordinates with the normalized k-marginal. Separable, so the tensor
// Gauss-Legendre rule reduces to a product of per-axis quadratures.
QuadResult admissibility_integral_coords(const WindowSpec& spec, int n, int order = 64);

// n = 2 only: Monte-Carlo of |window(h)|^2 / |det h|^n over the entry box
// [-7,7] x [-10,10] x [-7,7] x [-10,10] that contains the widened support.
MCEstimate admissibility_integral_entry_mc(const WindowSpec& spec, std::int64_t n_samples,
                                           std::uint64_t seed, int workers = 0);

// Same Monte-Carlo against an arbitrary translate of the window (the window
// is evaluated at h * p^{-1} and the entry box is the translate's image);
// used to check that the ratio of the two admissibility conventions does
// not depend on the region.
MCEstimate admissibility_entry_mc_translated(const WindowSpec& spec, const TileIndex& p,
                                             std::int64_t n_samples, std::uint64_t seed,
                                             int workers = 0);

struct NormalizedWindow {
    WindowSpec spec;
    double scale = 1.0;  // eval = scale * window_eval

    double eval(const IwasawaFactors& f) const { return scale * window_eval(spec, f); }
};

// scale = integral^{-1/2} so that the scaled window integrates to 1.
NormalizedWindow normalize_to_wavelet(const WindowSpec& spec, int n, int order = 64);

const char* window_kind_name(WindowSpec::Kind k);
WindowSpec::Kind window_kind_from_name(const std::string& name);

}  // namespace glnframes
