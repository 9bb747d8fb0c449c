#include "glnframes/window.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

namespace glnframes {

namespace {

constexpr double kPi = 3.14159265358979323846;

void validate_eps(double eps) {
    if (!(eps > 0.0 && eps <= 0.5)) throw ConfigError("window epsilon must lie in (0, 1/2]");
}

}  // namespace

WindowSpec WindowSpec::indicator(double eps) {
    validate_eps(eps);
    return {Kind::indicator, eps, Ramp::raised_cosine};
}

WindowSpec WindowSpec::smooth(double eps) {
    validate_eps(eps);
    return {Kind::smooth, eps, Ramp::raised_cosine};
}

double window_profile(const WindowSpec& spec, double t, double lo, double hi) {
    if (spec.kind == WindowSpec::Kind::indicator) {
        return (t >= lo && t <= hi) ? 1.0 : 0.0;
    }
    const double eps = spec.epsilon;
    if (t >= lo && t <= hi) return 1.0;
    if (t <= lo - eps || t >= hi + eps) return 0.0;
    const double u = t < lo ? (t - lo + eps) / eps : (hi + eps - t) / eps;
    const double s = std::sin(0.5 * kPi * u);
    return s * s;
}

double window_eval(const WindowSpec& spec, const IwasawaFactors& f) {
    const int n = f.n();
    double v = window_profile(spec, f.s, 1.0, 2.0);
    for (int i = 0; i < n - 1 && v != 0.0; ++i) {
        v *= window_profile(spec, f.w[static_cast<std::size_t>(i)], 1.0, 2.0);
    }
    for (int i = 0; i < n && v != 0.0; ++i) {
        for (int j = i + 1; j < n; ++j) {
            v *= window_profile(spec, f.y(i, j), 0.0, 1.0);
            if (v == 0.0) break;
        }
    }
    return v;
}

double window_eval(const WindowSpec& spec, const GroupElement& a) {
    return window_eval(spec, iwasawa_decompose(a));
}

void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
    if (order < 1) throw ConfigError("quadrature order must be positive");
    nodes.assign(static_cast<std::size_t>(order), 0.0);
    weights.assign(static_cast<std::size_t>(order), 0.0);
    const int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Newton from the Chebyshev initial guess
        double x = std::cos(kPi * (i + 0.75) / (order + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < order; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = order * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[static_cast<std::size_t>(i)] = -x;
        nodes[static_cast<std::size_t>(order - 1 - i)] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[static_cast<std::size_t>(i)] = w;
        weights[static_cast<std::size_t>(order - 1 - i)] = w;
    }
}

namespace {

double quad_panels(const std::function<double(double)>& f,
                   const std::vector<double>& breakpoints, int order) {
    std::vector<double> nodes, weights;
    gauss_legendre(order, nodes, weights);
    double total = 0.0;
    for (std::size_t p = 0; p + 1 < breakpoints.size(); ++p) {
        const double a = breakpoints[p], b = breakpoints[p + 1];
        if (!(b > a)) continue;
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            sum += weights[i] * f(mid + half * nodes[i]);
        }
        total += half * sum;
    }
    return total;
}

}  // namespace

QuadResult quad_axis(const std::function<double(double)>& profile,
                     const std::vector<double>& breakpoints, int power, int order) {
    auto integrand = [&](double t) {
        const double v = profile(t);
        return v * v * std::pow(t, power);
    };
    QuadResult r;
    r.value = quad_panels(integrand, breakpoints, order);
    const double coarse = quad_panels(integrand, breakpoints, std::max(2, order / 2));
    r.error = std::abs(r.value - coarse);
    return r;
}

QuadResult admissibility_integral_coords(const WindowSpec& spec, int n, int order) {
    validate_eps(spec.epsilon);
    const bool smooth = spec.kind == WindowSpec::Kind::smooth;
    const double eps = spec.epsilon;

    auto breaks = [&](double lo, double hi) {
        return smooth ? std::vector<double>{lo - eps, lo, hi, hi + eps}
                      : std::vector<double>{lo, hi};
    };
    auto sw_profile = [&](double t) { return window_profile(spec, t, 1.0, 2.0); };
    auto y_profile = [&](double t) { return window_profile(spec, t, 0.0, 1.0); };

    QuadResult out{1.0, 0.0};
    double rel_err = 0.0;
    auto accumulate = [&](const QuadResult& axis, int repeats) {
        for (int r = 0; r < repeats; ++r) {
            out.value *= axis.value;
            if (axis.value != 0.0) rel_err += std::abs(axis.error / axis.value);
        }
    };

    accumulate(quad_axis(sw_profile, breaks(1.0, 2.0), -1, order), 1);  // s axis
    for (int i = 1; i <= n - 1; ++i) {
        accumulate(quad_axis(sw_profile, breaks(1.0, 2.0), 2 * (n - i) - 1, order), 1);
    }
    accumulate(quad_axis(y_profile, breaks(0.0, 1.0), 0, order), n * (n - 1) / 2);
    out.error = std::abs(out.value) * rel_err;
    return out;
}

namespace {

MCEstimate entry_mc_impl(const WindowSpec& spec, const Mat& right_factor,
                         double right_det_abs, std::int64_t n_samples,
                         std::uint64_t seed, int workers) {
    if (n_samples <= 0) throw ConfigError("Monte-Carlo estimate requires at least one sample");
    const int n = 2;
    // Entry box containing the widened support for any eps <= 1/2; the
    // translate maps it by the right factor.
    const double box_lo[4] = {-7.0, -10.0, -7.0, -10.0};
    const double box_hi[4] = {7.0, 10.0, 7.0, 10.0};
    double vol = 1.0;
    for (int i = 0; i < 4; ++i) vol *= box_hi[i] - box_lo[i];
    vol *= right_det_abs * right_det_abs;  // Lebesgue volume of box * right_factor (n = 2)

    // |det| on the widened support stays above (1-eps)^2 >= 1/4; anything
    // below 0.2 is outside the support, so the window vanishes there.
    const double det_floor = 0.2 * right_det_abs;

    const std::int64_t block = 8192;
    const std::int64_t n_blocks = (n_samples + block - 1) / block;
    std::vector<double> sums(static_cast<std::size_t>(n_blocks), 0.0);
    std::vector<double> sqs(static_cast<std::size_t>(n_blocks), 0.0);

    parallel_blocks(n_samples, block, workers, [&](std::int64_t b, std::int64_t lo, std::int64_t hi) {
        Rng rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(b) + 0xbeefULL)));
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        double sum = 0.0, sq = 0.0;
        Mat h(n, n);
        for (std::int64_t i = lo; i < hi; ++i) {
            h(0, 0) = box_lo[0] + (box_hi[0] - box_lo[0]) * uni(rng);
            h(0, 1) = box_lo[1] + (box_hi[1] - box_lo[1]) * uni(rng);
            h(1, 0) = box_lo[2] + (box_hi[2] - box_lo[2]) * uni(rng);
            h(1, 1) = box_lo[3] + (box_hi[3] - box_lo[3]) * uni(rng);
            Mat hp = h * right_factor;
            const double det = hp.determinant();
            double val = 0.0;
            if (std::abs(det) > det_floor) {
                // window is evaluated at hp * right_factor^{-1} = h itself
                const double g = window_eval(spec, GroupElement(Mat(h)));
                if (g != 0.0) val = g * g / std::pow(std::abs(det), n);
            }
            sum += val;
            sq += val * val;
        }
        sums[static_cast<std::size_t>(b)] = sum;
        sqs[static_cast<std::size_t>(b)] = sq;
    });

    double sum = 0.0, sq = 0.0;
    for (std::size_t b = 0; b < sums.size(); ++b) {
        sum += sums[b];
        sq += sqs[b];
    }
    const double nreal = static_cast<double>(n_samples);
    const double mean = sum / nreal;
    const double var = std::max(0.0, sq / nreal - mean * mean);
    MCEstimate out;
    out.samples = n_samples;
    out.value = vol * mean;
    out.std_error = vol * std::sqrt(var / nreal);
    return out;
}

}  // namespace

MCEstimate admissibility_integral_entry_mc(const WindowSpec& spec, std::int64_t n_samples,
                                           std::uint64_t seed, int workers) {
    return entry_mc_impl(spec, Mat(Mat::Identity(2, 2)), 1.0, n_samples, seed, workers);
}

MCEstimate admissibility_entry_mc_translated(const WindowSpec& spec, const TileIndex& p,
                                             std::int64_t n_samples, std::uint64_t seed,
                                             int workers) {
    if (p.n != 2) throw ConfigError("entry-box Monte-Carlo is implemented for n = 2 only");
    Mat pm = p.to_matrix();
    return entry_mc_impl(spec, pm, std::abs(pm.determinant()), n_samples, seed, workers);
}

NormalizedWindow normalize_to_wavelet(const WindowSpec& spec, int n, int order) {
    const QuadResult q = admissibility_integral_coords(spec, n, order);
    if (!(q.value > 0.0)) throw ConfigError("window has vanishing admissibility integral");
    return {spec, 1.0 / std::sqrt(q.value)};
}

const char* window_kind_name(WindowSpec::Kind k) {
    return k == WindowSpec::Kind::indicator ? "indicator" : "smooth";
}

WindowSpec::Kind window_kind_from_name(const std::string& name) {
    if (name == "indicator") return WindowSpec::Kind::indicator;
    if (name == "smooth") return WindowSpec::Kind::smooth;
    throw ConfigError("unknown window kind: " + name);
}

}  // namespace glnframes
