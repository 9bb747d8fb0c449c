#include "glnframes/tiling.hpp"

#include <cmath>
#include <sstream>

#include "glnframes/overlap.hpp"

namespace glnframes {

namespace {

// Splits v > 0 into v = m * 2^e with m in [1,2). frexp is exact, so the
// reduction introduces no rounding.
void dyadic_split(double v, double& mantissa, std::int64_t& exponent) {
    int e = 0;
    const double half_mantissa = std::frexp(v, &e);  // in [0.5, 1)
    mantissa = 2.0 * half_mantissa;
    exponent = static_cast<std::int64_t>(e) - 1;
}

void check_guard(std::int64_t v, const char* what) {
    if (v > kDyadicGuard || v < -kDyadicGuard) {
        std::ostringstream os;
        os << what << " exponent " << v << " exceeds the dyadic guard " << kDyadicGuard;
        throw RangeError(os.str());
    }
}

bool near_integer(double t, double tol) {
    return std::abs(t - std::round(t)) <= tol;
}

struct IntervalSpec {
    double lo, hi;
    bool closed_lo, closed_hi;
};

Location classify(double v, const IntervalSpec& iv, double eta) {
    // strict comparison so eta = 0 classifies exact endpoint hits
    const double tol_lo = eta * std::max(1.0, std::abs(iv.lo));
    const double tol_hi = eta * std::max(1.0, std::abs(iv.hi));
    if (std::abs(v - iv.lo) < tol_lo || std::abs(v - iv.hi) < tol_hi) return Location::boundary;
    const bool above_lo = iv.closed_lo ? v >= iv.lo : v > iv.lo;
    const bool below_hi = iv.closed_hi ? v <= iv.hi : v < iv.hi;
    return (above_lo && below_hi) ? Location::inside : Location::outside;
}

}  // namespace

TileIndex TileIndex::zero(int n) {
    TileIndex t;
    t.n = n;
    t.kappa.assign(static_cast<std::size_t>(n - 1), 0);
    t.mu.assign(static_cast<std::size_t>(n * (n - 1) / 2), 0);
    return t;
}

std::int64_t TileIndex::kappa_at(int i) const {
    if (i < n - 1) return kappa[static_cast<std::size_t>(i)];
    std::int64_t sum = 0;
    for (std::int64_t k : kappa) sum += k;
    return -sum;
}

std::int64_t TileIndex::mu_at(int i, int j) const {
    const int row_start = i * (2 * n - i - 1) / 2;
    return mu[static_cast<std::size_t>(row_start + (j - i - 1))];
}

std::int64_t& TileIndex::mu_ref(int i, int j) {
    const int row_start = i * (2 * n - i - 1) / 2;
    return mu[static_cast<std::size_t>(row_start + (j - i - 1))];
}

Mat TileIndex::to_matrix() const {
    Mat m = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        m(i, i) = std::ldexp(1.0, static_cast<int>(lambda + kappa_at(i)));
        for (int j = i + 1; j < n; ++j) {
            m(i, j) = std::ldexp(static_cast<double>(mu_at(i, j)),
                                 static_cast<int>(lambda + kappa_at(j)));
        }
    }
    return m;
}

bool TileIndex::operator==(const TileIndex& o) const {
    return n == o.n && lambda == o.lambda && kappa == o.kappa && mu == o.mu;
}

std::string TileIndex::str() const {
    std::ostringstream os;
    os << "(lambda=" << lambda << ", kappa=[";
    for (std::size_t i = 0; i < kappa.size(); ++i) os << (i ? "," : "") << kappa[i];
    os << "], mu=[";
    for (std::size_t i = 0; i < mu.size(); ++i) os << (i ? "," : "") << mu[i];
    os << "])";
    return os.str();
}

double TileCoords::y_at(int i, int j) const {
    const int nn = n();
    const int row_start = i * (2 * nn - i - 1) / 2;
    return y[static_cast<std::size_t>(row_start + (j - i - 1))];
}

IwasawaFactors TileCoords::to_factors() const {
    const int nn = n();
    IwasawaFactors f;
    f.s = s;
    f.k = k;
    f.w = w;
    f.y = Mat::Identity(nn, nn);
    std::size_t idx = 0;
    for (int i = 0; i < nn; ++i) {
        for (int j = i + 1; j < nn; ++j, ++idx) f.y(i, j) = y[idx];
    }
    return f;
}

RegionKind RegionKind::open(double eps) {
    if (!(eps > 0.0 && eps <= 0.5)) {
        throw ConfigError("widening epsilon must lie in (0, 1/2]");
    }
    return {Tag::FOpen, eps};
}

Assignment tile_assign(const GroupElement& a, double eta) {
    const int n = a.n();
    const IwasawaFactors f = iwasawa_decompose(a);
    const double floor_tol = std::max(eta, 1e-12);

    Assignment out;
    out.index = TileIndex::zero(n);
    out.coords.k = f.k;
    out.coords.w.resize(static_cast<std::size_t>(n - 1));
    out.coords.y.assign(static_cast<std::size_t>(n * (n - 1) / 2), 0.0);

    // Scale: s 2^lambda = |det a|^{1/n} with s in [1,2).
    dyadic_split(f.s, out.coords.s, out.index.lambda);
    check_guard(out.index.lambda, "lambda");
    if (std::abs(out.coords.s - 1.0) <= eta || std::abs(out.coords.s - 2.0) <= 2.0 * eta) {
        out.boundary = true;
    }

    // Diagonal pass: W_i = w_i 2^kappa_i with w_i in [1,2), i < n. The last
    // diagonal entry is implied by det = 1.
    std::vector<double> kappa_pow(static_cast<std::size_t>(n));
    for (int i = 0; i < n - 1; ++i) {
        double wi;
        std::int64_t ki;
        dyadic_split(f.w[static_cast<std::size_t>(i)], wi, ki);
        check_guard(ki, "kappa");
        out.coords.w[static_cast<std::size_t>(i)] = wi;
        out.index.kappa[static_cast<std::size_t>(i)] = ki;
        if (std::abs(wi - 1.0) <= eta || std::abs(wi - 2.0) <= 2.0 * eta) out.boundary = true;
    }
    for (int i = 0; i < n; ++i) {
        kappa_pow[static_cast<std::size_t>(i)] =
            std::ldexp(1.0, static_cast<int>(out.index.kappa_at(i)));
    }

    // Floor recursion, diagonal by diagonal. With a' = w y (the normalized
    // triangular part), entry (i,j) of a' equals
    //   w_i 2^{kappa_j} (y_{i,j} + mu_{i,j} + sum_{k=i+1}^{j-1} y_{i,k} mu_{k,j}).
    const Mat aprime = f.triangular();
    for (int d = 1; d < n; ++d) {
        for (int i = 0; i + d < n; ++i) {
            const int j = i + d;
            const double w_i = out.coords.w[static_cast<std::size_t>(i)];
            double t = aprime(i, j) /
                       (kappa_pow[static_cast<std::size_t>(j)] * w_i);
            for (int k = i + 1; k < j; ++k) {
                t -= out.coords.y_at(i, k) * static_cast<double>(out.index.mu_at(k, j));
            }
            if (near_integer(t, floor_tol)) out.boundary = true;
            const double fl = std::floor(t);
            out.index.mu_ref(i, j) = static_cast<std::int64_t>(fl);
            const int row_start = i * (2 * n - i - 1) / 2;
            out.coords.y[static_cast<std::size_t>(row_start + (j - i - 1))] = t - fl;
        }
    }
    return out;
}

GroupElement tile_point(const TileIndex& index, const TileCoords& coords) {
    check_guard(index.lambda, "lambda");
    for (int i = 0; i < index.n; ++i) check_guard(index.kappa_at(i), "kappa");
    const IwasawaFactors f = coords.to_factors();
    Mat m = coords.s * (coords.k * (f.triangular() * index.to_matrix()));
    return GroupElement(std::move(m));
}

Location membership(const IwasawaFactors& f, const RegionKind& region, double eta) {
    IntervalSpec sw{1.0, 2.0, true, false};
    IntervalSpec yiv{0.0, 1.0, true, false};
    switch (region.tag) {
        case RegionKind::Tag::F:
            break;
        case RegionKind::Tag::FClosure:
            sw = {1.0, 2.0, true, true};
            yiv = {0.0, 1.0, true, true};
            break;
        case RegionKind::Tag::FOpen:
            sw = {1.0 - region.epsilon, 2.0 + region.epsilon, false, false};
            yiv = {-region.epsilon, 1.0 + region.epsilon, false, false};
            break;
    }

    const int n = f.n();
    bool any_boundary = false;
    auto fold = [&](Location loc) {
        if (loc == Location::outside) return true;
        if (loc == Location::boundary) any_boundary = true;
        return false;
    };

    if (fold(classify(f.s, sw, eta))) return Location::outside;
    for (int i = 0; i < n - 1; ++i) {
        if (fold(classify(f.w[static_cast<std::size_t>(i)], sw, eta))) return Location::outside;
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (fold(classify(f.y(i, j), yiv, eta))) return Location::outside;
        }
    }
    return any_boundary ? Location::boundary : Location::inside;
}

Location membership(const GroupElement& a, const RegionKind& region, double eta) {
    return membership(iwasawa_decompose(a), region, eta);
}

CoordBox coord_box_of_translate(const TileIndex& p) {
    const int n = p.n;
    CoordBox box;
    box.n = n;
    const double two_lambda = std::ldexp(1.0, static_cast<int>(p.lambda));
    box.s = {two_lambda, 2.0 * two_lambda};
    box.w.resize(static_cast<std::size_t>(n - 1));
    for (int i = 0; i < n - 1; ++i) {
        const double step = std::ldexp(1.0, static_cast<int>(p.kappa_at(i)));
        box.w[static_cast<std::size_t>(i)] = {step, 2.0 * step};
    }

    // For f in F, the y-coordinates of f*p are affine in the y-box of F:
    //   y'_{i,j} = (C_{i,j} + sum_{k>i} y_{i,k} C_{k,j}) / C_{i,i},
    // with C = U(mu) diag(2^kappa). Interval arithmetic over y in [0,1].
    Mat c = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        c(i, i) = std::ldexp(1.0, static_cast<int>(p.kappa_at(i)));
        for (int j = i + 1; j < n; ++j) {
            c(i, j) = std::ldexp(static_cast<double>(p.mu_at(i, j)),
                                 static_cast<int>(p.kappa_at(j)));
        }
    }
    box.y.resize(static_cast<std::size_t>(n * (n - 1) / 2));
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j, ++idx) {
            double lo = c(i, j) / c(i, i);
            double hi = lo;
            for (int k = i + 1; k <= j; ++k) {
                const double coef = c(k, j) / c(i, i);
                if (coef >= 0.0) {
                    hi += coef;
                } else {
                    lo += coef;
                }
            }
            box.y[idx] = {lo, hi};
        }
    }
    return box;
}

CoverageReport coverage_check(int n, std::int64_t n_samples, std::uint64_t seed,
                              double eta, int workers) {
    CoverageReport report;
    report.n = n;
    report.samples = n_samples;
    if (n_samples <= 0) return report;

    const std::int64_t block = 4096;
    const std::int64_t n_blocks = (n_samples + block - 1) / block;
    struct Partial {
        std::int64_t fail = 0, disjoint = 0, boundary = 0;
        double max_err = 0.0;
        std::vector<double> first_failure;
    };
    std::vector<Partial> parts(static_cast<std::size_t>(n_blocks));

    parallel_blocks(n_samples, block, workers, [&](std::int64_t b, std::int64_t lo, std::int64_t hi) {
        Rng rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(b) + 0x517cc1b7ULL)));
        Partial part;
        auto record_failure = [&part, n](const Mat& m) {
            if (!part.first_failure.empty()) return;
            for (int r = 0; r < n; ++r) {
                for (int c = 0; c < n; ++c) part.first_failure.push_back(m(r, c));
            }
        };
        for (std::int64_t i = lo; i < hi; ++i) {
            const GroupElement a = random_well_conditioned(n, rng);
            Assignment asg;
            try {
                asg = tile_assign(a, eta);
            } catch (const RangeError&) {
                ++part.fail;
                record_failure(a.entries());
                continue;
            }
            if (asg.boundary) {
                ++part.boundary;
                continue;
            }
            // round-trip
            const GroupElement back = tile_point(asg.index, asg.coords);
            const double scale = a.entries().cwiseAbs().maxCoeff();
            const double err = (back.entries() - a.entries()).cwiseAbs().maxCoeff() / scale;
            part.max_err = std::max(part.max_err, err);
            if (err > 1e-9) {
                ++part.fail;
                record_failure(a.entries());
                continue;
            }
            // the assigned translate contains the point
            const GroupElement p_mat(asg.index.to_matrix());
            if (membership(a * p_mat.inverse(), RegionKind::F(), eta) != Location::inside) {
                ++part.fail;
                record_failure(a.entries());
                continue;
            }
            // no dyadic neighbor translate may also contain it; the mu
            // candidates come from the same widened floor recursion the
            // overlap module uses (tiny widening to catch near-misses).
            std::vector<TileIndex> neighbors =
                enumerate_overlap_candidates(asg, 1e-7);
            for (const TileIndex& q : neighbors) {
                if (q == asg.index) continue;
                const GroupElement q_mat(q.to_matrix());
                if (membership(a * q_mat.inverse(), RegionKind::F(), eta) == Location::inside) {
                    ++part.disjoint;
                    record_failure(a.entries());
                    break;
                }
            }
        }
        parts[static_cast<std::size_t>(b)] = part;
    });

    for (const Partial& p : parts) {
        report.assignment_failures += p.fail;
        report.disjointness_failures += p.disjoint;
        report.boundary_rejected += p.boundary;
        report.max_roundtrip_error = std::max(report.max_roundtrip_error, p.max_err);
        if (report.first_failure.empty() && !p.first_failure.empty()) {
            report.first_failure = p.first_failure;
        }
    }
    return report;
}

}  // namespace glnframes
