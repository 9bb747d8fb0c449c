#include "glnframes/overlap.hpp"

#include <algorithm>
#include <cmath>

namespace glnframes {

std::vector<std::int64_t> count_integer_hits(double alpha, double L, double eps) {
    // [alpha, alpha+L] and (beta-eps, beta+1+eps) meet iff
    // alpha - 1 - eps < beta < alpha + L + eps, strictly at both ends.
    const double lo = alpha - 1.0 - eps;
    const double hi = alpha + L + eps;
    std::int64_t first = static_cast<std::int64_t>(std::floor(lo)) + 1;
    std::int64_t last = static_cast<std::int64_t>(std::ceil(hi)) - 1;
    std::vector<std::int64_t> out;
    for (std::int64_t b = first; b <= last; ++b) out.push_back(b);
    return out;
}

std::int64_t theoretical_M_bound(int n) {
    if (n < 2) throw ConfigError("dimension must be at least 2");
    std::int64_t v = 1;
    for (int i = 0; i < n; ++i) v *= 3;
    for (int i = 0; i < n * (n - 1) / 2; ++i) v *= 6;
    return v;
}

int refined_M_bound_n2(double eps) {
    if (!(eps > 0.0 && eps < 0.5)) {
        throw ConfigError("refined n=2 bound requires eps in (0, 1/2)");
    }
    return eps < 0.25 ? 33 : 36;
}

namespace {

struct CandidateContext {
    const Assignment& base;
    double eps;
    int n;
    std::vector<std::int64_t> dkappa;  // all n entries, last implied
    std::vector<TileIndex> out;
    // per-branch state, strict upper row-major
    std::vector<std::int64_t> mu_prime;
    std::vector<double> y_prime;
    double window_pad = 0.0;  // extra integers kept around the exact window
};

int upper_pos(int n, int i, int j) {
    return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

// Entry (i,j): solve y'_{i,j} + mu'_{i,j} =
//   2^{-p_{i,j}} (y_{i,j} + mu_{i,j} + sum y_{i,t} mu_{t,j}) - sum y'_{i,t} mu'_{t,j}
// and branch over the admitted integers.
void recurse_entries(CandidateContext& ctx, int d, int i) {
    const int n = ctx.n;
    if (d >= n) {
        TileIndex p;
        p.n = n;
        p.lambda = ctx.base.index.lambda;  // caller patches lambda
        p.kappa.resize(static_cast<std::size_t>(n - 1));
        for (int t = 0; t < n - 1; ++t) {
            p.kappa[static_cast<std::size_t>(t)] =
                ctx.base.index.kappa_at(t) + ctx.dkappa[static_cast<std::size_t>(t)];
        }
        p.mu = ctx.mu_prime;
        ctx.out.push_back(std::move(p));
        return;
    }
    if (i + d >= n) {
        recurse_entries(ctx, d + 1, 0);
        return;
    }
    const int j = i + d;
    const int p_ij = static_cast<int>(ctx.dkappa[static_cast<std::size_t>(j)] -
                                      ctx.dkappa[static_cast<std::size_t>(i)]);
    double known = ctx.base.coords.y_at(i, j) + static_cast<double>(ctx.base.index.mu_at(i, j));
    for (int t = i + 1; t < j; ++t) {
        known += ctx.base.coords.y_at(i, t) * static_cast<double>(ctx.base.index.mu_at(t, j));
    }
    double rhs = std::ldexp(known, -p_ij);
    for (int t = i + 1; t < j; ++t) {
        rhs -= ctx.y_prime[static_cast<std::size_t>(upper_pos(n, i, t))] *
               static_cast<double>(ctx.mu_prime[static_cast<std::size_t>(upper_pos(n, t, j))]);
    }
    // mu' in (rhs - 1 - eps, rhs + eps), open on both sides
    const double pad = ctx.window_pad;
    const std::int64_t first =
        static_cast<std::int64_t>(std::floor(rhs - 1.0 - ctx.eps - pad)) + 1;
    const std::int64_t last =
        static_cast<std::int64_t>(std::ceil(rhs + ctx.eps + pad)) - 1;
    const int pos = upper_pos(n, i, j);
    for (std::int64_t m = first; m <= last; ++m) {
        ctx.mu_prime[static_cast<std::size_t>(pos)] = m;
        ctx.y_prime[static_cast<std::size_t>(pos)] = rhs - static_cast<double>(m);
        recurse_entries(ctx, d, i + 1);
    }
}

std::vector<TileIndex> candidates_impl(const Assignment& base, double eps,
                                       int exp_radius, double window_pad) {
    const int n = base.index.n;
    std::vector<TileIndex> all;

    for (std::int64_t dl = -exp_radius; dl <= exp_radius; ++dl) {
        if (exp_radius == 1) {
            const double s_prime = std::ldexp(base.coords.s, static_cast<int>(-dl));
            if (!(s_prime > 1.0 - eps && s_prime < 2.0 + eps)) continue;
        }
        // odometer over dkappa_1..dkappa_{n-1}
        std::vector<std::int64_t> dk(static_cast<std::size_t>(n - 1), -exp_radius);
        for (;;) {
            bool feasible = true;
            if (exp_radius == 1) {
                for (int t = 0; t < n - 1 && feasible; ++t) {
                    const double wp = std::ldexp(base.coords.w[static_cast<std::size_t>(t)],
                                                 static_cast<int>(-dk[static_cast<std::size_t>(t)]));
                    feasible = wp > 1.0 - eps && wp < 2.0 + eps;
                }
            }
            if (feasible) {
                CandidateContext ctx{base, eps, n, {}, {}, {}, {}, window_pad};
                ctx.dkappa.resize(static_cast<std::size_t>(n));
                std::int64_t sum = 0;
                for (int t = 0; t < n - 1; ++t) {
                    ctx.dkappa[static_cast<std::size_t>(t)] = dk[static_cast<std::size_t>(t)];
                    sum += dk[static_cast<std::size_t>(t)];
                }
                ctx.dkappa[static_cast<std::size_t>(n - 1)] = -sum;
                ctx.mu_prime.assign(static_cast<std::size_t>(n * (n - 1) / 2), 0);
                ctx.y_prime.assign(static_cast<std::size_t>(n * (n - 1) / 2), 0.0);
                recurse_entries(ctx, 1, 0);
                for (TileIndex& p : ctx.out) {
                    p.lambda = base.index.lambda + dl;
                    all.push_back(std::move(p));
                }
            }
            int pos = 0;
            while (pos < n - 1) {
                if (++dk[static_cast<std::size_t>(pos)] <= exp_radius) break;
                dk[static_cast<std::size_t>(pos)] = -exp_radius;
                ++pos;
            }
            if (pos == n - 1) break;
        }
    }
    return all;
}

OverlapReport confirm_candidates(const GroupElement& b, const Assignment& base,
                                 std::vector<TileIndex> candidates, double eps) {
    OverlapReport report;
    report.base = base.index;
    report.theoretical_bound = theoretical_M_bound(base.index.n);
    const RegionKind region = RegionKind::open(eps);
    std::sort(candidates.begin(), candidates.end(), [](const TileIndex& a, const TileIndex& c) {
        if (a.lambda != c.lambda) return a.lambda < c.lambda;
        if (a.kappa != c.kappa) return a.kappa < c.kappa;
        return a.mu < c.mu;
    });
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (TileIndex& p : candidates) {
        GroupElement pm(p.to_matrix());
        IwasawaFactors rel = iwasawa_decompose(b * pm.inverse());
        if (membership(rel, region, 0.0) == Location::inside) {
            report.contributors.push_back({std::move(p), std::move(rel)});
        }
    }
    return report;
}

}  // namespace

std::vector<TileIndex> enumerate_overlap_candidates(const Assignment& base, double eps) {
    return candidates_impl(base, eps, 1, 0.0);
}

OverlapReport pointwise_overlap(const GroupElement& b, double eps, double eta) {
    if (!(eps > 0.0 && eps <= 0.5)) throw ConfigError("eps must lie in (0, 1/2]");
    Assignment base = tile_assign(b, eta);
    if (base.boundary) {
        throw BoundaryError("sample lies within the boundary tolerance of a tile face");
    }
    return confirm_candidates(b, base, enumerate_overlap_candidates(base, eps), eps);
}

OverlapReport pointwise_overlap_bruteforce(const GroupElement& b, double eps, double eta) {
    if (!(eps > 0.0 && eps <= 0.5)) throw ConfigError("eps must lie in (0, 1/2]");
    Assignment base = tile_assign(b, eta);
    if (base.boundary) {
        throw BoundaryError("sample lies within the boundary tolerance of a tile face");
    }
    return confirm_candidates(b, base, candidates_impl(base, eps, 2, 2.0), eps);
}

GroupElement sample_scan_point(int n, Rng& rng) {
    std::uniform_real_distribution<double> sw(0.5, 4.0);
    std::uniform_real_distribution<double> yu(-2.0, 3.0);
    std::uniform_int_distribution<std::int64_t> idx(-2, 2);

    IwasawaFactors f;
    f.s = sw(rng);
    f.w.resize(static_cast<std::size_t>(n - 1));
    for (auto& wi : f.w) wi = sw(rng);
    f.k = random_orthogonal(n, rng);
    f.y = Mat::Identity(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) f.y(i, j) = yu(rng);
    }

    TileIndex p = TileIndex::zero(n);
    p.lambda = idx(rng);
    for (auto& k : p.kappa) k = idx(rng);
    for (auto& m : p.mu) m = idx(rng);

    return iwasawa_recompose(f) * GroupElement(p.to_matrix());
}

OverlapScanSummary overlap_scan(int n, double eps, std::int64_t n_samples,
                                std::uint64_t seed, int workers) {
    OverlapScanSummary summary;
    summary.n = n;
    summary.eps = eps;
    summary.samples = n_samples;
    summary.theoretical_bound = theoretical_M_bound(n);
    if (n == 2 && eps < 0.5) summary.refined_bound = refined_M_bound_n2(eps);
    if (n_samples <= 0) return summary;

    const std::int64_t block = 2048;
    const std::int64_t n_blocks = (n_samples + block - 1) / block;
    struct Partial {
        std::map<int, std::int64_t> hist;
        std::int64_t boundary = 0;
        int max_count = 0;
        std::vector<double> max_sample;
    };
    std::vector<Partial> parts(static_cast<std::size_t>(n_blocks));

    parallel_blocks(n_samples, block, workers, [&](std::int64_t b, std::int64_t lo, std::int64_t hi) {
        Rng rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(b) + 0xa5a5ULL)));
        Partial part;
        for (std::int64_t i = lo; i < hi; ++i) {
            const GroupElement pt = sample_scan_point(n, rng);
            try {
                OverlapReport rep = pointwise_overlap(pt, eps, 1e-9);
                ++part.hist[rep.count()];
                if (rep.count() > part.max_count) {
                    part.max_count = rep.count();
                    part.max_sample.clear();
                    for (int r = 0; r < n; ++r) {
                        for (int c = 0; c < n; ++c) part.max_sample.push_back(pt.entries()(r, c));
                    }
                }
            } catch (const BoundaryError&) {
                ++part.boundary;
            }
        }
        parts[static_cast<std::size_t>(b)] = std::move(part);
    });

    summary.min_count = 0;
    for (const Partial& p : parts) {
        summary.boundary_rejected += p.boundary;
        for (const auto& [count, freq] : p.hist) {
            summary.histogram[count] += freq;
            summary.min_count = summary.min_count == 0 ? count : std::min(summary.min_count, count);
        }
        if (p.max_count > summary.max_count) {
            summary.max_count = p.max_count;
            summary.max_sample = p.max_sample;
        }
    }
    return summary;
}

}  // namespace glnframes
