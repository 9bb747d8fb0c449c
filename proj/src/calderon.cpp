#include "glnframes/calderon.hpp"

#include <algorithm>
#include <cmath>

namespace glnframes {

double calderon_sum(const OverlapReport& overlap, const WindowSpec& spec) {
    double sum = 0.0;
    for (const Contributor& c : overlap.contributors) {
        const double g = window_eval(spec, c.rel);
        sum += g * g;
    }
    return sum;
}

double calderon_sum(const GroupElement& b, const WindowSpec& spec, double eps, double eta) {
    return calderon_sum(pointwise_overlap(b, eps, eta), spec);
}

FrameBoundReport frame_bound_scan(int n, const WindowSpec& spec, double eps,
                                  std::int64_t n_samples, std::uint64_t seed,
                                  double cube_volume, int workers,
                                  std::vector<std::vector<double>>* rows) {
    if (!(cube_volume > 0.0)) throw ConfigError("cube volume must be positive");
    if (n_samples <= 0) throw ConfigError("frame bound scan requires at least one sample");

    FrameBoundReport report;
    report.n = n;
    report.eps = eps;
    report.window_kind = window_kind_name(spec.kind);
    report.samples = n_samples;
    report.cube_volume = cube_volume;
    report.theoretical_bound = theoretical_M_bound(n);
    if (n == 2 && eps < 0.5) report.refined_bound = refined_M_bound_n2(eps);

    const std::int64_t block = 2048;
    const std::int64_t n_blocks = (n_samples + block - 1) / block;
    struct Partial {
        double min_sum = 0.0, max_sum = 0.0;
        std::int64_t used = 0, boundary = 0;
        std::vector<double> min_sample, max_sample;
        std::vector<std::vector<double>> rows;
    };
    std::vector<Partial> parts(static_cast<std::size_t>(n_blocks));

    parallel_blocks(n_samples, block, workers, [&](std::int64_t b, std::int64_t lo, std::int64_t hi) {
        Rng rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(b) + 0xca1deULL)));
        Partial part;
        auto entries_of = [n](const GroupElement& g) {
            std::vector<double> v;
            for (int r = 0; r < n; ++r) {
                for (int c = 0; c < n; ++c) v.push_back(g.entries()(r, c));
            }
            return v;
        };
        for (std::int64_t i = lo; i < hi; ++i) {
            const GroupElement pt = sample_scan_point(n, rng);
            try {
                const double sum = calderon_sum(pt, spec, eps, 1e-9);
                if (part.used == 0 || sum < part.min_sum) {
                    part.min_sum = part.used == 0 ? sum : std::min(sum, part.min_sum);
                    part.min_sample = entries_of(pt);
                }
                if (part.used == 0 || sum > part.max_sum) {
                    part.max_sum = part.used == 0 ? sum : std::max(sum, part.max_sum);
                    part.max_sample = entries_of(pt);
                }
                if (rows != nullptr) {
                    std::vector<double> row = entries_of(pt);
                    row.push_back(sum);
                    part.rows.push_back(std::move(row));
                }
                ++part.used;
            } catch (const BoundaryError&) {
                ++part.boundary;
            }
        }
        parts[static_cast<std::size_t>(b)] = part;
    });

    std::int64_t used = 0;
    for (Partial& p : parts) {
        if (rows != nullptr) {
            rows->insert(rows->end(), std::make_move_iterator(p.rows.begin()),
                         std::make_move_iterator(p.rows.end()));
        }
        report.boundary_rejected += p.boundary;
        if (p.used == 0) continue;
        if (used == 0 || p.min_sum < report.min_sum) {
            report.min_sum = p.min_sum;
            report.min_sample = p.min_sample;
        }
        if (used == 0 || p.max_sum > report.max_sum) {
            report.max_sum = p.max_sum;
            report.max_sample = p.max_sample;
        }
        used += p.used;
    }
    if (used == 0) throw Error("all samples were boundary-rejected");

    report.a_emp = cube_volume * report.min_sum;
    report.b_emp = cube_volume * report.max_sum;
    report.cond = report.b_emp / report.a_emp;
    return report;
}

}  // namespace glnframes
