#include "glnframes/sampling.hpp"

#include <cmath>
#include <mutex>
#include <thread>

#include <Eigen/LU>

namespace glnframes {

void parallel_blocks(std::int64_t total, std::int64_t block_size, int workers,
                     const std::function<void(std::int64_t, std::int64_t, std::int64_t)>& body) {
    if (total <= 0) return;
    if (workers <= 0) workers = default_workers();
    const std::int64_t n_blocks = (total + block_size - 1) / block_size;
    if (workers == 1 || n_blocks == 1) {
        for (std::int64_t b = 0; b < n_blocks; ++b) {
            body(b, b * block_size, std::min(total, (b + 1) * block_size));
        }
        return;
    }
    std::int64_t next = 0;
    std::mutex mtx;
    auto worker = [&]() {
        for (;;) {
            std::int64_t b;
            {
                std::lock_guard<std::mutex> lock(mtx);
                if (next >= n_blocks) return;
                b = next++;
            }
            body(b, b * block_size, std::min(total, (b + 1) * block_size));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

Mat random_orthogonal(int n, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (;;) {
        Mat g(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) g(i, j) = gauss(rng);
        }
        try {
            IwasawaFactors f = iwasawa_decompose(GroupElement(g));
            Mat k = f.k;
            if (std::bernoulli_distribution(0.5)(rng)) k.col(0) = -k.col(0);
            return k;
        } catch (const SingularMatrixError&) {
            continue;  // null set; resample
        }
    }
}

GroupElement random_well_conditioned(int n, Rng& rng, double min_abs_det) {
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    for (;;) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) m(i, j) = uni(rng);
        }
        if (std::abs(m.determinant()) < min_abs_det) continue;
        return GroupElement(std::move(m));
    }
}

IwasawaFactors random_factors(int n, Rng& rng) {
    std::uniform_real_distribution<double> logu(std::log(0.1), std::log(10.0));
    std::uniform_real_distribution<double> yu(-5.0, 5.0);
    IwasawaFactors f;
    f.s = std::exp(logu(rng));
    f.w.resize(static_cast<std::size_t>(n - 1));
    for (auto& wi : f.w) wi = std::exp(logu(rng));
    f.k = random_orthogonal(n, rng);
    f.y = Mat::Identity(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) f.y(i, j) = yu(rng);
    }
    return f;
}

CoordBox CoordBox::fundamental(int n) {
    CoordBox b;
    b.n = n;
    b.s = {1.0, 2.0};
    b.w.assign(static_cast<std::size_t>(n - 1), {1.0, 2.0});
    b.y.assign(static_cast<std::size_t>(n * (n - 1) / 2), {0.0, 1.0});
    return b;
}

CoordBox CoordBox::widened(int n, double eps) {
    CoordBox b;
    b.n = n;
    b.s = {1.0 - eps, 2.0 + eps};
    b.w.assign(static_cast<std::size_t>(n - 1), {1.0 - eps, 2.0 + eps});
    b.y.assign(static_cast<std::size_t>(n * (n - 1) / 2), {-eps, 1.0 + eps});
    return b;
}

double CoordBox::volume() const {
    double v = s.length();
    for (const auto& iv : w) v *= iv.length();
    for (const auto& iv : y) v *= iv.length();
    return v;
}

bool CoordBox::empty() const {
    if (s.length() <= 0.0) return true;
    for (const auto& iv : w) {
        if (iv.length() <= 0.0) return true;
    }
    for (const auto& iv : y) {
        if (iv.length() <= 0.0) return true;
    }
    return false;
}

MCEstimate haar_measure_mc(const CoordBox& box,
                           const std::function<bool(const IwasawaFactors&)>& region,
                           std::int64_t n_samples, std::uint64_t seed, int workers) {
    if (n_samples <= 0) throw ConfigError("Monte-Carlo estimate requires at least one sample");
    MCEstimate out;
    out.samples = n_samples;
    if (box.empty()) return out;

    const int n = box.n;
    const double vol = box.volume();
    const std::int64_t block = 8192;
    const std::int64_t n_blocks = (n_samples + block - 1) / block;
    std::vector<double> sums(static_cast<std::size_t>(n_blocks), 0.0);
    std::vector<double> sq_sums(static_cast<std::size_t>(n_blocks), 0.0);

    parallel_blocks(n_samples, block, workers, [&](std::int64_t b, std::int64_t lo, std::int64_t hi) {
        Rng rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(b) + 1)));
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        double sum = 0.0, sq = 0.0;
        IwasawaFactors f;
        f.w.resize(static_cast<std::size_t>(n - 1));
        f.y = Mat::Identity(n, n);
        for (std::int64_t i = lo; i < hi; ++i) {
            f.s = box.s.lo + box.s.length() * uni(rng);
            for (std::size_t j = 0; j < f.w.size(); ++j) {
                f.w[j] = box.w[j].lo + box.w[j].length() * uni(rng);
            }
            std::size_t idx = 0;
            for (int r = 0; r < n; ++r) {
                for (int c = r + 1; c < n; ++c, ++idx) {
                    f.y(r, c) = box.y[idx].lo + box.y[idx].length() * uni(rng);
                }
            }
            f.k = random_orthogonal(n, rng);
            const double val = region(f) ? haar_density(f) : 0.0;
            sum += val;
            sq += val * val;
        }
        sums[static_cast<std::size_t>(b)] = sum;
        sq_sums[static_cast<std::size_t>(b)] = sq;
    });

    double sum = 0.0, sq = 0.0;
    for (std::size_t b = 0; b < sums.size(); ++b) {
        sum += sums[b];
        sq += sq_sums[b];
    }
    const double nreal = static_cast<double>(n_samples);
    const double mean = sum / nreal;
    const double var = std::max(0.0, sq / nreal - mean * mean);
    out.value = vol * mean;
    out.std_error = vol * std::sqrt(var / nreal);
    return out;
}

MCEstimate haar_measure_mc(const CoordBox& box, std::int64_t n_samples,
                           std::uint64_t seed, int workers) {
    return haar_measure_mc(
        box, [](const IwasawaFactors&) { return true; }, n_samples, seed, workers);
}

}  // namespace glnframes
