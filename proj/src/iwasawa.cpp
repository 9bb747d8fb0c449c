#include "glnframes/iwasawa.hpp"

#include <cmath>

namespace glnframes {

double IwasawaFactors::w_at(int i) const {
    const int nn = n();
    if (i < nn - 1) return w[static_cast<std::size_t>(i)];
    double prod = 1.0;
    for (double wi : w) prod *= wi;
    return 1.0 / prod;
}

Mat IwasawaFactors::w_diagonal() const {
    const int nn = n();
    Mat d = Mat::Zero(nn, nn);
    for (int i = 0; i < nn; ++i) d(i, i) = w_at(i);
    return d;
}

Mat IwasawaFactors::triangular() const {
    return w_diagonal() * y;
}

IwasawaFactors iwasawa_decompose(const GroupElement& a) {
    const int n = a.n();
    const double s = std::pow(std::abs(a.det()), 1.0 / n);

    // Householder QR of a/s. R carries the scale of a unimodular matrix,
    // so a fixed relative pivot tolerance is meaningful.
    Mat r = a.entries() / s;
    Mat q = Mat::Identity(n, n);
    const double pivot_tol = 1e-13 * std::max(1.0, r.cwiseAbs().maxCoeff());

    for (int j = 0; j < n - 1; ++j) {
        const int m = n - j;
        Eigen::VectorXd v = r.block(j, j, m, 1);
        const double alpha = v.norm();
        if (alpha <= pivot_tol) {
            throw SingularMatrixError("pivot below tolerance in orthogonal-triangular factorization");
        }
        // reflect onto -sign(v0) * alpha * e1 to avoid cancellation
        const double sign = v(0) >= 0.0 ? 1.0 : -1.0;
        v(0) += sign * alpha;
        const double vnorm2 = v.squaredNorm();
        if (vnorm2 > 0.0) {
            // r <- (I - 2 v v^T / v^T v) r, accumulated into q as well
            Eigen::RowVectorXd wr = (v.transpose() * r.block(j, j, m, n - j)) * (2.0 / vnorm2);
            r.block(j, j, m, n - j).noalias() -= v * wr;
            Eigen::VectorXd wq = (q.block(0, j, n, m) * v) * (2.0 / vnorm2);
            q.block(0, j, n, m).noalias() -= wq * v.transpose();
        }
        r.block(j + 1, j, m - 1, 1).setZero();
    }

    // Force a positive triangular diagonal; signs move into k.
    for (int i = 0; i < n; ++i) {
        if (std::abs(r(i, i)) <= pivot_tol) {
            throw SingularMatrixError("pivot below tolerance in orthogonal-triangular factorization");
        }
        if (r(i, i) < 0.0) {
            r.row(i) = -r.row(i);
            q.col(i) = -q.col(i);
        }
    }

    IwasawaFactors f;
    f.s = s;
    f.k = std::move(q);
    f.w.resize(static_cast<std::size_t>(n - 1));
    for (int i = 0; i < n - 1; ++i) f.w[static_cast<std::size_t>(i)] = r(i, i);
    f.y = Mat::Identity(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) f.y(i, j) = r(i, j) / r(i, i);
    }
    return f;
}

GroupElement iwasawa_recompose(const IwasawaFactors& f) {
    if (f.s <= 0.0) throw Error("scale factor must be positive");
    for (double wi : f.w) {
        if (wi <= 0.0) throw Error("diagonal factors must be positive");
    }
    Mat m = f.s * (f.k * f.triangular());
    return GroupElement(std::move(m));
}

double haar_density(const IwasawaFactors& f) {
    const int n = f.n();
    double d = 1.0 / f.s;
    for (int i = 1; i <= n - 1; ++i) {
        d *= std::pow(f.w[static_cast<std::size_t>(i - 1)], 2 * (n - i) - 1);
    }
    return d;
}

}  // namespace glnframes
