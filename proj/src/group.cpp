#include "glnframes/group.hpp"

#include <cmath>

#include <Eigen/LU>

namespace glnframes {

namespace {

double checked_det(const Mat& m) {
    const int n = static_cast<int>(m.rows());
    if (n < 2 || m.cols() != m.rows()) {
        throw DimensionError("GroupElement requires a square matrix with n >= 2");
    }
    const double scale = m.cwiseAbs().maxCoeff();
    const double det = m.determinant();
    const double tol = GroupElement::det_tol_scale * std::pow(scale, n);
    if (scale == 0.0 || std::abs(det) <= tol) {
        throw SingularMatrixError("matrix is singular at the working tolerance");
    }
    return det;
}

}  // namespace

GroupElement::GroupElement(Mat entries)
    : entries_(std::move(entries)), det_(checked_det(entries_)) {}

GroupElement GroupElement::identity(int n) {
    return GroupElement(Mat(Mat::Identity(n, n)));
}

GroupElement GroupElement::inverse() const {
    Mat inv = entries_.inverse();
    return GroupElement(std::move(inv));
}

GroupElement operator*(const GroupElement& a, const GroupElement& b) {
    if (a.n() != b.n()) {
        throw DimensionError("dimension mismatch in group multiplication");
    }
    Mat prod = a.entries_ * b.entries_;
    return GroupElement(std::move(prod));
}

AffineElement::AffineElement(Mat translation, GroupElement dilation)
    : x(std::move(translation)), h(std::move(dilation)) {
    if (x.rows() != h.n() || x.cols() != h.n()) {
        throw DimensionError("translation part must be n x n");
    }
}

AffineElement AffineElement::identity(int n) {
    return AffineElement(Mat(Mat::Zero(n, n)), GroupElement::identity(n));
}

AffineElement affine_multiply(const AffineElement& a, const AffineElement& b) {
    if (a.h.n() != b.h.n()) {
        throw DimensionError("dimension mismatch in affine multiplication");
    }
    Mat x = a.x + a.h.entries() * b.x;
    return AffineElement(std::move(x), a.h * b.h);
}

AffineElement affine_inverse(const AffineElement& a) {
    GroupElement hinv = a.h.inverse();
    Mat x = -(hinv.entries() * a.x);
    return AffineElement(std::move(x), std::move(hinv));
}

}  // namespace glnframes
