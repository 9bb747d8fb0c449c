#pragma once

#include "glnframes/common.hpp"

namespace glnframes {

// Invertible n x n real matrix with a cached determinant. Construction
// rejects matrices whose determinant falls below det_tol relative to the
// matrix scale, so every instance is safely invertible.
class GroupElement {
  public:
    explicit GroupElement(Mat entries);

    static GroupElement identity(int n);

    int n() const { return static_cast<int>(entries_.rows()); }
    const Mat& entries() const { return entries_; }
    double det() const { return det_; }

    GroupElement inverse() const;

    friend GroupElement operator*(const GroupElement& a, const GroupElement& b);

    // |det| must exceed det_tol_scale * (max |entry|)^n.
    static constexpr double det_tol_scale = 1e-12;

  private:
    Mat entries_;
    double det_;
};

// Element [x, h] of the affine group: y -> h y + x on n x n matrices.
struct AffineElement {
    Mat x;
    GroupElement h;

    AffineElement(Mat translation, GroupElement dilation);
    static AffineElement identity(int n);
};

// [x1,h1][x2,h2] = [x1 + h1 x2, h1 h2]
AffineElement affine_multiply(const AffineElement& a, const AffineElement& b);

// [x,h]^{-1} = [-h^{-1} x, h^{-1}]
AffineElement affine_inverse(const AffineElement& a);

}  // namespace glnframes
