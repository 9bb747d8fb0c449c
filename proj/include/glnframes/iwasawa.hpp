#pragma once

#include <vector>

#include "glnframes/group.hpp"

namespace glnframes {

// Factors of the unique decomposition a = s k w y with s > 0, k orthogonal,
// w positive diagonal of determinant 1, y unit upper triangular.
//
// w stores only the n-1 free diagonal entries; the last one is the implied
// product of their inverses. y stores the full unit upper triangular matrix.
struct IwasawaFactors {
    double s = 1.0;
    Mat k;
    std::vector<double> w;  // w_1 .. w_{n-1}
    Mat y;                  // unit upper triangular

    int n() const { return static_cast<int>(k.rows()); }

    double w_at(int i) const;         // i in [0, n), last entry implied
    Mat w_diagonal() const;           // diag(w_1, ..., w_{n-1}, prod w_i^{-1})
    Mat triangular() const;           // w_diagonal() * y  (the paper-normalized a')
};

// Decomposes via scaling out s = |det a|^{1/n} followed by a Householder
// orthogonal-triangular factorization with the triangular diagonal forced
// positive (sign flips are absorbed into k, so det k = +-1).
IwasawaFactors iwasawa_decompose(const GroupElement& a);

GroupElement iwasawa_recompose(const IwasawaFactors& f);

// s^{-1} prod_{i=1}^{n-1} w_i^{2(n-i)-1}, the density of the Haar measure
// of GL_n in (s, k, w, y) coordinates with the k-marginal normalized to 1.
double haar_density(const IwasawaFactors& f);

}  // namespace glnframes
