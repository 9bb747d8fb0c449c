#pragma once

#include <string>

#include "glnframes/frame2d.hpp"

namespace glnframes {

// Writes <basepath>.json (axes, counts, endianness tag, complex layout,
// flagged node list, payload name) and <basepath>.bin (interleaved re,im
// float64 little-endian, row-major). Round-trips bit-exactly.
void save_signal(const SpectralSignal& signal, const std::string& basepath);

SpectralSignal load_signal(const std::string& basepath);

// Gnuplot-friendly CSV dump, columns lambda,kappa,mu,m1,m2,m3,m4,re,im.
// Rows below magnitude_floor (relative to the largest coefficient) are
// skipped to keep dumps manageable.
void dump_coefficients_csv(const std::vector<TileCoefficients>& coeffs,
                           const std::string& path, double magnitude_floor = 1e-12);

}  // namespace glnframes
