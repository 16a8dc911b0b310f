#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <vector>

namespace stsd {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Rng = std::mt19937_64;

/// |z|^2 as re^2 + im^2 (std::norm goes through abs() in libstdc++).
inline double sq_abs(std::complex<double> z) { return z.real() * z.real() + z.imag() * z.imag(); }

/// Independent RNG stream for a (seed, stream index) pair.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

/// Circular complex Gaussian sample with total variance `variance`.
std::complex<double> complex_gaussian(Rng& rng, double variance);

/// i.i.d. Rayleigh channel, mr x mt, unit variance per entry.
CMatrix sample_channel(int mr, int mt, Rng& rng);

/// y = h s + n with per-entry noise variance n0. `noiseless` drops n.
CVector transmit(const CMatrix& h, const CVector& s, double n0, Rng& rng, bool noiseless = false);

/// H[:, perm] = q r, q with orthonormal columns, r upper triangular with a
/// real nonnegative diagonal.
struct QrFactors {
  CMatrix q;
  CMatrix r;
  std::vector<int> perm;
};

/// Gram-Schmidt QR (with one reorthogonalization pass), identity permutation.
QrFactors qrd(const CMatrix& h);

/// Sorted QR: at each step the remaining column with the smallest residual
/// norm goes next, so weak streams end up near the leaf of the search tree.
QrFactors sqrd(const CMatrix& h);

/// Rotated observation q^H y.
CVector preprocess(const CVector& y, const QrFactors& qr);

/// Column-permuted copy of h, i.e. h[:, perm].
CMatrix permute_columns(const CMatrix& h, const std::vector<int>& perm);

}  // namespace stsd
