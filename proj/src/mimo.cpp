#include "stsd/mimo.hpp"

#include <cmath>
#include <numeric>

#include "stsd/error.hpp"

namespace stsd {

namespace {

constexpr double kPivotTolerance = 1e-12;

QrFactors gram_schmidt(const CMatrix& h, bool sorted) {
  const auto mr = h.rows();
  const auto mt = h.cols();
  if (mt == 0 || mr < mt) throw Error(ErrorCode::invalid_argument, "qr: need mr >= mt >= 1");

  QrFactors out;
  out.q = h;
  out.r = CMatrix::Zero(mt, mt);
  out.perm.resize(mt);
  std::iota(out.perm.begin(), out.perm.end(), 0);
  CMatrix& q = out.q;
  CMatrix& r = out.r;

  for (Eigen::Index k = 0; k < mt; ++k) {
    if (sorted) {
      Eigen::Index pick = k;
      double pick_norm = q.col(k).squaredNorm();
      for (Eigen::Index l = k + 1; l < mt; ++l) {
        const double n = q.col(l).squaredNorm();
        if (n < pick_norm) {
          pick_norm = n;
          pick = l;
        }
      }
      if (pick != k) {
        q.col(k).swap(q.col(pick));
        r.col(k).swap(r.col(pick));
        std::swap(out.perm[k], out.perm[pick]);
      }
    }

    // Second pass against the already accepted basis vectors.
    for (Eigen::Index m = 0; m < k; ++m) {
      const std::complex<double> c = q.col(m).dot(q.col(k));
      r(m, k) += c;
      q.col(k) -= c * q.col(m);
    }

    const double diag = q.col(k).norm();
    if (!(diag > kPivotTolerance)) throw Error(ErrorCode::rank_deficient, "qr: channel matrix is rank deficient");
    r(k, k) = diag;
    q.col(k) /= diag;

    for (Eigen::Index l = k + 1; l < mt; ++l) {
      const std::complex<double> c = q.col(k).dot(q.col(l));
      r(k, l) = c;
      q.col(l) -= c * q.col(k);
    }
  }
  return out;
}

}  // namespace

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x5d5eU};
  return Rng(seq);
}

std::complex<double> complex_gaussian(Rng& rng, double variance) {
  std::normal_distribution<double> dist(0.0, std::sqrt(variance / 2.0));
  const double re = dist(rng);
  const double im = dist(rng);
  return {re, im};
}

CMatrix sample_channel(int mr, int mt, Rng& rng) {
  if (mt < 1 || mr < mt) throw Error(ErrorCode::invalid_argument, "sample_channel: need mr >= mt >= 1");
  CMatrix h(mr, mt);
  for (int c = 0; c < mt; ++c)
    for (int r = 0; r < mr; ++r) h(r, c) = complex_gaussian(rng, 1.0);
  return h;
}

CVector transmit(const CMatrix& h, const CVector& s, double n0, Rng& rng, bool noiseless) {
  if (h.cols() != s.size()) throw Error(ErrorCode::invalid_argument, "transmit: dimension mismatch");
  if (!(n0 > 0.0)) throw Error(ErrorCode::invalid_argument, "transmit: n0 must be positive");
  CVector y = h * s;
  if (!noiseless)
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += complex_gaussian(rng, n0);
  return y;
}

QrFactors qrd(const CMatrix& h) { return gram_schmidt(h, false); }

QrFactors sqrd(const CMatrix& h) { return gram_schmidt(h, true); }

CVector preprocess(const CVector& y, const QrFactors& qr) {
  if (y.size() != qr.q.rows()) throw Error(ErrorCode::invalid_argument, "preprocess: dimension mismatch");
  return qr.q.adjoint() * y;
}

CMatrix permute_columns(const CMatrix& h, const std::vector<int>& perm) {
  CMatrix out(h.rows(), h.cols());
  for (Eigen::Index k = 0; k < h.cols(); ++k) out.col(k) = h.col(perm[k]);
  return out;
}

}  // namespace stsd
