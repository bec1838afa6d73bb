#include "hgsp/gsp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "hgsp/errors.hpp"

namespace hgsp {

Matrix laplacian(const Matrix& W) {
  if (W.rows() != W.cols()) throw ValueError("laplacian: W must be square");
  if (!W.allFinite()) throw ValueError("laplacian: W has non-finite entries");
  if ((W.array() < 0.0).any()) throw ValueError("laplacian: W has negative entries");
  if (W != W.transpose()) throw ValueError("laplacian: W is not symmetric");
  Matrix L = -W;
  L.diagonal() += W.rowwise().sum();
  return L;
}

LaplacianSpectrum spectrum(const Matrix& laplacian_matrix) {
  if (laplacian_matrix.rows() != laplacian_matrix.cols()) {
    throw DimensionError("spectrum: matrix must be square");
  }
  if (laplacian_matrix != laplacian_matrix.transpose()) {
    throw ValueError("spectrum: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(laplacian_matrix, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("spectrum: symmetric eigensolver did not converge for N=" +
                           std::to_string(laplacian_matrix.rows()));
  }
  LaplacianSpectrum spec{solver.eigenvalues(), solver.eigenvectors()};
  constexpr double kNegligible = 1e-10;
  for (Index n = 0; n < spec.size(); ++n) {
    auto u = spec.eigenvectors.col(n);
    for (Index r = 0; r < u.size(); ++r) {
      if (std::abs(u(r)) > kNegligible) {
        if (u(r) < 0.0) u = -u;
        break;
      }
    }
  }
  return spec;
}

Vector gft(const LaplacianSpectrum& spec, const Vector& x) {
  if (x.size() != spec.size()) throw DimensionError("gft: signal length does not match the graph");
  return spec.eigenvectors.transpose() * x;
}

Vector inverse_gft(const LaplacianSpectrum& spec, const Vector& coefficients) {
  if (coefficients.size() != spec.size()) {
    throw DimensionError("inverse_gft: coefficient count does not match the graph");
  }
  return spec.eigenvectors * coefficients;
}

GraphBandSpec::GraphBandSpec(std::vector<double> boundaries) : boundaries_(std::move(boundaries)) {
  if (boundaries_.size() < 2) throw ValueError("graph bands need at least two boundaries");
  for (std::size_t m = 1; m < boundaries_.size(); ++m) {
    if (!(boundaries_[m] > boundaries_[m - 1])) {
      throw ValueError("graph band boundaries must be strictly ascending");
    }
  }
}

GraphBandSpec GraphBandSpec::equal_width(double lo, double hi, int bands) {
  if (bands < 1) throw ValueError("graph bands: need at least one band");
  if (!(hi > lo)) throw ValueError("graph bands: need hi > lo");
  std::vector<double> b(static_cast<std::size_t>(bands) + 1);
  for (int m = 0; m <= bands; ++m) b[m] = lo + (hi - lo) * m / bands;
  b.back() = hi;
  return GraphBandSpec(std::move(b));
}

GraphBandSpec GraphBandSpec::covering(const LaplacianSpectrum& spec, int bands) {
  const double lo = spec.size() ? std::min(0.0, spec.eigenvalues(0)) : 0.0;
  const double lambda_max = spec.size() ? spec.eigenvalues(spec.size() - 1) : 0.0;
  double hi = lambda_max * (1.0 + 1e-9);
  if (!(hi > lo)) hi = lo + 1e-9;  // zero graph: every eigenvalue is 0
  return equal_width(lo, hi, bands);
}

std::vector<double> band_energies(const LaplacianSpectrum& spec, const Vector& x,
                                  const GraphBandSpec& bands) {
  const Vector xhat = gft(spec, x);
  const auto& b = bands.boundaries();
  std::vector<double> energy(bands.band_count(), 0.0);
  for (Index n = 0; n < spec.size(); ++n) {
    const double lambda = spec.eigenvalues(n);
    const auto it = std::upper_bound(b.begin(), b.end(), lambda);
    if (it == b.begin() || it == b.end()) continue;  // outside [b_0, b_M)
    energy[static_cast<std::size_t>(it - b.begin() - 1)] += xhat(n) * xhat(n);
  }
  return energy;
}

EigenSummary eigen_summary(const LaplacianSpectrum& spec) {
  if (spec.size() == 0) return {};
  return {spec.eigenvalues.minCoeff(), spec.eigenvalues.maxCoeff(), spec.eigenvalues.mean()};
}

double sgwt_kernel(double s) { return s * std::exp(1.0 - s); }

std::vector<double> default_sgwt_scales(double lambda_max, int count) {
  if (count < 1) throw ValueError("sgwt: need at least one scale");
  const double norm = lambda_max > 0.0 ? lambda_max : 1.0;
  std::vector<double> scales(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(j) / (count - 1);
    scales[j] = std::exp(frac * std::log(40.0)) / norm;
  }
  return scales;
}

std::vector<double> sgwt_features(const LaplacianSpectrum& spec, const Vector& x,
                                  const std::vector<double>& scales, int z) {
  const Index N = spec.size();
  if (z < 1 || z > N) throw ValueError("sgwt: need 1 <= z <= N");
  if (scales.empty()) throw ValueError("sgwt: need at least one scale");
  const Vector xhat = gft(spec, x);
  std::vector<double> out;
  out.reserve(2 * scales.size() * static_cast<std::size_t>(z));
  for (double t : scales) {
    for (Index n = 0; n < z; ++n) out.push_back(sgwt_kernel(t * spec.eigenvalues(n)) * xhat(n));
    for (Index n = N - 1; n >= N - z; --n) {
      out.push_back(sgwt_kernel(t * spec.eigenvalues(n)) * xhat(n));
    }
  }
  return out;
}

double quadratic_form(const Matrix& laplacian_matrix, const Vector& x) {
  if (laplacian_matrix.rows() != x.size() || laplacian_matrix.cols() != x.size()) {
    throw DimensionError("quadratic_form: dimension mismatch");
  }
  return x.dot(laplacian_matrix * x);
}

GspEmbedding gsp_embedding(const Matrix& W, const Vector& x, int graph_bands, int scales, int z) {
  const Matrix L = laplacian(W);
  const auto spec = spectrum(L);
  GspEmbedding e;
  e.band_energies = band_energies(spec, x, GraphBandSpec::covering(spec, graph_bands));
  e.eigen = eigen_summary(spec);
  e.wavelet_coeffs = sgwt_features(spec, x, default_sgwt_scales(e.eigen.max, scales), z);
  e.quadratic_form = quadratic_form(L, x);
  return e;
}

}  // namespace hgsp
