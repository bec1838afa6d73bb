#pragma once

#include <vector>

#include "hgsp/types.hpp"

namespace hgsp {

/// L = D - W with D = diag(W 1). Self loops cancel out of the diagonal.
Matrix laplacian(const Matrix& W);

/// Eigen-decomposition of a graph Laplacian: ascending eigenvalues and
/// orthonormal eigenvectors (column n belongs to eigenvalue n). Each
/// eigenvector's first non-negligible component is positive.
struct LaplacianSpectrum {
  Vector eigenvalues;
  Matrix eigenvectors;

  Index size() const noexcept { return eigenvalues.size(); }
};

LaplacianSpectrum spectrum(const Matrix& laplacian_matrix);

/// Graph Fourier transform: coefficient n is <x, u_n>.
Vector gft(const LaplacianSpectrum& spec, const Vector& x);
Vector inverse_gft(const LaplacianSpectrum& spec, const Vector& coefficients);

/// Graph-frequency bands [b_{m-1}, b_m).
class GraphBandSpec {
 public:
  explicit GraphBandSpec(std::vector<double> boundaries);

  /// `bands` equal-width bands covering [lo, hi).
  static GraphBandSpec equal_width(double lo, double hi, int bands);
  /// Equal-width bands over [min(0, lambda_1), lambda_max (1 + 1e-9)], so
  /// every eigenvalue lands in exactly one band.
  static GraphBandSpec covering(const LaplacianSpectrum& spec, int bands);

  const std::vector<double>& boundaries() const noexcept { return boundaries_; }
  std::size_t band_count() const noexcept { return boundaries_.size() - 1; }

 private:
  std::vector<double> boundaries_;
};

/// E_m = sum of squared GFT coefficients whose eigenvalue falls in band m.
std::vector<double> band_energies(const LaplacianSpectrum& spec, const Vector& x,
                                  const GraphBandSpec& bands);

struct EigenSummary {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

EigenSummary eigen_summary(const LaplacianSpectrum& spec);

/// Band-pass wavelet kernel g(s) = s exp(1 - s); g(0) = 0, peak g(1) = 1.
double sgwt_kernel(double s);

/// `count` scales t_j, log-spaced so that t_j * lambda_max runs from 1 to 40.
std::vector<double> default_sgwt_scales(double lambda_max, int count);

/// Wavelet coefficients g(t lambda_n) xhat_n at the z lowest and z highest
/// graph frequencies, per scale. Layout per scale: the z lowest in ascending
/// eigenvalue order, then the z highest in descending order (2 J z values).
std::vector<double> sgwt_features(const LaplacianSpectrum& spec, const Vector& x,
                                  const std::vector<double>& scales, int z);

/// x' L x.
double quadratic_form(const Matrix& laplacian_matrix, const Vector& x);

/// Everything the level-2 extractor needs from one graph and one signal.
struct GspEmbedding {
  std::vector<double> band_energies;
  EigenSummary eigen;
  std::vector<double> wavelet_coeffs;
  double quadratic_form = 0.0;
};

GspEmbedding gsp_embedding(const Matrix& W, const Vector& x, int graph_bands, int scales, int z);

}  // namespace hgsp
