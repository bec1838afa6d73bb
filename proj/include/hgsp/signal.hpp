#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "hgsp/types.hpp"

namespace hgsp {

/// Multichannel time series, S channels (rows) by T samples (columns).
///
/// Construction validates the invariants: S >= 2, T >= 2, a positive sample
/// rate and finite entries. Instances are immutable.
class Signal {
 public:
  Signal(RowMatrix data, double sample_rate_hz);

  const RowMatrix& data() const noexcept { return data_; }
  double sample_rate_hz() const noexcept { return sample_rate_hz_; }
  Index channels() const noexcept { return data_.rows(); }
  Index samples() const noexcept { return data_.cols(); }

 private:
  RowMatrix data_;
  double sample_rate_hz_;
};

enum class FileFormat { csv, raw_f64 };

/// Reads a signal. CSV files hold one channel per line; raw files hold
/// little-endian doubles, channel-major, and need the channel count.
Signal load_signal(const std::filesystem::path& path, FileFormat format, double sample_rate_hz,
                   std::optional<Index> channels = std::nullopt);

/// Picks the format from the extension: ".f64"/".bin"/".raw" are raw, anything else CSV.
FileFormat format_from_extension(const std::filesystem::path& path);

void save_csv(const Signal& x, const std::filesystem::path& path);
void save_raw_f64(const Signal& x, const std::filesystem::path& path);

/// Ascending filter-bank edges w_0 < w_1 < ... < w_C in Hz; band c is [w_{c-1}, w_c).
class BandSpec {
 public:
  explicit BandSpec(std::vector<double> edges_hz);

  /// (0, 7, 10, 12, 18, 24, 30, 100, 5000) Hz: delta..gamma with a split beta band.
  static BandSpec eeg_default();

  const std::vector<double>& edges_hz() const noexcept { return edges_; }
  std::size_t band_count() const noexcept { return edges_.size() - 1; }
  double lower(std::size_t band) const { return edges_.at(band); }
  double upper(std::size_t band) const { return edges_.at(band + 1); }

  /// Edges above Nyquist are moved onto it; bands left empty by that are
  /// dropped. `changed` reports whether anything moved.
  BandSpec clamped_to_nyquist(double sample_rate_hz, bool* changed = nullptr) const;

 private:
  std::vector<double> edges_;
};

/// Ideal band-pass: zero every DFT bin with frequency outside [lo, hi).
/// The exact-Nyquist bin of an even-length row is kept when hi >= Nyquist.
Signal bandpass(const Signal& x, double band_lo_hz, double band_hi_hz);

/// One band-passed copy of `x` per band of `bands` (clamped to Nyquist first).
std::vector<Signal> filter_bank(const Signal& x, const BandSpec& bands);

/// K windows of width T/K; window k starts at column k * stride.
std::vector<Signal> partition(const Signal& x, Index windows, Index stride);

/// Plain decimation to `target_samples` columns taken at stride floor(T1/T2)
/// from the first column. The sample rate scales by T2/T1.
Signal downsample(const Signal& x, Index target_samples);

}  // namespace hgsp
