#include "hgsp/signal.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include <unsupported/Eigen/FFT>

#include "hgsp/errors.hpp"

namespace hgsp {

Signal::Signal(RowMatrix data, double sample_rate_hz)
    : data_(std::move(data)), sample_rate_hz_(sample_rate_hz) {
  if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_)) {
    throw ValueError("signal: sample rate must be positive and finite");
  }
  if (data_.rows() < 2) throw ValueError("signal: need at least 2 channels");
  if (data_.cols() < 2) throw ValueError("signal: need at least 2 samples per channel");
  if (!data_.allFinite()) throw ValueError("signal: NaN or Inf entry");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(std::string_view field, std::size_t line_no) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc{} || ptr != end) {
    throw FormatError("csv line " + std::to_string(line_no) + ": not a number: '" +
                      std::string(field) + "'");
  }
  return value;
}

Signal load_csv(const std::filesystem::path& path, double sample_rate_hz) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = content.find(',', start);
      row.push_back(parse_number(content.substr(start, comma - start), line_no));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError("csv line " + std::to_string(line_no) + ": expected " +
                        std::to_string(rows.front().size()) + " values, got " +
                        std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (in.bad()) throw IoError("read failed: " + path.string());
  if (rows.empty()) throw FormatError("csv file has no data rows: " + path.string());

  RowMatrix data(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < data.rows(); ++i) {
    for (Index k = 0; k < data.cols(); ++k) data(i, k) = rows[i][k];
  }
  return Signal(std::move(data), sample_rate_hz);
}

double from_le_bytes(const unsigned char* bytes) {
  std::uint64_t bits = 0;
  for (int b = 7; b >= 0; --b) bits = (bits << 8) | bytes[b];
  return std::bit_cast<double>(bits);
}

void to_le_bytes(double value, unsigned char* bytes) {
  auto bits = std::bit_cast<std::uint64_t>(value);
  for (int b = 0; b < 8; ++b) {
    bytes[b] = static_cast<unsigned char>(bits & 0xffu);
    bits >>= 8;
  }
}

Signal load_raw(const std::filesystem::path& path, double sample_rate_hz,
                std::optional<Index> channels) {
  if (!channels || *channels <= 0) {
    throw ValueError("raw_f64 input needs a positive channel count");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  const auto values = bytes.size() / 8;
  if (bytes.size() % 8 != 0 || values % static_cast<std::size_t>(*channels) != 0) {
    throw FormatError("raw_f64 file of " + std::to_string(bytes.size()) +
                      " bytes does not split into " + std::to_string(*channels) +
                      " channels of 8-byte doubles");
  }
  const Index samples = static_cast<Index>(values) / *channels;
  RowMatrix data(*channels, samples);
  for (std::size_t n = 0; n < values; ++n) {
    data.data()[n] = from_le_bytes(&bytes[8 * n]);
  }
  return Signal(std::move(data), sample_rate_hz);
}

// Keeps bin n of a length-T DFT (0 <= n <= T/2) when its frequency lies in [lo, hi).
bool bin_in_band(Index n, Index T, double fs, double lo, double hi) {
  const double f = static_cast<double>(n) * fs / static_cast<double>(T);
  if (f < lo) return false;
  if (f < hi) return true;
  const bool nyquist_bin = (T % 2 == 0) && (2 * n == T);
  return nyquist_bin && hi >= fs / 2.0;
}

void check_band(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo < 0.0 || !(lo < hi)) {
    throw ValueError("bandpass: need 0 <= lo < hi");
  }
}

// Applies several spectral masks to every row, sharing one forward FFT per row.
std::vector<Signal> apply_bands(const Signal& x, const std::vector<std::pair<double, double>>& bands) {
  const Index S = x.channels();
  const Index T = x.samples();
  const double fs = x.sample_rate_hz();

  std::vector<std::vector<bool>> keep(bands.size(), std::vector<bool>(T / 2 + 1));
  for (std::size_t c = 0; c < bands.size(); ++c) {
    for (Index n = 0; n <= T / 2; ++n) {
      keep[c][n] = bin_in_band(n, T, fs, bands[c].first, bands[c].second);
    }
  }

  std::vector<RowMatrix> out(bands.size(), RowMatrix(S, T));
  Eigen::FFT<double> fft;
  std::vector<double> row(T);
  std::vector<double> filtered(T);
  std::vector<std::complex<double>> spectrum;
  std::vector<std::complex<double>> masked(T);
  for (Index i = 0; i < S; ++i) {
    std::copy_n(x.data().row(i).data(), T, row.begin());
    fft.fwd(spectrum, row);
    for (std::size_t c = 0; c < bands.size(); ++c) {
      for (Index n = 0; n < T; ++n) {
        const Index mirrored = std::min(n, T - n);
        masked[n] = keep[c][mirrored] ? spectrum[n] : std::complex<double>{};
      }
      fft.inv(filtered, masked);
      std::copy(filtered.begin(), filtered.end(), out[c].row(i).data());
    }
  }

  std::vector<Signal> result;
  result.reserve(bands.size());
  for (auto& m : out) result.emplace_back(std::move(m), fs);
  return result;
}

}  // namespace

FileFormat format_from_extension(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".f64" || ext == ".bin" || ext == ".raw") return FileFormat::raw_f64;
  return FileFormat::csv;
}

Signal load_signal(const std::filesystem::path& path, FileFormat format, double sample_rate_hz,
                   std::optional<Index> channels) {
  if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
  switch (format) {
    case FileFormat::csv:
      return load_csv(path, sample_rate_hz);
    case FileFormat::raw_f64:
      return load_raw(path, sample_rate_hz, channels);
  }
  throw ValueError("unknown file format");
}

void save_csv(const Signal& x, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  for (Index i = 0; i < x.channels(); ++i) {
    for (Index k = 0; k < x.samples(); ++k) {
      if (k) out << ',';
      out << x.data()(i, k);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void save_raw_f64(const Signal& x, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const auto n = static_cast<std::size_t>(x.data().size());
  std::vector<unsigned char> bytes(8 * n);
  for (std::size_t v = 0; v < n; ++v) to_le_bytes(x.data().data()[v], &bytes[8 * v]);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

BandSpec::BandSpec(std::vector<double> edges_hz) : edges_(std::move(edges_hz)) {
  if (edges_.size() < 2) throw ValueError("band spec needs at least two edges");
  if (!std::all_of(edges_.begin(), edges_.end(), [](double e) { return std::isfinite(e); })) {
    throw ValueError("band spec edges must be finite");
  }
  if (edges_.front() < 0.0) throw ValueError("band spec edges must be non-negative");
  for (std::size_t c = 1; c < edges_.size(); ++c) {
    if (!(edges_[c] > edges_[c - 1])) throw ValueError("band spec edges must be strictly ascending");
  }
}

BandSpec BandSpec::eeg_default() { return BandSpec({0, 7, 10, 12, 18, 24, 30, 100, 5000}); }

BandSpec BandSpec::clamped_to_nyquist(double sample_rate_hz, bool* changed) const {
  const double nyquist = sample_rate_hz / 2.0;
  std::vector<double> edges;
  bool moved = false;
  for (double e : edges_) {
    if (e > nyquist) {
      moved = true;
      e = nyquist;
    }
    if (!edges.empty() && !(e > edges.back())) continue;  // band collapsed onto Nyquist
    edges.push_back(e);
  }
  if (changed) *changed = moved;
  if (edges.size() < 2) throw ValueError("no band of the spec lies below Nyquist");
  return BandSpec(std::move(edges));
}

Signal bandpass(const Signal& x, double band_lo_hz, double band_hi_hz) {
  check_band(band_lo_hz, band_hi_hz);
  return std::move(apply_bands(x, {{band_lo_hz, band_hi_hz}}).front());
}

std::vector<Signal> filter_bank(const Signal& x, const BandSpec& bands) {
  const auto effective = bands.clamped_to_nyquist(x.sample_rate_hz());
  std::vector<std::pair<double, double>> ranges;
  for (std::size_t c = 0; c < effective.band_count(); ++c) {
    check_band(effective.lower(c), effective.upper(c));
    ranges.emplace_back(effective.lower(c), effective.upper(c));
  }
  return apply_bands(x, ranges);
}

std::vector<Signal> partition(const Signal& x, Index windows, Index stride) {
  const Index T = x.samples();
  if (windows <= 0 || stride <= 0) throw ValueError("partition: windows and stride must be positive");
  if (T % windows != 0) {
    throw ValueError("partition: T=" + std::to_string(T) + " is not divisible by K=" +
                     std::to_string(windows));
  }
  const Index width = T / windows;
  if ((windows - 1) * stride + width > T) {
    throw ValueError("partition: windows run past the end of the signal");
  }
  std::vector<Signal> out;
  out.reserve(static_cast<std::size_t>(windows));
  for (Index k = 0; k < windows; ++k) {
    out.emplace_back(RowMatrix(x.data().middleCols(k * stride, width)), x.sample_rate_hz());
  }
  return out;
}

Signal downsample(const Signal& x, Index target_samples) {
  const Index T1 = x.samples();
  if (target_samples < 2 || target_samples > T1) {
    throw ValueError("downsample: need 2 <= T2 <= T1 (T1=" + std::to_string(T1) +
                     ", T2=" + std::to_string(target_samples) + ")");
  }
  const Index step = T1 / target_samples;
  RowMatrix out(x.channels(), target_samples);
  for (Index k = 0; k < target_samples; ++k) out.col(k) = x.data().col(k * step);
  const double rate = x.sample_rate_hz() * static_cast<double>(target_samples) / static_cast<double>(T1);
  return Signal(std::move(out), rate);
}

}  // namespace hgsp
