#include <doctest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "hgsp/errors.hpp"
#include "hgsp/signal.hpp"
#include "oracles.hpp"

using namespace hgsp;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
  const auto path = fs::temp_directory_path() / ("hgsp_signal_" + name);
  std::ofstream(path, std::ios::binary) << content;
  return path;
}

Signal tone(double freq, double fs, Index T, Index S = 2) {
  RowMatrix m(S, T);
  for (Index i = 0; i < S; ++i) {
    for (Index k = 0; k < T; ++k) {
      m(i, k) = std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(k) / fs + 0.3 * i);
    }
  }
  return Signal(m, fs);
}

double relative_l2(const RowMatrix& a, const RowMatrix& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_CASE("Signal rejects invalid shapes and values") {
  CHECK_THROWS_AS(Signal(RowMatrix::Zero(1, 5), 100.0), ValueError);
  CHECK_THROWS_AS(Signal(RowMatrix::Zero(3, 1), 100.0), ValueError);
  CHECK_THROWS_AS(Signal(RowMatrix::Zero(2, 2), 0.0), ValueError);
  RowMatrix bad = RowMatrix::Zero(2, 2);
  bad(1, 1) = std::nan("");
  CHECK_THROWS_AS(Signal(bad, 10.0), ValueError);
}

TEST_CASE("load_signal parses channel-per-row CSV") {
  const auto path = temp_file("ok.csv", "1,2,3\n4,5,6\n");
  const auto x = load_signal(path, FileFormat::csv, 100.0);
  CHECK(x.channels() == 2);
  CHECK(x.samples() == 3);
  RowMatrix expected(2, 3);
  expected << 1, 2, 3, 4, 5, 6;
  CHECK(x.data() == expected);
  CHECK(x.sample_rate_hz() == 100.0);
}

TEST_CASE("load_signal error paths") {
  CHECK_THROWS_AS(load_signal(temp_file("ragged.csv", "1,2,3\n4,5\n"), FileFormat::csv, 100.0), FormatError);
  CHECK_THROWS_AS(load_signal(temp_file("text.csv", "1,x,3\n4,5,6\n"), FileFormat::csv, 100.0), FormatError);
  CHECK_THROWS_AS(load_signal(temp_file("nan.csv", "1,nan,3\n4,5,6\n"), FileFormat::csv, 100.0), ValueError);
  CHECK_THROWS_AS(load_signal(temp_file("one.csv", "1,2,3\n"), FileFormat::csv, 100.0), ValueError);
  CHECK_THROWS_AS(load_signal("/nonexistent/hgsp.csv", FileFormat::csv, 100.0), IoError);
  CHECK_THROWS_AS(load_signal(temp_file("odd.f64", std::string(40, '\0')), FileFormat::raw_f64, 100.0, 2),
                  FormatError);
}

TEST_CASE("raw_f64 round trip is bit-exact") {
  RowMatrix m(2, 3);
  m << 1.5, -2.25, 1e-300, std::nextafter(1.0, 2.0), -0.0, 12345.678;
  const Signal x(m, 250.0);
  const auto path = fs::temp_directory_path() / "hgsp_signal_rt.f64";
  save_raw_f64(x, path);
  CHECK(fs::file_size(path) == 48);
  const auto y = load_signal(path, FileFormat::raw_f64, 250.0, 2);
  REQUIRE(y.channels() == 2);
  REQUIRE(y.samples() == 3);
  for (Index n = 0; n < 6; ++n) {
    CHECK(std::bit_cast<std::uint64_t>(y.data().data()[n]) == std::bit_cast<std::uint64_t>(m.data()[n]));
  }
  // first value's bytes are little-endian
  std::ifstream in(path, std::ios::binary);
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  CHECK(b[7] == 0x3f);
  CHECK(b[6] == 0xf8);
}

TEST_CASE("bandpass passes and stops a 15 Hz tone") {
  const auto x = tone(15.0, 100.0, 200);
  CHECK(relative_l2(bandpass(x, 12, 18).data(), x.data()) <= 1e-9);
  CHECK(bandpass(x, 0, 7).data().norm() <= 1e-9 * x.data().norm());
  const Signal zero(RowMatrix::Zero(3, 64), 100.0);
  CHECK(bandpass(zero, 5, 20).data().norm() == 0.0);
}

TEST_CASE("bandpass argument validation") {
  const auto x = tone(15.0, 100.0, 200);
  CHECK_THROWS_AS(bandpass(x, 10, 10), ValueError);
  CHECK_THROWS_AS(bandpass(x, 20, 10), ValueError);
  CHECK_THROWS_AS(bandpass(x, -1, 10), ValueError);
}

TEST_CASE("bandpass matches a naive-DFT masking oracle") {
  std::mt19937_64 rng(11);
  for (Index T : {Index{31}, Index{64}, Index{100}}) {
    const Signal x(oracle::random_matrix(rng, 3, T), 100.0);
    const double lo = 10.0, hi = 30.0;
    const auto y = bandpass(x, lo, hi);
    for (Index i = 0; i < 3; ++i) {
      const auto X = oracle::naive_dft(oracle::row_of(x.data(), i));
      const auto Y = oracle::naive_dft(oracle::row_of(y.data(), i));
      for (Index n = 0; n < T; ++n) {
        const double f = static_cast<double>(std::min(n, T - n)) * 100.0 / static_cast<double>(T);
        const bool kept = f >= lo && f < hi;
        const auto expected = kept ? X[n] : std::complex<double>{};
        CHECK(std::abs(Y[n] - expected) <= 1e-9 * (1.0 + std::abs(X[n])));
      }
    }
  }
}

TEST_CASE("bandpass is idempotent and real") {
  std::mt19937_64 rng(3);
  const Signal x(oracle::random_matrix(rng, 4, 128), 256.0);
  const auto once = bandpass(x, 8, 40);
  const auto twice = bandpass(once, 8, 40);
  CHECK((twice.data() - once.data()).norm() <= 1e-12 * (1.0 + once.data().norm()));
  CHECK(once.data().allFinite());
}

TEST_CASE("filter bank partitions DFT bins") {
  std::mt19937_64 rng(5);
  SUBCASE("two bands up to Nyquist reconstruct white noise") {
    const double fs = 200.0;
    const Signal x(oracle::random_matrix(rng, 3, 256), fs);
    const auto bands = filter_bank(x, BandSpec({0, fs / 4, fs / 2}));
    REQUIRE(bands.size() == 2);
    CHECK(relative_l2(bands[0].data() + bands[1].data(), x.data()) <= 1e-8);
  }
  SUBCASE("single band [0, Nyquist) is the identity") {
    const Signal x(oracle::random_matrix(rng, 2, 100), 50.0);
    const auto bands = filter_bank(x, BandSpec({0, 25}));
    REQUIRE(bands.size() == 1);
    CHECK(relative_l2(bands[0].data(), x.data()) <= 1e-12);
  }
  SUBCASE("odd length, bin energies add up") {
    const double fs = 300.0;
    const Signal x(oracle::random_matrix(rng, 2, 75), fs);
    const auto bands = filter_bank(x, BandSpec({0, 17, 60, 150}));
    for (Index i = 0; i < 2; ++i) {
      const auto X = oracle::naive_dft(oracle::row_of(x.data(), i));
      std::vector<double> sum(X.size(), 0.0);
      for (const auto& b : bands) {
        const auto Y = oracle::naive_dft(oracle::row_of(b.data(), i));
        for (std::size_t n = 0; n < Y.size(); ++n) sum[n] += std::norm(Y[n]);
      }
      double total = 0.0, err = 0.0;
      for (std::size_t n = 0; n < X.size(); ++n) {
        total += std::norm(X[n]);
        err += std::abs(sum[n] - std::norm(X[n]));
      }
      CHECK(err <= 1e-9 * total);
    }
  }
}

TEST_CASE("default EEG bands clamp at Nyquist") {
  bool changed = false;
  const auto clamped = BandSpec::eeg_default().clamped_to_nyquist(400.0, &changed);
  CHECK(changed);
  CHECK(clamped.edges_hz() == std::vector<double>{0, 7, 10, 12, 18, 24, 30, 100, 200});
  CHECK(clamped.band_count() == 8);

  const auto low_rate = BandSpec::eeg_default().clamped_to_nyquist(100.0);
  CHECK(low_rate.edges_hz() == std::vector<double>{0, 7, 10, 12, 18, 24, 30, 50});

  const auto untouched = BandSpec::eeg_default().clamped_to_nyquist(20000.0, &changed);
  CHECK_FALSE(changed);
  CHECK(untouched.band_count() == 8);

  CHECK_THROWS_AS(BandSpec({0, 5, 5}), ValueError);
  CHECK_THROWS_AS(BandSpec({-1, 5}), ValueError);
}

TEST_CASE("partition windows") {
  RowMatrix m(2, 6);
  m << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
  const Signal x(m, 10.0);

  SUBCASE("non-overlapping") {
    const auto w = partition(x, 3, 2);
    REQUIRE(w.size() == 3);
    CHECK(w[0].data() == m.middleCols(0, 2));
    CHECK(w[1].data() == m.middleCols(2, 2));
    CHECK(w[2].data() == m.middleCols(4, 2));
  }
  SUBCASE("overlapping, stride 1") {
    const auto w = partition(x, 3, 1);
    REQUIRE(w.size() == 3);
    CHECK(w[0].data() == m.middleCols(0, 2));
    CHECK(w[1].data() == m.middleCols(1, 2));
    CHECK(w[2].data() == m.middleCols(2, 2));
  }
  SUBCASE("errors") {
    const Signal seven(RowMatrix::Zero(2, 7), 10.0);
    CHECK_THROWS_AS(partition(seven, 3, 2), ValueError);
    CHECK_THROWS_AS(partition(x, 3, 3), ValueError);
    CHECK_THROWS_AS(partition(x, 0, 1), ValueError);
  }
  SUBCASE("concatenating stride-w windows restores the signal") {
    std::mt19937_64 rng(9);
    const Signal y(oracle::random_matrix(rng, 3, 24), 10.0);
    for (Index K : {Index{2}, Index{3}, Index{4}, Index{6}}) {
      const auto w = partition(y, K, 24 / K);
      RowMatrix joined(3, 24);
      for (Index k = 0; k < K; ++k) joined.middleCols(k * (24 / K), 24 / K) = w[k].data();
      CHECK(joined == y.data());
    }
  }
}

TEST_CASE("downsample picks strided columns") {
  RowMatrix m(2, 6);
  m << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
  const Signal x(m, 60.0);

  const auto half = downsample(x, 3);
  RowMatrix expected(2, 3);
  expected << 1, 3, 5, 7, 9, 11;
  CHECK(half.data() == expected);
  CHECK(half.sample_rate_hz() == doctest::Approx(30.0));

  CHECK(downsample(x, 6).data() == m);

  const Signal five(m.leftCols(5), 50.0);
  const auto two = downsample(five, 2);
  RowMatrix e2(2, 2);
  e2 << 1, 3, 7, 9;
  CHECK(two.data() == e2);

  CHECK_THROWS_AS(downsample(x, 7), ValueError);
  CHECK_THROWS_AS(downsample(x, 1), ValueError);
}
