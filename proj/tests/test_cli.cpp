#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hgsp/cli.hpp"
#include "hgsp/evaluation.hpp"
#include "hgsp/graph_learning.hpp"
#include "hgsp/pipeline.hpp"
#include "oracles.hpp"

using namespace hgsp;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run hgsp_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "hgsp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path(HGSP_TEST_TMP) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> cells;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, sep);) cells.push_back(cell);
  return cells;
}

Signal write_sample(const fs::path& path, std::uint64_t seed, Index S, Index T, double fs) {
  std::mt19937_64 rng(seed);
  const Signal x(oracle::random_matrix(rng, S, T), fs);
  save_csv(x, path);
  return x;
}

std::vector<fs::path> listing(const fs::path& dir) {
  std::vector<fs::path> names;
  for (const auto& e : fs::directory_iterator(dir)) names.push_back(e.path().filename());
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(hgsp_cli({}).code == cli::kUsage);
  CHECK(hgsp_cli({"frobnicate"}).code == cli::kUsage);
  CHECK(hgsp_cli({"extract", "--input", "x"}).code == cli::kUsage);
  CHECK(hgsp_cli({"--help"}).code == cli::kOk);
}

TEST_CASE("extract writes one row per sample in filename order") {
  const auto out = fresh_dir("extract_ok") / "features.csv";
  const auto in = fresh_dir("extract_ok/in");
  // written out of order on purpose
  const auto c = write_sample(in / "c.csv", 3, 4, 400, 400.0);
  const auto a = write_sample(in / "a.csv", 1, 4, 400, 400.0);
  const auto b = write_sample(in / "b.csv", 2, 4, 400, 400.0);
  std::ofstream(in / "notes.txt") << "ignored\n";

  const auto r = hgsp_cli({"extract", "--input", in.string(), "--output", out.string(), "--fs", "400"});
  INFO(r.err);
  REQUIRE(r.code == cli::kOk);
  const auto lines = lines_of(slurp(out));
  REQUIRE(lines.size() == 4);
  const auto header = split(lines[0], ',');
  CHECK(header.size() == 1 + 795);
  CHECK(header[0] == "sample");
  const auto names = feature_names(8, PipelineConfig{});
  CHECK(std::equal(names.begin(), names.end(), header.begin() + 1));

  const Signal* expected[] = {&a, &b, &c};
  const char* files[] = {"a.csv", "b.csv", "c.csv"};
  for (int row = 0; row < 3; ++row) {
    const auto cells = split(lines[row + 1], ',');
    REQUIRE(cells.size() == header.size());
    CHECK(cells[0] == files[row]);
    // the CSV round trip of the sample changes nothing: 17 significant digits
    const auto reloaded = load_signal(in / files[row], FileFormat::csv, 400.0);
    CHECK(reloaded.data() == expected[row]->data());
    const auto fv = extract_features(reloaded, PipelineConfig{});
    for (std::size_t n = 0; n < fv.size(); ++n) CHECK(std::stod(cells[n + 1]) == fv.values[n]);
  }
  CHECK_FALSE(fs::exists(out.string() + ".tmp"));
}

TEST_CASE("extract reports a corrupt sample and keeps the rest") {
  const auto out = fresh_dir("extract_corrupt") / "features.csv";
  const auto in = fresh_dir("extract_corrupt/in");
  write_sample(in / "s1.csv", 1, 4, 400, 400.0);
  std::ofstream(in / "s2.csv") << "1,2,oops\n4,5,6\n";
  write_sample(in / "s3.csv", 3, 4, 400, 400.0);

  const auto r = hgsp_cli({"extract", "--input", in.string(), "--output", out.string(), "--fs", "400"});
  CHECK(r.code == cli::kExtractionFailure);
  CHECK(r.err.find("s2.csv") != std::string::npos);
  CHECK(r.err.find("1 of 3 samples failed") != std::string::npos);
  const auto lines = lines_of(slurp(out));
  REQUIRE(lines.size() == 3);
  CHECK(lines[1].rfind("s1.csv,", 0) == 0);
  CHECK(lines[2].rfind("s3.csv,", 0) == 0);
}

TEST_CASE("extract with every sample broken writes nothing") {
  const auto out = fresh_dir("extract_all_bad") / "features.csv";
  const auto in = fresh_dir("extract_all_bad/in");
  std::ofstream(in / "x.csv") << "not,a,number\n";
  const auto r = hgsp_cli({"extract", "--input", in.string(), "--output", out.string()});
  CHECK(r.code == cli::kExtractionFailure);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("extract config and I/O errors") {
  const auto dir = fresh_dir("extract_cfg");
  const auto in = fresh_dir("extract_cfg/in");
  write_sample(in / "s.csv", 1, 4, 400, 400.0);
  const auto cfg = dir / "bad.cfg";
  std::ofstream(cfg) << "windows = 3\n";
  const auto out = dir / "features.csv";

  auto r = hgsp_cli({"extract", "--input", in.string(), "--output", out.string(), "--config", cfg.string()});
  CHECK(r.code == cli::kConfigError);
  CHECK(r.err.find("windows") != std::string::npos);
  CHECK_FALSE(fs::exists(out));

  std::ofstream(cfg) << "lag2 = many\n";
  r = hgsp_cli({"extract", "--input", in.string(), "--output", out.string(), "--config", cfg.string()});
  CHECK(r.code == cli::kConfigError);
  CHECK(r.err.find("lag2") != std::string::npos);

  r = hgsp_cli({"extract", "--input", in.string(), "--output", out.string(), "--config", (dir / "none.cfg").string()});
  CHECK(r.code == cli::kConfigError);

  r = hgsp_cli({"extract", "--input", (dir / "missing").string(), "--output", out.string()});
  CHECK(r.code == cli::kIoError);

  r = hgsp_cli({"extract", "--input", in.string(), "--output", (dir / "no/such/dir/f.csv").string()});
  CHECK(r.code == cli::kIoError);
  CHECK_FALSE(fs::exists(dir / "no"));
}

TEST_CASE("graph writes three self-consistent files") {
  const auto dir = fresh_dir("graph_ok");
  write_sample(dir / "x.csv", 5, 3, 200, 200.0);
  const auto out = dir / "out";
  const auto r = hgsp_cli({"graph", "--input", (dir / "x.csv").string(), "--output", out.string(), "--fs", "200",
                           "--band", "2"});
  INFO(r.err);
  REQUIRE(r.code == cli::kOk);
  CHECK(listing(out) == std::vector<fs::path>{"adjacency.txt", "autocov.csv", "threshold.txt"});

  const Index S = 3, T2 = 20, L = 10;
  // adjacency: N x N, symmetric
  const auto adj_lines = lines_of(slurp(out / "adjacency.txt"));
  REQUIRE(adj_lines.size() == 1 + S * T2);
  Matrix W(S * T2, S * T2);
  for (Index u = 0; u < S * T2; ++u) {
    const auto cells = split(adj_lines[u + 1], ' ');
    REQUIRE(cells.size() == static_cast<std::size_t>(S * T2));
    for (Index v = 0; v < S * T2; ++v) W(u, v) = std::stod(cells[v]);
  }
  CHECK(W == W.transpose());

  // autocov: R recomputed from the adjacency dump
  const auto ac_lines = lines_of(slurp(out / "autocov.csv"));
  REQUIRE(ac_lines.size() == 2 + S * S * (L + 1));
  CHECK(ac_lines[1] == "i,j,l,value");
  std::vector<double> R(static_cast<std::size_t>(S * S * (L + 1)));
  for (std::size_t n = 2; n < ac_lines.size(); ++n) {
    const auto c = split(ac_lines[n], ',');
    const Index i = std::stol(c[0]), j = std::stol(c[1]), l = std::stol(c[2]);
    R[static_cast<std::size_t>((l * S + i) * S + j)] = std::stod(c[3]);
    double sum = 0.0;
    for (Index k = l; k < T2; ++k) sum += W((k - l) * S + i, k * S + j);
    CHECK(R[static_cast<std::size_t>((l * S + i) * S + j)] == doctest::Approx(sum / T2).epsilon(1e-12));
  }

  // threshold: W~ from the R dump and the reported kappa
  const auto th_lines = lines_of(slurp(out / "threshold.txt"));
  REQUIRE(th_lines.size() == 1 + S);
  const std::string prefix = "# thresholded spatial graph, kappa=";
  REQUIRE(th_lines[0].rfind(prefix, 0) == 0);
  const double kappa = std::stod(th_lines[0].substr(prefix.size()));
  Matrix mean = Matrix::Zero(S, S);
  for (Index l = 0; l <= L; ++l) {
    for (Index i = 0; i < S; ++i) {
      for (Index j = 0; j < S; ++j) mean(i, j) += R[static_cast<std::size_t>((l * S + i) * S + j)] / (L + 1);
    }
  }
  const Matrix sym = 0.5 * (mean + mean.transpose());
  std::vector<double> values(sym.data(), sym.data() + sym.size());
  std::sort(values.begin(), values.end());
  CHECK(kappa == doctest::Approx(values[values.size() / 2]).epsilon(1e-12));
  for (Index i = 0; i < S; ++i) {
    const auto cells = split(th_lines[i + 1], ' ');
    for (Index j = 0; j < S; ++j) {
      if (std::abs(sym(i, j) - kappa) > 1e-9 * kappa) CHECK(std::stoi(cells[j]) == (sym(i, j) > kappa ? 1 : 0));
    }
  }
}

TEST_CASE("graph output is byte-identical across runs") {
  const auto dir = fresh_dir("graph_repeat");
  write_sample(dir / "x.csv", 6, 4, 400, 400.0);
  for (const char* sub : {"one", "two"}) {
    const auto r = hgsp_cli({"graph", "--input", (dir / "x.csv").string(), "--output", (dir / sub).string()});
    REQUIRE(r.code == cli::kOk);
  }
  for (const char* f : {"adjacency.txt", "autocov.csv", "threshold.txt"}) {
    CHECK(slurp(dir / "one" / f) == slurp(dir / "two" / f));
  }
}

TEST_CASE("graph refuses an oversized level-2 matrix") {
  const auto dir = fresh_dir("graph_big");
  write_sample(dir / "wide.csv", 7, 260, 40, 400.0);
  const auto r = hgsp_cli({"graph", "--input", (dir / "wide.csv").string(), "--output", (dir / "out").string()});
  CHECK(r.code == cli::kSizeCapExceeded);
  // (260 * 20)^2 doubles
  CHECK(r.err.find("216320000 bytes") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out"));

  const auto bad_band = hgsp_cli({"graph", "--input", (dir / "wide.csv").string(), "--output",
                                  (dir / "out").string(), "--band", "1"});
  CHECK(bad_band.code == cli::kSizeCapExceeded);
}

TEST_CASE("graph band out of range") {
  const auto dir = fresh_dir("graph_band");
  write_sample(dir / "x.csv", 8, 3, 200, 200.0);
  const auto r = hgsp_cli({"graph", "--input", (dir / "x.csv").string(), "--output", (dir / "out").string(),
                           "--fs", "200", "--band", "9"});
  CHECK(r.code == cli::kConfigError);
  CHECK(r.err.find("band") != std::string::npos);
}

TEST_CASE("experiment report") {
  const auto dir = fresh_dir("experiment");
  const std::vector<std::string> common = {"--n-per-class", "8", "--channels", "4", "--samples", "200",
                                           "--fs", "200", "--trees", "20", "--seed", "7"};
  auto args = [&](const fs::path& out, std::vector<std::string> extra = {}) {
    std::vector<std::string> a = {"experiment", "--output", out.string()};
    a.insert(a.end(), common.begin(), common.end());
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  };
  REQUIRE(hgsp_cli(args(dir / "a.csv")).code == cli::kOk);
  REQUIRE(hgsp_cli(args(dir / "b.csv")).code == cli::kOk);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));

  const auto lines = lines_of(slurp(dir / "a.csv"));
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "seed,config_hash,auc,n_features,n_train,n_test,failed_samples");
  const auto cells = split(lines[1], ',');
  REQUIRE(cells.size() == 7);
  CHECK(cells[0] == "7");
  const double auc = std::stod(cells[2]);
  CHECK(auc >= 0.0);
  CHECK(auc <= 1.0);
  CHECK(cells[4] == "8");
  CHECK(cells[5] == "8");

  REQUIRE(hgsp_cli(args(dir / "t.csv", {"--timings"})).code == cli::kOk);
  const auto timed = lines_of(slurp(dir / "t.csv"));
  CHECK(split(timed[0], ',').size() == 11);
  CHECK(timed[1].rfind(lines[1] + ",", 0) == 0);

  const auto cfg = dir / "bad.cfg";
  std::ofstream(cfg) << "windows = 7\n";
  CHECK(hgsp_cli(args(dir / "c.csv", {"--config", cfg.string()})).code == cli::kConfigError);
  CHECK_FALSE(fs::exists(dir / "c.csv"));
}

TEST_CASE("synth writes samples that extract reads back") {
  const auto dir = fresh_dir("synth");
  auto r = hgsp_cli({"synth", "--output", (dir / "csv").string(), "--n-per-class", "2", "--channels", "3",
                     "--samples", "80", "--fs", "80", "--seed", "3"});
  REQUIRE(r.code == cli::kOk);
  CHECK(listing(dir / "csv") == std::vector<fs::path>{"labels.csv", "samples"});
  CHECK(listing(dir / "csv" / "samples").size() == 4);
  CHECK(slurp(dir / "csv" / "labels.csv") ==
        "file,label\nsample_00000.csv,0\nsample_00001.csv,1\nsample_00002.csv,0\nsample_00003.csv,1\n");

  r = hgsp_cli({"synth", "--output", (dir / "raw").string(), "--n-per-class", "2", "--channels", "3",
                "--samples", "80", "--fs", "80", "--seed", "3", "--format", "f64"});
  REQUIRE(r.code == cli::kOk);
  const auto from_csv = load_signal(dir / "csv" / "samples" / "sample_00001.csv", FileFormat::csv, 80.0);
  const auto from_raw = load_signal(dir / "raw" / "samples" / "sample_00001.f64", FileFormat::raw_f64, 80.0, 3);
  CHECK(from_csv.data() == from_raw.data());
  const auto generated = generate_synthetic(2, 3, 80, 80.0, 3);
  CHECK(from_raw.data() == generated[1].signal.data());

  const auto cfg = dir / "small.cfg";
  std::ofstream(cfg) << "level2_samples = 10\nlag2 = 3\n";
  for (const char* fmt : {"csv", "raw"}) {
    std::vector<std::string> a = {"extract", "--input", (dir / fmt / "samples").string(), "--output",
                                  (dir / (std::string(fmt) + ".features.csv")).string(), "--fs", "80",
                                  "--config", cfg.string()};
    if (std::string(fmt) == "raw") {
      a.push_back("--raw-channels");
      a.push_back("3");
    }
    r = hgsp_cli(a);
    INFO(r.err);
    CHECK(r.code == cli::kOk);
  }
  const auto csv_lines = lines_of(slurp(dir / "csv.features.csv"));
  const auto raw_lines = lines_of(slurp(dir / "raw.features.csv"));
  REQUIRE(csv_lines.size() == 5);
  REQUIRE(raw_lines.size() == 5);
  for (std::size_t n = 1; n < 5; ++n) {
    // identical values, different file names
    CHECK(csv_lines[n].substr(csv_lines[n].find(',')) == raw_lines[n].substr(raw_lines[n].find(',')));
  }

  CHECK(hgsp_cli({"synth", "--output", (dir / "x").string(), "--format", "wav"}).code == cli::kUsage);
}

TEST_CASE("jobs flag does not change the output") {
  const auto in = fresh_dir("jobs/in");
  for (int n = 0; n < 4; ++n) write_sample(in / ("s" + std::to_string(n) + ".csv"), 50 + n, 4, 400, 400.0);
  const auto dir = fs::path(HGSP_TEST_TMP) / "jobs";
  REQUIRE(hgsp_cli({"extract", "--input", in.string(), "--output", (dir / "j1.csv").string(), "--jobs", "1"}).code ==
          cli::kOk);
  REQUIRE(hgsp_cli({"extract", "--input", in.string(), "--output", (dir / "j3.csv").string(), "--jobs", "3"}).code ==
          cli::kOk);
  CHECK(slurp(dir / "j1.csv") == slurp(dir / "j3.csv"));
}
