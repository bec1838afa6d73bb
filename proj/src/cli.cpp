#include "hgsp/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>

#include "hgsp/config.hpp"
#include "hgsp/errors.hpp"
#include "hgsp/evaluation.hpp"
#include "hgsp/graph_learning.hpp"
#include "hgsp/pipeline.hpp"

namespace hgsp::cli {

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string input;
  std::string output;
  std::string config;
  std::uint64_t seed = 42;
  int jobs = 0;
  bool verbose = false;
  double sample_rate_hz = 400.0;
  Index channels = 0;  // raw_f64 inputs only
};

// Text destined for a file, committed together by rename once all of it is ready.
class PendingFiles {
 public:
  void add(fs::path path, std::string content) { files_.emplace_back(std::move(path), std::move(content)); }

  void commit() {
    std::vector<fs::path> temps;
    for (const auto& [path, content] : files_) {
      fs::path tmp = path;
      tmp += ".tmp";
      std::ofstream out(tmp, std::ios::binary);
      out << content;
      out.close();
      if (!out) {
        for (const auto& t : temps) fs::remove(t);
        fs::remove(tmp);
        throw IoError("cannot write " + path.string());
      }
      temps.push_back(tmp);
    }
    for (std::size_t n = 0; n < files_.size(); ++n) fs::rename(temps[n], files_[n].first);
  }

 private:
  std::vector<std::pair<fs::path, std::string>> files_;
};

std::string format_real(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

PipelineConfig read_config(const CommonOptions& o) {
  if (o.config.empty()) return PipelineConfig{};
  try {
    return load_config(o.config);
  } catch (const IoError& e) {
    throw ConfigError("config", e.what());
  }
}

void apply_jobs(const CommonOptions& o) {
  if (o.jobs > 0) omp_set_num_threads(o.jobs);
}

std::optional<Index> raw_channels(const CommonOptions& o) {
  return o.channels > 0 ? std::optional<Index>(o.channels) : std::nullopt;
}

bool is_sample_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".csv" || ext == ".f64" || ext == ".bin" || ext == ".raw";
}

void warn_if_clamped(const CommonOptions& o, const PipelineConfig& cfg, double fs, std::ostream& err) {
  bool changed = false;
  (void)cfg.bands_hz.clamped_to_nyquist(fs, &changed);
  if (changed && o.verbose) {
    err << "warning: band edges above Nyquist (" << fs / 2 << " Hz) were clamped\n";
  }
}

// ---------------------------------------------------------------------------

int cmd_extract(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  const PipelineConfig cfg = read_config(o);
  if (!fs::is_directory(o.input)) throw IoError("input directory not found: " + o.input);

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(o.input)) {
    if (entry.is_regular_file() && is_sample_file(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  if (files.empty()) throw IoError("no sample files (.csv, .f64) in " + o.input);

  std::vector<std::string> failures(files.size());
  std::vector<std::optional<Signal>> loaded(files.size());
  std::optional<std::pair<Index, Index>> shape;
  for (std::size_t n = 0; n < files.size(); ++n) {
    try {
      Signal x = load_signal(files[n], format_from_extension(files[n]), o.sample_rate_hz, raw_channels(o));
      if (!shape) shape = {x.channels(), x.samples()};
      if (shape->first != x.channels() || shape->second != x.samples()) {
        failures[n] = "shape " + std::to_string(x.channels()) + "x" + std::to_string(x.samples()) +
                      " differs from the first sample";
        continue;
      }
      loaded[n] = std::move(x);
    } catch (const Error& e) {
      failures[n] = e.what();
    }
  }

  std::vector<Signal> batch_input;
  std::vector<std::size_t> batch_files;
  for (std::size_t n = 0; n < files.size(); ++n) {
    if (loaded[n]) {
      batch_input.push_back(*loaded[n]);
      batch_files.push_back(n);
    }
  }

  std::optional<BatchResult> result;
  if (!batch_input.empty()) {
    cfg.validate_for(shape->first, shape->second, o.sample_rate_hz);
    warn_if_clamped(o, cfg, o.sample_rate_hz, err);
    try {
      result = extract_batch(batch_input, cfg);
    } catch (const Error& e) {
      for (std::size_t b = 0; b < batch_files.size(); ++b) failures[batch_files[b]] = e.what();
    }
    if (result) {
      for (const auto& e : result->errors) failures[batch_files[e.index]] = e.message;
    }
  }

  std::size_t failed = 0;
  for (std::size_t n = 0; n < files.size(); ++n) {
    if (!failures[n].empty()) {
      ++failed;
      err << "error: " << files[n].filename().string() << ": " << failures[n] << '\n';
    }
  }
  if (!result) {
    err << "error: all " << files.size() << " samples failed; no output written\n";
    return kExtractionFailure;
  }

  std::ostringstream csv;
  csv.precision(17);
  csv << "sample";
  for (const auto& name : result->names) csv << ',' << name;
  csv << '\n';
  std::size_t rows = 0;
  for (std::size_t b = 0; b < batch_files.size(); ++b) {
    if (!result->rows[b]) continue;
    csv << files[batch_files[b]].filename().string();
    for (double v : *result->rows[b]) csv << ',' << v;
    csv << '\n';
    ++rows;
  }
  PendingFiles pending;
  pending.add(o.output, csv.str());
  pending.commit();
  if (o.verbose) out << "wrote " << rows << " rows x " << result->names.size() << " features to " << o.output << '\n';
  if (failed > 0) {
    err << failed << " of " << files.size() << " samples failed\n";
    return kExtractionFailure;
  }
  return kOk;
}

int cmd_graph(const CommonOptions& o, int band, std::ostream& out, std::ostream& err) {
  const PipelineConfig cfg = read_config(o);
  const fs::path input(o.input);
  const Signal x = load_signal(input, format_from_extension(input), o.sample_rate_hz, raw_channels(o));

  const Index S = x.channels();
  const Index T2 = cfg.level2_samples;
  if (S * T2 > cfg.dense_vertex_cap) {
    err << "error: the level-2 spatiotemporal adjacency has " << S * T2 << " vertices (S=" << S
        << ", T2=" << T2 << ") and would need " << estimate_dense_bytes(S, T2, 8)
        << " bytes as a dense matrix, above dense_vertex_cap=" << cfg.dense_vertex_cap
        << "; the dense matrix grows as (S T)^2, so lower level2_samples\n";
    return kSizeCapExceeded;
  }
  cfg.validate_for(S, x.samples(), x.sample_rate_hz());
  warn_if_clamped(o, cfg, x.sample_rate_hz(), err);
  const auto bands = cfg.bands_hz.clamped_to_nyquist(x.sample_rate_hz());
  if (band < 1 || static_cast<std::size_t>(band) > bands.band_count()) {
    throw ConfigError("band", "must lie in 1.." + std::to_string(bands.band_count()));
  }

  const Signal filtered = bandpass(x, bands.lower(band - 1), bands.upper(band - 1));
  const Signal coarse = downsample(filtered, T2);
  const auto tau = learn_weights(coarse, cfg.lag2, cfg.tensor_cap);
  const auto R = collapse_autocovariance(tau);
  const double kappa = choose_kappa(R, cfg.kappa);
  const auto graph = threshold_graph(R, kappa);
  const Matrix W = dense_adjacency(tau, cfg.dense_vertex_cap);

  std::ostringstream adjacency;
  adjacency.precision(17);
  adjacency << "# level-2 spatiotemporal adjacency, band " << band << ", N=" << W.rows()
            << ", vertex u = k*S + i\n";
  for (Index u = 0; u < W.rows(); ++u) {
    for (Index v = 0; v < W.cols(); ++v) adjacency << (v ? " " : "") << W(u, v);
    adjacency << '\n';
  }

  std::ostringstream autocov;
  autocov.precision(17);
  autocov << "# autocovariance R, S=" << S << " L=" << R.max_lag() << "\ni,j,l,value\n";
  for (Index l = 0; l <= R.max_lag(); ++l) {
    for (Index i = 0; i < S; ++i) {
      for (Index j = 0; j < S; ++j) autocov << i << ',' << j << ',' << l << ',' << R.at(i, j, l) << '\n';
    }
  }

  std::ostringstream thresholded;
  thresholded << "# thresholded spatial graph, kappa=" << format_real(kappa) << '\n';
  for (Index i = 0; i < S; ++i) {
    for (Index j = 0; j < S; ++j) thresholded << (j ? " " : "") << graph.adjacency(i, j);
    thresholded << '\n';
  }

  const fs::path dir(o.output);
  fs::create_directories(dir);
  PendingFiles pending;
  pending.add(dir / "adjacency.txt", adjacency.str());
  pending.add(dir / "autocov.csv", autocov.str());
  pending.add(dir / "threshold.txt", thresholded.str());
  pending.commit();
  if (o.verbose) out << "wrote adjacency.txt, autocov.csv, threshold.txt to " << dir.string() << '\n';
  return kOk;
}

struct ExperimentOptions {
  ExperimentParams params;
  ForestConfig forest;
  bool timings = false;
};

int cmd_experiment(const CommonOptions& o, ExperimentOptions e, std::ostream& out) {
  const PipelineConfig cfg = read_config(o);
  e.params.seed = o.seed;
  cfg.validate_for(e.params.channels, e.params.samples, e.params.sample_rate_hz);
  const auto report = run_experiment(cfg, e.forest, e.params);
  PendingFiles pending;
  pending.add(o.output, report_csv_header(e.timings) + "\n" + report_csv_row(report, e.timings) + "\n");
  pending.commit();
  if (o.verbose) {
    out << "auc=" << format_real(report.auc) << " features=" << report.n_features
        << " extract_s=" << report.timings.extract_s << " train_s=" << report.timings.train_s << '\n';
  }
  return kOk;
}

int cmd_synth(const CommonOptions& o, const ExperimentParams& p, const std::string& format, std::ostream& out) {
  const auto data = generate_synthetic(p.n_per_class, p.channels, p.samples, p.sample_rate_hz, o.seed);
  // Samples go one level down so `extract --input <dir>/samples` sees only them.
  const fs::path dir(o.output);
  const fs::path sample_dir = dir / "samples";
  fs::create_directories(sample_dir);
  std::ostringstream labels;
  labels << "file,label\n";
  for (std::size_t n = 0; n < data.size(); ++n) {
    char name[32];
    std::snprintf(name, sizeof name, "sample_%05zu.%s", n, format == "f64" ? "f64" : "csv");
    const fs::path path = sample_dir / name;
    fs::path tmp = path;
    tmp += ".tmp";
    if (format == "f64") {
      save_raw_f64(data[n].signal, tmp);
    } else {
      save_csv(data[n].signal, tmp);
    }
    fs::rename(tmp, path);
    labels << name << ',' << data[n].label << '\n';
  }
  PendingFiles pending;
  pending.add(dir / "labels.csv", labels.str());
  pending.commit();
  if (o.verbose) out << "wrote " << data.size() << " samples to " << dir.string() << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical graph-signal-processing features for multichannel time series"};
  app.require_subcommand(1);
  CommonOptions o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Pipeline config file (key = value)");
    sub->add_option("--jobs", o.jobs, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
    sub->add_flag("--verbose,-v", o.verbose, "Print progress and warnings");
  };
  auto add_data_shape = [&](CLI::App* sub, ExperimentParams& p) {
    sub->add_option("--n-per-class", p.n_per_class, "Samples per class")->capture_default_str();
    sub->add_option("--channels", p.channels, "Channels S")->capture_default_str();
    sub->add_option("--samples", p.samples, "Samples per channel T")->capture_default_str();
    sub->add_option("--fs", p.sample_rate_hz, "Sample rate in Hz")->capture_default_str();
    sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  };

  auto* extract = app.add_subcommand("extract", "Feature CSV for every sample file in a directory");
  extract->add_option("--input", o.input, "Directory of .csv / .f64 samples")->required();
  extract->add_option("--output", o.output, "Feature CSV to write")->required();
  extract->add_option("--fs", o.sample_rate_hz, "Sample rate in Hz")->capture_default_str();
  extract->add_option("--raw-channels", o.channels, "Channel count of .f64 inputs");
  add_common(extract);

  int band = 1;
  auto* graph = app.add_subcommand("graph", "Dump the level-2 graph of one sample");
  graph->add_option("--input", o.input, "Sample file")->required();
  graph->add_option("--output", o.output, "Output directory")->required();
  graph->add_option("--band", band, "Filter-bank band, 1-based")->capture_default_str();
  graph->add_option("--fs", o.sample_rate_hz, "Sample rate in Hz")->capture_default_str();
  graph->add_option("--raw-channels", o.channels, "Channel count of .f64 inputs");
  add_common(graph);

  ExperimentOptions exp;
  auto* experiment = app.add_subcommand("experiment", "Synthetic ictal/interictal classification run");
  experiment->add_option("--output", o.output, "Report CSV to write")->required();
  experiment->add_option("--trees", exp.forest.n_trees, "Trees in the forest")->capture_default_str();
  experiment->add_option("--select-top", exp.params.select_top, "Keep the q highest-variance features (0 = all)");
  experiment->add_flag("--shuffle-labels", exp.params.shuffle_labels, "Permute labels (null baseline)");
  experiment->add_flag("--timings", exp.timings, "Append wall-clock columns to the report");
  add_data_shape(experiment, exp.params);
  add_common(experiment);

  ExperimentParams synth_params;
  std::string synth_format = "csv";
  auto* synth = app.add_subcommand("synth", "Write a synthetic labelled dataset");
  synth->add_option("--output", o.output, "Output directory (samples/ and labels.csv)")->required();
  synth->add_option("--format", synth_format, "csv or f64")->check(CLI::IsMember({"csv", "f64"}));
  add_data_shape(synth, synth_params);
  add_common(synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    apply_jobs(o);
    if (*extract) return cmd_extract(o, out, err);
    if (*graph) return cmd_graph(o, band, out, err);
    if (*experiment) return cmd_experiment(o, exp, out);
    if (*synth) return cmd_synth(o, synth_params, synth_format, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const fs::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const SizeError& e) {
    err << "size error: " << e.what() << '\n';
    return kSizeCapExceeded;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExtractionFailure;
  }
  return kUsage;
}

}  // namespace hgsp::cli
