#include "hgsp/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hgsp/errors.hpp"

namespace hgsp {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_integer(const std::string& key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw ConfigError(key, "expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

double parse_real(const std::string& key, std::string_view text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw ConfigError(key, "expected a number, got '" + std::string(text) + "'");
  }
  return value;
}

std::string format_real(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

void PipelineConfig::validate() const {
  if (windows < 1) throw ConfigError("windows", "must be positive");
  if (stride < 0) throw ConfigError("stride", "must be positive, or 0 for T/K");
  if (level2_samples < 2) throw ConfigError("level2_samples", "must be at least 2");
  if (lag0 < 0) throw ConfigError("lag0", "must be non-negative");
  if (lag1 < 0) throw ConfigError("lag1", "must be non-negative");
  if (lag2 < 0) throw ConfigError("lag2", "must be non-negative");
  if (lag2 >= level2_samples) {
    throw ConfigError("lag2", "must be smaller than level2_samples (" +
                                  std::to_string(level2_samples) + ")");
  }
  if (kappa.kind == KappaPolicy::Kind::fixed && !(kappa.value >= 0.0)) {
    throw ConfigError("kappa", "must be non-negative");
  }
  if (graph_bands < 1) throw ConfigError("graph_bands", "must be positive");
  if (sgwt_scales < 1) throw ConfigError("sgwt_scales", "must be positive");
  if (z < 1) throw ConfigError("z", "must be positive");
  if (dense_vertex_cap < 1) throw ConfigError("dense_vertex_cap", "must be positive");
}

void PipelineConfig::validate_for(Index channels, Index samples, double sample_rate_hz) const {
  validate();
  try {
    (void)bands_hz.clamped_to_nyquist(sample_rate_hz);
  } catch (const ValueError& e) {
    throw ConfigError("bands_hz", e.what());
  }
  if (samples % windows != 0) {
    throw ConfigError("windows", "K=" + std::to_string(windows) + " does not divide T=" +
                                     std::to_string(samples));
  }
  const Index width = samples / windows;
  if (width < 2) throw ConfigError("windows", "windows would be narrower than 2 samples");
  const Index r = effective_stride(samples);
  if ((windows - 1) * r + width > samples) {
    throw ConfigError("stride", "windows with stride " + std::to_string(r) +
                                    " run past T=" + std::to_string(samples));
  }
  if (lag0 >= samples) throw ConfigError("lag0", "must be smaller than T");
  if (lag1 >= width) {
    throw ConfigError("lag1", "must be smaller than the window width " + std::to_string(width));
  }
  if (level2_samples > samples) {
    throw ConfigError("level2_samples", "T2=" + std::to_string(level2_samples) +
                                            " exceeds T=" + std::to_string(samples));
  }
  if (channels * level2_samples > dense_vertex_cap) {
    throw ConfigError("level2_samples",
                      "level-2 graph has " + std::to_string(channels * level2_samples) +
                          " vertices, above dense_vertex_cap=" + std::to_string(dense_vertex_cap));
  }
  if (z > channels * level2_samples) {
    throw ConfigError("z", "exceeds the level-2 vertex count");
  }
  const auto entries = static_cast<std::size_t>(channels * channels) *
                       static_cast<std::size_t>(samples) * static_cast<std::size_t>(lag0 + 1);
  if (entries > level0_entry_cap) {
    throw ConfigError("level0_entry_cap", "level-0 tensor needs " + std::to_string(entries) +
                                              " entries; downsample or raise the cap");
  }
}

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig cfg;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(line), "expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));

    if (key == "bands_hz") {
      std::vector<double> edges;
      std::size_t start = 0;
      while (true) {
        const auto comma = value.find(',', start);
        edges.push_back(parse_real(key, trim(value.substr(start, comma - start))));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      try {
        cfg.bands_hz = BandSpec(std::move(edges));
      } catch (const ValueError& e) {
        throw ConfigError(key, e.what());
      }
    } else if (key == "windows") {
      cfg.windows = parse_integer<Index>(key, value);
    } else if (key == "stride") {
      cfg.stride = parse_integer<Index>(key, value);
    } else if (key == "level2_samples") {
      cfg.level2_samples = parse_integer<Index>(key, value);
    } else if (key == "lag0") {
      cfg.lag0 = parse_integer<Index>(key, value);
    } else if (key == "lag1") {
      cfg.lag1 = parse_integer<Index>(key, value);
    } else if (key == "lag2") {
      cfg.lag2 = parse_integer<Index>(key, value);
    } else if (key == "kappa") {
      if (value == "median") {
        cfg.kappa = {KappaPolicy::Kind::median, 0.0};
      } else {
        cfg.kappa = {KappaPolicy::Kind::fixed, parse_real(key, value)};
      }
    } else if (key == "graph_bands") {
      cfg.graph_bands = parse_integer<int>(key, value);
    } else if (key == "sgwt_scales") {
      cfg.sgwt_scales = parse_integer<int>(key, value);
    } else if (key == "z") {
      cfg.z = parse_integer<int>(key, value);
    } else if (key == "tensor_cap") {
      cfg.tensor_cap = parse_integer<std::size_t>(key, value);
    } else if (key == "level0_entry_cap") {
      cfg.level0_entry_cap = parse_integer<std::size_t>(key, value);
    } else if (key == "dense_vertex_cap") {
      cfg.dense_vertex_cap = parse_integer<Index>(key, value);
    } else {
      throw ConfigError(key, "unknown key");
    }
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string to_text(const PipelineConfig& cfg) {
  std::ostringstream out;
  out << "bands_hz = ";
  const auto& edges = cfg.bands_hz.edges_hz();
  for (std::size_t c = 0; c < edges.size(); ++c) out << (c ? "," : "") << format_real(edges[c]);
  out << "\nwindows = " << cfg.windows << "\nstride = " << cfg.stride
      << "\nlevel2_samples = " << cfg.level2_samples << "\nlag0 = " << cfg.lag0
      << "\nlag1 = " << cfg.lag1 << "\nlag2 = " << cfg.lag2 << "\nkappa = "
      << (cfg.kappa.kind == KappaPolicy::Kind::median ? std::string("median")
                                                      : format_real(cfg.kappa.value))
      << "\ngraph_bands = " << cfg.graph_bands << "\nsgwt_scales = " << cfg.sgwt_scales
      << "\nz = " << cfg.z << "\ntensor_cap = " << cfg.tensor_cap
      << "\nlevel0_entry_cap = " << cfg.level0_entry_cap
      << "\ndense_vertex_cap = " << cfg.dense_vertex_cap << '\n';
  return out.str();
}

}  // namespace hgsp
