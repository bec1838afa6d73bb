#include "hgsp/pipeline.hpp"

#include <cmath>

#include "hgsp/errors.hpp"
#include "hgsp/graph_learning.hpp"

namespace hgsp {

namespace {

constexpr std::size_t kTopo = TopologyEmbedding::kCount;

std::string band_tag(std::size_t c) { return "b" + std::to_string(c + 1); }

void append_topology(FeatureVector& fv, const std::string& prefix, const TopologyEmbedding& t) {
  const auto& names = TopologyEmbedding::names();
  const auto values = t.values();
  for (std::size_t m = 0; m < kTopo; ++m) {
    fv.names.push_back(prefix + std::string(names[m]));
    fv.values.push_back(values[m]);
  }
}

void append_gsp_names(std::vector<std::string>& names, const std::string& prefix,
                      const PipelineConfig& cfg) {
  for (int m = 0; m < cfg.graph_bands; ++m) names.push_back(prefix + "energy" + std::to_string(m + 1));
  names.push_back(prefix + "lambda_min");
  names.push_back(prefix + "lambda_max");
  names.push_back(prefix + "lambda_mean");
  for (int j = 0; j < cfg.sgwt_scales; ++j) {
    const std::string scale = prefix + "sgwt.t" + std::to_string(j + 1) + ".";
    for (int q = 0; q < cfg.z; ++q) names.push_back(scale + "low" + std::to_string(q + 1));
    for (int q = 0; q < cfg.z; ++q) names.push_back(scale + "high" + std::to_string(q + 1));
  }
  names.push_back(prefix + "quadratic_form");
}

template <bool Parallel>
BatchResult batch(std::span<const Signal> samples, const PipelineConfig& cfg) {
  BatchResult result;
  result.rows.resize(samples.size());
  if (samples.empty()) return result;

  const auto& first = samples.front();
  for (std::size_t s = 1; s < samples.size(); ++s) {
    if (samples[s].channels() != first.channels() || samples[s].samples() != first.samples() ||
        samples[s].sample_rate_hz() != first.sample_rate_hz()) {
      throw ValueError("extract_batch: sample " + std::to_string(s) +
                       " differs in shape or sample rate from sample 0");
    }
  }

  std::vector<std::string> messages(samples.size());
  const auto n = static_cast<std::ptrdiff_t>(samples.size());
#pragma omp parallel for schedule(dynamic) if (Parallel)
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    try {
      result.rows[s] = extract_features(samples[s], cfg).values;
    } catch (const std::exception& e) {
      messages[s] = e.what();
    }
  }

  for (std::size_t s = 0; s < samples.size(); ++s) {
    if (!result.rows[s]) result.errors.push_back({s, messages[s]});
  }
  if (result.errors.size() == samples.size()) {
    throw Error("extract_batch: all " + std::to_string(samples.size()) +
                " samples failed; first error: " + result.errors.front().message);
  }
  const auto bands = cfg.bands_hz.clamped_to_nyquist(first.sample_rate_hz()).band_count();
  result.names = feature_names(bands, cfg);
  return result;
}

}  // namespace

std::size_t expected_feature_count(std::size_t bands, const PipelineConfig& cfg) {
  const auto K = static_cast<std::size_t>(cfg.windows);
  const auto M = static_cast<std::size_t>(cfg.graph_bands);
  const auto J = static_cast<std::size_t>(cfg.sgwt_scales);
  const auto z = static_cast<std::size_t>(cfg.z);
  return kTopo * (1 + bands * (K + 1)) + bands * (kTopo + M + 3 + 2 * J * z + 1);
}

std::vector<std::string> feature_names(std::size_t bands, const PipelineConfig& cfg) {
  std::vector<std::string> names;
  const auto& topo = TopologyEmbedding::names();
  auto add_topology = [&](const std::string& prefix) {
    for (auto m : topo) names.push_back(prefix + std::string(m));
  };
  add_topology("L0.raw.full.");
  for (std::size_t c = 0; c < bands; ++c) {
    add_topology("L1." + band_tag(c) + ".full.");
    for (Index k = 0; k < cfg.windows; ++k) {
      add_topology("L1." + band_tag(c) + ".w" + std::to_string(k + 1) + ".");
    }
  }
  for (std::size_t c = 0; c < bands; ++c) {
    const std::string prefix = "L2." + band_tag(c) + ".full.";
    add_topology(prefix);
    append_gsp_names(names, prefix, cfg);
  }
  return names;
}

double choose_kappa(const Autocovariance& R, const KappaPolicy& policy) {
  return policy.kind == KappaPolicy::Kind::median ? median_kappa(R) : policy.value;
}

TopologyEmbedding topology_of(const Signal& x, Index lag, const PipelineConfig& cfg) {
  const auto R = collapse_autocovariance(learn_weights(x, lag, cfg.tensor_cap));
  return topology_embedding(threshold_graph(R, choose_kappa(R, cfg.kappa)));
}

Vector flatten_graph_signal(const Signal& x) {
  const Index S = x.channels();
  Vector v(x.data().size());
  for (Index k = 0; k < x.samples(); ++k) {
    for (Index i = 0; i < S; ++i) v(k * S + i) = x.data()(i, k);
  }
  return v;
}

FeatureVector extract_features(const Signal& x, const PipelineConfig& cfg) {
  cfg.validate_for(x.channels(), x.samples(), x.sample_rate_hz());
  FeatureVector fv;

  // Level 0: topology of the raw signal, then the filter bank.
  append_topology(fv, "L0.raw.full.", topology_of(x, cfg.lag0, cfg));
  const auto banded = filter_bank(x, cfg.bands_hz);
  const std::size_t C = banded.size();
  fv.names.reserve(expected_feature_count(C, cfg));
  fv.values.reserve(expected_feature_count(C, cfg));

  // Level 1: each band in full and per window.
  const Index stride = cfg.effective_stride(x.samples());
  for (std::size_t c = 0; c < C; ++c) {
    const std::string tag = "L1." + band_tag(c) + ".";
    append_topology(fv, tag + "full.", topology_of(banded[c], cfg.lag1, cfg));
    const auto windows = partition(banded[c], cfg.windows, stride);
    for (std::size_t k = 0; k < windows.size(); ++k) {
      append_topology(fv, tag + "w" + std::to_string(k + 1) + ".",
                      topology_of(windows[k], cfg.lag1, cfg));
    }
  }

  // Level 2: coarse spatiotemporal graph per band.
  for (std::size_t c = 0; c < C; ++c) {
    const std::string prefix = "L2." + band_tag(c) + ".full.";
    const Signal coarse = downsample(banded[c], cfg.level2_samples);
    const auto tau = learn_weights(coarse, cfg.lag2, cfg.tensor_cap);
    const auto R = collapse_autocovariance(tau);
    append_topology(fv, prefix, topology_embedding(threshold_graph(R, choose_kappa(R, cfg.kappa))));

    const Matrix W = dense_adjacency(tau, cfg.dense_vertex_cap);
    const auto gsp = gsp_embedding(W, flatten_graph_signal(coarse), cfg.graph_bands,
                                   cfg.sgwt_scales, cfg.z);
    fv.values.insert(fv.values.end(), gsp.band_energies.begin(), gsp.band_energies.end());
    fv.values.push_back(gsp.eigen.min);
    fv.values.push_back(gsp.eigen.max);
    fv.values.push_back(gsp.eigen.mean);
    fv.values.insert(fv.values.end(), gsp.wavelet_coeffs.begin(), gsp.wavelet_coeffs.end());
    fv.values.push_back(gsp.quadratic_form);
    append_gsp_names(fv.names, prefix, cfg);
  }

  for (std::size_t n = 0; n < fv.values.size(); ++n) {
    if (!std::isfinite(fv.values[n])) throw Error("extract_features: non-finite " + fv.names[n]);
  }
  return fv;
}

BatchResult extract_batch(std::span<const Signal> samples, const PipelineConfig& cfg) {
  return batch<true>(samples, cfg);
}

BatchResult extract_batch_serial(std::span<const Signal> samples, const PipelineConfig& cfg) {
  return batch<false>(samples, cfg);
}

}  // namespace hgsp
