/*
 * Copyright 2026 The layerpca Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "layerpca/latent_stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "layerpca/errors.hpp"
#include "layerpca/rng.hpp"
#include "layerpca/tensor.hpp"

namespace layerpca {

namespace {

constexpr std::uint32_t kReplacementStream = 0x5253504cu;  // "RSPL"

struct Binning {
  double lo;
  double hi;
  std::size_t bins;

  std::size_t operator()(double x) const noexcept {
    const double t = (x - lo) / (hi - lo) * double(bins);
    if (!(t > 0.0)) return 0;
    const auto b = static_cast<std::size_t>(t);
    return std::min(b, bins - 1);
  }
};

Binning binning_for(const Eigen::Ref<const Eigen::MatrixXd>& coords, Eigen::Index j,
                    std::size_t bins) {
  if (j < 0 || j >= coords.cols()) {
    throw RangeError("component " + std::to_string(j) + " out of range");
  }
  if (bins < 2) throw RangeError("histogram needs at least 2 bins");
  if (static_cast<std::size_t>(coords.rows()) < bins) {
    throw InsufficientDataError("histogram needs N >= bins");
  }
  const double lo = coords.col(j).minCoeff();
  const double hi = coords.col(j).maxCoeff();
  if (!(hi > lo)) {
    throw RangeError("component " + std::to_string(j) + " is constant; histogram is degenerate");
  }
  return {lo, hi, bins};
}

}  // namespace

std::size_t MarginalHistogram::bin_of(double x) const noexcept {
  return Binning{lo, hi, counts.size()}(x);
}

double MarginalHistogram::mean() const {
  double acc = 0.0;
  const double w = width();
  for (std::size_t b = 0; b < counts.size(); ++b) {
    acc += double(counts[b]) * (lo + (double(b) + 0.5) * w);
  }
  return acc / double(total);
}

MarginalHistogram marginal_histogram(const Eigen::Ref<const Eigen::MatrixXd>& coords,
                                     Eigen::Index component, std::size_t bins) {
  const Binning binning = binning_for(coords, component, bins);
  MarginalHistogram h;
  h.component = component;
  h.lo = binning.lo;
  h.hi = binning.hi;
  h.counts.assign(bins, 0);
  for (Eigen::Index r = 0; r < coords.rows(); ++r) ++h.counts[binning(coords(r, component))];
  h.total = static_cast<std::uint64_t>(coords.rows());
  return h;
}

double plugin_entropy(const std::vector<std::uint64_t>& counts, std::uint64_t total) {
  if (total == 0) return 0.0;
  const double n = double(total);
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = double(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

double entropy(const MarginalHistogram& h) { return plugin_entropy(h.counts, h.total); }

double mutual_information(const Eigen::Ref<const Eigen::MatrixXd>& coords, Eigen::Index j,
                          Eigen::Index k, std::size_t bins) {
  const Eigen::Index a = std::min(j, k);
  const Eigen::Index b = std::max(j, k);
  const Binning ba = binning_for(coords, a, bins);
  const Binning bb = binning_for(coords, b, bins);

  std::vector<std::uint64_t> joint(bins * bins, 0);
  for (Eigen::Index r = 0; r < coords.rows(); ++r) {
    ++joint[ba(coords(r, a)) * bins + bb(coords(r, b))];
  }
  std::vector<std::uint64_t> ma(bins, 0), mb(bins, 0);
  for (std::size_t x = 0; x < bins; ++x) {
    for (std::size_t y = 0; y < bins; ++y) {
      ma[x] += joint[x * bins + y];
      mb[y] += joint[x * bins + y];
    }
  }
  const auto n = static_cast<std::uint64_t>(coords.rows());
  const double mi = plugin_entropy(ma, n) + plugin_entropy(mb, n) - plugin_entropy(joint, n);
  return std::max(0.0, mi);
}

double plugin_mi_bias(std::size_t bins, std::uint64_t n) {
  const double b = double(bins) - 1.0;
  return b * b / (2.0 * double(n) * std::numbers::ln2);
}

IndependenceReport independence_report(const Eigen::Ref<const Eigen::MatrixXd>& coords,
                                       std::vector<Eigen::Index> components, std::size_t bins) {
  if (components.empty()) {
    const Eigen::Index n = std::min<Eigen::Index>(32, coords.cols());
    for (Eigen::Index i = 0; i < n; ++i) components.push_back(i);
  }
  IndependenceReport r;
  r.components = components;
  r.bins = bins;
  r.samples = static_cast<std::uint64_t>(coords.rows());
  r.bias_estimate = plugin_mi_bias(bins, r.samples);
  const auto m = static_cast<Eigen::Index>(components.size());
  r.mutual_information = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index p = 0; p < m; ++p) {
    for (Eigen::Index q = p; q < m; ++q) {
      const double v = mutual_information(coords, components[p], components[q], bins);
      r.mutual_information(p, q) = v;
      r.mutual_information(q, p) = v;
    }
  }
  for (Eigen::Index p = 0; p < m; ++p) r.entropies.push_back(r.mutual_information(p, p));
  if (r.bias_estimate > 0.01) {
    std::ostringstream w;
    w << "plug-in MI bias ~" << r.bias_estimate << " bits at " << bins << "x" << bins
      << " bins and N=" << r.samples << "; small MI values are not resolvable";
    r.warnings.push_back(w.str());
  }
  return r;
}

nlohmann::json report_to_json(const IndependenceReport& r) {
  nlohmann::json mi = nlohmann::json::array();
  for (Eigen::Index p = 0; p < r.mutual_information.rows(); ++p) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index q = 0; q < r.mutual_information.cols(); ++q) {
      row.push_back(r.mutual_information(p, q));
    }
    mi.push_back(std::move(row));
  }
  return {{"components", r.components},
          {"entropies_bits", r.entropies},
          {"mutual_information_bits", std::move(mi)},
          {"bins", r.bins},
          {"N", r.samples},
          {"plugin_bias_bits", r.bias_estimate},
          {"warnings", r.warnings}};
}

std::string report_to_csv(const IndependenceReport& r, const PrincipalBasis& b) {
  const auto spectrum = variance_spectrum(b);
  std::ostringstream out;
  out.precision(17);
  out << "j,entropy_bits,variance,cumulative_variance\n";
  for (std::size_t p = 0; p < r.components.size(); ++p) {
    const auto j = r.components[p];
    out << j << ',' << r.entropies[p] << ',' << b.variances[j] << ','
        << spectrum[static_cast<std::size_t>(j)].second << '\n';
  }
  return out.str();
}

Eigen::VectorXd replacement_sampler(const std::vector<MarginalHistogram>& histograms,
                                    const PrincipalBasis& b, std::uint64_t seed,
                                    std::uint64_t draw_index) {
  const auto retained = static_cast<Eigen::Index>(histograms.size());
  if (retained > b.components()) throw RangeError("more histograms than basis components");
  for (Eigen::Index j = 0; j < retained; ++j) {
    const auto& h = histograms[static_cast<std::size_t>(j)];
    if (h.component != j) {
      throw RangeError("missing histogram for component " + std::to_string(j));
    }
    if (h.total == 0 || h.counts.empty()) {
      throw RangeError("empty histogram for component " + std::to_string(j));
    }
  }
  const CounterRng rng(seed, kReplacementStream);
  Eigen::VectorXd x(retained);
  for (Eigen::Index j = 0; j < retained; ++j) {
    const auto& h = histograms[static_cast<std::size_t>(j)];
    const std::uint64_t base = (draw_index * std::uint64_t(retained) + std::uint64_t(j)) * 2;
    const double target = rng.uniform(base) * double(h.total);
    std::size_t bin = 0;
    double cum = 0.0;
    for (; bin + 1 < h.counts.size(); ++bin) {
      cum += double(h.counts[bin]);
      if (target < cum) break;
    }
    x[j] = h.lo + (double(bin) + rng.uniform(base + 1)) * h.width();
  }
  return reconstruct(b, x, retained);
}

void save_histograms(const std::vector<MarginalHistogram>& hs, const std::filesystem::path& path) {
  if (hs.empty()) throw RangeError("no histograms to save");
  const std::size_t bins = hs.front().bins();
  TensorBlock t({std::uint32_t(hs.size()), std::uint32_t(bins)});
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < hs.size(); ++r) {
    const auto& h = hs[r];
    if (h.bins() != bins) throw DimensionError("histograms must share a bin count");
    for (std::size_t b = 0; b < bins; ++b) {
      if (h.counts[b] > (std::uint64_t{1} << 24)) {
        throw RangeError("bin count exceeds the exact float32 range");
      }
      t.data[r * bins + b] = float(h.counts[b]);
    }
    rows.push_back({{"component", h.component}, {"lo", h.lo}, {"hi", h.hi}, {"total", h.total}});
  }
  save_tensor(t, path);
  auto side = path;
  side.replace_extension(".json");
  std::ofstream out(side);
  if (!out) throw IoError("cannot write histogram sidecar " + side.string());
  out << nlohmann::json{{"bins", bins}, {"histograms", rows}}.dump(2) << '\n';
}

std::vector<MarginalHistogram> load_histograms(const std::filesystem::path& path) {
  const TensorBlock t = load_tensor(path);
  auto side = path;
  side.replace_extension(".json");
  std::ifstream in(side);
  if (!in) throw IoError("missing histogram sidecar " + side.string());
  const auto meta = nlohmann::json::parse(in);
  const auto& rows = meta.at("histograms");
  if (t.dims.size() != 2 || t.dims[0] != rows.size()) {
    throw DimensionError("histogram tensor does not match its sidecar");
  }
  const std::size_t bins = t.dims[1];
  std::vector<MarginalHistogram> out(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto& h = out[r];
    h.component = rows[r].at("component").get<Eigen::Index>();
    h.lo = rows[r].at("lo").get<double>();
    h.hi = rows[r].at("hi").get<double>();
    h.total = rows[r].at("total").get<std::uint64_t>();
    h.counts.resize(bins);
    std::uint64_t sum = 0;
    for (std::size_t b = 0; b < bins; ++b) {
      h.counts[b] = std::uint64_t(t.data[r * bins + b]);
      sum += h.counts[b];
    }
    if (sum != h.total) throw FormatError("total", "histogram counts do not sum to total");
  }
  return out;
}

}  // namespace layerpca
