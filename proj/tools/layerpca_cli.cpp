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

// Command-line front end: fit, stats, edit, render, serve, toy.

#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>

#include "layerpca/bridge.hpp"
#include "layerpca/edit_set.hpp"
#include "layerpca/errors.hpp"
#include "layerpca/latent_stats.hpp"
#include "layerpca/pipeline.hpp"
#include "layerpca/png.hpp"
#include "layerpca/service.hpp"
#include "layerpca/session.hpp"

// After Eigen: httplib pulls in system headers whose macros clash with it.
#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace layerpca;

namespace {

httplib::Server* g_server = nullptr;

void stop_on_signal(int) {
  if (g_server) g_server->stop();
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot open " + p.string());
  return json::parse(in);
}

void write_text(const fs::path& p, const std::string& s) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out || !out.write(s.data(), std::streamsize(s.size()))) {
    throw IoError("cannot write " + p.string());
  }
}

fs::path sidecar(fs::path p) { return p.replace_extension(".json"); }

// A state file is a [L + 1, d] GSPC tensor with a {"space"} sidecar.
void save_state(const LayeredLatentState& s, const fs::path& p) {
  save_tensor(encode_state(s), p);
  write_text(sidecar(p), json{{"space", std::string(to_string(s.space))}}.dump(2) + "\n");
}

LayeredLatentState load_state(const fs::path& p) {
  const auto meta = read_json(sidecar(p));
  return decode_state(load_tensor(p), latent_space_from_string(meta.at("space").get<std::string>()));
}

// Basis or regressed directions, told apart by the sidecar's "kind".
EditSource load_source(const fs::path& p) {
  const auto meta = read_json(sidecar(p));
  if (meta.value("kind", std::string("basis")) == "directions") return load_directions(p);
  return load_basis(p);
}

void write_render(const TensorBlock& t, const fs::path& out) {
  if (out.extension() == ".png") {
    write_text(out, encode_png(t));
  } else {
    save_tensor(t, out);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layer-wise principal component analysis and editing for layered generators"};
  app.require_subcommand(1);

  // toy -----------------------------------------------------------------
  auto* toy = app.add_subcommand("toy", "Describe or serve the toy generator");
  std::string toy_family = "style";
  std::uint64_t toy_seed = 0;
  bool toy_linear = false;
  int toy_port = -1;
  std::string toy_host = "127.0.0.1";
  toy->add_option("--family", toy_family, "style or skip")->check(CLI::IsMember({"style", "skip"}));
  toy->add_option("--seed", toy_seed, "weight seed");
  toy->add_flag("--linear", toy_linear, "identity activations (affine generator)");
  toy->add_option("--port", toy_port, "serve the bridge protocol on this port (0 = any)");
  toy->add_option("--host", toy_host, "bind address");

  // fit -----------------------------------------------------------------
  auto* fit = app.add_subcommand("fit", "Fit a principal basis through a bridge");
  std::string fit_endpoint = "toy:style";
  std::string fit_space = "style-w";
  FitOptions fit_opts;
  std::string fit_out, fit_resume;
  std::int64_t fit_k = 0;
  fit->add_option("--endpoint", fit_endpoint, "toy:<family>?seed=..&linear=1 or http://host:port");
  fit->add_option("--space", fit_space, "style-w or feature@<layer>[:pre|post]");
  fit->add_option("-N,--samples", fit_opts.samples, "PCA samples");
  fit->add_option("-K,--components", fit_k, "components (0 = default)");
  fit->add_option("--seed", fit_opts.seed, "sampling seed");
  fit->add_option("--batch-size", fit_opts.batch_size, "streaming batch size");
  fit->add_option("--regression-samples", fit_opts.regression_samples,
                  "latents for direction regression (0 = same as -N)");
  fit->add_option("--out", fit_out, "output directory")->required();
  fit->add_option("--resume", fit_resume, "checkpoint written by an interrupted fit");

  // stats ---------------------------------------------------------------
  auto* stats = app.add_subcommand("stats", "Entropy and mutual information of coordinates");
  std::string stats_basis, stats_coords, stats_endpoint, stats_space = "style-w";
  std::string stats_out, stats_csv, stats_hist;
  std::size_t stats_bins = 100;
  std::size_t stats_mi = 32;
  std::uint64_t stats_n = 100000, stats_seed = 1;
  stats->add_option("--basis", stats_basis, "basis .gspc")->required();
  stats->add_option("--coords", stats_coords, "precomputed [N, K] coordinates .gspc");
  stats->add_option("--endpoint", stats_endpoint, "sample through this bridge instead");
  stats->add_option("--space", stats_space, "space the basis was fitted in");
  stats->add_option("-N,--samples", stats_n, "samples drawn from --endpoint");
  stats->add_option("--seed", stats_seed, "sampling seed for --endpoint");
  stats->add_option("--bins", stats_bins, "bins per axis");
  stats->add_option("--mi-components", stats_mi, "leading components in the MI matrix");
  stats->add_option("--out", stats_out, "report JSON (default stdout)");
  stats->add_option("--csv", stats_csv, "per-component CSV");
  stats->add_option("--histograms", stats_hist, "write marginal histograms (.gspc + .json)");

  // state ---------------------------------------------------------------
  auto* state = app.add_subcommand("state", "Write the unedited state for a seed");
  std::string state_endpoint = "toy:style", state_out;
  std::uint64_t state_seed = 0;
  state->add_option("--endpoint", state_endpoint, "bridge endpoint");
  state->add_option("--seed", state_seed, "anchor seed");
  state->add_option("--out", state_out, "state .gspc")->required();

  // edit ----------------------------------------------------------------
  auto* edit = app.add_subcommand("edit", "Apply edit specs to a state");
  std::string edit_state, edit_spec, edit_basis, edit_out;
  edit->add_option("--state", edit_state, "input state .gspc")->required();
  edit->add_option("--spec", edit_spec, "edit JSON: one spec or an array")->required();
  edit->add_option("--basis", edit_basis, "basis or directions .gspc")->required();
  edit->add_option("--out", edit_out, "output state .gspc")->required();

  // render --------------------------------------------------------------
  auto* render = app.add_subcommand("render", "Synthesize a state through a bridge");
  std::string render_endpoint = "toy:style", render_state, render_out;
  std::optional<std::size_t> render_capture;
  std::string render_tap = "post";
  render->add_option("--endpoint", render_endpoint, "bridge endpoint");
  render->add_option("--state", render_state, "state .gspc")->required();
  render->add_option("--out", render_out, ".png or .gspc")->required();
  render->add_option("--capture", render_capture, "emit this layer's features instead");
  render->add_option("--tap", render_tap, "pre or post")->check(CLI::IsMember({"pre", "post"}));

  // serve ---------------------------------------------------------------
  auto* serve = app.add_subcommand("serve", "Run the session service");
  int serve_port = 8080;
  std::string serve_host = "127.0.0.1", serve_bridge = "toy:style", serve_basis, serve_editsets;
  serve->add_option("--port", serve_port, "listen port");
  serve->add_option("--host", serve_host, "bind address");
  serve->add_option("--bridge", serve_bridge, "bridge endpoint");
  serve->add_option("--basis,--directions", serve_basis, "basis or directions .gspc")->required();
  serve->add_option("--editsets", serve_editsets, "edit-set directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*toy) {
      auto d = GeneratorDescriptor::toy(latent_space_from_string(toy_family), toy_seed, toy_linear);
      if (toy_port < 0) {
        std::cout << descriptor_wire_json(d).dump(2) << '\n';
        return 0;
      }
      ToyBridge bridge(d);
      httplib::Server server;
      mount_bridge_routes(server, bridge);
      g_server = &server;
      std::signal(SIGINT, stop_on_signal);
      std::signal(SIGTERM, stop_on_signal);
      const int port = toy_port == 0 ? server.bind_to_any_port(toy_host)
                                     : (server.bind_to_port(toy_host, toy_port) ? toy_port : -1);
      if (port < 0) throw IoError("cannot bind " + toy_host + ":" + std::to_string(toy_port));
      std::cout << "bridge listening on http://" << toy_host << ':' << port << std::endl;
      server.listen_after_bind();
      return 0;
    }

    if (*fit) {
      auto bridge = open_bridge(fit_endpoint);
      fit_opts.space = FitSpace::parse(fit_space);
      fit_opts.components = fit_k;
      fit_opts.out_dir = fit_out;
      if (!fit_resume.empty()) fit_opts.resume_from = fit_resume;
      try {
        const auto r = pipeline_fit(*bridge, fit_opts);
        json summary = {{"K", r.basis.components()},
                        {"dim", r.basis.dim()},
                        {"N", r.basis.sample_count}};
        json paths = json::array();
        for (const auto& a : r.artifacts) paths.push_back(a.string());
        summary["artifacts"] = paths;
        std::cout << summary.dump(2) << '\n';
      } catch (const PartialFitError& e) {
        std::cerr << "error: " << e.what() << "\nresume with --resume " << e.checkpoint().string()
                  << " (" << e.samples_done() << " samples merged)\n";
        return 3;
      }
      return 0;
    }

    if (*stats) {
      const auto basis = load_basis(stats_basis);
      Eigen::MatrixXd coords;
      if (!stats_coords.empty()) {
        coords = to_matrix(load_tensor(stats_coords));
      } else if (!stats_endpoint.empty()) {
        auto bridge = open_bridge(stats_endpoint);
        const auto space = FitSpace::parse(stats_space);
        const Eigen::MatrixXd z = bridge->sample(stats_n, stats_seed, 0);
        coords = project_rows(basis, space.style_w ? bridge->map(z)
                                                   : bridge->features(z, space.layer, space.tap));
      } else {
        throw RangeError("stats needs --coords or --endpoint");
      }
      std::vector<Eigen::Index> comps;
      for (Eigen::Index j = 0; j < std::min<Eigen::Index>(Eigen::Index(stats_mi), coords.cols()); ++j) {
        comps.push_back(j);
      }
      const auto report = independence_report(coords, comps, stats_bins);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
      const auto text = report_to_json(report).dump(2) + "\n";
      if (stats_out.empty()) {
        std::cout << text;
      } else {
        write_text(stats_out, text);
      }
      if (!stats_csv.empty()) write_text(stats_csv, report_to_csv(report, basis));
      if (!stats_hist.empty()) {
        std::vector<MarginalHistogram> hs;
        for (Eigen::Index j = 0; j < coords.cols(); ++j) {
          hs.push_back(marginal_histogram(coords, j, stats_bins));
        }
        save_histograms(hs, stats_hist);
      }
      return 0;
    }

    if (*state) {
      auto bridge = open_bridge(state_endpoint);
      const Eigen::VectorXd z = bridge->sample(1, state_seed, 0).row(0).transpose();
      save_state(bridge->initial_state(z), state_out);
      return 0;
    }

    if (*edit) {
      auto s = load_state(edit_state);
      const auto source = load_source(edit_basis);
      const auto doc = read_json(edit_spec);
      if (doc.is_array()) {
        for (std::size_t i = 0; i < doc.size(); ++i) {
          s = apply_spec(s, edit_spec_from_json(doc[i], "/" + std::to_string(i)), source);
        }
      } else {
        s = apply_spec(s, edit_spec_from_json(doc), source);
      }
      save_state(s, edit_out);
      return 0;
    }

    if (*render) {
      auto bridge = open_bridge(render_endpoint);
      const auto s = load_state(render_state);
      const auto t = render_capture
                         ? bridge->capture(s, *render_capture, render_tap == "pre" ? Tap::pre : Tap::post)
                         : bridge->synthesize(s);
      if (render_capture && fs::path(render_out).extension() == ".png") {
        throw RangeError("feature captures are written as .gspc only");
      }
      write_render(t, render_out);
      return 0;
    }

    if (*serve) {
      std::shared_ptr<GeneratorBridge> bridge = open_bridge(serve_bridge);
      auto source = std::make_shared<const EditSource>(load_source(serve_basis));
      SessionManager sessions(bridge, source, serve_basis);
      ServiceConfig cfg;
      if (!serve_editsets.empty()) cfg.editset_dir = serve_editsets;
      httplib::Server server;
      mount_service_routes(server, sessions, cfg);
      g_server = &server;
      std::signal(SIGINT, stop_on_signal);
      std::signal(SIGTERM, stop_on_signal);
      if (!server.bind_to_port(serve_host, serve_port)) {
        throw IoError("cannot bind " + serve_host + ":" + std::to_string(serve_port));
      }
      std::cout << "service listening on http://" << serve_host << ':' << serve_port << std::endl;
      server.listen_after_bind();
      return 0;
    }
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
