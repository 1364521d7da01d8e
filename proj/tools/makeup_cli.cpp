#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "makeup/makeup.hpp"
#include "makeup/service.hpp"

namespace fs = std::filesystem;

namespace {

struct transfer_flags {
  std::string config;
  std::string input, input_landmarks, input_labels;
  std::string reference, reference_landmarks, reference_labels;
  double alpha = 0.0, beta = 0.0, soften_sigma = 0.0;
  std::string structure_mode;
  bool airbangs = false, skip_preprocess = false, no_illumination = false;
  std::string dump_layers, out, report;
};

int run_transfer_command(const CLI::App& cmd, const transfer_flags& f) {
  makeup::pipeline_config cfg;
  try {
    if (!f.config.empty()) makeup::load_config_file(f.config, cfg);
  } catch (const makeup::error& e) {
    throw makeup::stage_error("config", e.what());
  }

  // Flags given on the command line override the config file.
  auto given = [&](const char* name) { return cmd.count(name) > 0; };
  if (given("--input")) cfg.input.image = f.input;
  if (given("--input-landmarks")) cfg.input.landmarks = f.input_landmarks;
  if (given("--input-labels")) cfg.input.labels = f.input_labels;
  if (given("--reference")) cfg.reference.image = f.reference;
  if (given("--reference-landmarks")) cfg.reference.landmarks = f.reference_landmarks;
  if (given("--reference-labels")) cfg.reference.labels = f.reference_labels;
  if (given("--alpha")) cfg.options.transfer.alpha = f.alpha;
  if (given("--beta")) cfg.options.transfer.beta = f.beta;
  if (given("--structure-mode")) cfg.options.transfer.structure = makeup::parse_structure_mode(f.structure_mode);
  if (given("--no-illumination")) cfg.options.transfer.illumination_enabled = false;
  if (given("--airbangs")) cfg.options.airbangs = true;
  if (given("--skip-preprocess")) cfg.options.skip_preprocess = true;
  if (given("--soften-sigma")) cfg.options.soften_sigma = f.soften_sigma;
  if (given("--dump-layers")) cfg.dump_dir = fs::path(f.dump_layers);
  if (given("--out")) cfg.output = f.out;

  const auto report = makeup::run_pipeline(cfg);
  for (const auto& s : report.stages) std::fprintf(stderr, "%-12s %9.2f ms\n", s.stage.c_str(), s.milliseconds);
  std::fprintf(stderr, "%-12s %9.2f ms\n", "total", report.total_milliseconds());
  for (const auto& w : report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (!f.report.empty()) {
    const auto text = makeup::report_to_json(report).dump(2);
    makeup::io::write_file(f.report, makeup::io::byte_buffer(text.begin(), text.end()));
  }
  return 0;
}

int run_synth_command(const std::string& kind, int width, int height, bool bangs, const std::string& prefix) {
  makeup::synth::face_params p;
  if (kind == "subject")
    p = makeup::synth::plain_subject();
  else if (kind == "reference")
    p = makeup::synth::made_up_reference();
  else
    throw makeup::config_error("unknown fixture kind '" + kind + "' (expected subject or reference)");
  p.bangs = bangs;
  const auto face = makeup::synth::render(p, width, height);
  makeup::io::save_png(prefix + ".png", face.image);
  const auto lm = makeup::landmarks_to_json(face.landmarks);
  makeup::io::write_file(prefix + ".landmarks", makeup::io::byte_buffer(lm.begin(), lm.end()));
  makeup::io::save_png(prefix + ".labels.png", face.labels.raw());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Makeup transfer from a single reference photograph"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(makeup::version));

  transfer_flags tf;
  auto* transfer = app.add_subcommand("transfer", "Transfer makeup from a reference face onto an input face");
  transfer->add_option("--config", tf.config, "JSON config file; flags override it")->check(CLI::ExistingFile);
  transfer->add_option("--input", tf.input, "Input image (PNG)");
  transfer->add_option("--input-landmarks", tf.input_landmarks, "Input 90-point landmark file");
  transfer->add_option("--input-labels", tf.input_labels, "Input label map (8-bit PNG)");
  transfer->add_option("--reference", tf.reference, "Reference image (PNG)");
  transfer->add_option("--reference-landmarks", tf.reference_landmarks, "Reference landmark file");
  transfer->add_option("--reference-labels", tf.reference_labels, "Reference label map");
  transfer->add_option("--alpha", tf.alpha, "Color blend weight in [0,1] (default 0.95)");
  transfer->add_option("--beta", tf.beta, "Illumination strength > 0 (default 30)");
  transfer->add_option("--structure-mode", tf.structure_mode, "illumination | literal | keep-input")
      ->check(CLI::IsMember({"illumination", "literal", "keep-input"}));
  transfer->add_flag("--no-illumination", tf.no_illumination, "Keep the input structure layer");
  transfer->add_flag("--airbangs", tf.airbangs, "Soft-mask fusion for fringe hair");
  transfer->add_flag("--skip-preprocess", tf.skip_preprocess, "Skip whitening and smoothing");
  transfer->add_option("--soften-sigma", tf.soften_sigma, "Soft-mask Gaussian sigma in pixels (default 6)");
  transfer->add_option("--dump-layers", tf.dump_layers, "Write intermediate images to this directory");
  transfer->add_option("--out", tf.out, "Output image (PNG)");
  transfer->add_option("--report", tf.report, "Write the timing report as JSON");

  std::string bind = "127.0.0.1:8080";
  std::string assets = ".";
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--bind", bind, "host:port to listen on");
  serve->add_option("--assets", assets, "Directory holding references.json and gallery files")
      ->check(CLI::ExistingDirectory);

  std::string kind = "subject", prefix;
  int width = 224, height = 224;
  bool bangs = false;
  auto* synth = app.add_subcommand("synth", "Write a synthetic face fixture: PREFIX.png, PREFIX.landmarks, PREFIX.labels.png");
  synth->add_option("--kind", kind, "subject | reference");
  synth->add_option("--width", width)->check(CLI::Range(16, 4096));
  synth->add_option("--height", height)->check(CLI::Range(16, 4096));
  synth->add_flag("--bangs", bangs, "Add a hair fringe over the forehead");
  synth->add_option("--out-prefix", prefix)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*transfer) return run_transfer_command(*transfer, tf);
    if (*synth) return run_synth_command(kind, width, height, bangs, prefix);
    if (*serve) {
      const auto colon = bind.rfind(':');
      if (colon == std::string::npos) throw makeup::config_error("--bind expects host:port");
      const int port = std::stoi(bind.substr(colon + 1));
      std::fprintf(stderr, "listening on %s\n", bind.c_str());
      makeup::service::serve(bind.substr(0, colon), port, assets);
      return 0;
    }
  } catch (const makeup::stage_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
