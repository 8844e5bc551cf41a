// ep3tool: phase diagrams, eigenvalue sweeps, braids, dynamical encircling
// and parameter fits for the three-level exceptional-point model.

#include <CLI11.hpp>

#include <iostream>
#include <map>

#include "commands.hpp"

namespace {

struct Sub {
  CLI::App* app;
  std::string config;
  std::vector<std::string> overrides;
  std::string out_dir;
};

int exit_code(const ep3::Error& e) {
  if (dynamic_cast<const ep3::ValidationError*>(&e)) return 2;
  if (dynamic_cast<const ep3::IoError*>(&e)) return 4;
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-level exceptional-point toolkit"};
  app.require_subcommand(1);

  const std::map<std::string, std::string> help{
      {"phase-diagram", "Spectral phase grid, EP2 arcs and EP3 marker on the delta_ef = 0 plane"},
      {"eigen-sweep", "Eigenvalues along a g sweep (presets red, blue, green)"},
      {"braid", "Eigenvalue braid word, closure invariants and vorticity of a control loop"},
      {"encircle", "Fidelity maps of dynamical rectangular loops"},
      {"fit", "Fit (delta_ef, omega, g) to population time series"},
      {"synth", "Synthesise population observations"}};

  std::map<std::string, Sub> subs;
  std::vector<std::string> equiv;
  for (const auto& [name, text] : help) {
    Sub& s = subs[name];
    s.app = app.add_subcommand(name, text);
    s.app->add_option("-c,--config", s.config, "JSON configuration file");
    s.app->add_option("-s,--set", s.overrides, "Override a configuration key (key=value)")->take_all();
    s.app->add_option("-o,--out-dir", s.out_dir, "Output directory");
  }
  subs["braid"].app->add_option("--equiv", equiv, "Compare two braid words, e.g. --equiv \"s1 s2 s1\" \"s2 s1 s2\"")
      ->expected(2);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  for (auto& [name, s] : subs) {
    if (!s.app->parsed()) continue;
    try {
      ep3::RunConfig cfg = ep3::cli::make_config(name);
      if (!s.config.empty()) cfg.merge_file(s.config);
      for (const auto& o : s.overrides) cfg.set(o);
      if (!s.out_dir.empty()) cfg.set("out_dir=" + s.out_dir);
      if (!equiv.empty()) {
        cfg.set("word_a=" + equiv[0]);
        cfg.set("word_b=" + equiv[1]);
        if (s.config.empty() && s.overrides.empty()) cfg.set("loop=");
      }
      cfg.finalize();

      if (name == "phase-diagram") ep3::cli::run_phase_diagram(cfg, std::cout);
      else if (name == "eigen-sweep") ep3::cli::run_eigen_sweep(cfg, std::cout);
      else if (name == "braid") ep3::cli::run_braid(cfg, std::cout);
      else if (name == "encircle") ep3::cli::run_encircle(cfg, std::cout);
      else if (name == "fit") ep3::cli::run_fit(cfg, std::cout);
      else if (name == "synth") ep3::cli::run_synth(cfg, std::cout);
    } catch (const ep3::Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return exit_code(e);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 3;
    }
  }
  return 0;
}
