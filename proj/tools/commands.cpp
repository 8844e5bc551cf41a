#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "ep3/atlas.hpp"
#include "ep3/dynamics.hpp"
#include "ep3/fit.hpp"
#include "ep3/strands.hpp"

namespace ep3::cli {

using nlohmann::ordered_json;

namespace {

const char* const kLabelColors[3] = {"#1f77b4", "#d62728", "#2ca02c"};

std::filesystem::path output(const RunConfig& cfg, const std::string& suffix) {
  const std::filesystem::path dir = cfg.string("out_dir").empty() ? "." : cfg.string("out_dir");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory", dir.string());
  return dir / (cfg.string("prefix") + suffix);
}

int positive_int(const RunConfig& cfg, const std::string& key, long long min = 1) {
  const long long v = cfg.integer(key);
  if (v < min || v > 100000000) throw ValidationError("'" + key + "' must be at least " + std::to_string(min));
  return static_cast<int>(v);
}

double positive(const RunConfig& cfg, const std::string& key) {
  const double v = cfg.number(key);
  if (!(v > 0)) throw ValidationError("'" + key + "' must be positive");
  return v;
}

StateVector parse_state(const std::string& name) {
  if (name == "e") return basis_state(0);
  if (name == "f") return basis_state(1);
  if (name == "g1") return basis_state(2);
  if (name == "ef") return (basis_state(0) + basis_state(1)) / std::sqrt(2.0);
  throw ValidationError("initial state must be one of e, f, g1, ef; got '" + name + "'");
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return v;
}

std::string phase_color(SpectralPhase p) {
  switch (p) {
    case SpectralPhase::AllImaginary: return "#9ecae1";
    case SpectralPhase::ComplexPair: return "#fdd0a2";
    case SpectralPhase::Exceptional: return "#000000";
  }
  return "#888888";
}

void write_json(const std::filesystem::path& path, const ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

ControlLoop loop_from_config(const RunConfig& cfg, double kappa) {
  const std::string name = cfg.string("loop");
  if (name != "polygon") return canonical_loop(name, kappa);
  if (!cfg.has("polygon")) throw ValidationError("loop 'polygon' needs a 'polygon' vertex list");
  const auto v = cfg.numbers("polygon");
  if (v.size() % 3 != 0 || v.size() < 9)
    throw ValidationError("'polygon' must list at least three (delta_ef, omega, g) vertices");
  const ControlPoint base = control_point(v[0], v[1], v[2]);
  ControlLoop::Builder b(base, kappa);
  for (std::size_t i = 3; i < v.size(); i += 3) b.line_to(control_point(v[i], v[i + 1], v[i + 2]));
  b.line_to(base);
  return b.close("polygon");
}

// Sweep samples whose pairwise gap has a sharp local minimum are refined by
// golden-section search; points where the gap closes are coalescences.
std::vector<double> coalescence_points(const std::vector<double>& g, const std::vector<double>& gap,
                                       const std::function<double(double)>& gap_at, double tol) {
  std::vector<double> out;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const bool left = k == 0 || gap[k] <= gap[k - 1];
    const bool right = k + 1 == g.size() || gap[k] < gap[k + 1];
    if (!left || !right) continue;
    double a = g[k == 0 ? 0 : k - 1], b = g[k + 1 == g.size() ? k : k + 1];
    const double r = (std::sqrt(5.0) - 1) / 2;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = gap_at(c), fd = gap_at(d);
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
      if (fc < fd) {
        b = d, d = c, fd = fc, c = b - r * (b - a), fc = gap_at(c);
      } else {
        a = c, c = d, fc = fd, d = a + r * (b - a), fd = gap_at(d);
      }
    }
    const double x = 0.5 * (a + b);
    if (gap_at(x) < tol) out.push_back(x);
  }
  return out;
}

}  // namespace

RunConfig make_config(const std::string& command) {
  if (command == "phase-diagram")
    return RunConfig(command,
                     {{"units", "angular"},
                      {"kappa", 1.0},
                      {"n_omega", 200},
                      {"n_g", 200},
                      {"omega_lo", 0.0},
                      {"omega_hi", 0.2},
                      {"g_lo", 0.0},
                      {"g_hi", 0.4},
                      {"arc_points", 64},
                      {"out_dir", "."},
                      {"prefix", "phase"}},
                     {"kappa", "omega_lo", "omega_hi", "g_lo", "g_hi"});
  if (command == "eigen-sweep")
    return RunConfig(command,
                     {{"units", "angular"},
                      {"preset", "blue"},
                      {"kappa", 1.0},
                      {"delta_ef", 0.0},
                      {"omega", nullptr},
                      {"g_lo", nullptr},
                      {"g_hi", nullptr},
                      {"n_samples", 2001},
                      {"out_dir", "."},
                      {"prefix", "sweep"}},
                     {"kappa", "delta_ef", "omega", "g_lo", "g_hi"});
  if (command == "braid")
    return RunConfig(command,
                     {{"units", "angular"},
                      {"loop", "red"},
                      {"kappa", 1.0},
                      {"polygon", nullptr},
                      {"n_samples", 800},
                      {"projection_angle", kDefaultProjectionAngle},
                      {"word_a", ""},
                      {"word_b", ""},
                      {"svg", true},
                      {"out_dir", "."},
                      {"prefix", "braid"}},
                     {"kappa", "polygon"});
  if (command == "encircle")
    return RunConfig(command,
                     {{"units", "angular"},
                      {"kappa", 5.0},
                      {"g", 0.845},
                      {"omega_m", 5.0},
                      {"a", 5.0},
                      {"t_min", 0.05},
                      {"t_max", 3.0},
                      {"n_t", 40},
                      {"omega0_min", -4.9},
                      {"omega0_max", 4.9},
                      {"n_omega0", 40},
                      {"directions", "both"},
                      {"steps_per_period", 8192},
                      {"trajectory_omega0", nullptr},
                      {"trajectory_period", nullptr},
                      {"trajectory_direction", "CW"},
                      {"out_dir", "."},
                      {"prefix", "encircle"}},
                     {"kappa", "g", "omega_m", "a", "omega0_min", "omega0_max", "trajectory_omega0"});
  if (command == "fit")
    return RunConfig(command,
                     {{"units", "angular"},
                      {"data", ""},
                      {"kappa", 5.0},
                      {"guess", {0.6, 1.0, 0.9}},
                      {"psi0", "ef"},
                      {"max_iterations", 200},
                      {"out_dir", "."},
                      {"prefix", "fit"}},
                     {"kappa", "guess"});
  if (command == "synth")
    return RunConfig(command,
                     {{"units", "angular"},
                      {"truth", {0.5, 1.2, 0.8}},
                      {"kappa", 5.0},
                      {"psi0", "ef"},
                      {"t_max", 1.0},
                      {"n_times", 200},
                      {"noise_sd", 0.0},
                      {"seed", 1},
                      {"out_dir", "."},
                      {"prefix", "observations"}},
                     {"truth", "kappa"});
  throw ValidationError("unknown command '" + command + "'");
}

void run_phase_diagram(const RunConfig& cfg, std::ostream& log) {
  const double kappa = positive(cfg, "kappa");
  const int n_omega = positive_int(cfg, "n_omega"), n_g = positive_int(cfg, "n_g");
  const GridBounds bounds{cfg.number("omega_lo"), cfg.number("omega_hi"), cfg.number("g_lo"), cfg.number("g_hi")};
  const PhaseDiagram pd = phase_diagram(bounds, n_omega, n_g, kappa, positive_int(cfg, "arc_points", 8));
  const Units units = cfg.units();

  const auto grid_path = output(cfg, "_grid.csv");
  {
    CsvWriter w(grid_path, "phase-grid", units, {"omega", "g", "phase", "discriminant"});
    for (int j = 0; j < n_g; ++j)
      for (int i = 0; i < n_omega; ++i) {
        w.cell(pd.omega_at(i)).cell(pd.g_at(j)).cell(std::string(to_string(pd.at(i, j))));
        w.cell(mu_cubic(pd.omega_at(i), pd.g_at(j), kappa).discriminant);
        w.end_row();
      }
    w.close();
  }
  const auto arc_path = output(cfg, "_arcs.csv");
  {
    CsvWriter w(arc_path, "ep2-arcs", units, {"branch", "omega", "g"});
    for (const auto& [name, branch] : {std::pair{"lower", &pd.arcs.lower}, std::pair{"upper", &pd.arcs.upper}})
      for (const auto& p : *branch) w.cell(std::string(name)).cell(p.omega).cell(p.g), w.end_row();
    w.close();
  }

  SvgPlot svg(bounds.omega_lo, bounds.omega_hi, bounds.g_lo, bounds.g_hi, 640, 520);
  svg.title("Spectral phase on delta_ef = 0 (kappa = " + format_number(kappa) + ")");
  svg.axis_labels("omega", "g");
  const double dx = n_omega > 1 ? (bounds.omega_hi - bounds.omega_lo) / (n_omega - 1) : 1;
  const double dy = n_g > 1 ? (bounds.g_hi - bounds.g_lo) / (n_g - 1) : 1;
  for (int j = 0; j < n_g; ++j)
    for (int i = 0; i < n_omega; ++i) {
      const double x = pd.omega_at(i), y = pd.g_at(j);
      svg.cell(std::max(x - dx / 2, bounds.omega_lo), std::min(x + dx / 2, bounds.omega_hi),
               std::max(y - dy / 2, bounds.g_lo), std::min(y + dy / 2, bounds.g_hi), phase_color(pd.at(i, j)));
    }
  for (const auto* branch : {&pd.arcs.lower, &pd.arcs.upper}) {
    std::vector<double> x, y;
    for (const auto& p : *branch) {
      if (p.omega < bounds.omega_lo || p.omega > bounds.omega_hi || p.g < bounds.g_lo || p.g > bounds.g_hi) continue;
      x.push_back(p.omega);
      y.push_back(p.g);
    }
    svg.polyline(x, y, "#7f0000", 2, "ep2-arc");
  }
  svg.marker(pd.ep3.omega_star, pd.ep3.g_star, "#ffd700", "ep3-marker", 6);
  svg.legend({{"AllImaginary", phase_color(SpectralPhase::AllImaginary)},
              {"ComplexPair", phase_color(SpectralPhase::ComplexPair)},
              {"EP2 arcs", "#7f0000"},
              {"EP3", "#ffd700"}});
  const auto svg_path = output(cfg, ".svg");
  svg.save(svg_path);

  log << "EP3 at omega = " << format_number(pd.ep3.omega_star) << ", g = " << format_number(pd.ep3.g_star) << '\n';
  log << "wrote " << grid_path.string() << ", " << arc_path.string() << ", " << svg_path.string() << '\n';
}

void run_eigen_sweep(const RunConfig& cfg, std::ostream& log) {
  const double kappa = positive(cfg, "kappa");
  const std::string preset = cfg.string("preset");
  const double omega_star = ep3_location(kappa).omega_star;
  double omega;
  if (preset == "red") omega = 0.05 * kappa;
  else if (preset == "blue") omega = omega_star;
  else if (preset == "green") omega = 0.2 * kappa;
  else if (preset == "custom") {
    if (!cfg.has("omega")) throw ValidationError("preset 'custom' needs 'omega'");
    omega = cfg.number("omega");
  } else {
    throw ValidationError("preset must be red, blue, green or custom; got '" + preset + "'");
  }
  if (preset != "custom" && cfg.has("omega")) throw ValidationError("'omega' is fixed by preset '" + preset + "'");
  const double g_lo = cfg.has("g_lo") ? cfg.number("g_lo") : 0.0;
  const double g_hi = cfg.has("g_hi") ? cfg.number("g_hi") : kappa / 2;
  if (!(g_hi > g_lo)) throw ValidationError("sweep needs g_hi > g_lo");
  const int n = positive_int(cfg, "n_samples", 3);
  const double delta = cfg.number("delta_ef");

  const auto params_at = [&](double g) { return Params{delta, omega, g, kappa}; };
  const auto gs = linspace(g_lo, g_hi, n);
  std::vector<Spectrum<double>> spectra;
  std::vector<double> gaps;
  for (double g : gs) {
    spectra.push_back(eigenvalues_cardano(params_at(g)));
    gaps.push_back(spectra.back().min_gap());
  }

  const auto csv_path = output(cfg, "_" + preset + ".csv");
  {
    CsvWriter w(csv_path, "eigen-sweep", cfg.units(), {"g", "re1", "im1", "re2", "im2", "re3", "im3", "min_gap"});
    for (std::size_t k = 0; k < gs.size(); ++k) {
      w.cell(gs[k]);
      for (const auto& l : spectra[k].lambdas) w.cell(l.real()).cell(l.imag());
      w.cell(gaps[k]);
      w.end_row();
    }
    w.close();
  }

  const auto gap_at = [&](double g) { return eigenvalues_cardano(params_at(g)).min_gap(); };
  const auto points = coalescence_points(gs, gaps, gap_at, 1e-3 * kappa);
  const double min_gap = *std::min_element(gaps.begin(), gaps.end());

  for (int part = 0; part < 2; ++part) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& s : spectra)
      for (const auto& l : s.lambdas) {
        const double v = part == 0 ? l.real() : l.imag();
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    const double pad = std::max(1e-3 * kappa, 0.05 * (hi - lo));
    SvgPlot svg(g_lo, g_hi, lo - pad, hi + pad);
    svg.title(std::string(part == 0 ? "Re" : "Im") + " lambda along the " + preset + " routine (omega = " +
              format_number(omega) + ")");
    svg.axis_labels("g", part == 0 ? "Re lambda" : "Im lambda");
    for (int j = 0; j < 3; ++j) {
      std::vector<double> y;
      for (const auto& s : spectra) y.push_back(part == 0 ? s.lambdas[j].real() : s.lambdas[j].imag());
      svg.polyline(gs, y, kLabelColors[j], 1.5, "eigenvalue");
    }
    for (double g : points) svg.marker(g, part == 0 ? 0.0 : eigenvalues_cardano(params_at(g))[1].imag(), "#000", "coalescence", 3);
    svg.legend({{"lambda1", kLabelColors[0]}, {"lambda2", kLabelColors[1]}, {"lambda3", kLabelColors[2]}});
    svg.save(output(cfg, "_" + preset + (part == 0 ? "_re.svg" : "_im.svg")));
  }

  ordered_json summary;
  summary["preset"] = preset;
  summary["units"] = to_string(cfg.units());
  summary["kappa"] = kappa;
  summary["omega"] = omega;
  summary["delta_ef"] = delta;
  summary["coalescence_g"] = points;
  summary["min_gap"] = min_gap;
  write_json(output(cfg, "_" + preset + "_summary.json"), summary);

  log << "preset " << preset << ": omega = " << format_number(omega) << ", min gap = " << format_number(min_gap)
      << ", coalescences at g =";
  for (double g : points) log << ' ' << format_number(g);
  if (points.empty()) log << " (none)";
  log << "\nwrote " << csv_path.string() << '\n';
}

void run_braid(const RunConfig& cfg, std::ostream& log) {
  const std::string wa = cfg.string("word_a"), wb = cfg.string("word_b");
  if (wa.empty() != wb.empty()) throw ValidationError("an equivalence query needs both word_a and word_b");
  if (!wa.empty()) {
    const BraidWord a = BraidWord::parse(wa), b = BraidWord::parse(wb);
    const bool eq = words_equivalent(a, b);
    std::ostringstream os;
    os << "word_a " << a.str() << "\nword_b " << b.str() << "\nnormal_form_a " << normal_form(a).str()
       << "\nnormal_form_b " << normal_form(b).str() << '\n'
       << (eq ? "equivalent" : "not equivalent") << '\n';
    write_text(output(cfg, "_equivalence.txt"), os.str());
    log << (eq ? "equivalent" : "not equivalent") << '\n';
  }
  if (cfg.string("loop").empty()) return;

  const double kappa = positive(cfg, "kappa");
  const ControlLoop loop = loop_from_config(cfg, kappa);
  const int n = positive_int(cfg, "n_samples", 16);
  StrandOptions opt;
  opt.projection_angle = cfg.number("projection_angle");
  const StrandSet strands = sample_strands(loop, n, opt);
  const auto crossings = find_crossings(strands);
  const BraidWord word = extract_braid_word(strands);
  const ClosureInvariants inv = closure_invariants(word);
  const VorticityReport vort = vorticity(loop, n);
  const std::string name = loop.name();

  const auto strand_path = output(cfg, "_" + name + "_strands.csv");
  {
    CsvWriter w(strand_path, "strands", cfg.units(), {"s", "re1", "im1", "re2", "im2", "re3", "im3"});
    for (std::size_t k = 0; k < strands.size(); ++k) {
      w.cell(strands.s[k]);
      for (const auto& l : strands.values[k]) w.cell(l.real()).cell(l.imag());
      w.end_row();
    }
    w.close();
  }
  {
    CsvWriter w(output(cfg, "_" + name + "_crossings.csv"), "crossings", cfg.units(), {"s", "letter"});
    for (const auto& c : crossings) w.cell(c.s).cell(BraidWord{c.letter}.str()), w.end_row();
    w.close();
  }

  std::ostringstream os;
  os << "loop " << name << "\nword " << word.str() << "\nnormal_form " << normal_form(word).str()
     << "\nclosure_permutation " << strands.closure[0] << ' ' << strands.closure[1] << ' ' << strands.closure[2]
     << "\ncomponents " << inv.component_count << "\nexponent_sum " << inv.exponent_sum << "\nnu_total "
     << vort.nu_total << '\n';
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      os << "nu_" << i + 1 << j + 1 << ' ' << format_number(vort.nu[i][j]) << (vort.pair_closed(i, j) ? "" : " (pair moved)")
         << '\n';
  write_text(output(cfg, "_" + name + "_word.txt"), os.str());

  if (cfg.flag("svg")) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t k = 0; k < strands.size(); ++k)
      for (int j = 0; j < 3; ++j) lo = std::min(lo, strands.key(k, j)), hi = std::max(hi, strands.key(k, j));
    const double pad = 0.05 * (hi - lo) + 1e-12;
    SvgPlot svg(0, 1, lo - pad, hi + pad, 720, 420);
    svg.title("Strands of loop " + name + ": " + word.str());
    svg.axis_labels("s", "projected eigenvalue");
    for (int j = 0; j < 3; ++j) {
      std::vector<double> y;
      for (std::size_t k = 0; k < strands.size(); ++k) y.push_back(strands.key(k, j));
      svg.polyline(strands.s, y, kLabelColors[j], 1.5, "strand");
    }
    for (const auto& c : crossings) {
      // marker at the interpolated key of the crossing pair
      const auto it = std::lower_bound(strands.s.begin(), strands.s.end(), c.s);
      const std::size_t k = std::clamp<std::size_t>(it - strands.s.begin(), 1, strands.size() - 1);
      std::array<double, 3> keys{};
      for (int j = 0; j < 3; ++j) keys[j] = strands.key(k, j);
      std::sort(keys.begin(), keys.end());
      const int lower = std::abs(c.letter) - 1;
      svg.marker(c.s, 0.5 * (keys[lower] + keys[lower + 1]), c.letter > 0 ? "#000" : "#fff", "crossing", 4);
    }
    svg.save(output(cfg, "_" + name + ".svg"));
  }

  log << name << ": " << word.str() << "  (nu_total = " << vort.nu_total << ", components = " << inv.component_count
      << ")\nwrote " << strand_path.string() << '\n';
}

void run_encircle(const RunConfig& cfg, std::ostream& log) {
  const double kappa = positive(cfg, "kappa");
  const double g = cfg.number("g"), omega_m = cfg.number("omega_m"), a = cfg.number("a");
  const int n_t = positive_int(cfg, "n_t"), n_o = positive_int(cfg, "n_omega0");
  const double t_min = positive(cfg, "t_min"), t_max = positive(cfg, "t_max");
  if (t_max < t_min) throw ValidationError("t_max must not be below t_min");
  const double o_lo = cfg.number("omega0_min"), o_hi = cfg.number("omega0_max");
  if (o_hi < o_lo || o_hi > omega_m) throw ValidationError("need omega0_min <= omega0_max <= omega_m");
  const std::string dirs = cfg.string("directions");
  std::vector<Direction> directions;
  if (dirs == "both") directions = {Direction::CW, Direction::CCW};
  else directions = {parse_direction(dirs)};

  FidelityOptions opt;
  opt.steps_per_period = positive_int(cfg, "steps_per_period", 1000);
  const auto t_grid = linspace(t_min, t_max, n_t);
  const auto o_grid = linspace(o_lo, o_hi, n_o);
  const FidelityMap map = fidelity_map(g, omega_m, a, kappa, t_grid, o_grid, directions, opt);

  int failures = 0;
  for (std::size_t d = 0; d < directions.size(); ++d) {
    const std::string dn = to_string(directions[d]);
    CsvWriter w(output(cfg, "_" + dn + ".csv"), "fidelity-map", cfg.units(),
                {"T", "omega0", "direction", "F1", "F2", "F3", "ep_count", "argmax", "error"});
    for (int it = 0; it < n_t; ++it)
      for (int io = 0; io < n_o; ++io) {
        const FidelityCell& c = map.at(d, it, io);
        w.cell(t_grid[it]).cell(o_grid[io]).cell(dn);
        for (double f : c.f) w.cell(c.ok() ? f : std::numeric_limits<double>::quiet_NaN());
        w.cell(map.ep_count[io]).cell(c.argmax()).cell(c.error);
        w.end_row();
        failures += !c.ok();
      }
    w.close();

    for (int which : {0, 2}) {
      const double dx = n_o > 1 ? (o_hi - o_lo) / (n_o - 1) : 1, dy = n_t > 1 ? (t_max - t_min) / (n_t - 1) : 1;
      SvgPlot svg(o_lo - dx / 2, o_hi + dx / 2, t_min - dy / 2, t_max + dy / 2, 640, 560);
      svg.title("F" + std::to_string(which + 1) + " after one " + dn + " loop");
      svg.axis_labels("omega0", "T");
      for (int it = 0; it < n_t; ++it)
        for (int io = 0; io < n_o; ++io) {
          const FidelityCell& c = map.at(d, it, io);
          svg.cell(o_grid[io] - dx / 2, o_grid[io] + dx / 2, t_grid[it] - dy / 2, t_grid[it] + dy / 2,
                   ramp_color(c.ok() ? c.f[which] : std::numeric_limits<double>::quiet_NaN()));
        }
      for (int io = 0; io < n_o; ++io)
        if (io == 0 || map.ep_count[io] != map.ep_count[io - 1])
          svg.text(o_grid[io] - dx / 2, t_max + dy / 2, "EPs: " + std::to_string(map.ep_count[io]));
      svg.legend({{"0", ramp_color(0)}, {"0.5", ramp_color(0.5)}, {"1", ramp_color(1)}});
      svg.save(output(cfg, "_F" + std::to_string(which + 1) + "_" + dn + ".svg"));
    }
  }

  ordered_json summary;
  summary["units"] = to_string(cfg.units());
  summary["ep_omegas"] = slice_ep_omegas(g, kappa);
  summary["ep_count"] = map.ep_count;
  summary["failed_cells"] = failures;
  if (directions.size() == 2) {
    bool cw3 = false, ccw1 = false;
    for (int io = 0; io < n_o; ++io) {
      if (map.ep_count[io] != 0) continue;
      for (int it = 0; it < n_t; ++it) {
        cw3 = cw3 || map.at(0, it, io).argmax() == 3;
        ccw1 = ccw1 || map.at(1, it, io).argmax() == 1;
      }
    }
    summary["chirality"] = cw3 && ccw1;
    log << "chirality flag: " << (cw3 && ccw1 ? "raised" : "not raised") << '\n';
  }
  write_json(output(cfg, "_summary.json"), summary);

  if (cfg.has("trajectory_period") || cfg.has("trajectory_omega0")) {
    if (!cfg.has("trajectory_period") || !cfg.has("trajectory_omega0"))
      throw ValidationError("a trajectory needs both trajectory_period and trajectory_omega0");
    const RectangleLoopSchedule loop{g,     cfg.number("trajectory_omega0"), omega_m, a, kappa,
                                     cfg.number("trajectory_period"), parse_direction(cfg.string("trajectory_direction"))};
    loop.validate();
    const auto es = eigensystem(loop.start());
    if (es.defective()) throw DegenerateEigenbasis("trajectory start point is exceptional");
    const Trajectory tr = evolve(loop, es.right[1], loop.period / opt.steps_per_period);
    CsvWriter w(output(cfg, "_trajectory.csv"), "trajectory", cfg.units(),
                {"t", "delta_ef", "omega", "p_e", "p_f", "p_g1", "norm2", "F1", "F2", "F3"});
    for (std::size_t k = 0; k < tr.times.size(); k += 8) {
      const Params p = loop.at(tr.times[k]);
      std::array<double, 3> f;
      try {
        f = overlaps(tr.states[k], p);
      } catch (const NumericError&) {
        f.fill(std::numeric_limits<double>::quiet_NaN());
      }
      const auto& s = tr.states[k];
      w.cell(tr.times[k]).cell(p.delta_ef).cell(p.omega).cell(std::norm(s(0))).cell(std::norm(s(1)));
      w.cell(std::norm(s(2))).cell(tr.norms[k]).cell(f[0]).cell(f[1]).cell(f[2]);
      w.end_row();
    }
    w.close();
    log << "trajectory error estimate " << format_number(tr.error_estimate) << '\n';
  }
  log << "fidelity maps written (" << failures << " failed cells)\n";
}

void run_fit(const RunConfig& cfg, std::ostream& log) {
  if (cfg.string("data").empty()) throw ValidationError("fit needs 'data' (observation CSV path)");
  const double kappa = cfg.number("kappa");
  if (!(kappa >= 0)) throw ValidationError("'kappa' must be non-negative");
  const auto guess = cfg.numbers("guess");
  if (guess.size() != 3) throw ValidationError("'guess' must be [delta_ef, omega, g]");
  const StateVector psi0 = parse_state(cfg.string("psi0"));
  const ObservationSet obs = read_observations(cfg.string("data"));

  FitOptions opt;
  opt.max_iterations = positive_int(cfg, "max_iterations");
  const FitResult r = fit_parameters(obs, kappa, psi0, FitVector(guess[0], guess[1], guess[2]), opt);

  const auto json_path = output(cfg, "_result.json");
  write_json(json_path, fit_result_json(r, cfg.units()));

  const Params p = with_kappa(r.params, kappa);
  const auto model = model_populations(p, psi0, obs.times, substep_plan(obs.times, default_max_dt(p)));
  CsvWriter w(output(cfg, "_residuals.csv"), "fit-residuals", cfg.units(),
              {"time", "P_g_obs", "P_e_obs", "P_f_obs", "P_g_fit", "P_e_fit", "P_f_fit"});
  for (std::size_t k = 0; k < obs.size(); ++k) {
    w.cell(obs.times[k]);
    for (double v : obs.observed[k]) w.cell(v);
    for (double v : model[k]) w.cell(v);
    w.end_row();
  }
  w.close();

  log << "fit: delta_ef = " << format_number(r.params(0)) << ", omega = " << format_number(r.params(1))
      << ", g = " << format_number(r.params(2)) << ", rms = " << format_number(r.residual_rms)
      << (r.converged ? "" : " (not converged)") << '\n';
  if (r.ill_posed) log << "warning: ill-posed fit (Jacobian condition " << format_number(r.jacobian_condition) << ")\n";
  log << "wrote " << json_path.string() << '\n';
}

void run_synth(const RunConfig& cfg, std::ostream& log) {
  const auto truth = cfg.numbers("truth");
  if (truth.size() != 3) throw ValidationError("'truth' must be [delta_ef, omega, g]");
  const double kappa = cfg.number("kappa");
  if (!(kappa >= 0)) throw ValidationError("'kappa' must be non-negative");
  const double t_max = positive(cfg, "t_max");
  const int n = positive_int(cfg, "n_times");
  const double noise = cfg.number("noise_sd");
  if (!(noise >= 0)) throw ValidationError("'noise_sd' must be non-negative");
  const long long seed = cfg.integer("seed");
  if (seed < 0) throw ValidationError("'seed' must be non-negative");

  std::vector<double> times;
  for (int k = 1; k <= n; ++k) times.push_back(t_max * k / n);
  const ObservationSet obs = simulate_observations(FitVector(truth[0], truth[1], truth[2]), kappa,
                                                   parse_state(cfg.string("psi0")), times, noise,
                                                   static_cast<std::uint64_t>(seed));
  const auto path = output(cfg, ".csv");
  write_observations(path, obs, cfg.units());
  log << "wrote " << n << " observations to " << path.string() << '\n';
}

}  // namespace ep3::cli
