#include "ep3/atlas.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "ep3/strands.hpp"

namespace ep3 {

namespace {

void require_kappa(double kappa) {
  if (!std::isfinite(kappa) || !(kappa > 0)) throw InvalidParameter("kappa must be positive and finite");
}

double disc(double omega, double g, double kappa) { return mu_cubic(omega, g, kappa).discriminant; }

double arc_tolerance(double kappa) { return 1e-10 * std::pow(kappa, 6); }

// Root of an increasing (or decreasing) function on [lo, hi], bisected until
// the bracket stops shrinking.
template <typename F>
double bisect_monotone(F&& f, double target, double lo, double hi, bool increasing) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    ((f(mid) < target) == increasing ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// On an EP2 of the delta_ef = 0 plane the mu-cubic has a double root m and a
// simple root kappa/2 - 2m, which gives
//   omega^2 = m^2 (1 - 4m/kappa),   g^2 = m (kappa - 2m)^2 / kappa.
// Both are monotone on (0, kappa/6) (lower arc) and on (kappa/6, kappa/4)
// (upper arc); m = kappa/6 is the EP3.
double arc_omega2(double m, double kappa) { return m * m * (1 - 4 * m / kappa); }
double arc_g2(double m, double kappa) { return m * (kappa - 2 * m) * (kappa - 2 * m) / kappa; }

}  // namespace

const char* to_string(SpectralPhase p) {
  switch (p) {
    case SpectralPhase::AllImaginary: return "AllImaginary";
    case SpectralPhase::Exceptional: return "Exceptional";
    case SpectralPhase::ComplexPair: return "ComplexPair";
  }
  return "?";
}

RealCubic mu_cubic(double omega, double g, double kappa) {
  RealCubic c{};
  c.a2 = -kappa / 2;
  c.a1 = g * g + omega * omega;
  c.a0 = -kappa * omega * omega / 2;
  c.p = c.a1 - c.a2 * c.a2 / 3;
  c.q = 2 * c.a2 * c.a2 * c.a2 / 27 - c.a2 * c.a1 / 3 + c.a0;
  c.discriminant = (c.q / 2) * (c.q / 2) + (c.p / 3) * (c.p / 3) * (c.p / 3);
  return c;
}

double phase_epsilon(double omega, double g, double kappa) {
  const double s = std::max({kappa, std::abs(omega), std::abs(g)});
  return 1e-12 * std::pow(s, 6);
}

SpectralPhase classify_phase(double omega, double g, double kappa) {
  require_kappa(kappa);
  if (!std::isfinite(omega) || !std::isfinite(g)) throw InvalidParameter("omega and g must be finite");
  const double d = disc(omega, g, kappa);
  const double eps = phase_epsilon(omega, g, kappa);
  if (d < -eps) return SpectralPhase::AllImaginary;
  if (d > eps) return SpectralPhase::ComplexPair;
  return SpectralPhase::Exceptional;
}

EP3Location ep3_location(double kappa) {
  require_kappa(kappa);
  const double omega = kappa * std::pow(3.0, -1.5) / 2;
  const double g = kappa * std::pow(2.0 / 3.0, 1.5) / 2;
  return {omega, g, {0.0, -kappa / 6}};
}

std::optional<std::pair<double, double>> ep2_row(double omega, double kappa) {
  require_kappa(kappa);
  if (!std::isfinite(omega)) throw InvalidParameter("omega must be finite");
  const double w2 = omega * omega;
  const double m3 = kappa / 6;
  if (w2 >= arc_omega2(m3, kappa)) return std::nullopt;
  const auto h = [&](double m) { return arc_omega2(m, kappa); };
  const double m_lo = bisect_monotone(h, w2, 0.0, m3, true);
  const double m_hi = bisect_monotone(h, w2, m3, kappa / 4, false);
  const auto g_of = [&](double m) { return std::sqrt(std::max(0.0, kappa * m - 3 * m * m - w2)); };
  return std::make_pair(g_of(m_lo), g_of(m_hi));
}

EP2Arcs trace_ep2_arcs(double kappa, int n_points) {
  require_kappa(kappa);
  if (n_points < 8) throw InvalidParameter("arc tracing needs at least 8 points per branch");
  const EP3Location ep3 = ep3_location(kappa);
  EP2Arcs arcs;
  for (int k = 1; k < n_points; ++k) {
    const double omega = ep3.omega_star * k / n_points;
    const auto row = ep2_row(omega, kappa);
    if (!row) break;
    arcs.lower.push_back({omega, row->first});
    arcs.upper.push_back({omega, row->second});
  }
  arcs.lower.push_back({ep3.omega_star, ep3.g_star});
  arcs.upper.push_back({ep3.omega_star, ep3.g_star});
  const double tol = arc_tolerance(kappa);
  for (const auto* branch : {&arcs.lower, &arcs.upper})
    for (const auto& pt : *branch)
      if (std::abs(disc(pt.omega, pt.g, kappa)) >= tol)
        throw NumericError("EP2 arc point failed the discriminant tolerance");
  return arcs;
}

std::vector<double> slice_ep_omegas(double g, double kappa) {
  require_kappa(kappa);
  if (!std::isfinite(g)) throw InvalidParameter("g must be finite");
  const double g2 = g * g;
  const double m3 = kappa / 6;
  std::vector<double> out;
  if (g2 == 0 || g2 >= arc_g2(m3, kappa)) return out;
  const auto gm = [&](double m) { return arc_g2(m, kappa); };
  std::vector<double> roots{bisect_monotone(gm, g2, 0.0, m3, true)};
  if (g2 > arc_g2(kappa / 4, kappa)) roots.push_back(bisect_monotone(gm, g2, m3, kappa / 4, false));
  for (double m : roots) {
    const double w = std::sqrt(arc_omega2(m, kappa));
    out.push_back(w);
    out.push_back(-w);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::array<ExceptionalLine, 2> isolated_exceptional_lines(double kappa) {
  require_kappa(kappa);
  return {ExceptionalLine{0.0, kappa / 4}, ExceptionalLine{0.0, -kappa / 4}};
}

double PhaseDiagram::omega_at(int i) const {
  return n_omega == 1 ? bounds.omega_lo
                      : bounds.omega_lo + (bounds.omega_hi - bounds.omega_lo) * i / (n_omega - 1);
}

double PhaseDiagram::g_at(int j) const {
  return n_g == 1 ? bounds.g_lo : bounds.g_lo + (bounds.g_hi - bounds.g_lo) * j / (n_g - 1);
}

PhaseDiagram phase_diagram(const GridBounds& bounds, int n_omega, int n_g, double kappa, int arc_points) {
  require_kappa(kappa);
  if (n_omega <= 0 || n_g <= 0) throw ValidationError("phase diagram resolution must be positive");
  if (!std::isfinite(bounds.omega_lo) || !std::isfinite(bounds.omega_hi) || !std::isfinite(bounds.g_lo) ||
      !std::isfinite(bounds.g_hi) || bounds.omega_lo > bounds.omega_hi || bounds.g_lo > bounds.g_hi)
    throw ValidationError("phase diagram bounds must be finite and ordered");

  PhaseDiagram pd{bounds, n_omega, n_g, kappa, {}, {}, ep3_location(kappa)};
  pd.cells.resize(static_cast<std::size_t>(n_omega) * n_g);

  const unsigned workers = std::max(1u, std::min(std::thread::hardware_concurrency(), 16u));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int j = static_cast<int>(w); j < n_g; j += static_cast<int>(workers))
        for (int i = 0; i < n_omega; ++i)
          pd.cells[static_cast<std::size_t>(j) * n_omega + i] = classify_phase(pd.omega_at(i), pd.g_at(j), kappa);
    });
  }
  for (auto& t : pool) t.join();

  pd.arcs = trace_ep2_arcs(kappa, arc_points);
  return pd;
}

bool VorticityReport::pair_closed(int i, int j) const {
  const int a = closure[i], b = closure[j];
  return (a == i && b == j) || (a == j && b == i);
}

VorticityReport vorticity(const ControlLoop& loop, int n_samples) {
  const StrandSet strands = sample_strands(loop, n_samples);
  if (strands.min_gap <= 1e-6 * strands.rate_scale)
    throw DegenerateLoop("loop touches an exceptional point", 0.0, 1.0);

  VorticityReport rep;
  rep.closure = strands.closure;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      double acc = 0;
      for (std::size_t k = 1; k < strands.size(); ++k) {
        const auto d0 = strands.values[k - 1][i] - strands.values[k - 1][j];
        const auto d1 = strands.values[k][i] - strands.values[k][j];
        acc += std::arg(d1 / d0);
      }
      const double nu = -acc / (2 * std::numbers::pi);
      rep.nu[i][j] = rep.nu[j][i] = nu;
      rep.nu_total_raw += 2 * nu;
    }
  }
  rep.nu_total = static_cast<int>(std::lround(rep.nu_total_raw));
  if (std::abs(rep.nu_total_raw - rep.nu_total) > 1e-6)
    throw NumericError("total vorticity is not an integer; loop sampling too coarse");
  return rep;
}

}  // namespace ep3
