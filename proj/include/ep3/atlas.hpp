#pragma once

// Exceptional-point atlas on the anti-PT surface delta_ef = 0.
//
// With lambda = -i mu the characteristic polynomial becomes the real cubic
//   mu^3 - (kappa/2) mu^2 + (g^2 + omega^2) mu - kappa omega^2 / 2,
// whose Cardano discriminant decides the phase of a point.

#include <array>
#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "ep3/braid.hpp"
#include "ep3/control_loop.hpp"
#include "ep3/spectral.hpp"

namespace ep3 {

enum class SpectralPhase { AllImaginary, Exceptional, ComplexPair };

const char* to_string(SpectralPhase p);

struct RealCubic {
  double a2, a1, a0;  // mu^3 + a2 mu^2 + a1 mu + a0
  double p, q;        // depressed cubic t^3 + p t + q
  double discriminant;  // (q/2)^2 + (p/3)^3
};

RealCubic mu_cubic(double omega, double g, double kappa);

/// Tolerance for "exactly on an arc": 1e-12 * s^6, s = max(kappa, |omega|, |g|).
double phase_epsilon(double omega, double g, double kappa);

SpectralPhase classify_phase(double omega, double g, double kappa);

struct EP3Location {
  double omega_star;
  double g_star;
  std::complex<double> lambda_star;
};

EP3Location ep3_location(double kappa);

/// Lower and upper EP2 g at fixed omega, or nullopt for omega at or beyond
/// the cusp (no bracketed sign change).
std::optional<std::pair<double, double>> ep2_row(double omega, double kappa);

struct ArcPoint {
  double omega, g;
};

struct EP2Arcs {
  std::vector<ArcPoint> lower;  // "left" branch, met first when g increases
  std::vector<ArcPoint> upper;  // "right" branch
};

EP2Arcs trace_ep2_arcs(double kappa, int n_points);

/// Omega coordinates (both signs) where the slice g = const meets the EP2
/// arcs of the delta_ef = 0 plane, ascending. Empty if the slice misses them.
std::vector<double> slice_ep_omegas(double g, double kappa);

struct ExceptionalLine {
  double omega;  // always 0
  double g;      // +-kappa/4; the line runs over all delta_ef
};

std::array<ExceptionalLine, 2> isolated_exceptional_lines(double kappa);

struct GridBounds {
  double omega_lo, omega_hi, g_lo, g_hi;
};

struct PhaseDiagram {
  GridBounds bounds;
  int n_omega, n_g;
  double kappa;
  std::vector<SpectralPhase> cells;  // row-major, index = i_g * n_omega + i_omega
  EP2Arcs arcs;
  EP3Location ep3;

  double omega_at(int i) const;
  double g_at(int j) const;
  SpectralPhase at(int i_omega, int j_g) const { return cells[static_cast<std::size_t>(j_g) * n_omega + i_omega]; }
};

PhaseDiagram phase_diagram(const GridBounds& bounds, int n_omega, int n_g, double kappa, int arc_points = 64);

/// Pairwise vorticities nu_ij = -(1/2 pi) * accumulated arg(lambda_i - lambda_j)
/// along the loop with continuously labelled strands.
///
/// nu_ij is a half-integer for pairs the closure permutation maps onto
/// themselves; for pairs moved to another pair it is a real number and only
/// the sum over the pair orbit is quantised. nu_total is always an integer.
struct VorticityReport {
  std::array<std::array<double, 3>, 3> nu{};
  double nu_total_raw = 0;
  int nu_total = 0;
  Perm3 closure{identity_perm};

  /// True when {i, j} is mapped onto itself by the closure permutation.
  bool pair_closed(int i, int j) const;
};

VorticityReport vorticity(const ControlLoop& loop, int n_samples);

}  // namespace ep3
