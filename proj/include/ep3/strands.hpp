#pragma once

// Eigenvalue strands along control loops and their braid words.

#include <complex>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "ep3/braid.hpp"
#include "ep3/control_loop.hpp"

namespace ep3 {

/// Strands are ordered by the projection Re(lambda e^{-i angle}); over/under
/// is read from Im(lambda e^{-i angle}). The default axis points along
/// decreasing Im lambda, tilted by 0.25 rad. On the delta_ef = 0 plane the
/// anti-PT symmetry puts every eigenvalue on the imaginary axis inside the
/// AllImaginary lens and gives the complex pair equal Im outside it, so
/// neither the bare Re nor the bare Im ordering is generic there.
inline constexpr double kDefaultProjectionAngle = -std::numbers::pi / 2 - 0.25;

struct StrandOptions {
  double projection_angle = kDefaultProjectionAngle;
  int max_depth = 20;
  double ambiguity_ratio = 10.0;
};

struct StrandSet {
  std::vector<double> s;
  std::vector<std::array<std::complex<double>, 3>> values;
  /// Strand i ends on the start value of strand closure[i]. Strands are
  /// labelled at s = 0 by ascending projection, so this is also the
  /// permutation of positions.
  Perm3 closure{identity_perm};
  double projection_angle = kDefaultProjectionAngle;
  double min_gap = 0;      // smallest pairwise eigenvalue distance seen
  double rate_scale = 1;   // largest rate scale seen along the loop

  std::size_t size() const { return s.size(); }
  double key(std::size_t k, int strand) const;
  double depth(std::size_t k, int strand) const;
};

StrandSet sample_strands(const ControlLoop& loop, int n_initial, const StrandOptions& opt = {});

struct Crossing {
  double s;    // interpolated crossing parameter
  int letter;  // +-1, +-2
};

std::vector<Crossing> find_crossings(const StrandSet& strands);
BraidWord extract_braid_word(const StrandSet& strands);

/// The five base-point-sharing loops "red", "blue", "green", "brown",
/// "purple" (red and blue encircle the lower and upper EP2 branch of the
/// delta_ef = 0 lens; the others are concatenations, first-listed first).
std::map<std::string, ControlLoop> canonical_loops(double kappa);
ControlLoop canonical_loop(const std::string& name, double kappa);

}  // namespace ep3
